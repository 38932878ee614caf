#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mixintent/archive.hpp"
#include "mixintent/classifiers.hpp"

namespace mixintent::detail {

struct Prepared {
  std::vector<std::string> labels;  // only labels present in y
  std::vector<std::size_t> y;       // indices into labels
};

// Validates shapes and finiteness and compacts the label set. With
// `need_two`, fewer than two distinct labels is a DegenerateError.
Prepared prepare(const Matrix& x, std::span<const std::size_t> y, const std::vector<std::string>& labels,
                 bool need_two);

std::unique_ptr<Classifier> load_linear_svm(ArchiveReader& in, std::vector<std::string> labels, std::size_t dim);
std::unique_ptr<Classifier> load_kernel_svm(ArchiveReader& in, std::vector<std::string> labels, std::size_t dim);
std::unique_ptr<Classifier> load_logreg(ArchiveReader& in, std::vector<std::string> labels, std::size_t dim);
std::unique_ptr<Classifier> load_knn(ArchiveReader& in, std::vector<std::string> labels, std::size_t dim);
std::unique_ptr<Classifier> load_cosine_1nn(ArchiveReader& in, std::vector<std::string> labels, std::size_t dim);
std::unique_ptr<Classifier> load_decision_tree(ArchiveReader& in, std::vector<std::string> labels, std::size_t dim);
std::unique_ptr<Classifier> load_random_forest(ArchiveReader& in, std::vector<std::string> labels, std::size_t dim);
std::unique_ptr<Classifier> load_ffnn(ArchiveReader& in, std::vector<std::string> labels, std::size_t dim);

// Linear scores W x + b for a C x (d + 1) parameter block.
DenseVector linear_scores(std::span<const double> params, std::size_t n_classes, std::span<const double> x);

// Row-major softmax in place; stable under large inputs.
void softmax(std::span<double> z);

}  // namespace mixintent::detail
