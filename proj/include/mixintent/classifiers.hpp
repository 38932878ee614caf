#pragma once

// Fixed-vector classifiers. Every model consumes a dense n x d matrix and
// label indices into a sorted label list; labels that never occur in y are
// dropped, so a model only ever predicts labels it saw. Score ties resolve to
// the lowest label index, i.e. ascending label name.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mixintent/archive.hpp"
#include "mixintent/numerics.hpp"

namespace mixintent {

struct TrainConfig {
  double lambda = 1e-4;  // L2 strength shared by every regularized model
  std::uint64_t seed = 1;

  // Linear SVM: SGD, lr * decay^epoch.
  double learning_rate = 0.1;
  double lr_decay = 0.9;
  std::size_t epochs = 50;

  // Kernel SVM. gamma <= 0 means 1/d; svm_c <= 0 means 1/(n * lambda).
  double gamma = 0.0;
  double svm_c = 0.0;
  double smo_tolerance = 1e-3;
  std::size_t smo_max_passes = 1000;

  // Logistic regression: accelerated full-batch gradient descent.
  std::size_t logreg_iterations = 500;

  std::size_t k = 5;

  std::size_t trees = 100;
  std::size_t max_depth = 32;
  std::size_t min_samples_split = 2;
  std::size_t max_features = 0;  // 0 means ceil(sqrt(d))
  bool bootstrap = true;

  // Feed-forward network.
  std::size_t hidden1 = 128;
  std::size_t hidden2 = 128;
  double nn_learning_rate = 0.1;
  double nn_lr_decay = 0.97;
  double nn_momentum = 0.9;
  std::size_t nn_epochs = 50;
  std::size_t batch_size = 32;
  std::size_t patience = 5;
  double validation_fraction = 0.1;

  // Throws ArgumentError naming the first out-of-range field.
  void validate() const;
};

class Classifier {
 public:
  virtual ~Classifier() = default;

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t dim() const noexcept { return dim_; }

  // One real per label(); higher is more likely.
  virtual DenseVector predict_scores(std::span<const double> x) const = 0;
  virtual std::size_t predict_index(std::span<const double> x) const;
  const std::string& predict(std::span<const double> x) const { return labels_[predict_index(x)]; }

  virtual std::string kind() const = 0;
  void save(ArchiveWriter& out) const;

 protected:
  Classifier(std::vector<std::string> labels, std::size_t dim) : labels_(std::move(labels)), dim_(dim) {}
  void check_input(std::span<const double> x) const;
  virtual void save_params(ArchiveWriter& out) const = 0;

 private:
  std::vector<std::string> labels_;
  std::size_t dim_;
};

// Lowest index among the maxima.
std::size_t argmax(std::span<const double> scores);

std::unique_ptr<Classifier> load_classifier(ArchiveReader& in);

// y[i] indexes `labels`, which must be sorted ascending and unique.
std::unique_ptr<Classifier> train_linear_svm(const Matrix& x, std::span<const std::size_t> y,
                                             const std::vector<std::string>& labels, const TrainConfig& cfg);
std::unique_ptr<Classifier> train_kernel_svm(const Matrix& x, std::span<const std::size_t> y,
                                             const std::vector<std::string>& labels, const TrainConfig& cfg);
std::unique_ptr<Classifier> train_logreg(const Matrix& x, std::span<const std::size_t> y,
                                         const std::vector<std::string>& labels, const TrainConfig& cfg);
std::unique_ptr<Classifier> train_knn(const Matrix& x, std::span<const std::size_t> y,
                                      const std::vector<std::string>& labels, const TrainConfig& cfg);
std::unique_ptr<Classifier> train_decision_tree(const Matrix& x, std::span<const std::size_t> y,
                                                const std::vector<std::string>& labels, const TrainConfig& cfg);
std::unique_ptr<Classifier> train_random_forest(const Matrix& x, std::span<const std::size_t> y,
                                                const std::vector<std::string>& labels, const TrainConfig& cfg);
std::unique_ptr<Classifier> train_ffnn(const Matrix& x, std::span<const std::size_t> y,
                                       const std::vector<std::string>& labels, const TrainConfig& cfg);
std::unique_ptr<Classifier> train_cosine_1nn(const Matrix& x, std::span<const std::size_t> y,
                                             const std::vector<std::string>& labels, const TrainConfig& cfg = {});

enum class ClassifierKind { LinearSvm, KernelSvm, LogReg, Knn, DecisionTree, RandomForest, Ffnn, Cosine1nn };

// Grid row names: LinearSVM, SVM, LogisticRegression, KNeighbors,
// DecisionTree, RandomForest, NeuralNetwork, CosineSimilarity.
ClassifierKind parse_classifier_kind(std::string_view name);
std::string classifier_name(ClassifierKind kind);
std::unique_ptr<Classifier> train_classifier(ClassifierKind kind, const Matrix& x, std::span<const std::size_t> y,
                                             const std::vector<std::string>& labels, const TrainConfig& cfg);

// Objectives exposed for gradient checks. Parameters are row-major per
// class: [w_c (d values), b_c] for c in 0..C-1.
double linear_svm_objective(std::span<const double> params, const Matrix& x, std::span<const std::size_t> y,
                            std::size_t n_classes, double lambda, std::span<double> grad);
double logreg_objective(std::span<const double> params, const Matrix& x, std::span<const std::size_t> y,
                        std::size_t n_classes, double lambda, std::span<double> grad);
std::unique_ptr<Classifier> make_logreg(const std::vector<std::string>& labels, std::size_t dim,
                                        std::vector<double> params);

// Feed-forward network parameters flattened as W1 (d x h1), b1, W2 (h1 x h2),
// b2, W3 (h2 x C), b3.
struct FfnnShape {
  std::size_t input, hidden1, hidden2, classes;
  std::size_t size() const { return input * hidden1 + hidden1 + hidden1 * hidden2 + hidden2 + hidden2 * classes + classes; }
};
// Mean cross-entropy over `rows` plus lambda/2 * |weights|^2 (biases excluded).
double ffnn_objective(std::span<const double> params, const FfnnShape& shape, const Matrix& x,
                      std::span<const std::size_t> y, std::span<const std::size_t> rows, double lambda,
                      std::span<double> grad);
// He-normal hidden layers, zero output layer and biases.
std::vector<double> ffnn_initial_params(const FfnnShape& shape, std::uint64_t seed);
std::unique_ptr<Classifier> make_ffnn(const FfnnShape& shape, std::vector<double> params,
                                      const std::vector<std::string>& labels);

double gini_impurity(std::span<const double> class_counts);

}  // namespace mixintent
