#include <algorithm>
#include <cmath>

#include "internal.hpp"
#include "mixintent/error.hpp"
#include "mixintent/simd.hpp"

namespace mixintent {

void TrainConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ArgumentError(std::string("config: ") + name + " must be positive");
  };
  auto nonzero = [](std::size_t v, const char* name) {
    if (v == 0) throw ArgumentError(std::string("config: ") + name + " must be positive");
  };
  positive(lambda, "lambda");
  positive(learning_rate, "learning_rate");
  positive(lr_decay, "lr_decay");
  positive(smo_tolerance, "smo_tolerance");
  positive(nn_learning_rate, "nn_learning_rate");
  positive(nn_lr_decay, "nn_lr_decay");
  if (nn_momentum < 0.0 || nn_momentum >= 1.0) throw ArgumentError("config: nn_momentum must lie in [0, 1)");
  nonzero(epochs, "epochs");
  nonzero(smo_max_passes, "smo_max_passes");
  nonzero(logreg_iterations, "logreg_iterations");
  nonzero(k, "k");
  nonzero(trees, "trees");
  nonzero(max_depth, "max_depth");
  if (min_samples_split < 2) throw ArgumentError("config: min_samples_split must be at least 2");
  nonzero(hidden1, "hidden1");
  nonzero(hidden2, "hidden2");
  nonzero(nn_epochs, "nn_epochs");
  nonzero(batch_size, "batch_size");
  nonzero(patience, "patience");
  if (!(validation_fraction > 0.0 && validation_fraction <= 0.5)) {
    throw ArgumentError("config: validation_fraction must lie in (0, 0.5]");
  }
}

std::size_t argmax(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

std::size_t Classifier::predict_index(std::span<const double> x) const {
  const DenseVector s = predict_scores(x);
  return argmax(s.span());
}

void Classifier::check_input(std::span<const double> x) const { require_same_size(x.size(), dim_, "classifier input"); }

void Classifier::save(ArchiveWriter& out) const {
  out.write("classifier", std::string_view(kind()));
  out.write("labels", labels_);
  out.write("dim", static_cast<std::uint64_t>(dim_));
  save_params(out);
}

std::unique_ptr<Classifier> load_classifier(ArchiveReader& in) {
  const std::string kind = in.read_string("classifier");
  std::vector<std::string> labels = in.read_strings("labels");
  const std::size_t dim = in.read_size("dim");
  using namespace detail;
  if (kind == "LinearSVM") return load_linear_svm(in, std::move(labels), dim);
  if (kind == "SVM") return load_kernel_svm(in, std::move(labels), dim);
  if (kind == "LogisticRegression") return load_logreg(in, std::move(labels), dim);
  if (kind == "KNeighbors") return load_knn(in, std::move(labels), dim);
  if (kind == "CosineSimilarity") return load_cosine_1nn(in, std::move(labels), dim);
  if (kind == "DecisionTree") return load_decision_tree(in, std::move(labels), dim);
  if (kind == "RandomForest") return load_random_forest(in, std::move(labels), dim);
  if (kind == "NeuralNetwork") return load_ffnn(in, std::move(labels), dim);
  throw ParseError("unknown classifier kind '" + kind + "'");
}

namespace {
constexpr std::pair<ClassifierKind, const char*> kNames[] = {
    {ClassifierKind::LinearSvm, "LinearSVM"},       {ClassifierKind::LogReg, "LogisticRegression"},
    {ClassifierKind::Knn, "KNeighbors"},            {ClassifierKind::RandomForest, "RandomForest"},
    {ClassifierKind::KernelSvm, "SVM"},             {ClassifierKind::Ffnn, "NeuralNetwork"},
    {ClassifierKind::Cosine1nn, "CosineSimilarity"}, {ClassifierKind::DecisionTree, "DecisionTree"},
};
}  // namespace

ClassifierKind parse_classifier_kind(std::string_view name) {
  for (const auto& [kind, n] : kNames) {
    if (name == n) return kind;
  }
  throw ArgumentError("unknown classifier '" + std::string(name) + "'");
}

std::string classifier_name(ClassifierKind kind) {
  for (const auto& [k, n] : kNames) {
    if (k == kind) return n;
  }
  return "?";
}

std::unique_ptr<Classifier> train_classifier(ClassifierKind kind, const Matrix& x, std::span<const std::size_t> y,
                                             const std::vector<std::string>& labels, const TrainConfig& cfg) {
  switch (kind) {
    case ClassifierKind::LinearSvm: return train_linear_svm(x, y, labels, cfg);
    case ClassifierKind::KernelSvm: return train_kernel_svm(x, y, labels, cfg);
    case ClassifierKind::LogReg: return train_logreg(x, y, labels, cfg);
    case ClassifierKind::Knn: return train_knn(x, y, labels, cfg);
    case ClassifierKind::DecisionTree: return train_decision_tree(x, y, labels, cfg);
    case ClassifierKind::RandomForest: return train_random_forest(x, y, labels, cfg);
    case ClassifierKind::Ffnn: return train_ffnn(x, y, labels, cfg);
    case ClassifierKind::Cosine1nn: return train_cosine_1nn(x, y, labels, cfg);
  }
  throw ArgumentError("unknown classifier kind");
}

namespace detail {

Prepared prepare(const Matrix& x, std::span<const std::size_t> y, const std::vector<std::string>& labels,
                 bool need_two) {
  require_same_size(x.rows(), y.size(), "training rows vs labels");
  if (x.rows() == 0) throw ArgumentError("empty training set");
  if (x.cols() == 0) throw DimensionError("training vectors have dimension 0");
  require_finite(x.flat(), "training matrix");
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (!(labels[i - 1] < labels[i])) throw ArgumentError("label list must be sorted and unique");
  }
  std::vector<char> present(labels.size(), 0);
  for (std::size_t v : y) {
    if (v >= labels.size()) throw ArgumentError("label index " + std::to_string(v) + " out of range");
    present[v] = 1;
  }
  Prepared p;
  std::vector<std::size_t> remap(labels.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (present[i]) {
      remap[i] = p.labels.size();
      p.labels.push_back(labels[i]);
    }
  }
  if (need_two && p.labels.size() < 2) {
    throw DegenerateError("training labels contain a single class ('" + p.labels.front() + "')");
  }
  p.y.reserve(y.size());
  for (std::size_t v : y) p.y.push_back(remap[v]);
  return p;
}

DenseVector linear_scores(std::span<const double> params, std::size_t n_classes, std::span<const double> x) {
  const std::size_t d = x.size();
  DenseVector out(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    const auto w = params.subspan(c * (d + 1), d);
    out[c] = simd::dot(w, x) + params[c * (d + 1) + d];
  }
  return out;
}

void softmax(std::span<double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) sum += (v = std::exp(v - m));
  for (double& v : z) v /= sum;
}

}  // namespace detail
}  // namespace mixintent
