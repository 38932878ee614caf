#include <algorithm>
#include <utility>

#include "internal.hpp"
#include "mixintent/error.hpp"
#include "mixintent/simd.hpp"

namespace mixintent {
namespace {

class Knn final : public Classifier {
 public:
  Knn(std::vector<std::string> labels, Matrix x, std::vector<std::size_t> y, std::size_t k)
      : Classifier(std::move(labels), x.cols()), x_(std::move(x)), y_(std::move(y)), k_(k) {
    require_same_size(x_.rows(), y_.size(), "knn rows");
    if (k_ == 0 || k_ > x_.rows()) {
      throw ArgumentError("knn: K = " + std::to_string(k_) + " exceeds " + std::to_string(x_.rows()) +
                          " training points");
    }
  }

  // Votes among the K nearest plus a bonus below 1 that favors the label of
  // the nearest neighbor, so argmax breaks vote ties by proximity.
  DenseVector predict_scores(std::span<const double> x) const override {
    check_input(x);
    std::vector<std::pair<double, std::size_t>> d(x_.rows());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = {simd::squared_distance(x_.row(i), x), i};
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k_), d.end());
    DenseVector scores(labels().size());
    std::vector<char> seen(labels().size(), 0);
    const double denom = static_cast<double>(k_ + 1);
    for (std::size_t r = 0; r < k_; ++r) {
      const std::size_t l = y_[d[r].second];
      scores[l] += 1.0;
      if (!seen[l]) {
        seen[l] = 1;
        scores[l] += static_cast<double>(k_ - r) / denom;
      }
    }
    return scores;
  }
  std::string kind() const override { return "KNeighbors"; }

 protected:
  void save_params(ArchiveWriter& out) const override {
    out.write("k", static_cast<std::uint64_t>(k_));
    out.write("points", x_);
    out.write("targets", std::span<const std::size_t>(y_));
  }

 private:
  Matrix x_;
  std::vector<std::size_t> y_;
  std::size_t k_;
};

class Cosine1nn final : public Classifier {
 public:
  Cosine1nn(std::vector<std::string> labels, Matrix x, std::vector<std::size_t> y)
      : Classifier(std::move(labels), x.cols()), x_(std::move(x)), y_(std::move(y)) {
    require_same_size(x_.rows(), y_.size(), "cosine rows");
  }

  // Best similarity reached by each label's training points.
  DenseVector predict_scores(std::span<const double> x) const override {
    check_input(x);
    DenseVector scores(labels().size(), -2.0);
    for (std::size_t i = 0; i < x_.rows(); ++i) {
      const double s = cosine_similarity(x_.row(i), x);
      if (s > scores[y_[i]]) scores[y_[i]] = s;
    }
    return scores;
  }

  // Ties go to the lower training index, not the lower label.
  std::size_t predict_index(std::span<const double> x) const override {
    check_input(x);
    std::size_t best = 0;
    double best_sim = -2.0;
    for (std::size_t i = 0; i < x_.rows(); ++i) {
      const double s = cosine_similarity(x_.row(i), x);
      if (s > best_sim) best_sim = s, best = i;
    }
    return y_[best];
  }
  std::string kind() const override { return "CosineSimilarity"; }

 protected:
  void save_params(ArchiveWriter& out) const override {
    out.write("points", x_);
    out.write("targets", std::span<const std::size_t>(y_));
  }

 private:
  Matrix x_;
  std::vector<std::size_t> y_;
};

}  // namespace

std::unique_ptr<Classifier> train_knn(const Matrix& x, std::span<const std::size_t> y,
                                      const std::vector<std::string>& labels, const TrainConfig& cfg) {
  cfg.validate();
  detail::Prepared p = detail::prepare(x, y, labels, false);
  return std::make_unique<Knn>(std::move(p.labels), x, std::move(p.y), cfg.k);
}

std::unique_ptr<Classifier> train_cosine_1nn(const Matrix& x, std::span<const std::size_t> y,
                                             const std::vector<std::string>& labels, const TrainConfig&) {
  detail::Prepared p = detail::prepare(x, y, labels, false);
  return std::make_unique<Cosine1nn>(std::move(p.labels), x, std::move(p.y));
}

namespace detail {

std::unique_ptr<Classifier> load_knn(ArchiveReader& in, std::vector<std::string> labels, std::size_t dim) {
  const std::size_t k = in.read_size("k");
  Matrix x = in.read_matrix("points");
  require_same_size(x.cols(), dim, "knn points");
  return std::make_unique<Knn>(std::move(labels), std::move(x), in.read_sizes("targets"), k);
}

std::unique_ptr<Classifier> load_cosine_1nn(ArchiveReader& in, std::vector<std::string> labels, std::size_t dim) {
  Matrix x = in.read_matrix("points");
  require_same_size(x.cols(), dim, "cosine points");
  return std::make_unique<Cosine1nn>(std::move(labels), std::move(x), in.read_sizes("targets"));
}

}  // namespace detail
}  // namespace mixintent
