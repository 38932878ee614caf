#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "internal.hpp"
#include "mixintent/error.hpp"
#include "mixintent/rng.hpp"

namespace mixintent {

double gini_impurity(std::span<const double> class_counts) {
  double total = 0.0, sumsq = 0.0;
  for (double c : class_counts) {
    total += c;
    sumsq += c * c;
  }
  return total == 0.0 ? 0.0 : 1.0 - sumsq / (total * total);
}

namespace {

constexpr std::size_t kLeaf = std::numeric_limits<std::size_t>::max();

struct Tree {
  std::vector<std::size_t> feature;  // kLeaf for leaves
  std::vector<double> threshold;     // x[feature] <= threshold goes left
  std::vector<std::size_t> left, right;
  Matrix value;                      // class proportions per node

  std::span<const double> leaf(std::span<const double> x) const {
    std::size_t n = 0;
    while (feature[n] != kLeaf) n = x[feature[n]] <= threshold[n] ? left[n] : right[n];
    return value.row(n);
  }

  void save(ArchiveWriter& out) const {
    out.write("tree.feature", std::span<const std::size_t>(feature));
    out.write("tree.threshold", std::span<const double>(threshold));
    out.write("tree.left", std::span<const std::size_t>(left));
    out.write("tree.right", std::span<const std::size_t>(right));
    out.write("tree.value", value);
  }

  static Tree load(ArchiveReader& in, std::size_t dim, std::size_t classes) {
    Tree t;
    t.feature = in.read_sizes("tree.feature");
    t.threshold = in.read_doubles("tree.threshold");
    t.left = in.read_sizes("tree.left");
    t.right = in.read_sizes("tree.right");
    t.value = in.read_matrix("tree.value");
    const std::size_t n = t.feature.size();
    if (n == 0 || t.threshold.size() != n || t.left.size() != n || t.right.size() != n || t.value.rows() != n ||
        t.value.cols() != classes) {
      throw ParseError("inconsistent tree arrays");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (t.feature[i] == kLeaf) continue;
      if (t.feature[i] >= dim || t.left[i] <= i || t.right[i] <= i || t.left[i] >= n || t.right[i] >= n) {
        throw ParseError("tree node " + std::to_string(i) + " is malformed");
      }
    }
    return t;
  }
};

struct SplitChoice {
  std::size_t feature = kLeaf;
  double threshold = 0.0;
  double score = -1.0;  // sum_l |L_l|^2 / |L| + sum_r |R_r|^2 / |R|; higher is purer
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const std::size_t> y, std::size_t classes, std::size_t max_depth,
              std::size_t min_split, std::size_t max_features, RngStream* rng)
      : x_(x), y_(y), classes_(classes), max_depth_(max_depth), min_split_(min_split),
        max_features_(std::min(max_features, x.cols())), rng_(rng) {}

  Tree build(std::vector<std::size_t> samples) {
    values_.clear();
    grow(samples, 0);
    tree_.value = Matrix(tree_.feature.size(), classes_, std::move(values_));
    return std::move(tree_);
  }

 private:
  std::size_t grow(std::vector<std::size_t>& samples, std::size_t depth) {
    const std::size_t id = tree_.feature.size();
    tree_.feature.push_back(kLeaf);
    tree_.threshold.push_back(0.0);
    tree_.left.push_back(0);
    tree_.right.push_back(0);
    std::vector<double> counts(classes_, 0.0);
    for (std::size_t s : samples) counts[y_[s]] += 1.0;
    const double m = static_cast<double>(samples.size());
    for (double c : counts) values_.push_back(c / m);

    const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
    if (pure || depth >= max_depth_ || samples.size() < min_split_) return id;
    const SplitChoice split = choose(samples);
    if (split.feature == kLeaf) return id;

    std::vector<std::size_t> lhs, rhs;
    for (std::size_t s : samples) (x_(s, split.feature) <= split.threshold ? lhs : rhs).push_back(s);
    samples.clear();
    samples.shrink_to_fit();
    tree_.feature[id] = split.feature;
    tree_.threshold[id] = split.threshold;
    const std::size_t l = grow(lhs, depth + 1);
    tree_.left[id] = l;
    const std::size_t r = grow(rhs, depth + 1);
    tree_.right[id] = r;
    return id;
  }

  // Best threshold on one feature; leaves `best` untouched if none beats it.
  void scan(const std::vector<std::size_t>& samples, std::size_t f, SplitChoice& best) {
    double lo = x_(samples[0], f), hi = lo;
    for (std::size_t s : samples) {
      lo = std::min(lo, x_(s, f));
      hi = std::max(hi, x_(s, f));
    }
    if (lo == hi) return;
    sorted_.clear();
    for (std::size_t s : samples) sorted_.emplace_back(x_(s, f), y_[s]);
    std::sort(sorted_.begin(), sorted_.end());
    left_.assign(classes_, 0.0);
    right_.assign(classes_, 0.0);
    double sq_left = 0.0, sq_right = 0.0;
    for (const auto& [v, c] : sorted_) right_[c] += 1.0;
    for (double c : right_) sq_right += c * c;
    const std::size_t m = sorted_.size();
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const std::size_t c = sorted_[i].second;
      sq_left += 2.0 * left_[c] + 1.0;
      sq_right -= 2.0 * right_[c] - 1.0;
      left_[c] += 1.0;
      right_[c] -= 1.0;
      const double a = sorted_[i].first, b = sorted_[i + 1].first;
      if (a == b) continue;
      const double nl = static_cast<double>(i + 1), nr = static_cast<double>(m - i - 1);
      const double score = sq_left / nl + sq_right / nr;
      if (score > best.score) {
        double mid = a + (b - a) / 2.0;
        if (!(mid < b)) mid = a;
        best = {f, mid, score};
      }
    }
  }

  SplitChoice choose(const std::vector<std::size_t>& samples) {
    SplitChoice best;
    const std::size_t d = x_.cols();
    if (rng_ == nullptr || max_features_ >= d) {
      for (std::size_t f = 0; f < d; ++f) scan(samples, f, best);
      return best;
    }
    features_.resize(d);
    std::iota(features_.begin(), features_.end(), 0);
    for (std::size_t i = 0; i < max_features_; ++i) std::swap(features_[i], features_[i + rng_->below(d - i)]);
    std::sort(features_.begin(), features_.begin() + static_cast<std::ptrdiff_t>(max_features_));
    for (std::size_t i = 0; i < max_features_; ++i) scan(samples, features_[i], best);
    // All candidates constant here: keep drawing from the rest until one splits.
    for (std::size_t i = max_features_; i < d && best.feature == kLeaf; ++i) {
      std::swap(features_[i], features_[i + rng_->below(d - i)]);
      scan(samples, features_[i], best);
    }
    return best;
  }

  const Matrix& x_;
  std::span<const std::size_t> y_;
  std::size_t classes_, max_depth_, min_split_, max_features_;
  RngStream* rng_;
  Tree tree_;
  std::vector<double> values_;
  std::vector<std::pair<double, std::size_t>> sorted_;
  std::vector<double> left_, right_;
  std::vector<std::size_t> features_;
};

class DecisionTree final : public Classifier {
 public:
  DecisionTree(std::vector<std::string> labels, std::size_t dim, Tree tree)
      : Classifier(std::move(labels), dim), tree_(std::move(tree)) {}

  DenseVector predict_scores(std::span<const double> x) const override {
    check_input(x);
    const auto v = tree_.leaf(x);
    return DenseVector(std::vector<double>(v.begin(), v.end()));
  }
  std::string kind() const override { return "DecisionTree"; }
  std::size_t node_count() const { return tree_.feature.size(); }

 protected:
  void save_params(ArchiveWriter& out) const override { tree_.save(out); }

 private:
  Tree tree_;
};

class RandomForest final : public Classifier {
 public:
  RandomForest(std::vector<std::string> labels, std::size_t dim, std::vector<Tree> trees)
      : Classifier(std::move(labels), dim), trees_(std::move(trees)) {}

  // Fraction of trees voting for each label.
  DenseVector predict_scores(std::span<const double> x) const override {
    check_input(x);
    DenseVector votes(labels().size());
    for (const Tree& t : trees_) votes[argmax(t.leaf(x))] += 1.0;
    for (double& v : votes) v /= static_cast<double>(trees_.size());
    return votes;
  }
  std::string kind() const override { return "RandomForest"; }

 protected:
  void save_params(ArchiveWriter& out) const override {
    out.write("trees", static_cast<std::uint64_t>(trees_.size()));
    for (const Tree& t : trees_) t.save(out);
  }

 private:
  std::vector<Tree> trees_;
};

}  // namespace

std::unique_ptr<Classifier> train_decision_tree(const Matrix& x, std::span<const std::size_t> y,
                                                const std::vector<std::string>& labels, const TrainConfig& cfg) {
  cfg.validate();
  detail::Prepared p = detail::prepare(x, y, labels, true);
  TreeBuilder builder(x, p.y, p.labels.size(), cfg.max_depth, cfg.min_samples_split, x.cols(), nullptr);
  std::vector<std::size_t> all(x.rows());
  std::iota(all.begin(), all.end(), 0);
  return std::make_unique<DecisionTree>(std::move(p.labels), x.cols(), builder.build(std::move(all)));
}

std::unique_ptr<Classifier> train_random_forest(const Matrix& x, std::span<const std::size_t> y,
                                                const std::vector<std::string>& labels, const TrainConfig& cfg) {
  cfg.validate();
  detail::Prepared p = detail::prepare(x, y, labels, true);
  const std::size_t n = x.rows(), d = x.cols();
  const std::size_t max_features =
      cfg.max_features > 0 ? cfg.max_features
                           : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
  std::vector<Tree> trees;
  trees.reserve(cfg.trees);
  const std::uint64_t base = mix_seed(cfg.seed, "forest");
  for (std::size_t t = 0; t < cfg.trees; ++t) {
    RngStream rng(mix_seed(base, t));
    std::vector<std::size_t> sample(n);
    if (cfg.bootstrap) {
      for (std::size_t& s : sample) s = rng.below(n);
    } else {
      std::iota(sample.begin(), sample.end(), 0);
    }
    TreeBuilder builder(x, p.y, p.labels.size(), cfg.max_depth, cfg.min_samples_split, max_features, &rng);
    trees.push_back(builder.build(std::move(sample)));
  }
  return std::make_unique<RandomForest>(std::move(p.labels), d, std::move(trees));
}

namespace detail {

std::unique_ptr<Classifier> load_decision_tree(ArchiveReader& in, std::vector<std::string> labels, std::size_t dim) {
  Tree t = Tree::load(in, dim, labels.size());
  return std::make_unique<DecisionTree>(std::move(labels), dim, std::move(t));
}

std::unique_ptr<Classifier> load_random_forest(ArchiveReader& in, std::vector<std::string> labels, std::size_t dim) {
  const std::size_t count = in.read_size("trees");
  if (count == 0) throw ParseError("forest without trees");
  std::vector<Tree> trees;
  for (std::size_t i = 0; i < count; ++i) trees.push_back(Tree::load(in, dim, labels.size()));
  return std::make_unique<RandomForest>(std::move(labels), dim, std::move(trees));
}

}  // namespace detail
}  // namespace mixintent
