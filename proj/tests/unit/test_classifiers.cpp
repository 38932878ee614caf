#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mixintent/classifiers.hpp"
#include "mixintent/dataset.hpp"
#include "mixintent/error.hpp"
#include "mixintent/gradcheck.hpp"
#include "mixintent/metrics.hpp"
#include "mixintent/rng.hpp"
#include "mixintent/synthetic.hpp"

using namespace mixintent;

namespace {

struct Holdout {
  VectorProblem train, test;
};

Holdout holdout(const VectorProblem& p, std::uint64_t seed) {
  auto [train, test] = stratified_indices(p.y, p.labels.size(), 0.3, seed);
  return {take_rows(p, train), take_rows(p, test)};
}

double heldout_f1(const Classifier& model, const VectorProblem& test) {
  std::vector<std::size_t> preds;
  for (std::size_t i = 0; i < test.x.rows(); ++i) {
    const std::string& l = model.predict(test.x.row(i));
    preds.push_back(static_cast<std::size_t>(std::find(test.labels.begin(), test.labels.end(), l) - test.labels.begin()));
  }
  return evaluate_indices(preds, test.y, test.labels).macro_f1;
}

double training_accuracy(const Classifier& model, const VectorProblem& p) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < p.x.rows(); ++i) ok += model.predict(p.x.row(i)) == p.labels[p.y[i]];
  return static_cast<double>(ok) / static_cast<double>(p.x.rows());
}

Matrix random_matrix(std::size_t r, std::size_t c, RngStream& rng) {
  Matrix m(r, c);
  for (double& v : m.flat()) v = rng.normal();
  return m;
}

std::vector<double> random_params(std::size_t n, RngStream& rng, double scale = 0.5) {
  std::vector<double> p(n);
  for (double& v : p) v = scale * rng.normal();
  return p;
}

const ClassifierKind kAll[] = {ClassifierKind::LinearSvm, ClassifierKind::KernelSvm, ClassifierKind::LogReg,
                               ClassifierKind::Knn,       ClassifierKind::DecisionTree, ClassifierKind::RandomForest,
                               ClassifierKind::Ffnn,      ClassifierKind::Cosine1nn};

TrainConfig fast_config() {
  TrainConfig cfg;
  cfg.trees = 25;
  cfg.hidden1 = cfg.hidden2 = 32;
  return cfg;
}

}  // namespace

TEST_CASE("linear svm separates a 1-D threshold and rejects one class") {
  VectorProblem p;
  p.labels = {"A", "B"};
  p.x = Matrix(40, 1);
  for (std::size_t i = 0; i < 40; ++i) {
    p.x(i, 0) = i < 20 ? -0.1 - 0.1 * static_cast<double>(i) : 0.1 + 0.1 * static_cast<double>(i - 20);
    p.y.push_back(i < 20 ? 0 : 1);
  }
  const auto model = train_linear_svm(p.x, p.y, p.labels, TrainConfig{});
  CHECK(training_accuracy(*model, p) == 1.0);

  const std::vector<std::size_t> same(40, 0);
  CHECK_THROWS_AS(train_linear_svm(p.x, same, p.labels, TrainConfig{}), DegenerateError);
}

TEST_CASE("every classifier reaches 0.95 on held-out blobs") {
  const Holdout h = holdout(make_blobs(200, 3, 11), 5);
  for (ClassifierKind kind : kAll) {
    CAPTURE(classifier_name(kind));
    const auto model = train_classifier(kind, h.train.x, h.train.y, h.train.labels, fast_config());
    CHECK(heldout_f1(*model, h.test) >= 0.95);
  }
}

TEST_CASE("xor needs a nonlinear model") {
  const Holdout h = holdout(make_xor(200, 3), 8);
  const TrainConfig cfg = fast_config();
  CHECK(heldout_f1(*train_kernel_svm(h.train.x, h.train.y, h.train.labels, cfg), h.test) >= 0.95);
  CHECK(heldout_f1(*train_ffnn(h.train.x, h.train.y, h.train.labels, cfg), h.test) >= 0.95);
  CHECK(heldout_f1(*train_linear_svm(h.train.x, h.train.y, h.train.labels, cfg), h.test) <= 0.75);
}

TEST_CASE("kernel svm limits") {
  SUBCASE("one point per class is memorized") {
    const Matrix x = Matrix::from_rows({{0, 0}, {3, 1}, {-2, 4}});
    const std::vector<std::size_t> y{0, 1, 2};
    const std::vector<std::string> labels{"p", "q", "r"};
    const auto model = train_kernel_svm(x, y, labels, TrainConfig{});
    for (std::size_t i = 0; i < 3; ++i) CHECK(model->predict(x.row(i)) == labels[i]);
  }
  SUBCASE("vanishing gamma collapses toward the majority class") {
    VectorProblem p = make_blobs(300, 3, 4);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < 300; ++i) {
      if (p.y[i] == 1 || i < 60) rows.push_back(i);
    }
    p = take_rows(p, rows);
    TrainConfig cfg;
    cfg.gamma = 1e-8;
    const auto model = train_kernel_svm(p.x, p.y, p.labels, cfg);
    std::size_t majority = 0;
    for (std::size_t i = 0; i < p.x.rows(); ++i) majority += model->predict(p.x.row(i)) == "blob1";
    CHECK(static_cast<double>(majority) / static_cast<double>(p.x.rows()) >= 0.9);
  }
}

TEST_CASE("logistic regression gradient, symmetry and probabilities") {
  RngStream rng(21);
  const Matrix x = random_matrix(12, 4, rng);
  std::vector<std::size_t> y(12);
  for (std::size_t i = 0; i < 12; ++i) y[i] = i % 3;
  for (int point = 0; point < 10; ++point) {
    const std::vector<double> theta = random_params(3 * 5, rng);
    std::vector<double> grad(theta.size());
    logreg_objective(theta, x, y, 3, 0.01, grad);
    const auto f = [&](std::span<const double> t) { return logreg_objective(t, x, y, 3, 0.01, {}); };
    const GradCheckResult r = check_gradient(f, grad, theta);
    CHECK(r.max_relative_error <= 1e-4);
  }

  const auto zero = make_logreg({"a", "b", "c", "d"}, 3, std::vector<double>(4 * 4, 0.0));
  const DenseVector probs = zero->predict_scores(std::vector<double>{1.0, -2.0, 0.5});
  for (double p : probs) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));

  const Holdout h = holdout(make_blobs(200, 3, 2), 1);
  const auto model = train_logreg(h.train.x, h.train.y, h.train.labels, TrainConfig{});
  for (std::size_t i = 0; i < h.test.x.rows(); ++i) {
    const DenseVector s = model->predict_scores(h.test.x.row(i));
    CHECK(std::abs(std::accumulate(s.begin(), s.end(), 0.0) - 1.0) <= 1e-9);
  }
}

TEST_CASE("linear svm objective gradient at differentiable points") {
  RngStream rng(8);
  const Matrix x = random_matrix(10, 3, rng);
  std::vector<std::size_t> y(10);
  for (std::size_t i = 0; i < 10; ++i) y[i] = i % 2;
  for (int point = 0; point < 10; ++point) {
    const std::vector<double> theta = random_params(2 * 4, rng);
    std::vector<double> grad(theta.size());
    linear_svm_objective(theta, x, y, 2, 0.05, grad);
    const auto f = [&](std::span<const double> t) { return linear_svm_objective(t, x, y, 2, 0.05, {}); };
    CHECK(check_gradient(f, grad, theta).max_relative_error <= 1e-4);
  }
}

TEST_CASE("knn hand cases and exhaustive oracle") {
  const std::vector<std::string> labels{"A", "B"};
  const Matrix x = Matrix::from_rows({{0, 0}, {1, 0}, {5, 5}, {0.5, 0.2}});
  const std::vector<std::size_t> y{0, 0, 1, 1};
  TrainConfig cfg;
  cfg.k = 1;
  const auto one = train_knn(x, y, labels, cfg);
  for (std::size_t i = 0; i < 4; ++i) CHECK(one->predict(x.row(i)) == labels[y[i]]);

  // nearest three to (0.1, 0): (0,0) A, (0.5,0.2) B, (1,0) A
  cfg.k = 3;
  CHECK(train_knn(x, y, labels, cfg)->predict(std::vector<double>{0.1, 0.0}) == "A");
  cfg.k = 5;
  CHECK_THROWS_AS(train_knn(x, y, labels, cfg), ArgumentError);

  // Exhaustive oracle: sort all points by (distance, index), vote, break
  // vote ties by the nearest member.
  RngStream rng(77);
  const Matrix big = random_matrix(120, 5, rng);
  std::vector<std::size_t> by(120);
  for (auto& v : by) v = rng.below(4);
  const std::vector<std::string> four{"c0", "c1", "c2", "c3"};
  cfg.k = 7;
  const auto model = train_knn(big, by, four, cfg);
  for (int q = 0; q < 100; ++q) {
    std::vector<double> query(5);
    for (double& v : query) v = rng.normal();
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < 120; ++i) {
      double d = 0.0;
      for (std::size_t j = 0; j < 5; ++j) d += (big(i, j) - query[j]) * (big(i, j) - query[j]);
      all.emplace_back(d, i);
    }
    std::sort(all.begin(), all.end());
    std::vector<int> votes(4, 0);
    for (std::size_t r = 0; r < 7; ++r) ++votes[by[all[r].second]];
    const int top = *std::max_element(votes.begin(), votes.end());
    std::size_t expect = 0;
    for (std::size_t r = 0; r < 7; ++r) {
      if (votes[by[all[r].second]] == top) {
        expect = by[all[r].second];
        break;
      }
    }
    CHECK(model->predict(query) == four[expect]);
  }
}

TEST_CASE("gini values and single split") {
  CHECK(gini_impurity(std::vector<double>{5, 5}) == doctest::Approx(0.5));
  CHECK(gini_impurity(std::vector<double>{7, 0}) == 0.0);

  const Matrix x = Matrix::from_rows({{0}, {1}});
  const std::vector<std::size_t> y{0, 1};
  const auto tree = train_decision_tree(x, y, {"A", "B"}, TrainConfig{});
  std::stringstream buf;
  ArchiveWriter w(buf);
  tree->save(w);
  ArchiveReader r(buf);
  r.read_string("classifier");
  r.read_strings("labels");
  r.read_size("dim");
  const auto features = r.read_sizes("tree.feature");
  const auto thresholds = r.read_doubles("tree.threshold");
  REQUIRE(features.size() == 3);
  CHECK(features[0] == 0);
  CHECK(thresholds[0] == 0.5);

  // The pure left node {0, 1} is not split further.
  const Matrix three = Matrix::from_rows({{0}, {1}, {2}});
  const auto small = train_decision_tree(three, std::vector<std::size_t>{0, 0, 1}, {"A", "B"}, TrainConfig{});
  std::stringstream buf2;
  ArchiveWriter w2(buf2);
  small->save(w2);
  ArchiveReader r2(buf2);
  r2.read_string("classifier");
  r2.read_strings("labels");
  r2.read_size("dim");
  CHECK(r2.read_sizes("tree.feature").size() == 3);
  CHECK_THROWS_AS(train_decision_tree(three, std::vector<std::size_t>{1, 1, 1}, {"A", "B"}, TrainConfig{}),
                  DegenerateError);
}

TEST_CASE("unlimited tree fits any consistent dataset") {
  RngStream rng(3);
  VectorProblem p = make_xor(120, 9);
  TrainConfig cfg;
  cfg.max_depth = 10000;
  CHECK(training_accuracy(*train_decision_tree(p.x, p.y, p.labels, cfg), p) == 1.0);
  Matrix noise = random_matrix(80, 3, rng);
  std::vector<std::size_t> labels(80);
  for (auto& l : labels) l = rng.below(3);
  VectorProblem q{noise, labels, {"x", "y", "z"}};
  CHECK(training_accuracy(*train_decision_tree(q.x, q.y, q.labels, cfg), q) == 1.0);
}

TEST_CASE("forest reductions and determinism") {
  const Holdout h = holdout(make_blobs(150, 3, 6), 2);
  TrainConfig cfg;
  cfg.trees = 1;
  cfg.bootstrap = false;
  cfg.max_features = h.train.x.cols();
  const auto forest = train_random_forest(h.train.x, h.train.y, h.train.labels, cfg);
  const auto tree = train_decision_tree(h.train.x, h.train.y, h.train.labels, cfg);
  RngStream rng(1);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> q{rng.uniform(-8, 8), rng.uniform(-8, 8)};
    CHECK(forest->predict(q) == tree->predict(q));
  }

  TrainConfig big;
  big.trees = 50;
  big.seed = 17;
  const auto a = train_random_forest(h.train.x, h.train.y, h.train.labels, big);
  const auto b = train_random_forest(h.train.x, h.train.y, h.train.labels, big);
  for (std::size_t i = 0; i < h.test.x.rows(); ++i) {
    CHECK(a->predict_scores(h.test.x.row(i)) == b->predict_scores(h.test.x.row(i)));
  }
  CHECK(heldout_f1(*a, h.test) >= 0.95);
}

TEST_CASE("feed-forward gradient and initial symmetry") {
  RngStream rng(31);
  const FfnnShape shape{4, 5, 3, 3};
  const Matrix x = random_matrix(6, 4, rng);
  const std::vector<std::size_t> y{0, 1, 2, 0, 1, 2};
  const std::vector<std::size_t> rows{0, 1, 2, 3, 4, 5};
  for (int point = 0; point < 10; ++point) {
    const std::vector<double> theta = random_params(shape.size(), rng, 0.7);
    std::vector<double> grad(theta.size());
    ffnn_objective(theta, shape, x, y, rows, 0.01, grad);
    const auto f = [&](std::span<const double> t) { return ffnn_objective(t, shape, x, y, rows, 0.01, {}); };
    CHECK(check_gradient(f, grad, theta).max_relative_error <= 1e-4);
  }
  const auto fresh = make_ffnn(shape, ffnn_initial_params(shape, 5), {"a", "b", "c"});
  for (std::size_t i = 0; i < 6; ++i) {
    for (double p : fresh->predict_scores(x.row(i))) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
}

TEST_CASE("cosine 1-nn identity, scale invariance and oracle") {
  RngStream rng(5);
  const Matrix x = random_matrix(60, 6, rng);
  std::vector<std::size_t> y(60);
  for (auto& v : y) v = rng.below(3);
  const std::vector<std::string> labels{"l0", "l1", "l2"};
  const auto model = train_cosine_1nn(x, y, labels);
  for (std::size_t i = 0; i < 60; ++i) CHECK(model->predict(x.row(i)) == labels[y[i]]);
  for (int q = 0; q < 100; ++q) {
    std::vector<double> query(6);
    for (double& v : query) v = rng.normal();
    std::size_t best = 0;
    double best_sim = -2.0;
    for (std::size_t i = 0; i < 60; ++i) {
      double dot = 0, na = 0, nb = 0;
      for (std::size_t j = 0; j < 6; ++j) {
        dot += x(i, j) * query[j];
        na += x(i, j) * x(i, j);
        nb += query[j] * query[j];
      }
      const double sim = dot / (std::sqrt(na) * std::sqrt(nb));
      if (sim > best_sim) best_sim = sim, best = i;
    }
    CHECK(model->predict(query) == labels[y[best]]);
    std::vector<double> scaled = query;
    for (double& v : scaled) v *= 3.7;
    CHECK(model->predict(scaled) == model->predict(query));
  }
}

TEST_CASE("models agree with their scores and survive persistence") {
  const Holdout h = holdout(make_blobs(120, 3, 13), 4);
  for (ClassifierKind kind : kAll) {
    CAPTURE(classifier_name(kind));
    const auto model = train_classifier(kind, h.train.x, h.train.y, h.train.labels, fast_config());
    std::stringstream buf;
    ArchiveWriter w(buf);
    model->save(w);
    ArchiveReader r(buf);
    const auto back = load_classifier(r);
    CHECK(back->kind() == model->kind());
    for (std::size_t i = 0; i < h.test.x.rows(); ++i) {
      const auto q = h.test.x.row(i);
      const DenseVector s = model->predict_scores(q);
      CHECK(back->predict_scores(q) == s);
      if (kind != ClassifierKind::Cosine1nn) CHECK(model->predict_index(q) == argmax(s));
    }
    // Same inputs, same seed: same model.
    const auto again = train_classifier(kind, h.train.x, h.train.y, h.train.labels, fast_config());
    for (std::size_t i = 0; i < h.test.x.rows(); ++i) {
      CHECK(again->predict_scores(h.test.x.row(i)) == model->predict_scores(h.test.x.row(i)));
    }
  }
}
