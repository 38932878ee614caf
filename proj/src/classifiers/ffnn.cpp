#include <algorithm>
#include <cmath>
#include <numeric>

#include "internal.hpp"
#include "mixintent/dataset.hpp"
#include "mixintent/error.hpp"
#include "mixintent/metrics.hpp"
#include "mixintent/rng.hpp"
#include "mixintent/simd.hpp"

namespace mixintent {
namespace {

template <typename Span>
auto carve(Span params, const FfnnShape& s) {
  std::size_t at = 0;
  auto take = [&](std::size_t n) {
    auto out = params.subspan(at, n);
    at += n;
    return out;
  };
  struct {
    decltype(take(0)) w1, b1, w2, b2, w3, b3;
  } v{take(s.input * s.hidden1), take(s.hidden1), take(s.hidden1 * s.hidden2), take(s.hidden2),
      take(s.hidden2 * s.classes), take(s.classes)};
  return v;
}

struct Activations {
  std::vector<double> a1, a2, z;
};

void forward(const FfnnShape& s, std::span<const double> params, std::span<const double> x, Activations& act) {
  const auto p = carve(params, s);
  act.a1.assign(p.b1.begin(), p.b1.end());
  for (std::size_t i = 0; i < s.input; ++i) {
    if (x[i] != 0.0) simd::axpy(x[i], p.w1.subspan(i * s.hidden1, s.hidden1), act.a1);
  }
  for (double& v : act.a1) v = std::max(v, 0.0);
  act.a2.assign(p.b2.begin(), p.b2.end());
  for (std::size_t j = 0; j < s.hidden1; ++j) {
    if (act.a1[j] != 0.0) simd::axpy(act.a1[j], p.w2.subspan(j * s.hidden2, s.hidden2), act.a2);
  }
  for (double& v : act.a2) v = std::max(v, 0.0);
  act.z.assign(p.b3.begin(), p.b3.end());
  for (std::size_t j = 0; j < s.hidden2; ++j) {
    if (act.a2[j] != 0.0) simd::axpy(act.a2[j], p.w3.subspan(j * s.classes, s.classes), act.z);
  }
}

class Ffnn final : public Classifier {
 public:
  Ffnn(std::vector<std::string> labels, const FfnnShape& shape, std::vector<double> params)
      : Classifier(std::move(labels), shape.input), shape_(shape), params_(std::move(params)) {
    require_same_size(params_.size(), shape_.size(), "network parameters");
    require_same_size(shape_.classes, this->labels().size(), "network outputs");
  }

  DenseVector predict_scores(std::span<const double> x) const override {
    check_input(x);
    Activations act;
    forward(shape_, params_, x, act);
    detail::softmax(act.z);
    return DenseVector(std::move(act.z));
  }
  std::string kind() const override { return "NeuralNetwork"; }

 protected:
  void save_params(ArchiveWriter& out) const override {
    out.write("hidden1", static_cast<std::uint64_t>(shape_.hidden1));
    out.write("hidden2", static_cast<std::uint64_t>(shape_.hidden2));
    out.write("weights", std::span<const double>(params_));
  }

 private:
  FfnnShape shape_;
  std::vector<double> params_;
};

std::vector<std::size_t> predict_rows(const FfnnShape& s, std::span<const double> params, const Matrix& x,
                                      std::span<const std::size_t> rows) {
  std::vector<std::size_t> out;
  out.reserve(rows.size());
  Activations act;
  for (std::size_t r : rows) {
    forward(s, params, x.row(r), act);
    out.push_back(argmax(act.z));
  }
  return out;
}

}  // namespace

std::vector<double> ffnn_initial_params(const FfnnShape& s, std::uint64_t seed) {
  std::vector<double> params(s.size(), 0.0);
  auto p = carve(std::span<double>(params), s);
  RngStream rng(mix_seed(seed, "ffnn-init"));
  const double s1 = std::sqrt(2.0 / static_cast<double>(s.input));
  const double s2 = std::sqrt(2.0 / static_cast<double>(s.hidden1));
  for (double& w : p.w1) w = rng.normal() * s1;
  for (double& w : p.w2) w = rng.normal() * s2;
  // Output layer starts at zero: uniform class probabilities at epoch 0.
  return params;
}

double ffnn_objective(std::span<const double> params, const FfnnShape& s, const Matrix& x,
                      std::span<const std::size_t> y, std::span<const std::size_t> rows, double lambda,
                      std::span<double> grad) {
  require_same_size(params.size(), s.size(), "network parameters");
  require_same_size(x.cols(), s.input, "network input");
  const bool want_grad = !grad.empty();
  if (want_grad) {
    require_same_size(grad.size(), params.size(), "network gradient");
    std::fill(grad.begin(), grad.end(), 0.0);
  }
  const auto p = carve(params, s);
  const double inv_m = 1.0 / static_cast<double>(rows.size());
  Activations act;
  std::vector<double> dz(s.classes), da2(s.hidden2), da1(s.hidden1);
  double loss = 0.0;
  for (std::size_t r : rows) {
    const auto xr = x.row(r);
    forward(s, params, xr, act);
    const double m = *std::max_element(act.z.begin(), act.z.end());
    double sum = 0.0;
    for (double v : act.z) sum += std::exp(v - m);
    loss += (std::log(sum) + m - act.z[y[r]]) * inv_m;
    if (!want_grad) continue;
    auto g = carve(grad, s);
    for (std::size_t c = 0; c < s.classes; ++c) dz[c] = (std::exp(act.z[c] - m) / sum - (y[r] == c ? 1.0 : 0.0)) * inv_m;
    simd::axpy(1.0, dz, g.b3);
    for (std::size_t j = 0; j < s.hidden2; ++j) {
      const auto w3j = p.w3.subspan(j * s.classes, s.classes);
      da2[j] = act.a2[j] > 0.0 ? simd::dot(w3j, dz) : 0.0;
      if (act.a2[j] != 0.0) simd::axpy(act.a2[j], dz, g.w3.subspan(j * s.classes, s.classes));
    }
    simd::axpy(1.0, da2, g.b2);
    for (std::size_t j = 0; j < s.hidden1; ++j) {
      const auto w2j = p.w2.subspan(j * s.hidden2, s.hidden2);
      da1[j] = act.a1[j] > 0.0 ? simd::dot(w2j, da2) : 0.0;
      if (act.a1[j] != 0.0) simd::axpy(act.a1[j], da2, g.w2.subspan(j * s.hidden2, s.hidden2));
    }
    simd::axpy(1.0, da1, g.b1);
    for (std::size_t i = 0; i < s.input; ++i) {
      if (xr[i] != 0.0) simd::axpy(xr[i], da1, g.w1.subspan(i * s.hidden1, s.hidden1));
    }
  }
  for (auto w : {p.w1, p.w2, p.w3}) loss += 0.5 * lambda * simd::dot(w, w);
  if (want_grad) {
    auto g = carve(grad, s);
    simd::axpy(lambda, p.w1, g.w1);
    simd::axpy(lambda, p.w2, g.w2);
    simd::axpy(lambda, p.w3, g.w3);
  }
  return loss;
}

std::unique_ptr<Classifier> make_ffnn(const FfnnShape& shape, std::vector<double> params,
                                      const std::vector<std::string>& labels) {
  return std::make_unique<Ffnn>(labels, shape, std::move(params));
}

std::unique_ptr<Classifier> train_ffnn(const Matrix& x, std::span<const std::size_t> y,
                                       const std::vector<std::string>& labels, const TrainConfig& cfg) {
  cfg.validate();
  detail::Prepared p = detail::prepare(x, y, labels, true);
  const FfnnShape shape{x.cols(), cfg.hidden1, cfg.hidden2, p.labels.size()};

  auto [fit_rows, val_rows] =
      stratified_indices(p.y, shape.classes, cfg.validation_fraction, mix_seed(cfg.seed, "ffnn-validation"));
  if (fit_rows.empty()) std::swap(fit_rows, val_rows);
  std::vector<std::size_t> val_gold;
  for (std::size_t r : val_rows) val_gold.push_back(p.y[r]);

  std::vector<double> params = ffnn_initial_params(shape, cfg.seed);
  std::vector<double> velocity(params.size(), 0.0), grad(params.size());
  std::vector<double> best = params;
  double best_score = -1.0;
  std::size_t since_best = 0;
  RngStream rng(mix_seed(cfg.seed, "ffnn-batches"));
  double lr = cfg.nn_learning_rate;
  for (std::size_t epoch = 0; epoch < cfg.nn_epochs; ++epoch, lr *= cfg.nn_lr_decay) {
    rng.shuffle(std::span<std::size_t>(fit_rows));
    for (std::size_t start = 0; start < fit_rows.size(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, fit_rows.size() - start);
      ffnn_objective(params, shape, x, p.y, std::span<const std::size_t>(fit_rows).subspan(start, len), cfg.lambda,
                     grad);
      for (std::size_t j = 0; j < params.size(); ++j) {
        velocity[j] = cfg.nn_momentum * velocity[j] - lr * grad[j];
        params[j] += velocity[j];
      }
    }
    require_finite(params, "network weights");
    if (val_rows.empty()) {
      best = params;
      continue;
    }
    const double score = macro_f1(predict_rows(shape, params, x, val_rows), val_gold, shape.classes);
    if (score > best_score) {
      best_score = score;
      best = params;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  return std::make_unique<Ffnn>(std::move(p.labels), shape, std::move(best));
}

namespace detail {
std::unique_ptr<Classifier> load_ffnn(ArchiveReader& in, std::vector<std::string> labels, std::size_t dim) {
  const std::size_t h1 = in.read_size("hidden1");
  const std::size_t h2 = in.read_size("hidden2");
  const FfnnShape shape{dim, h1, h2, labels.size()};
  return std::make_unique<Ffnn>(std::move(labels), shape, in.read_doubles("weights"));
}
}  // namespace detail
}  // namespace mixintent
