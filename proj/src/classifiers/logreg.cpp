#include <algorithm>
#include <cmath>

#include "internal.hpp"
#include "mixintent/error.hpp"
#include "mixintent/rng.hpp"
#include "mixintent/simd.hpp"

namespace mixintent {
namespace {

class LogReg final : public Classifier {
 public:
  LogReg(std::vector<std::string> labels, std::size_t dim, std::vector<double> params)
      : Classifier(std::move(labels), dim), params_(std::move(params)) {
    require_same_size(params_.size(), this->labels().size() * (dim + 1), "logistic regression parameters");
  }

  DenseVector predict_scores(std::span<const double> x) const override {
    check_input(x);
    DenseVector s = detail::linear_scores(params_, labels().size(), x);
    detail::softmax(s.span());
    return s;
  }
  std::string kind() const override { return "LogisticRegression"; }

 protected:
  void save_params(ArchiveWriter& out) const override { out.write("weights", std::span<const double>(params_)); }

 private:
  std::vector<double> params_;
};

// Largest eigenvalue of [X 1]^T [X 1] / n by power iteration.
double gram_spectral_bound(const Matrix& x, std::uint64_t seed) {
  const std::size_t n = x.rows(), d = x.cols();
  RngStream rng(seed);
  std::vector<double> v(d + 1), w(d + 1);
  for (double& e : v) e = rng.uniform(0.5, 1.0);
  double estimate = 0.0;
  for (int it = 0; it < 50; ++it) {
    const double len = norm(v);
    if (len == 0.0) return 0.0;
    for (double& e : v) e /= len;
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = simd::dot(x.row(i), std::span<const double>(v).first(d)) + v[d];
      simd::axpy(t, x.row(i), std::span<double>(w).first(d));
      w[d] += t;
    }
    for (double& e : w) e /= static_cast<double>(n);
    const double next = simd::dot(v, w);
    std::swap(v, w);
    if (std::fabs(next - estimate) <= 1e-6 * next) {
      estimate = next;
      break;
    }
    estimate = next;
  }
  return estimate;
}

}  // namespace

double logreg_objective(std::span<const double> params, const Matrix& x, std::span<const std::size_t> y,
                        std::size_t n_classes, double lambda, std::span<double> grad) {
  const std::size_t n = x.rows(), d = x.cols();
  require_same_size(params.size(), n_classes * (d + 1), "logistic regression parameters");
  const bool want_grad = !grad.empty();
  if (want_grad) {
    require_same_size(grad.size(), params.size(), "logistic regression gradient");
    std::fill(grad.begin(), grad.end(), 0.0);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    DenseVector s = detail::linear_scores(params, n_classes, x.row(i));
    const double m = *std::max_element(s.begin(), s.end());
    double z = 0.0;
    for (double v : s) z += std::exp(v - m);
    loss += (std::log(z) + m - s[y[i]]) * inv_n;
    if (want_grad) {
      for (std::size_t c = 0; c < n_classes; ++c) {
        const double g = (std::exp(s[c] - m) / z - (y[i] == c ? 1.0 : 0.0)) * inv_n;
        simd::axpy(g, x.row(i), grad.subspan(c * (d + 1), d));
        grad[c * (d + 1) + d] += g;
      }
    }
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    const auto w = params.subspan(c * (d + 1), d);
    loss += 0.5 * lambda * simd::dot(w, w);
    if (want_grad) simd::axpy(lambda, w, grad.subspan(c * (d + 1), d));
  }
  return loss;
}

std::unique_ptr<Classifier> train_logreg(const Matrix& x, std::span<const std::size_t> y,
                                         const std::vector<std::string>& labels, const TrainConfig& cfg) {
  cfg.validate();
  detail::Prepared p = detail::prepare(x, y, labels, true);
  const std::size_t d = x.cols(), nc = p.labels.size();
  const double lipschitz = 0.5 * gram_spectral_bound(x, mix_seed(cfg.seed, "logreg")) * 1.05 + cfg.lambda;
  const double step = 1.0 / lipschitz;

  // Nesterov-accelerated gradient descent; the objective is smooth and convex.
  std::vector<double> params(nc * (d + 1), 0.0), prev = params, look(params.size()), grad(params.size());
  for (std::size_t it = 0; it < cfg.logreg_iterations; ++it) {
    const double momentum = static_cast<double>(it) / static_cast<double>(it + 3);
    for (std::size_t j = 0; j < params.size(); ++j) look[j] = params[j] + momentum * (params[j] - prev[j]);
    logreg_objective(look, x, p.y, nc, cfg.lambda, grad);
    prev = params;
    for (std::size_t j = 0; j < params.size(); ++j) params[j] = look[j] - step * grad[j];
  }
  require_finite(params, "logistic regression weights");
  return std::make_unique<LogReg>(std::move(p.labels), d, std::move(params));
}

std::unique_ptr<Classifier> make_logreg(const std::vector<std::string>& labels, std::size_t dim,
                                        std::vector<double> params) {
  return std::make_unique<LogReg>(labels, dim, std::move(params));
}

namespace detail {
std::unique_ptr<Classifier> load_logreg(ArchiveReader& in, std::vector<std::string> labels, std::size_t dim) {
  return std::make_unique<LogReg>(std::move(labels), dim, in.read_doubles("weights"));
}
}  // namespace detail
}  // namespace mixintent
