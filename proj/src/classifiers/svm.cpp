#include <algorithm>
#include <cmath>
#include <numeric>

#include "internal.hpp"
#include "mixintent/error.hpp"
#include "mixintent/rng.hpp"
#include "mixintent/simd.hpp"

namespace mixintent {
namespace {

class LinearSvm final : public Classifier {
 public:
  LinearSvm(std::vector<std::string> labels, std::size_t dim, std::vector<double> params)
      : Classifier(std::move(labels), dim), params_(std::move(params)) {
    require_same_size(params_.size(), this->labels().size() * (dim + 1), "linear svm parameters");
  }

  DenseVector predict_scores(std::span<const double> x) const override {
    check_input(x);
    return detail::linear_scores(params_, labels().size(), x);
  }
  std::string kind() const override { return "LinearSVM"; }

 protected:
  void save_params(ArchiveWriter& out) const override { out.write("weights", std::span<const double>(params_)); }

 private:
  std::vector<double> params_;
};

class KernelSvm final : public Classifier {
 public:
  KernelSvm(std::vector<std::string> labels, std::size_t dim, double gamma, Matrix support, Matrix coef,
            std::vector<double> bias)
      : Classifier(std::move(labels), dim),
        gamma_(gamma),
        support_(std::move(support)),
        coef_(std::move(coef)),
        bias_(std::move(bias)) {
    require_same_size(support_.cols(), dim, "support vector width");
    require_same_size(coef_.rows(), this->labels().size(), "svm coefficient rows");
    require_same_size(coef_.cols(), support_.rows(), "svm coefficient columns");
    require_same_size(bias_.size(), this->labels().size(), "svm biases");
  }

  DenseVector predict_scores(std::span<const double> x) const override {
    check_input(x);
    std::vector<double> k(support_.rows());
    for (std::size_t j = 0; j < k.size(); ++j) k[j] = std::exp(-gamma_ * simd::squared_distance(support_.row(j), x));
    DenseVector out(labels().size());
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = simd::dot(coef_.row(c), k) + bias_[c];
    return out;
  }
  std::string kind() const override { return "SVM"; }
  std::size_t support_count() const { return support_.rows(); }

 protected:
  void save_params(ArchiveWriter& out) const override {
    out.write("gamma", gamma_);
    out.write("support", support_);
    out.write("coef", coef_);
    out.write("bias", std::span<const double>(bias_));
  }

 private:
  double gamma_;
  Matrix support_;
  Matrix coef_;
  std::vector<double> bias_;
};

// Platt's SMO for one binary problem over a precomputed kernel matrix.
// Decision function f(x) = sum_j alpha_j y_j K(x_j, x) + b.
class Smo {
 public:
  Smo(const Matrix& kernel, std::vector<double> y, double c, double tol, RngStream rng)
      : k_(kernel), y_(std::move(y)), c_(c), tol_(tol), rng_(rng), alpha_(y_.size(), 0.0), error_(y_.size()) {
    for (std::size_t i = 0; i < y_.size(); ++i) error_[i] = -y_[i];
  }

  void run(std::size_t max_passes) {
    const std::size_t n = y_.size();
    bool examine_all = true;
    std::size_t changed = 0;
    std::size_t passes = 0;
    while (changed > 0 || examine_all) {
      if (++passes > max_passes) throw ConvergenceError("SMO did not converge", max_passes);
      changed = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (examine_all || !at_bound(i)) changed += examine(i);
      }
      if (examine_all) {
        examine_all = false;
      } else if (changed == 0) {
        examine_all = true;
      }
    }
  }

  const std::vector<double>& alpha() const { return alpha_; }
  double bias() const { return b_; }

 private:
  bool at_bound(std::size_t i) const { return alpha_[i] <= 0.0 || alpha_[i] >= c_; }

  std::size_t examine(std::size_t i2) {
    const double r2 = error_[i2] * y_[i2];
    if (!((r2 < -tol_ && alpha_[i2] < c_) || (r2 > tol_ && alpha_[i2] > 0.0))) return 0;
    const std::size_t n = y_.size();
    std::size_t best = n;
    double gap = -1.0;
    std::size_t non_bound = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (at_bound(i)) continue;
      ++non_bound;
      const double g = std::fabs(error_[i] - error_[i2]);
      if (g > gap) gap = g, best = i;
    }
    if (non_bound > 1 && best < n && step(best, i2)) return 1;
    std::size_t start = rng_.below(n);
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t i1 = (start + t) % n;
      if (!at_bound(i1) && step(i1, i2)) return 1;
    }
    start = rng_.below(n);
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t i1 = (start + t) % n;
      if (step(i1, i2)) return 1;
    }
    return 0;
  }

  bool step(std::size_t i1, std::size_t i2) {
    if (i1 == i2) return false;
    const double a1 = alpha_[i1], a2 = alpha_[i2];
    const double y1 = y_[i1], y2 = y_[i2];
    const double e1 = error_[i1], e2 = error_[i2];
    const double s = y1 * y2;
    double lo, hi;
    if (y1 != y2) {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(c_, c_ + a2 - a1);
    } else {
      lo = std::max(0.0, a1 + a2 - c_);
      hi = std::min(c_, a1 + a2);
    }
    if (lo >= hi) return false;
    const double k11 = k_(i1, i1), k12 = k_(i1, i2), k22 = k_(i2, i2);
    const double eta = k11 + k22 - 2.0 * k12;
    double a2n;
    if (eta > 1e-12) {
      a2n = std::clamp(a2 + y2 * (e1 - e2) / eta, lo, hi);
    } else {
      // Objective at the segment ends.
      const double f1 = y1 * (e1 - b_) - a1 * k11 - s * a2 * k12;
      const double f2 = y2 * (e2 - b_) - s * a1 * k12 - a2 * k22;
      const double l1 = a1 + s * (a2 - lo), h1 = a1 + s * (a2 - hi);
      const double lobj = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 + s * lo * l1 * k12;
      const double hobj = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 + s * hi * h1 * k12;
      if (lobj < hobj - 1e-3) {
        a2n = lo;
      } else if (lobj > hobj + 1e-3) {
        a2n = hi;
      } else {
        a2n = a2;
      }
    }
    if (a2n < 1e-8) a2n = 0.0;
    if (a2n > c_ - 1e-8) a2n = c_;
    if (std::fabs(a2n - a2) < 1e-3 * (a2n + a2 + 1e-3)) return false;
    double a1n = a1 + s * (a2 - a2n);
    if (a1n < 1e-8) a1n = 0.0;
    if (a1n > c_ - 1e-8) a1n = c_;

    const double d1 = y1 * (a1n - a1), d2 = y2 * (a2n - a2);
    const double b1 = b_ - e1 - d1 * k11 - d2 * k12;
    const double b2 = b_ - e2 - d1 * k12 - d2 * k22;
    double bn;
    if (a1n > 0.0 && a1n < c_) {
      bn = b1;
    } else if (a2n > 0.0 && a2n < c_) {
      bn = b2;
    } else {
      bn = 0.5 * (b1 + b2);
    }
    const double db = bn - b_;
    const auto row1 = k_.row(i1), row2 = k_.row(i2);
    for (std::size_t i = 0; i < error_.size(); ++i) error_[i] += d1 * row1[i] + d2 * row2[i] + db;
    alpha_[i1] = a1n;
    alpha_[i2] = a2n;
    b_ = bn;
    return true;
  }

  const Matrix& k_;
  std::vector<double> y_;
  double c_;
  double tol_;
  RngStream rng_;
  std::vector<double> alpha_;
  std::vector<double> error_;
  double b_ = 0.0;
};

}  // namespace

double linear_svm_objective(std::span<const double> params, const Matrix& x, std::span<const std::size_t> y,
                            std::size_t n_classes, double lambda, std::span<double> grad) {
  const std::size_t n = x.rows(), d = x.cols();
  require_same_size(params.size(), n_classes * (d + 1), "linear svm parameters");
  const bool want_grad = !grad.empty();
  if (want_grad) {
    require_same_size(grad.size(), params.size(), "linear svm gradient");
    std::fill(grad.begin(), grad.end(), 0.0);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const DenseVector s = detail::linear_scores(params, n_classes, x.row(i));
    for (std::size_t c = 0; c < n_classes; ++c) {
      const double yc = y[i] == c ? 1.0 : -1.0;
      const double margin = 1.0 - yc * s[c];
      if (margin > 0.0) {
        loss += margin * inv_n;
        if (want_grad) {
          simd::axpy(-yc * inv_n, x.row(i), grad.subspan(c * (d + 1), d));
          grad[c * (d + 1) + d] -= yc * inv_n;
        }
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

std::unique_ptr<Classifier> train_linear_svm(const Matrix& x, std::span<const std::size_t> y,
                                             const std::vector<std::string>& labels, const TrainConfig& cfg) {
  cfg.validate();
  detail::Prepared p = detail::prepare(x, y, labels, true);
  const std::size_t n = x.rows(), d = x.cols(), nc = p.labels.size();
  std::vector<double> params(nc * (d + 1), 0.0);
  RngStream rng(mix_seed(cfg.seed, "linear-svm"));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  double lr = cfg.learning_rate;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch, lr *= cfg.lr_decay) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t i : order) {
      const auto xi = x.row(i);
      for (std::size_t c = 0; c < nc; ++c) {
        const std::span<double> w(params.data() + c * (d + 1), d);
        double& b = params[c * (d + 1) + d];
        const double yc = p.y[i] == c ? 1.0 : -1.0;
        const double margin = yc * (simd::dot(w, xi) + b);
        simd::scale(1.0 - lr * cfg.lambda, w);
        if (margin < 1.0) {
          simd::axpy(lr * yc, xi, w);
          b += lr * yc;
        }
      }
    }
  }
  require_finite(params, "linear svm weights");
  return std::make_unique<LinearSvm>(std::move(p.labels), d, std::move(params));
}

std::unique_ptr<Classifier> train_kernel_svm(const Matrix& x, std::span<const std::size_t> y,
                                             const std::vector<std::string>& labels, const TrainConfig& cfg) {
  cfg.validate();
  detail::Prepared p = detail::prepare(x, y, labels, true);
  const std::size_t n = x.rows(), d = x.cols(), nc = p.labels.size();
  const double gamma = cfg.gamma > 0.0 ? cfg.gamma : 1.0 / static_cast<double>(d);
  const double c = cfg.svm_c > 0.0 ? cfg.svm_c : 1.0 / (static_cast<double>(n) * cfg.lambda);

  Matrix kernel(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    kernel(i, i) = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      const double v = std::exp(-gamma * simd::squared_distance(x.row(i), x.row(j)));
      kernel(i, j) = v;
      kernel(j, i) = v;
    }
  }

  std::vector<std::vector<double>> alphas;
  std::vector<double> bias(nc);
  const RngStream base(mix_seed(cfg.seed, "kernel-svm"));
  for (std::size_t cls = 0; cls < nc; ++cls) {
    std::vector<double> yy(n);
    for (std::size_t i = 0; i < n; ++i) yy[i] = p.y[i] == cls ? 1.0 : -1.0;
    Smo smo(kernel, yy, c, cfg.smo_tolerance, base.derive(cls));
    smo.run(cfg.smo_max_passes);
    std::vector<double> coef = smo.alpha();
    for (std::size_t i = 0; i < n; ++i) coef[i] *= yy[i];
    alphas.push_back(std::move(coef));
    bias[cls] = smo.bias();
  }

  // Support vectors shared across the one-vs-rest problems.
  std::vector<std::size_t> used;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& a : alphas) {
      if (a[i] != 0.0) {
        used.push_back(i);
        break;
      }
    }
  }
  Matrix support(used.size(), d);
  Matrix coef(nc, used.size());
  for (std::size_t j = 0; j < used.size(); ++j) {
    std::copy(x.row(used[j]).begin(), x.row(used[j]).end(), support.row(j).begin());
    for (std::size_t cls = 0; cls < nc; ++cls) coef(cls, j) = alphas[cls][used[j]];
  }
  return std::make_unique<KernelSvm>(std::move(p.labels), d, gamma, std::move(support), std::move(coef),
                                     std::move(bias));
}

namespace detail {

std::unique_ptr<Classifier> load_linear_svm(ArchiveReader& in, std::vector<std::string> labels, std::size_t dim) {
  return std::make_unique<LinearSvm>(std::move(labels), dim, in.read_doubles("weights"));
}

std::unique_ptr<Classifier> load_kernel_svm(ArchiveReader& in, std::vector<std::string> labels, std::size_t dim) {
  const double gamma = in.read_double("gamma");
  Matrix support = in.read_matrix("support");
  Matrix coef = in.read_matrix("coef");
  return std::make_unique<KernelSvm>(std::move(labels), dim, gamma, std::move(support), std::move(coef),
                                     in.read_doubles("bias"));
}

}  // namespace detail
}  // namespace mixintent
