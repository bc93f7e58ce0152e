#include "vbunmix/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "vbunmix/errors.hpp"

namespace vbunmix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.9189385332046727417803297364056176;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

EndmemberMatrix::EndmemberMatrix(std::size_t bands, std::size_t endmembers,
                                 std::vector<double> column_major)
    : bands_(bands), count_(endmembers), data_(std::move(column_major)) {
  if (bands_ == 0 || count_ == 0) {
    throw ShapeError("EndmemberMatrix: need at least one band and one endmember");
  }
  if (data_.size() != bands_ * count_) {
    throw ShapeError("EndmemberMatrix: expected " + std::to_string(bands_ * count_) +
                     " values, got " + std::to_string(data_.size()));
  }
  column_sq_norms_.resize(count_);
  for (std::size_t i = 0; i < count_; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < bands_; ++k) {
      const double v = data_[i * bands_ + k];
      if (!std::isfinite(v)) {
        throw std::domain_error("EndmemberMatrix: non-finite entry in column " +
                                std::to_string(i + 1));
      }
      s += v * v;
    }
    if (s <= 0.0) {
      throw std::domain_error("EndmemberMatrix: column " + std::to_string(i + 1) +
                              " is identically zero");
    }
    column_sq_norms_[i] = s;
  }
}

void Hyperparameters::validate() const {
  const bool ok = std::isfinite(rho) && rho > 0.0 && std::isfinite(delta) && delta > 0.0 &&
                  std::isfinite(kappa) && kappa > 0.0 && std::isfinite(nu) && nu > 0.0;
  if (!ok) throw std::domain_error("Hyperparameters: all four must be finite and > 0");
}

PosteriorState init_state(const PixelSpectrum& y, const EndmemberMatrix& phi,
                          const Hyperparameters& hyper) {
  hyper.validate();
  if (y.size() != phi.bands()) {
    throw ShapeError("init_state: spectrum has " + std::to_string(y.size()) + " bands, matrix " +
                     std::to_string(phi.bands()));
  }
  for (double v : y.values) {
    if (!std::isfinite(v)) throw std::domain_error("init_state: non-finite spectrum value");
  }

  const std::size_t n = phi.endmember_count();
  PosteriorState s;
  s.mean_w.assign(n, 0.0);
  s.mu.assign(n, 0.0);
  s.mean_alpha.assign(n, 1.0);
  s.mean_inv_alpha.assign(n, 2.0);  // 1/<alpha> + 1/<b> at alpha = b = 1
  s.mean_b.assign(n, 1.0);
  // Tiny but positive so the state satisfies its own positivity and
  // <w^2> = <w>^2 + sigma_tr^2 identities before the first sweep.
  s.sigma_tr_sq.assign(n, 1e-30);
  s.mean_w_sq.assign(n, 1e-30);
  s.mean_beta = static_cast<double>(phi.bands()) / (dot(y, y) + 1e-12);
  s.sigma_sq.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.sigma_sq[i] = 1.0 / (s.mean_beta * (s.mean_alpha[i] + phi.column_sq_norm(i)));
  }
  s.residual = y.values;
  return s;
}

double laplace_marginal_log_density(std::span<const double> w, std::span<const double> b,
                                    double beta) {
  if (w.size() != b.size()) {
    throw ShapeError("laplace_marginal_log_density: w and b sizes differ");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::domain_error("laplace_marginal_log_density: beta must be finite and > 0");
  }
  double logp = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] < 0.0) return kNegInf;
    if (!(b[i] > 0.0)) throw std::domain_error("laplace_marginal_log_density: b must be > 0");
    const double rate = std::sqrt(beta * b[i]);
    logp += std::log(rate) - rate * w[i];
  }
  return logp;
}

double gamma_log_density(double x, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw std::domain_error("gamma_log_density: shape and rate must be > 0");
  }
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double inverse_gamma_log_density(double x, double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw std::domain_error("inverse_gamma_log_density: shape and scale must be > 0");
  }
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

double noise_precision_prior_log_density(double beta, const Hyperparameters& hyper) {
  return gamma_log_density(beta, hyper.rho, hyper.delta);
}

double abundance_prior_log_density(std::span<const double> w, std::span<const double> alpha,
                                   double beta) {
  if (w.size() != alpha.size()) {
    throw ShapeError("abundance_prior_log_density: w and alpha sizes differ");
  }
  if (!(beta > 0.0)) throw std::domain_error("abundance_prior_log_density: beta must be > 0");
  double logp = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] < 0.0) return kNegInf;
    if (!(alpha[i] > 0.0)) {
      throw std::domain_error("abundance_prior_log_density: alpha must be > 0");
    }
    // 2 * N(w; 0, (beta*alpha)^-1) on the nonnegative half line
    const double prec = beta * alpha[i];
    logp += std::log(2.0) + 0.5 * std::log(prec) - kLogSqrt2Pi - 0.5 * prec * w[i] * w[i];
  }
  return logp;
}

double precision_prior_log_density(double alpha, double b) {
  if (!(b > 0.0)) throw std::domain_error("precision_prior_log_density: b must be > 0");
  return inverse_gamma_log_density(alpha, 1.0, 0.5 * b);
}

double scale_prior_log_density(double b, const Hyperparameters& hyper) {
  return gamma_log_density(b, hyper.kappa, hyper.nu);
}

double condition_estimate(const EndmemberMatrix& phi) {
  const std::size_t n = phi.endmember_count();
  // Gram matrix, then cyclic Jacobi; n is small (tens at most).
  std::vector<double> g(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = dot(phi.column(i), phi.column(j));
      g[i * n + j] = v;
      g[j * n + i] = v;
    }
  }
  for (int pass = 0; pass < 60; ++pass) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        off = std::max(off, std::abs(g[p * n + q]));
        if (std::abs(g[p * n + q]) < 1e-14 * std::sqrt(std::abs(g[p * n + p] * g[q * n + q])) ||
            g[p * n + q] == 0.0) {
          continue;
        }
        const double theta = 0.5 * (g[q * n + q] - g[p * n + p]) / g[p * n + q];
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double gkp = g[k * n + p];
          const double gkq = g[k * n + q];
          g[k * n + p] = c * gkp - s * gkq;
          g[k * n + q] = s * gkp + c * gkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double gpk = g[p * n + k];
          const double gqk = g[q * n + k];
          g[p * n + k] = c * gpk - s * gqk;
          g[q * n + k] = s * gpk + c * gqk;
        }
      }
    }
    if (off < 1e-300) break;
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lo = std::min(lo, g[i * n + i]);
    hi = std::max(hi, g[i * n + i]);
  }
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(hi / lo);
}

}  // namespace vbunmix
