#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vbunmix {

// One pixel's measured spectrum: radiance per retained band.
struct PixelSpectrum {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t k) const noexcept { return values[k]; }
  operator std::span<const double>() const noexcept { return values; }
};

// The M x N signature matrix: one column per endmember, stored column-major
// with the squared column norms cached at construction.
//
// Construction validates that every entry is finite and that no column is
// identically zero (a zero column makes the abundance update ill-posed once
// its precision collapses).
class EndmemberMatrix {
 public:
  EndmemberMatrix(std::size_t bands, std::size_t endmembers, std::vector<double> column_major);

  std::size_t bands() const noexcept { return bands_; }             // M
  std::size_t endmember_count() const noexcept { return count_; }   // N

  std::span<const double> column(std::size_t i) const noexcept {
    return {data_.data() + i * bands_, bands_};
  }
  double at(std::size_t band, std::size_t i) const noexcept { return data_[i * bands_ + band]; }
  double column_sq_norm(std::size_t i) const noexcept { return column_sq_norms_[i]; }
  std::span<const double> column_sq_norms() const noexcept { return column_sq_norms_; }

 private:
  std::size_t bands_ = 0;
  std::size_t count_ = 0;
  std::vector<double> data_;
  std::vector<double> column_sq_norms_;
};

// Fixed scalars of the two Gamma hyperpriors: (rho, delta) on the noise
// precision, (kappa, nu) on the per-coefficient scales. All must be > 0.
struct Hyperparameters {
  double rho = 1e-6;
  double delta = 1e-6;
  double kappa = 1e-6;
  double nu = 1e-6;

  void validate() const;  // throws std::domain_error on violation
};

// Every per-pixel variational moment, plus the running residual y - Phi*<w>.
//
// Stored identities that hold after every update:
//   mean_w_sq[i] == mean_w[i]^2 + sigma_tr_sq[i]
//   residual     == y - Phi * mean_w   (to bookkeeping precision)
// and every field below except mu is strictly positive.
struct PosteriorState {
  std::vector<double> mean_w;         // <w_i>, truncated-normal means
  std::vector<double> mu;             // untruncated factor means
  std::vector<double> sigma_sq;       // untruncated factor variances
  std::vector<double> sigma_tr_sq;    // truncated factor variances
  std::vector<double> mean_w_sq;      // <w_i^2>
  std::vector<double> mean_alpha;     // <alpha_i>
  std::vector<double> mean_inv_alpha; // <1/alpha_i>
  std::vector<double> mean_b;         // <b_i>
  double mean_beta = 0.0;             // <beta>
  std::vector<double> residual;       // y - Phi * mean_w, length M

  std::size_t endmember_count() const noexcept { return mean_w.size(); }
  std::size_t bands() const noexcept { return residual.size(); }
};

struct ConvergenceReport {
  std::size_t iterations = 0;
  double final_delta = 0.0;  // max |change in <w_i>| over the last sweep
  bool converged = false;
};

// Deterministic starting point: zero abundances, unit precisions and scales,
// and a data-scaled noise precision M / (y'y + 1e-12).
PosteriorState init_state(const PixelSpectrum& y, const EndmemberMatrix& phi,
                          const Hyperparameters& hyper);

// Log density of the nonnegatively truncated Laplace marginal over w:
//   sum_i [ 0.5*log(beta*b_i) - sqrt(beta*b_i)*w_i ]   for w >= 0,
// -inf if any w_i < 0. Validation-only; the inference loop works with the
// hierarchical form instead.
double laplace_marginal_log_density(std::span<const double> w, std::span<const double> b,
                                    double beta);

// Prior log densities, evaluated pointwise. Out-of-support points return
// -inf rather than throwing.
double gamma_log_density(double x, double shape, double rate);
double inverse_gamma_log_density(double x, double shape, double scale);

// Gamma(beta; rho, delta) noise-precision prior.
double noise_precision_prior_log_density(double beta, const Hyperparameters& hyper);
// Product over i of the zero-mean nonneg-truncated Gaussian factors with
// component precisions beta * alpha_i.
double abundance_prior_log_density(std::span<const double> w, std::span<const double> alpha,
                                   double beta);
// InvGamma(alpha_i; 1, b_i/2) per-coefficient precision prior.
double precision_prior_log_density(double alpha, double b);
// Gamma(b_i; kappa, nu) scale hyperprior.
double scale_prior_log_density(double b, const Hyperparameters& hyper);

// sqrt of the ratio of extreme eigenvalues of Phi'Phi; +inf when the matrix
// is numerically rank deficient.
double condition_estimate(const EndmemberMatrix& phi);

}  // namespace vbunmix
