#include "vbunmix/oracle/naive_engine.hpp"

#include <algorithm>
#include <cmath>

#include "vbunmix/special_functions.hpp"

namespace vbunmix::oracle {

namespace {

// recomputed on demand, never cached
double column_dot(const EndmemberMatrix& phi, std::size_t i, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t k = 0; k < phi.bands(); ++k) s += phi.at(k, i) * v[k];
  return s;
}

std::vector<double> residual_from_scratch(const NaiveState& state, const PixelSpectrum& y,
                                          const EndmemberMatrix& phi) {
  std::vector<double> r(y.values);
  for (std::size_t j = 0; j < phi.endmember_count(); ++j) {
    for (std::size_t k = 0; k < phi.bands(); ++k) r[k] -= phi.at(k, j) * state.mean_w[j];
  }
  return r;
}

}  // namespace

NaiveState naive_init(const PixelSpectrum& y, const EndmemberMatrix& phi,
                      const Hyperparameters& hyper) {
  hyper.validate();
  const std::size_t n = phi.endmember_count();
  NaiveState s;
  s.mean_w.assign(n, 0.0);
  s.mu.assign(n, 0.0);
  s.mean_alpha.assign(n, 1.0);
  s.mean_inv_alpha.assign(n, 2.0);
  s.mean_b.assign(n, 1.0);
  s.sigma_tr_sq.assign(n, 1e-30);
  s.mean_w_sq.assign(n, 1e-30);
  double yy = 0.0;
  for (double v : y.values) yy += v * v;
  s.mean_beta = static_cast<double>(phi.bands()) / (yy + 1e-12);
  s.sigma_sq.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double col_sq = 0.0;
    for (std::size_t k = 0; k < phi.bands(); ++k) col_sq += phi.at(k, i) * phi.at(k, i);
    s.sigma_sq[i] = 1.0 / (s.mean_beta * (1.0 + col_sq));
  }
  return s;
}

void naive_sweep(NaiveState& state, const PixelSpectrum& y, const EndmemberMatrix& phi,
                 const Hyperparameters& hyper) {
  const std::size_t m = phi.bands();
  const std::size_t n = phi.endmember_count();

  // noise factor from definitions
  {
    double quad = 0.0;
    double smear = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double col_sq = 0.0;
      for (std::size_t k = 0; k < m; ++k) col_sq += phi.at(k, i) * phi.at(k, i);
      quad += state.mean_alpha[i] * state.mean_w_sq[i];
      smear += state.sigma_tr_sq[i] * col_sq;
    }
    const std::vector<double> r = residual_from_scratch(state, y, phi);
    double fit = 0.0;
    for (double v : r) fit += v * v;
    state.mean_beta = (2.0 * hyper.rho + static_cast<double>(m) + static_cast<double>(n)) /
                      (2.0 * hyper.delta + quad + fit + smear);
  }

  for (std::size_t i = 0; i < n; ++i) {
    // y minus the contribution of every other column, built explicitly
    std::vector<double> partial(y.values);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      for (std::size_t k = 0; k < m; ++k) partial[k] -= phi.at(k, j) * state.mean_w[j];
    }
    double col_sq = 0.0;
    for (std::size_t k = 0; k < m; ++k) col_sq += phi.at(k, i) * phi.at(k, i);
    const double denom = state.mean_alpha[i] + col_sq;
    const double mu = column_dot(phi, i, partial) / denom;
    const double sigma_sq = 1.0 / (state.mean_beta * denom);
    const auto tn = truncated_normal_moments(mu, std::sqrt(sigma_sq));
    state.mu[i] = mu;
    state.sigma_sq[i] = sigma_sq;
    state.mean_w[i] = tn.mean;
    state.sigma_tr_sq[i] = tn.variance;
    state.mean_w_sq[i] = tn.mean * tn.mean + tn.variance;

    const auto gig = gig_half_moments(state.mean_beta * std::max(state.mean_w_sq[i], 1e-30),
                                      state.mean_b[i]);
    state.mean_alpha[i] = gig.mean;
    state.mean_inv_alpha[i] = gig.mean_inverse;

    state.mean_b[i] = (hyper.kappa + 1.0) / (hyper.nu + 0.5 * state.mean_inv_alpha[i]);
  }
}

}  // namespace vbunmix::oracle
