#include "vbunmix/vb_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "vbunmix/errors.hpp"
#include "vbunmix/special_functions.hpp"

namespace vbunmix {

namespace {

// Floor on <w_i^2> before it becomes the GIG "a" parameter, so an annihilated
// coefficient maps to a huge but finite precision.
constexpr double kMeanWSqFloor = 1e-30;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double sq_norm(std::span<const double> a) { return dot(a, a); }

// First non-finite field, or nullptr if the state is clean.
const char* find_non_finite(const PosteriorState& s, std::size_t* index) {
  const auto scan = [index](const std::vector<double>& v, const char* name) -> const char* {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v[i])) {
        *index = i;
        return name;
      }
    }
    return nullptr;
  };
  if (const char* n = scan(s.mean_w, "mean_w")) return n;
  if (const char* n = scan(s.mu, "mu")) return n;
  if (const char* n = scan(s.sigma_sq, "sigma_sq")) return n;
  if (const char* n = scan(s.sigma_tr_sq, "sigma_tr_sq")) return n;
  if (const char* n = scan(s.mean_w_sq, "mean_w_sq")) return n;
  if (const char* n = scan(s.mean_alpha, "mean_alpha")) return n;
  if (const char* n = scan(s.mean_inv_alpha, "mean_inv_alpha")) return n;
  if (const char* n = scan(s.mean_b, "mean_b")) return n;
  if (const char* n = scan(s.residual, "residual")) return n;
  if (!std::isfinite(s.mean_beta)) {
    *index = 0;
    return "mean_beta";
  }
  return nullptr;
}

}  // namespace

void EngineOptions::validate() const {
  if (!(tolerance > 0.0)) throw std::domain_error("EngineOptions: tolerance must be > 0");
  if (min_sweeps < 1 || max_sweeps < min_sweeps) {
    throw std::domain_error("EngineOptions: need max_sweeps >= min_sweeps >= 1");
  }
}

void update_noise_factor(PosteriorState& state, const PixelSpectrum& /*y*/,
                         const EndmemberMatrix& phi, const Hyperparameters& hyper) {
  // the stored residual already carries y - Phi*<w>
  const std::size_t m = phi.bands();
  const std::size_t n = phi.endmember_count();
  double quad = 0.0;       // <w' A w> = sum_i <alpha_i><w_i^2>
  double smear = 0.0;      // sum_i sigma_tr_sq_i * |phi_i|^2
  for (std::size_t i = 0; i < n; ++i) {
    quad += state.mean_alpha[i] * state.mean_w_sq[i];
    smear += state.sigma_tr_sq[i] * phi.column_sq_norm(i);
  }
  const double fit = sq_norm(state.residual) + smear;  // <|y - Phi w|^2>
  state.mean_beta = (2.0 * hyper.rho + static_cast<double>(m) + static_cast<double>(n)) /
                    (2.0 * hyper.delta + quad + fit);
}

void update_abundance_factor(std::size_t i, PosteriorState& state, const PixelSpectrum& /*y*/,
                             const EndmemberMatrix& phi) {
  if (i >= phi.endmember_count()) {
    throw std::domain_error("update_abundance_factor: endmember index out of range");
  }
  const auto col = phi.column(i);
  const double col_sq = phi.column_sq_norm(i);
  const double denom = state.mean_alpha[i] + col_sq;
  const double old_mean = state.mean_w[i];

  // phi_i' (y - Phi_{-i} <w_{-i}>) = phi_i' residual + |phi_i|^2 <w_i>
  const double mu = (dot(col, state.residual) + col_sq * old_mean) / denom;
  const double sigma_sq = 1.0 / (state.mean_beta * denom);
  const auto tn = truncated_normal_moments(mu, std::sqrt(sigma_sq));

  state.mu[i] = mu;
  state.sigma_sq[i] = sigma_sq;
  state.mean_w[i] = tn.mean;
  state.sigma_tr_sq[i] = tn.variance;
  state.mean_w_sq[i] = tn.mean * tn.mean + tn.variance;

  const double shift = old_mean - tn.mean;
  if (shift != 0.0) {
    for (std::size_t k = 0; k < col.size(); ++k) state.residual[k] += col[k] * shift;
  }
}

void update_precision_factor(std::size_t i, PosteriorState& state) {
  if (i >= state.endmember_count()) {
    throw std::domain_error("update_precision_factor: endmember index out of range");
  }
  const double a = state.mean_beta * std::max(state.mean_w_sq[i], kMeanWSqFloor);
  const auto gig = gig_half_moments(a, state.mean_b[i]);
  state.mean_alpha[i] = gig.mean;
  state.mean_inv_alpha[i] = gig.mean_inverse;
}

void update_scale_factor(std::size_t i, PosteriorState& state, const Hyperparameters& hyper) {
  if (i >= state.endmember_count()) {
    throw std::domain_error("update_scale_factor: endmember index out of range");
  }
  state.mean_b[i] = (hyper.kappa + 1.0) / (hyper.nu + 0.5 * state.mean_inv_alpha[i]);
}

void sweep(PosteriorState& state, const PixelSpectrum& y, const EndmemberMatrix& phi,
           const Hyperparameters& hyper) {
  update_noise_factor(state, y, phi, hyper);
  for (std::size_t i = 0; i < phi.endmember_count(); ++i) {
    update_abundance_factor(i, state, y, phi);
    update_precision_factor(i, state);
    update_scale_factor(i, state, hyper);
  }
}

UnmixResult run(const PixelSpectrum& y, const EndmemberMatrix& phi, const Hyperparameters& hyper,
                const EngineOptions& opts) {
  opts.validate();
  PosteriorState state = init_state(y, phi, hyper);
  const std::size_t n = phi.endmember_count();

  std::vector<double> prev(n);
  ConvergenceReport report;
  for (std::size_t s = 1; s <= opts.max_sweeps; ++s) {
    prev = state.mean_w;
    try {
      sweep(state, y, phi, hyper);
    } catch (const NumericalError&) {
      throw;
    } catch (const std::exception& e) {
      throw NumericalError(s, "sweep", e.what());
    }
    std::size_t bad_index = 0;
    if (const char* field = find_non_finite(state, &bad_index)) {
      throw NumericalError(s, std::string(field) + "[" + std::to_string(bad_index) + "]",
                           "non-finite value");
    }
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) delta = std::max(delta, std::abs(state.mean_w[i] - prev[i]));
    report.iterations = s;
    report.final_delta = delta;
    if (s >= opts.min_sweeps && delta <= opts.tolerance) {
      report.converged = true;
      break;
    }
  }
  return {std::move(state.mean_w), state.mean_beta, report};
}

BatchResult unmix_image(const PixelBlock& block, const EndmemberMatrix& phi,
                        const Hyperparameters& hyper, const EngineOptions& opts,
                        unsigned threads) {
  opts.validate();
  hyper.validate();
  if (block.bands != phi.bands()) {
    throw ShapeError("unmix_image: pixel length " + std::to_string(block.bands) +
                     " does not match matrix bands " + std::to_string(phi.bands()));
  }
  const std::size_t n = phi.endmember_count();
  BatchResult out;
  out.pixels = block.pixels;
  out.endmembers = n;
  out.abundances.assign(block.pixels * n, 0.0);
  out.noise_precision.assign(block.pixels, 0.0);
  out.reports.assign(block.pixels, {});

  const unsigned worker_count = std::max(1u, threads);
  std::vector<std::vector<PixelFailure>> failures(worker_count);

  const auto work = [&](unsigned worker, std::size_t begin, std::size_t end) {
    PixelSpectrum y;
    for (std::size_t p = begin; p < end; ++p) {
      const auto px = block.pixel(p);
      y.values.assign(px.begin(), px.end());
      try {
        UnmixResult r = run(y, phi, hyper, opts);
        std::copy(r.abundances.begin(), r.abundances.end(), out.abundances.begin() + p * n);
        out.noise_precision[p] = r.noise_precision;
        out.reports[p] = r.report;
      } catch (const NumericalError& e) {
        std::fill_n(out.abundances.begin() + p * n, n, -1.0);
        out.noise_precision[p] = -1.0;
        out.reports[p] = {e.sweep(), std::numeric_limits<double>::infinity(), false};
        failures[worker].push_back({p, e.sweep(), e.what()});
      } catch (const std::exception& e) {
        std::fill_n(out.abundances.begin() + p * n, n, -1.0);
        out.noise_precision[p] = -1.0;
        out.reports[p] = {0, std::numeric_limits<double>::infinity(), false};
        failures[worker].push_back({p, 0, e.what()});
      }
    }
  };

  if (worker_count == 1 || block.pixels <= 1) {
    work(0, 0, block.pixels);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (block.pixels + worker_count - 1) / worker_count;
    for (unsigned t = 0; t < worker_count; ++t) {
      const std::size_t begin = std::min<std::size_t>(t * chunk, block.pixels);
      const std::size_t end = std::min<std::size_t>(begin + chunk, block.pixels);
      if (begin < end) pool.emplace_back(work, t, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  for (auto& f : failures) {
    out.failures.insert(out.failures.end(), f.begin(), f.end());
  }
  std::sort(out.failures.begin(), out.failures.end(),
            [](const PixelFailure& a, const PixelFailure& b) { return a.pixel < b.pixel; });
  return out;
}

}  // namespace vbunmix
