#include "vbunmix/oracle/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "vbunmix/errors.hpp"
#include "vbunmix/model.hpp"
#include "vbunmix/oracle/naive_engine.hpp"
#include "vbunmix/oracle/reference_moments.hpp"
#include "vbunmix/rng.hpp"
#include "vbunmix/vb_engine.hpp"

namespace vbunmix::oracle {

namespace {

double rel_err(double got, double want) {
  const double scale = std::max(std::abs(got), std::abs(want));
  if (scale == 0.0) return 0.0;
  return std::abs(got - want) / scale;
}

// relative with a floor for values at the bottom of the double range
double state_diff(double a, double b) {
  return std::abs(a - b) / (std::max(std::abs(a), std::abs(b)) + 1e-300);
}

std::vector<double> signed_log_grid(double lo, double hi, std::size_t per_side) {
  std::vector<double> g;
  g.push_back(0.0);
  const double ratio = std::pow(hi / lo, 1.0 / static_cast<double>(per_side - 1));
  double v = lo;
  for (std::size_t i = 0; i < per_side; ++i) {
    g.push_back(v);
    g.push_back(-v);
    v *= ratio;
  }
  std::sort(g.begin(), g.end());
  return g;
}

// random instance for engine comparisons: arbitrary small design, mixed
// signal plus noise, nothing degenerate
SyntheticInstance small_instance(Rng& rng) {
  const std::size_t n = 1 + static_cast<std::size_t>(rng.raw() % 4);
  const std::size_t m = n + static_cast<std::size_t>(rng.raw() % (11 - n));
  const std::size_t k = 1 + static_cast<std::size_t>(rng.raw() % n);
  const double snr = rng.uniform(10.0, 40.0);
  const double corr = rng.uniform(0.0, 0.9);
  return generate_instance(m, n, k, snr, corr, rng.raw());
}

}  // namespace

std::vector<CheckResult> special_function_fidelity_checks() {
  std::vector<CheckResult> out;

  {
    double worst = 0.0;
    double worst_z = 0.0;
    for (double z : signed_log_grid(1e-3, 35.0, 60)) {
      const double got = vbunmix::hazard_ratio(z);
      const double want = hazard_ratio_reference(z);
      const double e = rel_err(got, want);
      if (e > worst) {
        worst = e;
        worst_z = z;
      }
    }
    char detail[64];
    std::snprintf(detail, sizeof detail, "worst at z = %.6g", worst_z);
    out.push_back({"hazard_ratio vs quadrature, z in [-35, 35]", worst <= 1e-10, worst, 1e-10,
                   detail});
  }

  {
    double worst = 0.0;
    std::string where;
    for (double sigma : {0.07, 1.0, 13.0}) {
      for (double z = -30.0; z <= 30.0001; z += 1.25) {
        const double mu = z * sigma;
        const auto got = vbunmix::truncated_normal_moments(mu, sigma);
        const auto want = truncated_normal_moments_reference(mu, sigma);
        const double e = std::max(rel_err(got.mean, want.mean),
                                  rel_err(got.variance, want.variance));
        if (e > worst) {
          worst = e;
          where = "mu/sigma = " + std::to_string(z) + ", sigma = " + std::to_string(sigma);
        }
      }
    }
    out.push_back({"truncated_normal_moments vs quadrature, mu/sigma in [-30, 30]",
                   worst <= 1e-10, worst, 1e-10, where});
  }

  {
    double worst = 0.0;
    std::string where;
    for (double a = 1e-3; a <= 1.001e3; a *= 10.0) {
      for (double b = 1e-3; b <= 1.001e3; b *= 10.0) {
        const auto got = vbunmix::gig_half_moments(a, b);
        const auto want = gig_half_moments_reference(a, b);
        const double e = std::max(rel_err(got.mean, want.mean),
                                  rel_err(got.mean_inverse, want.mean_inverse));
        if (e > worst) {
          worst = e;
          where = "a = " + std::to_string(a) + ", b = " + std::to_string(b);
        }
      }
    }
    out.push_back({"gig_half_moments vs quadrature, a,b in [1e-3, 1e3]", worst <= 1e-10, worst,
                   1e-10, where});
  }

  return out;
}

std::vector<CheckResult> marginal_derivation_checks(std::size_t points, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  std::string where;
  for (std::size_t p = 0; p < points; ++p) {
    const double w = (p % 7 == 0) ? 0.0 : rng.uniform(0.0, 3.0);
    const double b = rng.uniform(0.05, 8.0);
    const double beta = rng.uniform(0.05, 8.0);
    const double rate = std::sqrt(beta * b);
    const double closed = rate * std::exp(-rate * w);
    const double numeric = marginal_component_density_reference(w, b, beta);
    const double e = rel_err(closed, numeric);
    if (e > worst) {
      worst = e;
      char buf[96];
      std::snprintf(buf, sizeof buf, "w = %.4g, b = %.4g, beta = %.4g", w, b, beta);
      where = buf;
    }
  }
  return {{"truncated-Laplace marginal vs marginalized hierarchy, " + std::to_string(points) +
               " points",
           worst <= 1e-8, worst, 1e-8, where}};
}

std::vector<CheckResult> engine_reference_checks(std::size_t instances, std::size_t sweeps,
                                                 std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  std::string where;
  const Hyperparameters hyper;

  for (std::size_t t = 0; t < instances; ++t) {
    const SyntheticInstance inst = small_instance(rng);
    PosteriorState state = init_state(inst.y, inst.phi, hyper);
    NaiveState ref = naive_init(inst.y, inst.phi, hyper);

    for (std::size_t s = 0; s < sweeps; ++s) {
      sweep(state, inst.y, inst.phi, hyper);
      naive_sweep(ref, inst.y, inst.phi, hyper);

      double e = state_diff(state.mean_beta, ref.mean_beta);
      for (std::size_t i = 0; i < inst.phi.endmember_count(); ++i) {
        e = std::max(e, state_diff(state.mean_w[i], ref.mean_w[i]));
        e = std::max(e, state_diff(state.mu[i], ref.mu[i]));
        e = std::max(e, state_diff(state.sigma_sq[i], ref.sigma_sq[i]));
        e = std::max(e, state_diff(state.sigma_tr_sq[i], ref.sigma_tr_sq[i]));
        e = std::max(e, state_diff(state.mean_w_sq[i], ref.mean_w_sq[i]));
        e = std::max(e, state_diff(state.mean_alpha[i], ref.mean_alpha[i]));
        e = std::max(e, state_diff(state.mean_inv_alpha[i], ref.mean_inv_alpha[i]));
        e = std::max(e, state_diff(state.mean_b[i], ref.mean_b[i]));
      }
      if (e > worst) {
        worst = e;
        where = "instance " + std::to_string(t) + ", sweep " + std::to_string(s + 1);
      }
    }
  }
  return {{"engine vs no-caching reference, " + std::to_string(instances) + " instances x " +
               std::to_string(sweeps) + " sweeps",
           worst <= 1e-12, worst, 1e-12, where}};
}

SyntheticInstance reference_fixture() {
  return generate_instance(20, 5, 2, 30.0, 0.5, 20250607);
}

GibbsReference load_gibbs_reference(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("load_gibbs_reference: cannot open " + path);
  std::string tag;
  int version = 0;
  GibbsReference ref;
  f >> tag >> version;
  if (tag != "vbunmix-gibbs-reference" || version != 1) {
    throw ParseError("load_gibbs_reference: unrecognized file " + path);
  }
  f >> tag >> ref.samples >> tag >> ref.burn_in >> tag >> ref.seed;
  f >> tag;
  ref.w_mean.resize(5);
  for (auto& v : ref.w_mean) f >> v;
  f >> tag;
  ref.w_stderr.resize(5);
  for (auto& v : ref.w_stderr) f >> v;
  f >> tag >> ref.beta_mean >> tag >> ref.beta_stderr;
  if (!f) throw ParseError("load_gibbs_reference: truncated file " + path);
  return ref;
}

std::vector<CheckResult> gibbs_agreement_checks(std::size_t samples, std::size_t burn_in,
                                                std::uint64_t seed) {
  const SyntheticInstance inst = reference_fixture();
  const Hyperparameters hyper;
  const GibbsEstimate gibbs = gibbs_sample(inst.y, inst.phi, hyper, samples, burn_in, seed);
  const UnmixResult vb = run(inst.y, inst.phi, hyper);

  const double small_cutoff = 0.05;
  double worst_rel = 0.0;
  double worst_abs = 0.0;
  std::string where;
  for (std::size_t i = 0; i < gibbs.w_mean.size(); ++i) {
    if (gibbs.w_mean[i] >= small_cutoff) {
      const double e = std::abs(vb.abundances[i] - gibbs.w_mean[i]) / gibbs.w_mean[i];
      if (e > worst_rel) {
        worst_rel = e;
        where = "coefficient " + std::to_string(i + 1);
      }
    } else {
      worst_abs = std::max(worst_abs, std::abs(vb.abundances[i] - gibbs.w_mean[i]));
    }
  }

  std::vector<CheckResult> out;
  out.push_back({"VB vs Gibbs means, active coefficients (relative)", worst_rel <= 0.10,
                 worst_rel, 0.10, where});
  out.push_back({"VB vs Gibbs means, near-zero coefficients (absolute)", worst_abs <= 0.02,
                 worst_abs, 0.02, ""});
  return out;
}

std::vector<CheckResult> invariant_stress_checks(std::size_t instances, std::uint64_t seed) {
  Rng rng(seed);
  const Hyperparameters hyper;

  double worst_identity = 0.0;
  double worst_residual = 0.0;
  bool all_positive = true;
  std::string where_pos;

  for (std::size_t t = 0; t < instances; ++t) {
    const SyntheticInstance inst = small_instance(rng);
    PosteriorState state = init_state(inst.y, inst.phi, hyper);
    const std::size_t n = inst.phi.endmember_count();

    for (std::size_t s = 0; s < 25; ++s) {
      sweep(state, inst.y, inst.phi, hyper);

      for (std::size_t i = 0; i < n; ++i) {
        const bool pos = state.mean_w[i] > 0.0 && state.sigma_sq[i] > 0.0 &&
                         state.sigma_tr_sq[i] > 0.0 && state.mean_w_sq[i] > 0.0 &&
                         state.mean_alpha[i] > 0.0 && state.mean_inv_alpha[i] > 0.0 &&
                         state.mean_b[i] > 0.0 && state.mean_beta > 0.0 &&
                         std::isfinite(state.mean_w_sq[i]) && std::isfinite(state.mean_alpha[i]);
        if (!pos && all_positive) {
          all_positive = false;
          where_pos = "instance " + std::to_string(t) + ", sweep " + std::to_string(s + 1) +
                      ", coefficient " + std::to_string(i + 1);
        }
        const double identity =
            std::abs(state.mean_w_sq[i] - (state.mean_w[i] * state.mean_w[i] +
                                           state.sigma_tr_sq[i])) /
            state.mean_w_sq[i];
        worst_identity = std::max(worst_identity, identity);
      }

      // residual drift vs direct recomputation
      double num = 0.0;
      double den = 0.0;
      for (std::size_t k = 0; k < inst.phi.bands(); ++k) {
        double direct = inst.y[k];
        for (std::size_t i = 0; i < n; ++i) direct -= inst.phi.at(k, i) * state.mean_w[i];
        num += (state.residual[k] - direct) * (state.residual[k] - direct);
        den += direct * direct;
      }
      worst_residual = std::max(worst_residual, std::sqrt(num / (den + 1e-300)));
    }
  }

  std::vector<CheckResult> out;
  out.push_back({"positivity of all moments after every sweep", all_positive,
                 all_positive ? 0.0 : 1.0, 0.0, where_pos});
  out.push_back({"moment identity <w^2> = <w>^2 + var after every sweep",
                 worst_identity <= 1e-12, worst_identity, 1e-12, ""});
  out.push_back({"residual drift vs direct recomputation", worst_residual <= 1e-8,
                 worst_residual, 1e-8, ""});

  {
    const SyntheticInstance inst = generate_instance(24, 6, 3, 25.0, 0.6, seed + 17);
    // a 6x4 image of perturbed copies of the fixture pixel
    const std::size_t pixels = 24;
    std::vector<double> data(pixels * inst.phi.bands());
    Rng prng(seed + 29);
    for (std::size_t p = 0; p < pixels; ++p) {
      for (std::size_t k = 0; k < inst.phi.bands(); ++k) {
        data[p * inst.phi.bands() + k] = inst.y[k] * (1.0 + 0.05 * prng.normal());
      }
    }
    const PixelBlock block{data.data(), pixels, inst.phi.bands()};
    const BatchResult one = unmix_image(block, inst.phi, hyper, {}, 1);
    const BatchResult many = unmix_image(block, inst.phi, hyper, {}, 7);
    const bool identical = one.abundances == many.abundances &&
                           one.noise_precision == many.noise_precision;
    out.push_back({"unmix_image bit-identical for 1 vs 7 threads", identical,
                   identical ? 0.0 : 1.0, 0.0, ""});
  }
  return out;
}

int report(std::span<const CheckResult> results, std::ostream& out) {
  int failures = 0;
  for (const auto& r : results) {
    char line[160];
    std::snprintf(line, sizeof line, "%s %s: measured %.3e (limit %.3e)",
                  r.passed ? "[PASS]" : "[FAIL]", r.name.c_str(), r.measured, r.limit);
    out << line;
    if (!r.detail.empty()) out << " | " << r.detail;
    out << "\n";
    if (!r.passed) ++failures;
  }
  return failures;
}

}  // namespace vbunmix::oracle
