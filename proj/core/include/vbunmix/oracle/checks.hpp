#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vbunmix/synthetic.hpp"

namespace vbunmix::oracle {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;  // worst observed error / statistic
  double limit = 0.0;
  std::string detail;
};

// Closed-form kernels against their quadrature references over wide grids:
// hazard ratio, truncated-normal moments, GIG(-1/2) moments, all at 1e-10
// relative.
std::vector<CheckResult> special_function_fidelity_checks();

// Closed-form truncated-Laplace marginal against numerical marginalization
// of the two-level hierarchy, at 1e-8 relative.
std::vector<CheckResult> marginal_derivation_checks(std::size_t points, std::uint64_t seed);

// Production engine against the no-caching reference sweep on random small
// instances, at 1e-12 relative per state field per sweep.
std::vector<CheckResult> engine_reference_checks(std::size_t instances, std::size_t sweeps,
                                                 std::uint64_t seed);

// The committed reference problem for sampler-based comparisons: M=20, N=5.
SyntheticInstance reference_fixture();

// Frozen sampler results for reference_fixture(), as written by the fixture
// generator.
struct GibbsReference {
  std::size_t samples = 0;
  std::size_t burn_in = 0;
  std::uint64_t seed = 0;
  std::vector<double> w_mean;
  std::vector<double> w_stderr;
  double beta_mean = 0.0;
  double beta_stderr = 0.0;
};
GibbsReference load_gibbs_reference(const std::string& path);

// Variational means against Gibbs means on reference_fixture(); coefficients
// below `small_cutoff` are compared absolutely.
std::vector<CheckResult> gibbs_agreement_checks(std::size_t samples, std::size_t burn_in,
                                                std::uint64_t seed);

// Randomized stress: positivity of all state fields, the <w^2> identity,
// residual drift, and thread-count determinism of the batch path.
std::vector<CheckResult> invariant_stress_checks(std::size_t instances, std::uint64_t seed);

// One "[PASS]/[FAIL] name: measured vs limit" line per result; returns the
// number of failures.
int report(std::span<const CheckResult> results, std::ostream& out);

}  // namespace vbunmix::oracle
