#pragma once

#include <cstdint>

#include <random>

namespace vbunmix {

// Quantile function of the standard normal. Rational initial guess refined
// by one Halley step against erfc; good to a few ulp away from the extreme
// tails, ~1e-9 relative inside them.
double inverse_normal_cdf(double p);

// Deterministic sampler built on mt19937_64 with hand-rolled transforms, so
// streams do not depend on the standard library's implementation-defined
// distribution algorithms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // uniform on (0, 1) (both endpoints excluded)
  double uniform();
  double uniform(double lo, double hi);
  double normal();  // standard normal via inverse CDF
  double normal(double mean, double stddev);
  // Marsaglia-Tsang; any shape > 0, rate parameterization
  double gamma(double shape, double rate);
  // Michael-Schucany-Haas; mean/shape parameterization
  double inverse_gaussian(double mean, double shape);
  // N(mu, sigma^2) restricted to [0, inf). Inverse CDF when the retained
  // mass is not too far out, exponential-proposal rejection for deep
  // truncation (-mu/sigma > 4).
  double truncated_normal(double mu, double sigma);

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace vbunmix
