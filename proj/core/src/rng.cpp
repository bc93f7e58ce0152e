#include "vbunmix/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace vbunmix {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310005024157652848110453;
constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490;

// Acklam's rational approximation, ~1.15e-9 relative.
double inverse_normal_cdf_approx(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;

  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double inverse_normal_cdf(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::domain_error("inverse_normal_cdf: p must lie strictly in (0, 1)");
  }
  double x = inverse_normal_cdf_approx(p);
  // One Halley step; skipped where exp(x^2/2) would overflow (the raw
  // approximation is already adequate that far out).
  if (std::abs(x) < 36.0) {
    const double err = 0.5 * std::erfc(-x * kInvSqrt2) - p;
    const double u = err * kSqrt2Pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double Rng::uniform() {
  // 53-bit mantissa, shifted off zero
  const double u = (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  return u;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() { return inverse_normal_cdf(uniform()); }

double Rng::normal(double mean, double stddev) { return mean + stddev * normal(); }

double Rng::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw std::domain_error("Rng::gamma: shape and rate must be > 0");
  }
  if (shape < 1.0) {
    // boost: Gamma(shape) = Gamma(shape + 1) * U^{1/shape}
    const double g = gamma(shape + 1.0, 1.0);
    return g * std::pow(uniform(), 1.0 / shape) / rate;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double Rng::inverse_gaussian(double mean, double shape) {
  if (!(mean > 0.0) || !(shape > 0.0)) {
    throw std::domain_error("Rng::inverse_gaussian: mean and shape must be > 0");
  }
  const double nu = normal();
  const double y = nu * nu;
  // smaller Michael-Schucany-Haas root, written as
  // mean * (sqrt(u^2 + 4*shape*u) - u) / (sqrt(u^2 + 4*shape*u) + u)
  // with u = mean*y, which stays positive even when u dwarfs the shape.
  const double u = mean * y;
  const double s = std::sqrt(1.0 + 4.0 * shape / u);  // u == 0 maps to x = mean
  double x = mean * (1.0 - 2.0 / (s + 1.0));
  if (!(x > 0.0)) x = std::numeric_limits<double>::min();
  const double v = uniform();
  if (v <= mean / (mean + x)) return x;
  return mean * mean / x;
}

double Rng::truncated_normal(double mu, double sigma) {
  if (!(sigma > 0.0)) throw std::domain_error("Rng::truncated_normal: sigma must be > 0");
  const double a = -mu / sigma;  // lower bound in standard units
  if (a <= 4.0) {
    // z = -Phi^{-1}(Q(a) * v): uniform tail mass keeps precision for a near 4
    const double q = 0.5 * std::erfc(a * kInvSqrt2);
    double z;
    do {
      z = -inverse_normal_cdf(q * uniform());
    } while (z < a);
    return mu + sigma * z;
  }
  // Robert's exponential-proposal rejection
  const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a - std::log(uniform()) / lambda;
    const double diff = z - lambda;
    if (std::log(uniform()) <= -0.5 * diff * diff) return mu + sigma * z;
  }
}

}  // namespace vbunmix
