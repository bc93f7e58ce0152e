#include "vbunmix/special_functions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace vbunmix {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490;
constexpr double kLogSqrt2Pi = 0.9189385332046727417803297364056176;
constexpr double kSqrt2OverPi = 0.7978845608028653558798921198687637;
constexpr double kSqrtPi = 1.7724538509055160272981674833411452;

// exp(x^2) * erfc(x) for x >= 0. The direct product is exact enough up to the
// point where erfc underflows; past that an 8-term asymptotic series is at
// full double precision already.
double erfcx_nonneg(double x) {
  if (x < 26.0) {
    return std::exp(x * x) * std::erfc(x);
  }
  const double inv2x2 = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n <= 8; ++n) {
    term *= -static_cast<double>(2 * n - 1) * inv2x2;
    sum += term;
  }
  return sum / (x * kSqrtPi);
}

// gap(t) = hazard_ratio(-t) - t, as the continued fraction
//   gap = 1 / (t + 2 / (t + 3 / (t + 4 / (t + ...))))
// evaluated with the modified Lentz scheme. Used for t >= 6 where the
// subtraction hazard_ratio(-t) - t would lose most of its digits.
double mills_gap(double t) {
  const double tiny = 1e-300;
  double f = tiny;
  double c = f;
  double d = 0.0;
  for (int j = 1; j < 1000; ++j) {
    const double a = (j == 1) ? 1.0 : static_cast<double>(j);
    d = t + a * d;
    if (d == 0.0) d = tiny;
    c = t + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return f;
}

}  // namespace

double hazard_ratio(double z) {
  if (!std::isfinite(z)) {
    throw std::domain_error("hazard_ratio: input must be finite");
  }
  if (z < 0.0) {
    return kSqrt2OverPi / erfcx_nonneg(-z * kInvSqrt2);
  }
  // Phi(z) >= 1/2 here; the density is the only small factor, so evaluate it
  // in log space and let extreme z underflow to the nearest representable.
  const double cdf = 0.5 * std::erfc(-z * kInvSqrt2);
  return std::exp(-0.5 * z * z - kLogSqrt2Pi - std::log(cdf));
}

TruncatedNormalMoments truncated_normal_moments(double mu, double sigma) {
  if (!std::isfinite(mu) || !std::isfinite(sigma) || sigma <= 0.0) {
    throw std::domain_error("truncated_normal_moments: require finite mu and sigma > 0");
  }
  const double z = mu / sigma;
  double mean;
  double variance;
  if (z <= -6.0) {
    const double t = -z;
    const double gap = mills_gap(t);
    mean = sigma * gap;
    variance = sigma * sigma * ((1.0 - t * gap) - gap * gap);
  } else {
    const double h = hazard_ratio(z);
    mean = mu + sigma * h;
    variance = sigma * sigma * ((1.0 - z * h) - h * h);
  }
  const double cap = sigma * sigma;
  if (variance > cap) variance = cap;
  if (!(variance > 0.0)) variance = cap * std::numeric_limits<double>::epsilon();
  return {mean, variance};
}

GigHalfMoments gig_half_moments(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b) || a <= 0.0 || b <= 0.0) {
    throw std::domain_error("gig_half_moments: require finite a > 0 and b > 0");
  }
  const double root = std::sqrt(b / a);
  return {root, 1.0 / root + 1.0 / b};
}

}  // namespace vbunmix
