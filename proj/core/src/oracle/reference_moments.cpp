#include "vbunmix/oracle/reference_moments.hpp"

#include <cmath>
#include <stdexcept>

#include "vbunmix/oracle/quadrature.hpp"

namespace vbunmix::oracle {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310005024157652848110453;
constexpr double kLog2 = 0.6931471805599453094172321214581766;

// Upper cutoff for integrands shaped like exp(z*u - u^2/2): beyond it the
// integrand is below 1e-320 and contributes nothing representable.
double gaussian_cutoff(double z) { return z + std::sqrt(z * z + 3000.0); }

}  // namespace

double hazard_ratio_reference(double z) {
  if (z <= 0.0) {
    // Mills ratio as integral of exp(z*u - u^2/2) over u >= 0; every
    // intermediate stays in [0, 1].
    const double mills = integrate(
        [z](double u) { return std::exp(z * u - 0.5 * u * u); }, 0.0, gaussian_cutoff(z));
    return 1.0 / mills;
  }
  const double cdf =
      0.5 + integrate([](double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }, 0.0, z);
  return std::exp(-0.5 * z * z) / kSqrt2Pi / cdf;
}

TruncatedNormalMoments truncated_normal_moments_reference(double mu, double sigma) {
  if (!(sigma > 0.0)) throw std::domain_error("reference moments: sigma must be > 0");
  const double z = mu / sigma;
  // scaled so the integrand peaks at 1: q(v) = exp(-(v-z)^2/2 + c)
  const double c = (z > 0.0) ? 0.0 : 0.5 * z * z;
  const auto q = [z, c](double v) { return std::exp(c - 0.5 * (v - z) * (v - z)); };
  // window tight around where the mass actually sits
  const double lo = (z > 0.0) ? std::max(0.0, z - 55.0) : 0.0;
  const double hi = (z > 0.0) ? z + 55.0 : gaussian_cutoff(z);

  // extra headroom: the deep-truncation variance comes out of a subtraction
  const QuadratureOptions tight{1e-16, 1e-15, 60};
  const double i0 = integrate(q, lo, hi, tight);
  const double i1 = integrate([&q](double v) { return v * q(v); }, lo, hi, tight);
  const double i2 = integrate([&q](double v) { return v * v * q(v); }, lo, hi, tight);

  const double mean_v = i1 / i0;
  const double var_v = i2 / i0 - mean_v * mean_v;
  return {sigma * mean_v, sigma * sigma * var_v};
}

GigHalfMoments gig_half_moments_reference(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("reference moments: need a, b > 0");
  // x = e^t; unnormalized density becomes exp((p - 1/2) t - (a e^t + b e^-t)/2),
  // rescaled by exp(sqrt(ab)) so the peak is O(1).
  const double shift = std::sqrt(a * b);
  const auto integrand = [a, b, shift](double p) {
    return [a, b, shift, p](double t) {
      return std::exp((p - 0.5) * t - 0.5 * (a * std::exp(t) + b * std::exp(-t)) + shift);
    };
  };
  const double t_hi = std::log((3400.0 + 2.0 * shift) / a);
  const double t_lo = -std::log((3400.0 + 2.0 * shift) / b);

  const double i0 = integrate(integrand(0.0), t_lo, t_hi);
  const double i1 = integrate(integrand(1.0), t_lo, t_hi);
  const double im1 = integrate(integrand(-1.0), t_lo, t_hi);
  return {i1 / i0, im1 / i0};
}

double marginal_component_density_reference(double w, double b, double beta) {
  if (w < 0.0) return 0.0;
  if (!(b > 0.0) || !(beta > 0.0)) {
    throw std::domain_error("marginal reference: need b > 0, beta > 0");
  }
  // alpha = e^t; the integrand collects the truncated-normal factor
  // 2*sqrt(beta*alpha/2pi)*exp(-beta*alpha*w^2/2), the InvGamma(1, b/2)
  // factor, and the e^t Jacobian.
  const double bw2 = beta * w * w;
  const auto f = [b, beta, bw2](double t) {
    const double alpha = std::exp(t);
    const double log_tn = kLog2 + 0.5 * std::log(beta * alpha / (2.0 * M_PI)) - 0.5 * bw2 * alpha;
    const double log_ig = std::log(0.5 * b) - 2.0 * t - 0.5 * b * std::exp(-t);
    return std::exp(log_tn + log_ig + t);
  };
  const double t_lo = -std::log(3200.0 / b);
  const double t_hi = (bw2 > 1e-300) ? std::log(3200.0 / bw2) : 1500.0;
  return integrate(f, t_lo, t_hi);
}

double positive_density_mass(const std::function<double(double)>& log_density,
                             double shape_hint) {
  if (!(shape_hint > 0.0)) throw std::domain_error("positive_density_mass: shape_hint > 0");
  // x^{+-shape} tails translate to e^{+-shape*t}: beyond |t| = 25/shape the
  // remaining mass is below 1e-10 of the total
  const double half_width = 25.0 / shape_hint + 10.0;
  return integrate([&log_density](double t) { return std::exp(log_density(std::exp(t)) + t); },
                   -half_width, half_width);
}

}  // namespace vbunmix::oracle
