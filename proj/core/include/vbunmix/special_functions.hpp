#pragma once

namespace vbunmix {

// First two moments of a normal distribution truncated to [0, inf).
//
// For a parent N(mu, sigma^2) the truncated mean is always strictly positive
// and at least mu; truncation can only remove variance, so
// 0 < variance <= sigma^2.
struct TruncatedNormalMoments {
  double mean;
  double variance;
};

// E[x] and E[1/x] of the generalized inverse Gaussian with index -1/2,
// density proportional to x^{-3/2} exp(-(a*x + b/x)/2) on x > 0.
//
//   mean         = sqrt(b/a)
//   mean_inverse = sqrt(a/b) + 1/b
//
// Jensen's inequality gives mean_inverse * mean >= 1; the gap is exactly 1/b.
struct GigHalfMoments {
  double mean;
  double mean_inverse;
};

// phi(z) / Phi(z): standard normal density over lower CDF.
//
// Evaluated through the scaled complementary error function for z < 0 so the
// ratio never passes through a denormal intermediate; relative accuracy is a
// few 1e-14 across z in [-40, 40]. For large positive z the true value drops
// below the smallest double and gracefully underflows.
//
// Throws std::domain_error for non-finite z.
double hazard_ratio(double z);

// Mean and variance of N(mu, sigma^2) truncated to [0, inf).
//
// Deep truncation (mu/sigma below about -6) is routed through a continued
// fraction for the gap hazard_ratio(z) + z, which avoids the catastrophic
// cancellation a direct evaluation of the textbook formulas would hit.
//
// Throws std::domain_error if sigma <= 0 or either input is non-finite.
TruncatedNormalMoments truncated_normal_moments(double mu, double sigma);

// Closed-form GIG(-1/2) moments for parameters a > 0, b > 0.
// Throws std::domain_error outside the domain.
GigHalfMoments gig_half_moments(double a, double b);

}  // namespace vbunmix
