#pragma once

#include <functional>

#include "vbunmix/special_functions.hpp"

namespace vbunmix::oracle {

// Quadrature-backed references for the closed-form scalar kernels. Each is
// built directly from definitional integrals of exp/log and never calls the
// kernel it is meant to check.

double hazard_ratio_reference(double z);

TruncatedNormalMoments truncated_normal_moments_reference(double mu, double sigma);

GigHalfMoments gig_half_moments_reference(double a, double b);

// Marginal density of one abundance coefficient under the hierarchy:
// integral over alpha of [nonneg-truncated N(w; 0, (beta*alpha)^-1)] *
// [InvGamma(alpha; 1, b/2)]. Compared against the closed-form
// sqrt(beta*b) * exp(-sqrt(beta*b)*w) on w >= 0.
double marginal_component_density_reference(double w, double b, double beta);

// Normalization integral of exp(log_density(x)) over x > 0, via x = e^t.
// `shape_hint` bounds how slowly the density vanishes at 0 (x^{shape-1}).
double positive_density_mass(const std::function<double(double)>& log_density,
                             double shape_hint);

}  // namespace vbunmix::oracle
