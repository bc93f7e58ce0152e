#pragma once

#include <functional>

namespace vbunmix::oracle {

struct QuadratureOptions {
  double abs_tol = 1e-14;
  double rel_tol = 1e-13;
  int max_depth = 60;
};

// Adaptive 15-point Gauss-Kronrod bisection on a finite interval. Depth-capped;
// within the cap it pushes the local error estimate below the tolerance split
// across subintervals.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts = {});

// Integral over [a, inf) for integrands that decay at least like
// exp(-x / decay_scale): substitutes x = a - decay_scale * log(1 - u) and
// integrates u over (0, 1).
double integrate_to_infinity(const std::function<double(double)>& f, double a,
                             double decay_scale = 1.0, const QuadratureOptions& opts = {});

}  // namespace vbunmix::oracle
