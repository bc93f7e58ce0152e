#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "vbunmix/errors.hpp"
#include "vbunmix/synthetic.hpp"

namespace vbunmix {

namespace {

// Householder QR least squares for a tall-skinny column subset of phi.
// Columns are copied; m is small (hundreds) and the passive set smaller.
std::vector<double> qr_least_squares(const EndmemberMatrix& phi,
                                     const std::vector<std::size_t>& cols,
                                     std::span<const double> y) {
  const std::size_t m = phi.bands();
  const std::size_t n = cols.size();
  std::vector<double> a(m * n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto col = phi.column(cols[j]);
    std::copy(col.begin(), col.end(), a.begin() + j * m);
  }
  std::vector<double> rhs(y.begin(), y.end());

  for (std::size_t j = 0; j < n; ++j) {
    double norm = 0.0;
    for (std::size_t k = j; k < m; ++k) norm = std::hypot(norm, a[j * m + k]);
    if (norm == 0.0) continue;
    if (a[j * m + j] > 0.0) norm = -norm;
    for (std::size_t k = j; k < m; ++k) a[j * m + k] /= norm;
    a[j * m + j] -= 1.0;
    for (std::size_t c = j + 1; c < n; ++c) {
      double s = 0.0;
      for (std::size_t k = j; k < m; ++k) s += a[j * m + k] * a[c * m + k];
      s /= a[j * m + j];
      for (std::size_t k = j; k < m; ++k) a[c * m + k] += s * a[j * m + k];
    }
    double s = 0.0;
    for (std::size_t k = j; k < m; ++k) s += a[j * m + k] * rhs[k];
    s /= a[j * m + j];
    for (std::size_t k = j; k < m; ++k) rhs[k] += s * a[j * m + k];
    a[j * m + j] = norm;  // R diagonal, stored back in place
  }

  std::vector<double> x(n, 0.0);
  for (std::size_t jj = n; jj-- > 0;) {
    double s = rhs[jj];
    for (std::size_t c = jj + 1; c < n; ++c) s -= a[c * m + jj] * x[c];
    const double diag = a[jj * m + jj];
    x[jj] = (diag != 0.0) ? s / diag : 0.0;
  }
  return x;
}

std::vector<double> gradient(const EndmemberMatrix& phi, std::span<const double> y,
                             const std::vector<double>& x) {
  const std::size_t m = phi.bands();
  const std::size_t n = phi.endmember_count();
  std::vector<double> r(y.begin(), y.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] == 0.0) continue;
    const auto col = phi.column(i);
    for (std::size_t k = 0; k < m; ++k) r[k] -= col[k] * x[i];
  }
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto col = phi.column(i);
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) s += col[k] * r[k];
    g[i] = s;  // = phi_i' (y - Phi x); KKT wants g <= 0, g = 0 on the support
  }
  return g;
}

double kkt_residual(const std::vector<double>& g, const std::vector<double>& x, double scale) {
  double r = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (x[i] > 0.0) {
      r = std::max(r, std::abs(g[i]));
    } else {
      r = std::max(r, std::max(0.0, g[i]));
    }
  }
  return r / scale;
}

}  // namespace

std::vector<double> unconstrained_least_squares(const PixelSpectrum& y,
                                                const EndmemberMatrix& phi) {
  if (y.size() != phi.bands()) throw ShapeError("least_squares: dimension mismatch");
  std::vector<std::size_t> all(phi.endmember_count());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return qr_least_squares(phi, all, y);
}

std::vector<double> nnls_baseline(const PixelSpectrum& y, const EndmemberMatrix& phi) {
  if (y.size() != phi.bands()) throw ShapeError("nnls_baseline: dimension mismatch");
  const std::size_t n = phi.endmember_count();

  std::vector<double> x(n, 0.0);
  std::vector<bool> passive(n, false);
  std::vector<double> g = gradient(phi, y, x);

  double scale = 1.0;
  for (double v : g) scale = std::max(scale, std::abs(v));
  const double tol = 1e-10 * scale;
  const double kkt_limit = 1e-8;

  const std::size_t outer_cap = 30 * n + 30;
  for (std::size_t outer = 0; outer < outer_cap; ++outer) {
    // most-violating inactive coordinate
    std::size_t best = n;
    double best_g = tol;
    for (std::size_t i = 0; i < n; ++i) {
      if (!passive[i] && g[i] > best_g) {
        best_g = g[i];
        best = i;
      }
    }
    if (best == n) {
      const double res = kkt_residual(g, x, scale);
      if (res <= kkt_limit) return x;
      throw NnlsError(res, "nnls_baseline: stalled before stationarity");
    }
    passive[best] = true;

    for (std::size_t inner = 0; inner < outer_cap; ++inner) {
      std::vector<std::size_t> p;
      for (std::size_t i = 0; i < n; ++i) {
        if (passive[i]) p.push_back(i);
      }
      const std::vector<double> z = qr_least_squares(phi, p, y);

      bool all_positive = true;
      for (double v : z) {
        if (v <= 0.0) {
          all_positive = false;
          break;
        }
      }
      if (all_positive) {
        std::fill(x.begin(), x.end(), 0.0);
        for (std::size_t j = 0; j < p.size(); ++j) x[p[j]] = z[j];
        break;
      }
      // step toward z until the first coordinate hits zero, then drop every
      // coordinate that reached the boundary
      double step = 1.0;
      for (std::size_t j = 0; j < p.size(); ++j) {
        if (z[j] <= 0.0) {
          const double xj = x[p[j]];
          step = (xj - z[j] > 0.0) ? std::min(step, xj / (xj - z[j])) : 0.0;
        }
      }
      for (std::size_t j = 0; j < p.size(); ++j) {
        const double xj = x[p[j]];
        const bool at_boundary =
            z[j] <= 0.0 && (xj - z[j] <= 0.0 || xj / (xj - z[j]) <= step * (1.0 + 1e-12));
        if (at_boundary) {
          x[p[j]] = 0.0;
          passive[p[j]] = false;
        } else {
          x[p[j]] = xj + step * (z[j] - xj);
        }
      }
    }
    g = gradient(phi, y, x);
  }
  throw NnlsError(kkt_residual(g, x, scale), "nnls_baseline: iteration cap exceeded");
}

}  // namespace vbunmix
