#include "qpat/reference.hpp"

#include <algorithm>
#include <cmath>

#include "calculus_detail.hpp"
#include "qpat/errors.hpp"

namespace qpat::reference {

VectorField2 gradient(const ScalarField& f) {
  const auto& grid = f.grid_ptr();
  VectorField2 out(grid, kSentinel);
  const int n = grid->n();
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      if (!detail::usable(f, ix, iy)) continue;
      const double gx = detail::axis_derivative(f, ix, iy, 1, 0);
      const double gy = detail::axis_derivative(f, ix, iy, 0, 1);
      if (is_value(gx) && is_value(gy)) {
        out.x.at(ix, iy) = gx;
        out.y.at(ix, iy) = gy;
      }
    }
  }
  return out;
}

ScalarField divergence(const VectorField2& v) {
  const auto& grid = v.grid_ptr();
  ScalarField out(grid, kSentinel);
  const int n = grid->n();
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      if (!detail::usable(v.x, ix, iy) || !detail::usable(v.y, ix, iy)) continue;
      const double dx = detail::axis_derivative(v.x, ix, iy, 1, 0);
      const double dy = detail::axis_derivative(v.y, ix, iy, 0, 1);
      if (is_value(dx) && is_value(dy)) out.at(ix, iy) = dx + dy;
    }
  }
  return out;
}

ScalarField laplacian(const ScalarField& f, const BoundaryData* dirichlet) {
  const auto& grid = f.grid_ptr();
  ScalarField out(grid, kSentinel);
  const int n = grid->n();
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      if (!detail::usable(f, ix, iy)) continue;
      out.at(ix, iy) = detail::laplacian_at(f, ix, iy, dirichlet);
    }
  }
  return out;
}

ScalarField gaussian_smooth(const ScalarField& f, double width) {
  if (width < 0) throw_config("smoothing width must be nonnegative");
  if (width == 0) return f;
  const auto& grid = f.grid_ptr();
  const double h = grid->h();
  const int k = std::max(1, static_cast<int>(std::ceil(3.0 * width / h)));
  const auto w = detail::gaussian_weights(k, h, width);
  ScalarField out(grid, kSentinel);
  const int n = grid->n();
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      if (!detail::usable(f, ix, iy)) continue;
      out.at(ix, iy) = detail::smooth_at(f, ix, iy, k, w);
    }
  }
  return out;
}

ScalarField gaussian_smooth_fit(const ScalarField& f, double width) {
  if (width < 0) throw_config("smoothing width must be nonnegative");
  if (width == 0) return f;
  const auto& grid = f.grid_ptr();
  const double h = grid->h();
  const int k = std::max(1, static_cast<int>(std::ceil(3.0 * width / h)));
  const auto w = detail::gaussian_weights(k, h, width);
  const int full = detail::kernel_support_count(k, w);
  ScalarField out(grid, kSentinel);
  const int n = grid->n();
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      if (!detail::usable(f, ix, iy)) continue;
      out.at(ix, iy) = detail::smooth_fit_at(f, ix, iy, k, w, full);
    }
  }
  return out;
}

void spmv(int dim, const int* row_ptr, const int* cols, const double* coefs,
          const double* x, double* y) {
  for (int r = 0; r < dim; ++r) {
    double acc = 0;
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) acc += coefs[k] * x[cols[k]];
    y[r] = acc;
  }
}

}  // namespace qpat::reference
