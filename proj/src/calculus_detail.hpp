#pragma once

#include <cmath>
#include <vector>

#include "qpat/boundary.hpp"
#include "qpat/field.hpp"

// Per-node stencil kernels shared by the OpenMP drivers (calculus.cpp) and
// the serial reference drivers (reference.cpp), so both produce bit-identical
// values.
namespace qpat::detail {

inline bool usable(const ScalarField& f, int ix, int iy) {
  const DiscGrid& g = f.grid();
  return g.in_bounds(ix, iy) && g.node_class(ix, iy) != NodeClass::Exterior &&
         is_value(f.at(ix, iy));
}

// Second-order first derivative along one axis: central where both sides
// hold values, one-sided 3-node stencil at data edges, NaN when neither
// fits.
inline double axis_derivative(const ScalarField& f, int ix, int iy, int dx, int dy) {
  const double h = f.grid().h();
  const double v0 = f.at(ix, iy);
  const bool plus = usable(f, ix + dx, iy + dy);
  const bool minus = usable(f, ix - dx, iy - dy);
  if (plus && minus)
    return (f.at(ix + dx, iy + dy) - f.at(ix - dx, iy - dy)) / (2 * h);
  if (plus && usable(f, ix + 2 * dx, iy + 2 * dy))
    return (-3 * v0 + 4 * f.at(ix + dx, iy + dy) - f.at(ix + 2 * dx, iy + 2 * dy)) /
           (2 * h);
  if (minus && usable(f, ix - 2 * dx, iy - 2 * dy))
    return (3 * v0 - 4 * f.at(ix - dx, iy - dy) + f.at(ix - 2 * dx, iy - 2 * dy)) /
           (2 * h);
  return kSentinel;
}

// Laplacian at one node: 5-point when the full neighborhood holds values,
// otherwise the Shortley-Weller unequal-arm stencil with Dirichlet values at
// the cut points (requires boundary data).
inline double laplacian_at(const ScalarField& f, int ix, int iy,
                           const BoundaryData* dirichlet) {
  const DiscGrid& g = f.grid();
  const double h = g.h();
  const double v0 = f.at(ix, iy);
  const bool e = usable(f, ix + 1, iy), w = usable(f, ix - 1, iy);
  const bool nn = usable(f, ix, iy + 1), ss = usable(f, ix, iy - 1);
  if (e && w && nn && ss) {
    return (f.at(ix + 1, iy) + f.at(ix - 1, iy) + f.at(ix, iy + 1) +
            f.at(ix, iy - 1) - 4 * v0) /
           (h * h);
  }
  const int idx = g.index(ix, iy);
  if (dirichlet == nullptr || g.node_class(idx) != NodeClass::BoundaryAdjacent ||
      g.on_circle(idx))
    return kSentinel;

  const auto cut = g.cut_fractions(idx);
  const double x = g.x(ix), y = g.y(iy);
  double theta[4], value[4];
  const bool have[4] = {e, w, nn, ss};
  for (int d = 0; d < 4; ++d) {
    if (have[d]) {
      theta[d] = 1.0;
      value[d] = f.at(ix + kDirDx[d], iy + kDirDy[d]);
    } else if (cut[d] < 1.0) {
      theta[d] = cut[d];
      const double bx = x + cut[d] * h * kDirDx[d];
      const double by = y + cut[d] * h * kDirDy[d];
      value[d] = (*dirichlet)(std::atan2(by, bx));
    } else {
      return kSentinel;  // neighbor missing without a circle crossing
    }
  }
  const double lxx = 2.0 *
                     (value[kEast] / (theta[kEast] * (theta[kEast] + theta[kWest])) +
                      value[kWest] / (theta[kWest] * (theta[kEast] + theta[kWest])) -
                      v0 / (theta[kEast] * theta[kWest])) /
                     (h * h);
  const double lyy = 2.0 *
                     (value[kNorth] / (theta[kNorth] * (theta[kNorth] + theta[kSouth])) +
                      value[kSouth] / (theta[kSouth] * (theta[kNorth] + theta[kSouth])) -
                      v0 / (theta[kNorth] * theta[kSouth])) /
                     (h * h);
  return lxx + lyy;
}

inline std::vector<double> gaussian_weights(int k, double h, double width) {
  std::vector<double> w((2 * k + 1) * (2 * k + 1), 0.0);
  for (int dj = -k; dj <= k; ++dj)
    for (int di = -k; di <= k; ++di)
      if (di * di + dj * dj <= k * k)
        w[(dj + k) * (2 * k + 1) + (di + k)] =
            std::exp(-(di * di + dj * dj) * h * h / (2 * width * width));
  return w;
}

inline double smooth_at(const ScalarField& f, int ix, int iy, int k,
                        const std::vector<double>& w) {
  const DiscGrid& g = f.grid();
  const int n = g.n();
  double acc = 0, norm = 0;
  for (int dj = -k; dj <= k; ++dj) {
    const int jy = iy + dj;
    if (jy < 0 || jy >= n) continue;
    for (int di = -k; di <= k; ++di) {
      const int jx = ix + di;
      if (jx < 0 || jx >= n) continue;
      const double weight = w[(dj + k) * (2 * k + 1) + (di + k)];
      if (weight == 0.0) continue;
      if (g.node_class(jx, jy) == NodeClass::Exterior) continue;
      const double v = f.at(jx, jy);
      if (!is_value(v)) continue;
      acc += weight * v;
      norm += weight;
    }
  }
  return acc / norm;  // the center node keeps norm >= weight(0,0) = 1
}

// Weighted local linear fit under the same kernel. On a complete footprint
// the odd moments vanish and the fit equals the plain kernel average; at a
// truncated footprint the slope terms remove the one-sided bias that would
// otherwise poison derivatives taken after smoothing.
inline double smooth_fit_at(const ScalarField& f, int ix, int iy, int k,
                            const std::vector<double>& w, int full_count) {
  const DiscGrid& g = f.grid();
  const int n = g.n();
  double acc = 0, norm = 0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0, sxf = 0, syf = 0;
  int used = 0;
  for (int dj = -k; dj <= k; ++dj) {
    const int jy = iy + dj;
    if (jy < 0 || jy >= n) continue;
    for (int di = -k; di <= k; ++di) {
      const int jx = ix + di;
      if (jx < 0 || jx >= n) continue;
      const double weight = w[(dj + k) * (2 * k + 1) + (di + k)];
      if (weight == 0.0) continue;
      if (g.node_class(jx, jy) == NodeClass::Exterior) continue;
      const double v = f.at(jx, jy);
      if (!is_value(v)) continue;
      acc += weight * v;
      norm += weight;
      sx += weight * di;
      sy += weight * dj;
      sxx += weight * di * di;
      sxy += weight * di * dj;
      syy += weight * dj * dj;
      sxf += weight * di * v;
      syf += weight * dj * v;
      ++used;
    }
  }
  if (used == full_count) return acc / norm;
  // Solve the 3x3 normal equations for (value, slope_x, slope_y) at the node.
  const double a11 = norm, a12 = sx, a13 = sy;
  const double a22 = sxx, a23 = sxy, a33 = syy;
  const double det = a11 * (a22 * a33 - a23 * a23) - a12 * (a12 * a33 - a23 * a13) +
                     a13 * (a12 * a23 - a22 * a13);
  if (std::abs(det) < 1e-12 * std::max(1.0, a11 * a22 * a33))
    return acc / norm;  // collinear footprint, fall back to the kernel mean
  const double b1 = acc, b2 = sxf, b3 = syf;
  const double value = (b1 * (a22 * a33 - a23 * a23) - a12 * (b2 * a33 - a23 * b3) +
                        a13 * (b2 * a23 - a22 * b3)) /
                       det;
  return value;
}

inline int kernel_support_count(int k, const std::vector<double>& w) {
  int cnt = 0;
  for (double v : w)
    if (v != 0.0) ++cnt;
  return cnt;
}

}  // namespace qpat::detail
