#include "qpat/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "calculus_detail.hpp"
#include "qpat/errors.hpp"

namespace qpat {

VectorField2 gradient(const ScalarField& f) {
  const auto& grid = f.grid_ptr();
  VectorField2 out(grid, kSentinel);
  const int n = grid->n();
#pragma omp parallel for schedule(static)
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
#pragma omp parallel for schedule(static)
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
#pragma omp parallel for schedule(static)
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
#pragma omp parallel for schedule(static)
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
#pragma omp parallel for schedule(static)
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      if (!detail::usable(f, ix, iy)) continue;
      out.at(ix, iy) = detail::smooth_fit_at(f, ix, iy, k, w, full);
    }
  }
  return out;
}

std::optional<double> interpolate(const ScalarField& f, double x, double y) {
  const DiscGrid& g = f.grid();
  const int n = g.n();
  const double h = g.h();
  int ix0 = static_cast<int>(std::floor((x + g.radius()) / h));
  int iy0 = static_cast<int>(std::floor((y + g.radius()) / h));
  ix0 = std::clamp(ix0, 0, n - 2);
  iy0 = std::clamp(iy0, 0, n - 2);
  const double fx = std::clamp((x - g.x(ix0)) / h, 0.0, 1.0);
  const double fy = std::clamp((y - g.y(iy0)) / h, 0.0, 1.0);
  const double wts[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
  const int cx[4] = {ix0, ix0 + 1, ix0, ix0 + 1};
  const int cy[4] = {iy0, iy0, iy0 + 1, iy0 + 1};
  double acc = 0, norm = 0;
  int usable_corner = -1;
  for (int c = 0; c < 4; ++c) {
    const double v = f.at(cx[c], cy[c]);
    if (!is_value(v)) continue;
    usable_corner = c;
    acc += wts[c] * v;
    norm += wts[c];
  }
  if (usable_corner < 0) return std::nullopt;
  if (norm < 1e-12) return f.at(cx[usable_corner], cy[usable_corner]);
  return acc / norm;
}

std::optional<Point> interpolate(const VectorField2& v, double x, double y) {
  const auto vx = interpolate(v.x, x, y);
  const auto vy = interpolate(v.y, x, y);
  if (!vx || !vy) return std::nullopt;
  return Point{*vx, *vy};
}

std::optional<double> try_line_integral(const VectorField2& v, Point a, Point b) {
  const double h = v.grid().h();
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  if (len == 0) return 0.0;
  const int m = std::max(1, static_cast<int>(std::ceil(len / (h / 2))));
  const double sx = (b.x - a.x) / m, sy = (b.y - a.y) / m;
  double prev_dot = 0, integral = 0;
  for (int kth = 0; kth <= m; ++kth) {
    const auto val = interpolate(v, a.x + kth * sx, a.y + kth * sy);
    if (!val) return std::nullopt;
    const double dot = val->x * sx + val->y * sy;
    if (kth > 0) integral += 0.5 * (prev_dot + dot);
    prev_dot = dot;
  }
  return integral;
}

double line_integral(const VectorField2& v, Point a, Point b) {
  const auto r = try_line_integral(v, a, b);
  if (!r)
    throw Error(ErrorCode::PathLeavesData,
                "a sample of the segment (" + std::to_string(a.x) + ", " +
                    std::to_string(a.y) + ") -> (" + std::to_string(b.x) + ", " +
                    std::to_string(b.y) + ") has no usable data");
  return *r;
}

double path_integrate(const VectorField2& v, Point start, Point target) {
  const DiscGrid& g = v.grid();
  const double R = g.radius();
  if (std::abs(std::hypot(start.x, start.y) - R) > 1e-9 * R)
    throw_config("path start must lie on the circle");
  if (std::hypot(target.x, target.y) > R)
    throw_config("path target lies outside the disc");
  return line_integral(v, start, target);
}

ScalarField restrict_to(const ScalarField& fine,
                        std::shared_ptr<const DiscGrid> coarse) {
  const DiscGrid& gf = fine.grid();
  const DiscGrid& gc = *coarse;
  if (std::abs(gf.radius() - gc.radius()) > 1e-12 * gc.radius())
    throw_config("restriction requires matching radii");
  if (gf.h() >= gc.h())
    throw_config("restriction requires strictly finer source spacing");
  ScalarField out(coarse, kSentinel);
  const int n = gc.n();
#pragma omp parallel for schedule(static)
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      if (gc.node_class(ix, iy) == NodeClass::Exterior) continue;
      const auto v = interpolate(fine, gc.x(ix), gc.y(iy));
      if (v) {
        out.at(ix, iy) = *v;
        continue;
      }
      // Thin-sliver fallback: nearest fine node holding a value.
      const int fx = static_cast<int>(std::round((gc.x(ix) + gf.radius()) / gf.h()));
      const int fy = static_cast<int>(std::round((gc.y(iy) + gf.radius()) / gf.h()));
      for (int ring = 1; ring <= 3 && !is_value(out.at(ix, iy)); ++ring) {
        for (int dy = -ring; dy <= ring && !is_value(out.at(ix, iy)); ++dy) {
          for (int dx = -ring; dx <= ring; ++dx) {
            if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
            if (!gf.in_bounds(fx + dx, fy + dy)) continue;
            const double v2 = fine.at(fx + dx, fy + dy);
            if (is_value(v2)) {
              out.at(ix, iy) = v2;
              break;
            }
          }
        }
      }
    }
  }
  return out;
}

}  // namespace qpat
