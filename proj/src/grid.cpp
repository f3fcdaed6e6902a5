#include "qpat/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qpat/boundary.hpp"
#include "qpat/errors.hpp"

namespace qpat {

namespace {

constexpr double kOnCircleTol = 1e-12;

// Fraction of h at which the segment from (x, y) toward direction d crosses
// |p| = R. The caller guarantees the node is inside the closed disc and the
// neighbor is outside, so the value lies in [0, 1].
double crossing_fraction(double x, double y, int dir, double h, double R) {
  double s = 0;
  switch (dir) {
    case kEast:
      s = std::sqrt(std::max(0.0, R * R - y * y)) - x;
      break;
    case kWest:
      s = x + std::sqrt(std::max(0.0, R * R - y * y));
      break;
    case kNorth:
      s = std::sqrt(std::max(0.0, R * R - x * x)) - y;
      break;
    case kSouth:
      s = y + std::sqrt(std::max(0.0, R * R - x * x));
      break;
  }
  return std::clamp(s / h, 0.0, 1.0);
}

}  // namespace

std::shared_ptr<const DiscGrid> build_disc_grid_unchecked(int n, double radius) {
  if (radius <= 0) throw_config("grid radius must be positive");
  if (n < 2) throw_config("grid needs at least 2 nodes per axis");

  auto grid = std::make_shared<DiscGrid>();
  DiscGrid& g = const_cast<DiscGrid&>(*grid);
  g.n_ = n;
  g.radius_ = radius;
  g.h_ = 2.0 * radius / (n - 1);
  g.cls_.assign(n * n, NodeClass::Exterior);
  g.on_circle_.assign(n * n, 0);
  g.cut_slot_.assign(n * n, -1);

  const double R2 = radius * radius;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const double x = g.x(ix), y = g.y(iy);
      if (x * x + y * y <= R2) g.cls_[g.index(ix, iy)] = NodeClass::Interior;
    }
  }

  // Reclassify nodes with an exterior (or out-of-grid) neighbor and record
  // where their arms cross the circle.
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const int idx = g.index(ix, iy);
      if (g.cls_[idx] == NodeClass::Exterior) continue;
      const double x = g.x(ix), y = g.y(iy);
      std::array<double, 4> cut = {1.0, 1.0, 1.0, 1.0};
      bool adjacent = false;
      for (int d = 0; d < 4; ++d) {
        const int jx = ix + kDirDx[d], jy = iy + kDirDy[d];
        if (!g.is_exterior(jx, jy)) continue;
        adjacent = true;
        const double t = crossing_fraction(x, y, d, g.h_, radius);
        if (t <= kOnCircleTol) {
          g.on_circle_[idx] = 1;  // the node itself sits on the circle
        } else {
          cut[d] = t;
        }
      }
      if (adjacent) {
        g.cls_[idx] = NodeClass::BoundaryAdjacent;
        g.cut_slot_[idx] = static_cast<std::int32_t>(g.cuts_.size());
        g.cuts_.push_back(cut);
      }
    }
  }

  // Circle / grid-line intersections, sorted by angle.
  std::vector<BoundaryPoint> pts;
  for (int i = 0; i < n; ++i) {
    const double c = g.x(i);  // same coordinates on both axes
    if (std::abs(c) >= radius) continue;
    const double s = std::sqrt(R2 - c * c);
    pts.push_back({s, c, 0});   // horizontal line y = c, east crossing
    pts.push_back({-s, c, 0});  // west crossing
    pts.push_back({c, s, 0});   // vertical line x = c, north crossing
    pts.push_back({c, -s, 0});  // south crossing
  }
  for (auto& p : pts) p.angle = wrap_angle(std::atan2(p.y, p.x));
  std::sort(pts.begin(), pts.end(),
            [](const BoundaryPoint& a, const BoundaryPoint& b) { return a.angle < b.angle; });
  const double angle_tol = 1e-12;
  for (const auto& p : pts) {
    if (g.boundary_points_.empty() ||
        p.angle - g.boundary_points_.back().angle > angle_tol) {
      g.boundary_points_.push_back(p);
    }
  }
  // A point within tolerance of 2*pi duplicates the first one.
  if (g.boundary_points_.size() > 1) {
    const double span = 2 * std::numbers::pi;
    if (span - g.boundary_points_.back().angle + g.boundary_points_.front().angle <
        angle_tol) {
      g.boundary_points_.pop_back();
    }
  }

  return grid;
}

std::array<double, 4> DiscGrid::cut_fractions(int idx) const {
  const auto slot = cut_slot_[idx];
  if (slot < 0) return {1.0, 1.0, 1.0, 1.0};
  return cuts_[slot];
}

int DiscGrid::count(NodeClass c) const {
  return static_cast<int>(std::count(cls_.begin(), cls_.end(), c));
}

std::shared_ptr<const DiscGrid> build_disc_grid(int n, double radius) {
  if (n < 16) throw_config("grid resolution n must be at least 16, got " + std::to_string(n));
  return build_disc_grid_unchecked(n, radius);
}

}  // namespace qpat
