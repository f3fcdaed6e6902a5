#include "qpat/phantom.hpp"

#include <cmath>
#include <fstream>

#include "qpat/calculus.hpp"
#include "qpat/errors.hpp"
#include "qpat/field_io.hpp"

namespace qpat {

Shape Shape::rectangle(Point lo, Point hi, double value) {
  Shape s;
  s.kind = ShapeKind::Rectangle;
  s.pts[0] = lo;
  s.pts[1] = hi;
  s.value = value;
  return s;
}

Shape Shape::disc(Point center, double radius, double value) {
  Shape s;
  s.kind = ShapeKind::Disc;
  s.pts[0] = center;
  s.radius = radius;
  s.value = value;
  return s;
}

Shape Shape::triangle(Point a, Point b, Point c, double value) {
  Shape s;
  s.kind = ShapeKind::Triangle;
  s.pts = {a, b, c};
  s.value = value;
  return s;
}

namespace {
// Signed area of (a, b, p); nonnegative for p left of a->b.
double edge_side(const Point& a, const Point& b, double x, double y) {
  return (b.x - a.x) * (y - a.y) - (b.y - a.y) * (x - a.x);
}
}  // namespace

bool Shape::contains(double x, double y) const {
  switch (kind) {
    case ShapeKind::Rectangle:
      return x >= pts[0].x && x <= pts[1].x && y >= pts[0].y && y <= pts[1].y;
    case ShapeKind::Disc: {
      const double dx = x - pts[0].x, dy = y - pts[0].y;
      return dx * dx + dy * dy <= radius * radius;
    }
    case ShapeKind::Triangle:
      // Counterclockwise vertices: inside iff left of all three edges.
      return edge_side(pts[0], pts[1], x, y) >= 0 &&
             edge_side(pts[1], pts[2], x, y) >= 0 &&
             edge_side(pts[2], pts[0], x, y) >= 0;
  }
  return false;
}

bool Shape::inside_disc(double R) const {
  switch (kind) {
    case ShapeKind::Rectangle: {
      for (double cx : {pts[0].x, pts[1].x})
        for (double cy : {pts[0].y, pts[1].y})
          if (cx * cx + cy * cy > R * R) return false;
      return true;
    }
    case ShapeKind::Disc:
      return std::hypot(pts[0].x, pts[0].y) + radius <= R;
    case ShapeKind::Triangle:
      for (const auto& p : pts)
        if (p.x * p.x + p.y * p.y > R * R) return false;
      return true;
  }
  return false;
}

PhantomPair phantom_a(double smooth_width) {
  // Shared inclusions in the upper half of the disc (the illuminated side):
  // a large disc on the left, a low-value rectangle on the right, a small
  // disc near the rim. The absorption map adds a top rectangle and a central
  // triangle that the diffusion map does not contain.
  const Shape disc_a_D = Shape::disc({-0.38, 0.45}, 0.16, 0.35);
  const Shape rect_b_D = Shape::rectangle({0.18, 0.30}, {0.55, 0.52}, 0.10);
  const Shape disc_c_D = Shape::disc({0.33, 0.70}, 0.09, 0.35);

  const Shape disc_a_mu = Shape::disc({-0.38, 0.45}, 0.16, 35.0);
  const Shape rect_b_mu = Shape::rectangle({0.18, 0.30}, {0.55, 0.52}, 10.0);
  const Shape disc_c_mu = Shape::disc({0.33, 0.70}, 0.09, 35.0);
  const Shape rect_top_mu = Shape::rectangle({-0.16, 0.58}, {0.16, 0.76}, 30.0);
  const Shape tri_mu = Shape::triangle({-0.16, 0.22}, {0.16, 0.22}, {0.0, 0.50}, 15.0);

  PhantomPair p;
  p.diffusion.background = 0.2;
  p.diffusion.shapes = {disc_a_D, rect_b_D, disc_c_D};
  p.diffusion.smooth_width = smooth_width;
  p.absorption.background = 20.0;
  p.absorption.shapes = {disc_a_mu, rect_b_mu, disc_c_mu, rect_top_mu, tri_mu};
  p.absorption.smooth_width = smooth_width;
  return p;
}

ScalarField rasterize(const PhantomSpec& spec, std::shared_ptr<const DiscGrid> grid) {
  if (!(spec.background > 0)) throw_config("phantom background must be positive");
  for (const auto& s : spec.shapes) {
    if (!(s.value > 0)) throw_config("phantom shape values must be positive");
    if (!s.inside_disc(grid->radius()))
      throw_config("phantom shape reaches outside the disc");
  }
  ScalarField out(grid, kSentinel);
  const int n = grid->n();
#pragma omp parallel for schedule(static)
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      if (grid->node_class(ix, iy) == NodeClass::Exterior) continue;
      const double x = grid->x(ix), y = grid->y(iy);
      double v = spec.background;
      for (const auto& s : spec.shapes)  // later shapes overwrite earlier ones
        if (s.contains(x, y)) v = s.value;
      out.at(ix, iy) = v;
    }
  }
  if (spec.smooth_width > 0) return gaussian_smooth(out, spec.smooth_width);
  return out;
}

ScalarField import_raster(const std::string& path, double background,
                          double value_range_lo, double value_range_hi,
                          std::shared_ptr<const DiscGrid> grid) {
  const PgmImage img = read_pgm(path);
  const double R = grid->radius();
  ScalarField out(grid, kSentinel);
  const int n = grid->n();
  const double span = value_range_hi - value_range_lo;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      if (grid->node_class(ix, iy) == NodeClass::Exterior) continue;
      // Image rectangle mapped onto [-R, R]^2 with row 0 at y = +R.
      const double px = (grid->x(ix) + R) / (2 * R) * (img.width - 1);
      const double py = (R - grid->y(iy)) / (2 * R) * (img.height - 1);
      if (px < 0 || px > img.width - 1 || py < 0 || py > img.height - 1) {
        out.at(ix, iy) = background;
        continue;
      }
      const int px0 = std::min(static_cast<int>(px), img.width - 2);
      const int py0 = std::min(static_cast<int>(py), img.height - 2);
      const double fx = px - px0, fy = py - py0;
      auto pix = [&](int i, int j) {
        return static_cast<double>(img.pixels[j * img.width + i]) / img.maxval;
      };
      const double gray = (1 - fx) * (1 - fy) * pix(px0, py0) +
                          fx * (1 - fy) * pix(px0 + 1, py0) +
                          (1 - fx) * fy * pix(px0, py0 + 1) +
                          fx * fy * pix(px0 + 1, py0 + 1);
      out.at(ix, iy) = value_range_lo + span * gray;
    }
  }
  return out;
}

}  // namespace qpat
