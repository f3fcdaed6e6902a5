#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qpat/errors.hpp"
#include "qpat/grid.hpp"

using namespace qpat;

namespace {

// Direct enumeration oracle: classify every node of an n x n grid against
// x^2 + y^2 <= R^2 and count the neighbor-based classes.
struct ClassCounts {
  int interior = 0;
  int boundary_adjacent = 0;
  int exterior = 0;
};

ClassCounts enumerate_classes(int n, double R) {
  ClassCounts c;
  const double h = 2.0 * R / (n - 1);
  auto outside = [&](int ix, int iy) {
    if (ix < 0 || ix >= n || iy < 0 || iy >= n) return true;
    const double x = -R + ix * h, y = -R + iy * h;
    return x * x + y * y > R * R;
  };
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      if (outside(ix, iy)) {
        ++c.exterior;
      } else if (outside(ix + 1, iy) || outside(ix - 1, iy) || outside(ix, iy + 1) ||
                 outside(ix, iy - 1)) {
        ++c.boundary_adjacent;
      } else {
        ++c.interior;
      }
    }
  }
  return c;
}

}  // namespace

TEST_CASE("grid rejects bad parameters") {
  CHECK_THROWS_AS(build_disc_grid(8, 1.0), Error);
  CHECK_THROWS_AS(build_disc_grid(64, 0.0), Error);
  CHECK_THROWS_AS(build_disc_grid(64, -1.0), Error);
}

TEST_CASE("n=3 geometry: center interior, corners exterior") {
  auto g = build_disc_grid_unchecked(3, 1.0);
  CHECK(g->node_class(1, 1) != NodeClass::Exterior);
  for (int ix : {0, 2})
    for (int iy : {0, 2}) CHECK(g->node_class(ix, iy) == NodeClass::Exterior);
  // Edge midpoints land exactly on the circle.
  CHECK(g->node_class(2, 1) == NodeClass::BoundaryAdjacent);
  CHECK(g->on_circle(g->index(2, 1)));
}

TEST_CASE("n=5 class counts match the enumeration oracle") {
  auto g = build_disc_grid_unchecked(5, 1.0);
  const ClassCounts c = enumerate_classes(5, 1.0);
  CHECK(g->count(NodeClass::Interior) == c.interior);
  CHECK(g->count(NodeClass::BoundaryAdjacent) == c.boundary_adjacent);
  CHECK(g->count(NodeClass::Exterior) == c.exterior);
}

TEST_CASE("class counts match the oracle on production sizes") {
  for (int n : {16, 33, 64, 101}) {
    auto g = build_disc_grid(n, 1.0);
    const ClassCounts c = enumerate_classes(n, 1.0);
    CHECK(g->count(NodeClass::Interior) == c.interior);
    CHECK(g->count(NodeClass::BoundaryAdjacent) == c.boundary_adjacent);
    CHECK(g->count(NodeClass::Exterior) == c.exterior);
  }
}

TEST_CASE("non-exterior fraction approaches pi/4") {
  auto g = build_disc_grid(101, 1.0);
  const double frac =
      1.0 - static_cast<double>(g->count(NodeClass::Exterior)) / g->size();
  CHECK(frac == doctest::Approx(std::numbers::pi / 4).epsilon(0.02 / (std::numbers::pi / 4)));
}

TEST_CASE("cut fractions lie in (0,1] and cut points sit on the circle") {
  auto g = build_disc_grid(33, 1.0);
  const double R = g->radius();
  for (int iy = 0; iy < g->n(); ++iy) {
    for (int ix = 0; ix < g->n(); ++ix) {
      const int idx = g->index(ix, iy);
      if (g->node_class(idx) != NodeClass::BoundaryAdjacent) continue;
      const auto cut = g->cut_fractions(idx);
      for (int d = 0; d < 4; ++d) {
        CHECK(cut[d] > 0.0);
        CHECK(cut[d] <= 1.0);
        if (cut[d] < 1.0) {
          const double bx = g->x(ix) + cut[d] * g->h() * kDirDx[d];
          const double by = g->y(iy) + cut[d] * g->h() * kDirDy[d];
          CHECK(std::abs(std::hypot(bx, by) - R) < 1e-12 * R);
        }
      }
    }
  }
}

TEST_CASE("boundary points have strictly increasing angles on the circle") {
  for (int n : {32, 33}) {  // even and odd (odd puts nodes exactly on the circle)
    auto g = build_disc_grid(n, 1.0);
    const auto& pts = g->boundary_points();
    REQUIRE(pts.size() > 8);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(std::abs(std::hypot(pts[i].x, pts[i].y) - 1.0) < 1e-12);
      CHECK(pts[i].angle >= 0.0);
      CHECK(pts[i].angle < 2 * std::numbers::pi);
      if (i > 0) CHECK(pts[i].angle > pts[i - 1].angle);
    }
  }
}

TEST_CASE("interior nodes have no exterior axis neighbor") {
  auto g = build_disc_grid(48, 1.0);
  for (int iy = 0; iy < g->n(); ++iy) {
    for (int ix = 0; ix < g->n(); ++ix) {
      if (g->node_class(ix, iy) != NodeClass::Interior) continue;
      for (int d = 0; d < 4; ++d)
        CHECK(!g->is_exterior(ix + kDirDx[d], iy + kDirDy[d]));
    }
  }
}
