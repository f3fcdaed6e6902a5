#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

namespace qpat {

enum class NodeClass : std::uint8_t { Interior, BoundaryAdjacent, Exterior };

// Axis direction indices used for neighbor lookups and cut fractions.
enum Dir : int { kEast = 0, kWest = 1, kNorth = 2, kSouth = 3 };

inline constexpr std::array<int, 4> kDirDx = {1, -1, 0, 0};
inline constexpr std::array<int, 4> kDirDy = {0, 0, 1, -1};

struct Point {
  double x = 0;
  double y = 0;
};

struct BoundaryPoint {
  double x = 0;
  double y = 0;
  double angle = 0;  // atan2 wrapped into [0, 2*pi)
};

/// Uniform Cartesian grid over [-R, R]^2 masked to the closed disc |p| <= R.
///
/// Node (ix, iy) sits at (-R + ix*h, -R + iy*h) with h = 2R/(n-1); storage is
/// row-major with iy as the slow index. A node is Exterior iff it lies
/// strictly outside the disc. Non-exterior nodes with an exterior (or
/// out-of-bounds) axis neighbor are BoundaryAdjacent and carry, per axis
/// direction, the fraction of h at which the segment toward that neighbor
/// crosses the circle (1 if it does not cross). Nodes landing on the circle
/// itself (within 1e-12*R) are additionally flagged on_circle; the elliptic
/// solver treats them as Dirichlet points.
///
/// boundary_points lists every intersection of the circle with a grid line,
/// sorted by strictly increasing angle. These are exactly the endpoints of
/// the cut arms used by the Shortley-Weller stencil.
class DiscGrid {
 public:
  int n() const { return n_; }
  double h() const { return h_; }
  double radius() const { return radius_; }
  int size() const { return n_ * n_; }

  int index(int ix, int iy) const { return iy * n_ + ix; }
  bool in_bounds(int ix, int iy) const {
    return ix >= 0 && ix < n_ && iy >= 0 && iy < n_;
  }
  double x(int ix) const { return -radius_ + ix * h_; }
  double y(int iy) const { return -radius_ + iy * h_; }
  Point position(int ix, int iy) const { return {x(ix), y(iy)}; }

  NodeClass node_class(int idx) const { return cls_[idx]; }
  NodeClass node_class(int ix, int iy) const { return cls_[index(ix, iy)]; }
  bool is_exterior(int ix, int iy) const {
    return !in_bounds(ix, iy) || cls_[index(ix, iy)] == NodeClass::Exterior;
  }
  bool on_circle(int idx) const { return on_circle_[idx] != 0; }

  /// Cut fractions for the 4 axis directions; 1 where the arm does not cross
  /// the circle. Meaningful only for BoundaryAdjacent nodes.
  std::array<double, 4> cut_fractions(int idx) const;

  const std::vector<BoundaryPoint>& boundary_points() const {
    return boundary_points_;
  }

  int count(NodeClass c) const;

  bool same_geometry(const DiscGrid& other) const {
    return n_ == other.n_ && radius_ == other.radius_;
  }

  friend std::shared_ptr<const DiscGrid> build_disc_grid_unchecked(int n,
                                                                   double radius);

 private:
  int n_ = 0;
  double h_ = 0;
  double radius_ = 0;
  std::vector<NodeClass> cls_;
  std::vector<std::uint8_t> on_circle_;
  std::vector<std::int32_t> cut_slot_;  // -1 for nodes without cut data
  std::vector<std::array<double, 4>> cuts_;
  std::vector<BoundaryPoint> boundary_points_;
};

/// Builds the disc grid. Requires n >= 16 and radius > 0 (Config error
/// otherwise); n < 16 grids are allowed only through the testing hook below.
std::shared_ptr<const DiscGrid> build_disc_grid(int n, double radius);

/// Same construction without the n >= 16 floor; unit tests use tiny grids.
std::shared_ptr<const DiscGrid> build_disc_grid_unchecked(int n, double radius);

}  // namespace qpat
