#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "qpat/grid.hpp"

namespace qpat {

inline constexpr double kSentinel = std::numeric_limits<double>::quiet_NaN();

inline bool is_value(double v) { return !std::isnan(v); }

/// One real value per grid node; exterior nodes hold quiet NaN. Fields used
/// part-way through the reconstruction may also carry NaN on non-exterior
/// nodes, marking positions where a quantity is not available.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(std::shared_ptr<const DiscGrid> grid, double fill = 0.0);

  static ScalarField from_function(std::shared_ptr<const DiscGrid> grid,
                                   const std::function<double(double, double)>& f);

  const DiscGrid& grid() const { return *grid_; }
  const std::shared_ptr<const DiscGrid>& grid_ptr() const { return grid_; }

  double& operator[](int idx) { return values_[idx]; }
  double operator[](int idx) const { return values_[idx]; }
  double& at(int ix, int iy) { return values_[grid_->index(ix, iy)]; }
  double at(int ix, int iy) const { return values_[grid_->index(ix, iy)]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }

  /// max |value| over finite entries (0 for an all-sentinel field).
  double max_abs() const;

  /// Number of finite entries.
  int finite_count() const;

 private:
  std::shared_ptr<const DiscGrid> grid_;
  std::vector<double> values_;
};

/// Pair of ScalarFields on one grid; the sentinel pattern is kept identical
/// on both components.
struct VectorField2 {
  ScalarField x;
  ScalarField y;

  VectorField2() = default;
  explicit VectorField2(std::shared_ptr<const DiscGrid> grid, double fill = 0.0)
      : x(grid, fill), y(grid, fill) {}

  const DiscGrid& grid() const { return x.grid(); }
  const std::shared_ptr<const DiscGrid>& grid_ptr() const { return x.grid_ptr(); }

  static VectorField2 from_functions(std::shared_ptr<const DiscGrid> grid,
                                     const std::function<double(double, double)>& fx,
                                     const std::function<double(double, double)>& fy);
};

/// Node mask aligned with a grid (1 = selected).
using Mask = std::vector<std::uint8_t>;

}  // namespace qpat
