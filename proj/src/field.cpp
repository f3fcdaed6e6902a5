#include "qpat/field.hpp"

#include <algorithm>
#include <cmath>

namespace qpat {

ScalarField::ScalarField(std::shared_ptr<const DiscGrid> grid, double fill)
    : grid_(std::move(grid)), values_(grid_->size(), kSentinel) {
  const int n = grid_->n();
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      if (grid_->node_class(ix, iy) != NodeClass::Exterior)
        values_[grid_->index(ix, iy)] = fill;
}

ScalarField ScalarField::from_function(
    std::shared_ptr<const DiscGrid> grid,
    const std::function<double(double, double)>& f) {
  ScalarField out(grid);
  const DiscGrid& g = *grid;
  const int n = g.n();
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      if (g.node_class(ix, iy) != NodeClass::Exterior)
        out.at(ix, iy) = f(g.x(ix), g.y(iy));
  return out;
}

double ScalarField::max_abs() const {
  double m = 0;
  for (double v : values_)
    if (is_value(v)) m = std::max(m, std::abs(v));
  return m;
}

int ScalarField::finite_count() const {
  return static_cast<int>(
      std::count_if(values_.begin(), values_.end(), [](double v) { return is_value(v); }));
}

VectorField2 VectorField2::from_functions(
    std::shared_ptr<const DiscGrid> grid,
    const std::function<double(double, double)>& fx,
    const std::function<double(double, double)>& fy) {
  VectorField2 out;
  out.x = ScalarField::from_function(grid, fx);
  out.y = ScalarField::from_function(std::move(grid), fy);
  return out;
}

}  // namespace qpat
