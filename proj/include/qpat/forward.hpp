#pragma once

#include <memory>
#include <vector>

#include "qpat/boundary.hpp"
#include "qpat/field.hpp"

namespace qpat {

/// Gaussian boundary illumination in angle: floor + amplitude *
/// exp(-d(angle, peak)^2 / (2 std^2)) with the wrapped angular distance.
struct IlluminationSpec {
  double peak_angle = 0;  // radians
  double std = 0.3;       // radians
  double amplitude = 1.0;
  double floor = 0.0;
};

/// The three boundary profiles used throughout: peaks at 4/9 pi, 1/2 pi,
/// 5/9 pi, std 0.3, floor 0.05 so the leading illumination stays strictly
/// positive on the whole circle.
std::vector<IlluminationSpec> default_illuminations();

/// Internal data H_j = absorption * u_j on the measurement grid.
struct DataSet {
  std::vector<ScalarField> H;
  std::shared_ptr<const DiscGrid> grid;
  double noise_level = 0;
  std::vector<IlluminationSpec> illuminations;  // needed downstream for the
                                                // boundary values of ln sigma
};

/// The illumination profile at one angle.
double illumination_value(const IlluminationSpec& spec, double angle);

/// Evaluates the illumination at each boundary point of the grid and wraps
/// the samples as angle-interpolated boundary data.
BoundaryData illumination_boundary_values(const IlluminationSpec& spec,
                                          const DiscGrid& grid);

/// Solves the diffusion problem once per illumination on the fine grid,
/// forms H = absorption * u, restricts to the measurement grid and applies
/// multiplicative Gaussian noise H * (1 + noise_level * xi) with a seeded,
/// reproducible xi. Requires fine_n >= 2 * meas_n (inverse-crime guard) and
/// diffusion/absorption given on the fine grid.
DataSet simulate(const ScalarField& diffusion, const ScalarField& absorption,
                 const std::vector<IlluminationSpec>& specs, int fine_n,
                 int meas_n, double noise_level, unsigned long long seed);

}  // namespace qpat
