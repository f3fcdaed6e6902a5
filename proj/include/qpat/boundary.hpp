#pragma once

#include <functional>
#include <memory>
#include <vector>

namespace qpat {

/// Dirichlet data on the circle, parameterized by angle. Either an analytic
/// profile or samples interpolated periodically in angle.
class BoundaryData {
 public:
  BoundaryData() = default;

  static BoundaryData constant(double c);
  static BoundaryData from_function(std::function<double(double)> f);
  /// Samples at strictly increasing angles in [0, 2*pi); linear interpolation
  /// with wraparound.
  static BoundaryData from_samples(std::vector<double> angles,
                                   std::vector<double> values);

  double operator()(double angle) const;
  bool valid() const { return static_cast<bool>(eval_); }

 private:
  std::function<double(double)> eval_;
};

/// Wraps an angle difference into (-pi, pi].
double wrap_angle_difference(double a, double b);

/// Wraps an angle into [0, 2*pi).
double wrap_angle(double a);

}  // namespace qpat
