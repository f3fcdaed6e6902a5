#include "qpat/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qpat/errors.hpp"

namespace qpat {

double wrap_angle(double a) {
  const double two_pi = 2 * std::numbers::pi;
  double w = std::fmod(a, two_pi);
  if (w < 0) w += two_pi;
  return w;
}

double wrap_angle_difference(double a, double b) {
  const double two_pi = 2 * std::numbers::pi;
  double d = std::fmod(a - b, two_pi);
  if (d <= -std::numbers::pi) d += two_pi;
  if (d > std::numbers::pi) d -= two_pi;
  return d;
}

BoundaryData BoundaryData::constant(double c) {
  BoundaryData b;
  b.eval_ = [c](double) { return c; };
  return b;
}

BoundaryData BoundaryData::from_function(std::function<double(double)> f) {
  BoundaryData b;
  b.eval_ = std::move(f);
  return b;
}

BoundaryData BoundaryData::from_samples(std::vector<double> angles,
                                        std::vector<double> values) {
  if (angles.size() != values.size() || angles.empty())
    throw_config("boundary samples: angle/value size mismatch or empty");
  if (!std::is_sorted(angles.begin(), angles.end()))
    throw_config("boundary samples must be sorted by angle");
  BoundaryData b;
  b.eval_ = [angles = std::move(angles), values = std::move(values)](double a) {
    const double two_pi = 2 * std::numbers::pi;
    const double w = wrap_angle(a);
    auto it = std::upper_bound(angles.begin(), angles.end(), w);
    // Periodic segment: samples i-1 -> i with wraparound at both ends.
    std::size_t hi = static_cast<std::size_t>(it - angles.begin());
    std::size_t lo;
    double a_lo, a_hi;
    if (hi == 0 || hi == angles.size()) {
      lo = angles.size() - 1;
      hi = 0;
      a_lo = angles[lo];
      a_hi = angles[0] + two_pi;
    } else {
      lo = hi - 1;
      a_lo = angles[lo];
      a_hi = angles[hi];
    }
    double t = a_hi > a_lo ? (w >= a_lo ? w - a_lo : w + two_pi - a_lo) / (a_hi - a_lo) : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (1 - t) * values[lo] + t * values[hi];
  };
  return b;
}

double BoundaryData::operator()(double angle) const {
  return eval_(angle);
}

}  // namespace qpat
