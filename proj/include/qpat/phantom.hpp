#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "qpat/field.hpp"

namespace qpat {

enum class ShapeKind { Rectangle, Disc, Triangle };

/// One inclusion: rectangles by min/max corners, discs by center/radius,
/// triangles by counterclockwise vertices. Later shapes overwrite earlier
/// ones where they overlap.
struct Shape {
  ShapeKind kind = ShapeKind::Disc;
  std::array<Point, 3> pts{};  // rect: pts[0]=min, pts[1]=max; disc: pts[0]=center
  double radius = 0;           // disc only
  double value = 0;

  static Shape rectangle(Point lo, Point hi, double value);
  static Shape disc(Point center, double radius, double value);
  static Shape triangle(Point a, Point b, Point c, double value);

  bool contains(double x, double y) const;
  /// True when the whole shape lies inside the disc of the given radius.
  bool inside_disc(double disc_radius) const;
};

struct PhantomSpec {
  double background = 0;
  std::vector<Shape> shapes;
  double smooth_width = 0;  // 0 keeps the medium piecewise constant
};

/// Canonical two-coefficient layout used by the experiments: three shared
/// inclusions plus a top rectangle and a triangle present only in the
/// absorption map. Diffusion values span [0.1, 0.35] over background 0.2,
/// absorption [10, 35] over background 20.
struct PhantomPair {
  PhantomSpec diffusion;
  PhantomSpec absorption;
};
PhantomPair phantom_a(double smooth_width);

/// Membership rasterization followed by Gaussian smoothing of smooth_width.
/// Shapes reaching outside the disc are a Config error.
ScalarField rasterize(const PhantomSpec& spec, std::shared_ptr<const DiscGrid> grid);

/// Reads a binary 8-bit P5 graymap, maps gray levels affinely onto
/// [value_range_lo, value_range_hi], and resamples bilinearly onto the grid
/// (image rectangle mapped onto the bounding square of the disc, row 0 at
/// the top). Samples outside the image take the background value.
ScalarField import_raster(const std::string& path, double background,
                          double value_range_lo, double value_range_hi,
                          std::shared_ptr<const DiscGrid> grid);

}  // namespace qpat
