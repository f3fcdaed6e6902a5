#pragma once

#include <memory>
#include <optional>

#include "qpat/boundary.hpp"
#include "qpat/field.hpp"

namespace qpat {

/// Central differences where both axis neighbors hold values, one-sided
/// second-order stencils at data edges, sentinel where no 3-node stencil
/// fits. If either component is uncomputable at a node, both are sentinel.
VectorField2 gradient(const ScalarField& f);

/// Componentwise derivative sum with the same stencil fallback as gradient.
ScalarField divergence(const VectorField2& v);

/// 5-point stencil where all 4 neighbors hold values. With Dirichlet data
/// supplied, boundary-adjacent nodes use the Shortley-Weller unequal-arm
/// stencil with the boundary value at each cut point; without it those nodes
/// are sentinel.
ScalarField laplacian(const ScalarField& f, const BoundaryData* dirichlet = nullptr);

/// Truncated discrete Gaussian of the given physical width (support radius
/// 3*width), renormalized over the finite-valued footprint so constants are
/// preserved near the boundary. width = 0 returns the input unchanged.
ScalarField gaussian_smooth(const ScalarField& f, double width);

/// Same kernel applied as a weighted local linear fit: identical to
/// gaussian_smooth wherever the footprint is complete, but first-order exact
/// at data edges, so derivatives taken after smoothing stay unbiased there.
/// The reconstruction pipeline smooths with this variant.
ScalarField gaussian_smooth_fit(const ScalarField& f, double width);

/// Bilinear interpolation at (x, y); corners without values are dropped and
/// the remaining weights renormalized. Returns nullopt when no corner of the
/// containing cell holds a value.
std::optional<double> interpolate(const ScalarField& f, double x, double y);
std::optional<Point> interpolate(const VectorField2& v, double x, double y);

/// Composite-trapezoid integral of v . dl along the straight segment a -> b,
/// sample step <= h/2. Throws PathLeavesData if any sample falls where v has
/// no usable values.
double line_integral(const VectorField2& v, Point a, Point b);

/// As line_integral but reports an uncovered sample as nullopt instead of
/// throwing; the path-averaging loops discard such paths.
std::optional<double> try_line_integral(const VectorField2& v, Point a, Point b);

/// line_integral with the preconditions of the reconstruction paths: start
/// on the circle (within 1e-9*R), target non-exterior.
double path_integrate(const VectorField2& v, Point start, Point target);

/// Bilinear sampling of a finer-grid field at the coarse node positions.
/// Requires strictly smaller fine spacing and matching radii.
ScalarField restrict_to(const ScalarField& fine,
                        std::shared_ptr<const DiscGrid> coarse);

}  // namespace qpat
