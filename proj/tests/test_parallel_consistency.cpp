#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "qpat/calculus.hpp"
#include "qpat/reference.hpp"
#include "qpat/solver.hpp"

using namespace qpat;

// The OpenMP drivers and the serial reference share the per-node kernels, so
// outputs must agree bit for bit whatever the thread count.

namespace {

bool bit_equal(const ScalarField& a, const ScalarField& b) {
  if (a.size() != b.size()) return false;
  for (int idx = 0; idx < a.size(); ++idx) {
    const double x = a[idx], y = b[idx];
    if (is_value(x) != is_value(y)) return false;
    if (is_value(x) && std::memcmp(&x, &y, sizeof(double)) != 0) return false;
  }
  return true;
}

ScalarField wavy_field(std::shared_ptr<const DiscGrid> grid) {
  return ScalarField::from_function(grid, [](double x, double y) {
    return std::sin(3 * x) * std::cos(2 * y) + 0.2 * x * y;
  });
}

ScalarField masked_noise_field(std::shared_ptr<const DiscGrid> grid, unsigned seed) {
  ScalarField f(grid, kSentinel);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const int n = grid->n();
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      if (grid->node_class(ix, iy) != NodeClass::Exterior &&
          std::hypot(grid->x(ix) - 0.2, grid->y(iy)) > 0.25)
        f.at(ix, iy) = uni(rng);
  return f;
}

}  // namespace

TEST_CASE("gradient and divergence match the serial reference bitwise") {
  auto grid = build_disc_grid(97, 1.0);
  const auto f = wavy_field(grid);
  const auto g_par = gradient(f);
  const auto g_ser = reference::gradient(f);
  CHECK(bit_equal(g_par.x, g_ser.x));
  CHECK(bit_equal(g_par.y, g_ser.y));
  CHECK(bit_equal(divergence(g_par), reference::divergence(g_ser)));

  // Ragged data edges exercise the one-sided fallbacks identically.
  const auto ragged = masked_noise_field(grid, 5);
  const auto r_par = gradient(ragged);
  const auto r_ser = reference::gradient(ragged);
  CHECK(bit_equal(r_par.x, r_ser.x));
  CHECK(bit_equal(r_par.y, r_ser.y));
}

TEST_CASE("laplacian matches the serial reference bitwise") {
  auto grid = build_disc_grid(97, 1.0);
  const auto f = wavy_field(grid);
  CHECK(bit_equal(laplacian(f), reference::laplacian(f)));
  const BoundaryData g = BoundaryData::from_function(
      [](double a) { return std::sin(3 * std::cos(a)) * std::cos(2 * std::sin(a)); });
  CHECK(bit_equal(laplacian(f, &g), reference::laplacian(f, &g)));
}

TEST_CASE("both smoothers match their serial references bitwise") {
  auto grid = build_disc_grid(97, 1.0);
  const auto f = wavy_field(grid);
  for (double width : {0.01, 0.05}) {
    CHECK(bit_equal(gaussian_smooth(f, width), reference::gaussian_smooth(f, width)));
    CHECK(bit_equal(gaussian_smooth_fit(f, width),
                    reference::gaussian_smooth_fit(f, width)));
  }
  const auto ragged = masked_noise_field(grid, 9);
  CHECK(bit_equal(gaussian_smooth(ragged, 0.05),
                  reference::gaussian_smooth(ragged, 0.05)));
  CHECK(bit_equal(gaussian_smooth_fit(ragged, 0.05),
                  reference::gaussian_smooth_fit(ragged, 0.05)));
}

TEST_CASE("operator application matches the serial spmv bitwise") {
  auto grid = build_disc_grid(65, 1.0);
  const auto a =
      ScalarField::from_function(grid, [](double x, double y) { return 1 + 0.3 * x * y; });
  ScalarField b(grid, 1.0), zero(grid, 0.0);
  auto [op, rhs] = assemble(a, b, BoundaryData::constant(1.0), zero);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> x(op.dimension());
  for (auto& v : x) v = uni(rng);
  std::vector<double> y_par;
  op.apply(x, y_par);
  std::vector<double> y_ser(op.dimension());
  reference::spmv(op.dimension(), op.row_ptr().data(), op.cols().data(),
                  op.coefs().data(), x.data(), y_ser.data());
  CHECK(std::memcmp(y_par.data(), y_ser.data(), y_par.size() * sizeof(double)) == 0);
}

TEST_CASE("calculus ops are pure: repeated calls are bit-identical") {
  auto grid = build_disc_grid(65, 1.0);
  const auto f = wavy_field(grid);
  CHECK(bit_equal(gradient(f).x, gradient(f).x));
  CHECK(bit_equal(laplacian(f), laplacian(f)));
  CHECK(bit_equal(gaussian_smooth(f, 0.04), gaussian_smooth(f, 0.04)));
  VectorField2 v;
  v.x = f;
  v.y = f;
  CHECK(line_integral(v, {0.9, 0.0}, {-0.2, 0.3}) ==
        line_integral(v, {0.9, 0.0}, {-0.2, 0.3}));
}
