#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>

#include "qpat/errors.hpp"
#include "qpat/field_io.hpp"
#include "qpat/forward.hpp"

using namespace qpat;

TEST_CASE("field files round-trip at full binary precision") {
  auto grid = build_disc_grid(33, 0.75);
  ScalarField f(grid, 0.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(-1e6, 1e6);
  for (int idx = 0; idx < f.size(); ++idx)
    if (is_value(f[idx])) f[idx] = uni(rng);
  const std::string path = "/tmp/qpat_roundtrip.fld";
  write_field(f, path);
  const ScalarField g = read_field(path);
  CHECK(g.grid().n() == 33);
  CHECK(g.grid().radius() == 0.75);
  CHECK(std::memcmp(f.values().data(), g.values().data(),
                    f.size() * sizeof(double)) == 0);
  std::remove(path.c_str());
}

TEST_CASE("field reader rejects malformed and truncated files") {
  const std::string path = "/tmp/qpat_badfield.fld";
  std::ofstream(path) << "NOTAFIELD";
  CHECK_THROWS_AS(read_field(path), Error);
  std::ofstream(path) << "QPATFLD 1\nn=33\nradius=1\nencoding=binary64\nshort";
  CHECK_THROWS_AS(read_field(path), Error);
  CHECK_THROWS_AS(read_field("/nonexistent/f.fld"), Error);
  std::remove(path.c_str());
}

TEST_CASE("graymap export scales min-max onto 0..255 and drops NaN to 0") {
  auto grid = build_disc_grid(33, 1.0);
  const auto f = ScalarField::from_function(
      grid, [](double x, double) { return x; });  // min -1 at west, max 1 at east
  const std::string path = "/tmp/qpat_field.pgm";
  write_pgm(f, path);
  const PgmImage img = read_pgm(path);
  CHECK(img.width == 33);
  CHECK(img.height == 33);
  int lo = 255, hi = 0;
  for (auto p : img.pixels) {
    lo = std::min<int>(lo, p);
    hi = std::max<int>(hi, p);
  }
  CHECK(lo == 0);
  CHECK(hi == 255);
  // Exterior corner pixels map to 0.
  CHECK(img.pixels[0] == 0);
  std::remove(path.c_str());
}

TEST_CASE("manifest round-trips every recorded quantity") {
  ForwardManifest m;
  m.fine_n = 512;
  m.meas_n = 256;
  m.radius = 1.0;
  m.noise_level = 0.01;
  m.seed = 424242;
  m.illuminations = default_illuminations();
  m.field_files = {"H1.fld", "H2.fld", "H3.fld"};
  const std::string path = "/tmp/qpat_manifest.json";
  write_manifest(m, path);
  const ForwardManifest r = read_manifest(path);
  CHECK(r.fine_n == m.fine_n);
  CHECK(r.meas_n == m.meas_n);
  CHECK(r.radius == m.radius);
  CHECK(r.noise_level == m.noise_level);
  CHECK(r.seed == m.seed);
  REQUIRE(r.illuminations.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.illuminations[i].peak_angle == m.illuminations[i].peak_angle);
    CHECK(r.illuminations[i].std == m.illuminations[i].std);
    CHECK(r.illuminations[i].floor == m.illuminations[i].floor);
  }
  CHECK(r.field_files == m.field_files);
  std::remove(path.c_str());
}

TEST_CASE("masks survive the 0/1 field encoding") {
  auto grid = build_disc_grid(33, 1.0);
  Mask mask(grid->size(), 0);
  for (int idx = 0; idx < grid->size(); ++idx)
    if (grid->node_class(idx) != NodeClass::Exterior && idx % 3 == 0) mask[idx] = 1;
  const Mask back = field_to_mask(mask_to_field(mask, grid));
  CHECK(back == mask);
}
