#include "qpat/forward.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "qpat/calculus.hpp"
#include "qpat/errors.hpp"
#include "qpat/solver.hpp"

namespace qpat {

namespace {

// Portable standard normal: Box-Muller on mt19937_64 so noise realizations
// do not depend on the standard library's distribution implementation.
double standard_normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - static_cast<double>(rng() >> 11) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;        // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void validate(const IlluminationSpec& s) {
  if (!(s.std > 0)) throw_config("illumination std must be positive");
  if (s.amplitude < 0) throw_config("illumination amplitude must be nonnegative");
  if (s.floor < 0) throw_config("illumination floor must be nonnegative");
  if (!(s.amplitude + s.floor > 0)) throw_config("illumination must be positive somewhere");
}

}  // namespace

std::vector<IlluminationSpec> default_illuminations() {
  const double pi = std::numbers::pi;
  return {
      {4.0 / 9.0 * pi, 0.3, 1.0, 0.05},
      {0.5 * pi, 0.3, 1.0, 0.05},
      {5.0 / 9.0 * pi, 0.3, 1.0, 0.05},
  };
}

double illumination_value(const IlluminationSpec& spec, double angle) {
  const double d = wrap_angle_difference(angle, spec.peak_angle);
  return spec.floor +
         spec.amplitude * std::exp(-d * d / (2.0 * spec.std * spec.std));
}

BoundaryData illumination_boundary_values(const IlluminationSpec& spec,
                                          const DiscGrid& grid) {
  validate(spec);
  const auto& pts = grid.boundary_points();
  std::vector<double> angles, values;
  angles.reserve(pts.size());
  values.reserve(pts.size());
  for (const auto& p : pts) {
    angles.push_back(p.angle);
    values.push_back(illumination_value(spec, p.angle));
  }
  return BoundaryData::from_samples(std::move(angles), std::move(values));
}

DataSet simulate(const ScalarField& diffusion, const ScalarField& absorption,
                 const std::vector<IlluminationSpec>& specs, int fine_n,
                 int meas_n, double noise_level, unsigned long long seed) {
  if (fine_n < 2 * meas_n)
    throw_config("inverse-crime guard: fine_n must be at least 2 * meas_n");
  if (specs.empty()) throw_config("at least one illumination is required");
  if (noise_level < 0) throw_config("noise level must be nonnegative");
  const auto& fine = diffusion.grid_ptr();
  if (fine->n() != fine_n)
    throw_config("coefficient fields must live on the fine grid (n=" +
                 std::to_string(fine_n) + ")");
  if (!absorption.grid_ptr()->same_geometry(*fine))
    throw_config("diffusion and absorption grids differ");

  auto meas = build_disc_grid(meas_n, fine->radius());

  DataSet data;
  data.grid = meas;
  data.noise_level = noise_level;
  data.illuminations = specs;

  ScalarField zero(fine, 0.0);
  std::mt19937_64 rng(seed);
  for (const auto& spec : specs) {
    const BoundaryData g = illumination_boundary_values(spec, *fine);
    auto [op, rhs] = assemble(diffusion, absorption, g, zero);
    auto [u, report] = solve(op, rhs);

    ScalarField h_fine(fine, kSentinel);
    const int fn = fine->n();
    for (int iy = 0; iy < fn; ++iy) {
      for (int ix = 0; ix < fn; ++ix) {
        const int idx = fine->index(ix, iy);
        double mu = absorption[idx];
        const double uv = u[idx];
        if (!is_value(uv)) continue;
        if (!is_value(mu)) {
          // Ghost ring: u carries the boundary value; borrow the absorption
          // of an adjacent disc node so restriction can straddle the circle.
          double acc = 0;
          int cnt = 0;
          for (int d = 0; d < 4; ++d) {
            const int jx = ix + kDirDx[d], jy = iy + kDirDy[d];
            if (fine->is_exterior(jx, jy)) continue;
            const double m = absorption.at(jx, jy);
            if (is_value(m)) {
              acc += m;
              ++cnt;
            }
          }
          if (cnt == 0) continue;
          mu = acc / cnt;
        }
        h_fine[idx] = mu * uv;
      }
    }
    ScalarField h = restrict_to(h_fine, meas);
    if (noise_level > 0) {
      for (int idx = 0; idx < meas->size(); ++idx) {
        if (!is_value(h[idx])) continue;
        h[idx] *= 1.0 + noise_level * standard_normal(rng);
      }
    }
    data.H.push_back(std::move(h));
  }
  return data;
}

}  // namespace qpat
