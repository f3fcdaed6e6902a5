#include "qpat/recon.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

#include "qpat/calculus.hpp"
#include "qpat/errors.hpp"

namespace qpat {

void ReconConfig::validate() const {
  if (!(cond_threshold > 1)) throw_config("cond_threshold must exceed 1");
  if (smooth_width_data < 0 || smooth_width_grad < 0)
    throw_config("smoothing widths must be nonnegative");
  if (n_path_starts < 1) throw_config("n_path_starts must be at least 1");
  if (!(background_diffusion > 0) || !(background_absorption > 0))
    throw_config("background coefficients must be positive");
  if (!boundary_diffusion.valid()) throw_config("boundary diffusion data missing");
  if (!(solver_tol > 0 && solver_tol <= 1e-2))
    throw_config("solver tolerance must lie in (0, 1e-2]");
}

double default_h1_threshold(const ScalarField& smoothed_h1, double noise_level) {
  const double peak = smoothed_h1.max_abs();
  return (noise_level > 0 ? 5.0 * noise_level : 1e-3) * peak;
}

LocalSystemField::LocalSystemField(std::shared_ptr<const DiscGrid> grid)
    : grid_(std::move(grid)),
      systems_(grid_->size()),
      valid_(grid_->size(), 0) {}

int LocalSystemField::valid_count() const {
  return static_cast<int>(std::count(valid_.begin(), valid_.end(), 1));
}

std::vector<ScalarField> ratio_fields(const DataSet& data, const ReconConfig& cfg) {
  cfg.validate();
  if (data.H.size() < 3)
    throw_config("the pipeline needs at least 3 internal data fields");
  const auto& grid = data.H[0].grid_ptr();
  const ScalarField s1 = gaussian_smooth_fit(data.H[0], cfg.smooth_width_data);
  const double thr =
      cfg.h1_threshold > 0 ? cfg.h1_threshold
                           : default_h1_threshold(s1, data.noise_level);

  std::vector<ScalarField> out;
  bool any = false;
  for (std::size_t j = 1; j < data.H.size(); ++j) {
    if (!data.H[j].grid_ptr()->same_geometry(*grid))
      throw_config("internal data fields live on different grids");
    const ScalarField sj = gaussian_smooth_fit(data.H[j], cfg.smooth_width_data);
    ScalarField v(grid, kSentinel);
    for (int idx = 0; idx < grid->size(); ++idx) {
      const double a = s1[idx], b = sj[idx];
      if (is_value(a) && is_value(b) && a > thr) {
        v[idx] = b / a;
        any = true;
      }
    }
    out.push_back(std::move(v));
  }
  if (!any)
    throw Error(ErrorCode::EmptyRegion,
                "no node exceeds the H1 threshold " + std::to_string(thr));
  return out;
}

namespace {

// Closed-form singular values of a 2x2 matrix via its Frobenius norm and
// determinant; sigma1*sigma2 = |det| holds by construction.
void svd2_cond_det(const double m[2][2], double& cond, double& det) {
  det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  const double frob2 = m[0][0] * m[0][0] + m[0][1] * m[0][1] +
                       m[1][0] * m[1][0] + m[1][1] * m[1][1];
  const double disc = std::sqrt(
      std::max(0.0, frob2 * frob2 - 4.0 * det * det));
  const double s1 = std::sqrt((frob2 + disc) / 2.0);
  const double s2 = s1 > 0 ? std::abs(det) / s1 : 0.0;
  cond = s2 > 0 ? s1 / s2 : std::numeric_limits<double>::infinity();
}

}  // namespace

LocalSystemField local_systems(const std::vector<ScalarField>& v,
                               const ReconConfig& cfg,
                               const std::vector<BoundaryData>* v_boundaries) {
  if (v.size() < 2) throw_config("local systems need at least two ratio fields");
  if (v_boundaries != nullptr && v_boundaries->size() < 2)
    throw_config("need one boundary profile per used ratio field");
  const auto& grid = v[0].grid_ptr();

  // The 2x2 systems use the first two ratios; pre-smooth before deriving.
  std::vector<ScalarField> vs;
  for (int j = 0; j < 2; ++j)
    vs.push_back(gaussian_smooth_fit(v[j], cfg.smooth_width_grad));
  std::vector<VectorField2> grads;
  std::vector<ScalarField> laps;
  for (int j = 0; j < 2; ++j) {
    grads.push_back(gradient(vs[j]));
    laps.push_back(
        laplacian(vs[j], v_boundaries ? &(*v_boundaries)[j] : nullptr));
  }

  LocalSystemField out(grid);
#pragma omp parallel for schedule(static)
  for (int idx = 0; idx < grid->size(); ++idx) {
    const double g0x = grads[0].x[idx], g0y = grads[0].y[idx];
    const double g1x = grads[1].x[idx], g1y = grads[1].y[idx];
    const double l0 = laps[0][idx], l1 = laps[1][idx];
    if (!is_value(g0x) || !is_value(g0y) || !is_value(g1x) || !is_value(g1y) ||
        !is_value(l0) || !is_value(l1))
      continue;
    LocalSystem& s = out[idx];
    s.m[0][0] = g0x;
    s.m[0][1] = g0y;
    s.m[1][0] = g1x;
    s.m[1][1] = g1y;
    // div(sigma grad v) = 0 expands to grad(v) . grad(ln sigma) = -lap(v),
    // so the right-hand side carries the negated Laplacian.
    s.n[0] = -l0;
    s.n[1] = -l1;
    svd2_cond_det(s.m, s.cond, s.det);
    out.set_valid(idx, true);
  }
  return out;
}

Mask reliable_region(const LocalSystemField& systems, const ScalarField& h1,
                     const ReconConfig& cfg) {
  const auto& grid = systems.grid_ptr();
  const DiscGrid& g = *grid;
  const double thr = cfg.h1_threshold > 0 ? cfg.h1_threshold
                                          : default_h1_threshold(h1, 0.0);
  Mask candidate(g.size(), 0);
  for (int idx = 0; idx < g.size(); ++idx) {
    if (!systems.valid(idx)) continue;
    const double v = h1[idx];
    if (!is_value(v) || v <= thr) continue;
    if (!(systems[idx].cond <= cfg.cond_threshold)) continue;
    candidate[idx] = 1;
  }

  // Largest 4-connected component that reaches within 3h of the circle.
  const int n = g.n();
  const double touch = g.radius() - 3.0 * g.h();
  std::vector<int> comp(g.size(), -1);
  int best_id = -1, best_size = 0;
  int next_id = 0;
  for (int seed = 0; seed < g.size(); ++seed) {
    if (!candidate[seed] || comp[seed] >= 0) continue;
    std::deque<int> queue{seed};
    comp[seed] = next_id;
    int size = 0;
    bool touches = false;
    while (!queue.empty()) {
      const int idx = queue.front();
      queue.pop_front();
      ++size;
      const int ix = idx % n, iy = idx / n;
      if (std::hypot(g.x(ix), g.y(iy)) >= touch) touches = true;
      for (int d = 0; d < 4; ++d) {
        const int jx = ix + kDirDx[d], jy = iy + kDirDy[d];
        if (!g.in_bounds(jx, jy)) continue;
        const int jdx = g.index(jx, jy);
        if (candidate[jdx] && comp[jdx] < 0) {
          comp[jdx] = next_id;
          queue.push_back(jdx);
        }
      }
    }
    if (touches && size > best_size) {
      best_size = size;
      best_id = next_id;
    }
    ++next_id;
  }
  if (best_id < 0)
    throw Error(ErrorCode::EmptyRegion,
                "no reliable component reaches the boundary");
  Mask mask(g.size(), 0);
  for (int idx = 0; idx < g.size(); ++idx)
    if (comp[idx] == best_id) mask[idx] = 1;
  return mask;
}

VectorField2 solve_grad_ln_sigma(const LocalSystemField& systems, const Mask& mask) {
  const auto& grid = systems.grid_ptr();
  VectorField2 out(grid, kSentinel);
#pragma omp parallel for schedule(static)
  for (int idx = 0; idx < grid->size(); ++idx) {
    if (!mask[idx] || !systems.valid(idx)) continue;
    const LocalSystem& s = systems[idx];
    // 2x2 Gaussian elimination with partial pivoting.
    double a0 = s.m[0][0], a1 = s.m[0][1], b0 = s.n[0];
    double c0 = s.m[1][0], c1 = s.m[1][1], b1 = s.n[1];
    if (std::abs(c0) > std::abs(a0)) {
      std::swap(a0, c0);
      std::swap(a1, c1);
      std::swap(b0, b1);
    }
    const double f = c0 / a0;
    const double u1 = (b1 - f * b0) / (c1 - f * a1);
    const double u0 = (b0 - a1 * u1) / a0;
    out.x[idx] = u0;
    out.y[idx] = u1;
  }
  return out;
}

namespace {

// Boundary points adjacent to the mask, ordered along the arc (the largest
// angular gap separates the two arc ends).
std::vector<BoundaryPoint> admissible_starts(const DiscGrid& g, const Mask& mask) {
  std::vector<BoundaryPoint> adm;
  const double reach = 3.0 * g.h();
  for (const auto& bp : g.boundary_points()) {
    const int ix = static_cast<int>(std::round((bp.x + g.radius()) / g.h()));
    const int iy = static_cast<int>(std::round((bp.y + g.radius()) / g.h()));
    bool near = false;
    for (int dy = -3; dy <= 3 && !near; ++dy) {
      for (int dx = -3; dx <= 3; ++dx) {
        const int jx = ix + dx, jy = iy + dy;
        if (!g.in_bounds(jx, jy) || !mask[g.index(jx, jy)]) continue;
        if (std::hypot(g.x(jx) - bp.x, g.y(jy) - bp.y) <= reach) {
          near = true;
          break;
        }
      }
    }
    if (near) adm.push_back(bp);
  }
  if (adm.size() < 2) return adm;
  // Rotate so the list starts right after the largest angular gap.
  const double two_pi = 2 * std::numbers::pi;
  std::size_t gap_at = 0;
  double gap = -1;
  for (std::size_t i = 0; i < adm.size(); ++i) {
    const std::size_t j = (i + 1) % adm.size();
    const double d = i + 1 < adm.size() ? adm[j].angle - adm[i].angle
                                        : adm[j].angle + two_pi - adm[i].angle;
    if (d > gap) {
      gap = d;
      gap_at = j;
    }
  }
  std::rotate(adm.begin(), adm.begin() + static_cast<std::ptrdiff_t>(gap_at), adm.end());
  return adm;
}

// Bilinear sample of g with a one-ring nearest-node fallback. The fallback
// bridges the thin band between the circle (where paths anchor) and the
// first nodes carrying a solved system; anything farther from the data than
// one ring still reads as a mask departure.
std::optional<Point> sample_bridged(const VectorField2& g, double x, double y) {
  const auto direct = interpolate(g, x, y);
  if (direct) return direct;
  const DiscGrid& gr = g.grid();
  const int n = gr.n();
  const double h = gr.h();
  const int ix0 = std::clamp(static_cast<int>(std::floor((x + gr.radius()) / h)), 0, n - 2);
  const int iy0 = std::clamp(static_cast<int>(std::floor((y + gr.radius()) / h)), 0, n - 2);
  double best = 4.0 * h * h;  // within one ring of the containing cell
  std::optional<Point> out;
  for (int jy = iy0 - 1; jy <= iy0 + 2; ++jy) {
    for (int jx = ix0 - 1; jx <= ix0 + 2; ++jx) {
      if (!gr.in_bounds(jx, jy)) continue;
      const double vx = g.x.at(jx, jy);
      if (!is_value(vx)) continue;
      const double dx = gr.x(jx) - x, dy = gr.y(jy) - y;
      const double d2 = dx * dx + dy * dy;
      if (d2 < best) {
        best = d2;
        out = Point{vx, g.y.at(jx, jy)};
      }
    }
  }
  return out;
}

// Trapezoid path integral using the bridged sampler; nullopt when a sample
// sits farther than the bridging reach from any data.
std::optional<double> bridged_line_integral(const VectorField2& g, Point a, Point b) {
  const double h = g.grid().h();
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  if (len == 0) return 0.0;
  const int m = std::max(1, static_cast<int>(std::ceil(len / (h / 2))));
  const double sx = (b.x - a.x) / m, sy = (b.y - a.y) / m;
  double prev_dot = 0, integral = 0;
  for (int kth = 0; kth <= m; ++kth) {
    const auto val = sample_bridged(g, a.x + kth * sx, a.y + kth * sy);
    if (!val) return std::nullopt;
    const double dot = val->x * sx + val->y * sy;
    if (kth > 0) integral += 0.5 * (prev_dot + dot);
    prev_dot = dot;
  }
  return integral;
}

std::vector<BoundaryPoint> pick_equispaced(const std::vector<BoundaryPoint>& arc,
                                           int count) {
  std::vector<BoundaryPoint> out;
  if (arc.empty()) return out;
  const int m = static_cast<int>(arc.size());
  const int k = std::min(count, m);
  std::size_t prev = std::numeric_limits<std::size_t>::max();
  for (int i = 0; i < k; ++i) {
    const std::size_t pick =
        k == 1 ? static_cast<std::size_t>((m - 1) / 2)
               : static_cast<std::size_t>(
                     std::llround(static_cast<double>(i) * (m - 1) / (k - 1)));
    if (pick != prev) out.push_back(arc[pick]);
    prev = pick;
  }
  return out;
}

}  // namespace

ScalarField integrate_ln_sigma(const VectorField2& g, Mask& mask,
                               const BoundaryData& ln_sigma_boundary,
                               const ReconConfig& cfg, int* dropped_count,
                               ScalarField* spread_out) {
  const auto& grid = g.grid_ptr();
  const DiscGrid& gr = *grid;
  const auto arc = admissible_starts(gr, mask);
  if (arc.empty())
    throw Error(ErrorCode::EmptyRegion, "reliable mask has no boundary access");
  const auto starts = pick_equispaced(arc, cfg.n_path_starts);

  std::vector<double> start_ln_sigma;
  start_ln_sigma.reserve(starts.size());
  for (const auto& s : starts) start_ln_sigma.push_back(ln_sigma_boundary(s.angle));

  ScalarField out(grid, kSentinel);
  if (spread_out != nullptr) *spread_out = ScalarField(grid, kSentinel);
  const int n = gr.n();
  int dropped = 0;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : dropped)
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const int idx = gr.index(ix, iy);
      if (!mask[idx]) continue;
      const Point target{gr.x(ix), gr.y(iy)};
      double acc = 0, acc2 = 0;
      int used = 0;
      for (std::size_t s = 0; s < starts.size(); ++s) {
        const auto integral =
            bridged_line_integral(g, {starts[s].x, starts[s].y}, target);
        if (!integral) continue;  // the straight path leaves the mask
        const double est = start_ln_sigma[s] + *integral;
        acc += est;
        acc2 += est * est;
        ++used;
      }
      if (used == 0) {
        mask[idx] = 0;  // unreachable node, dropped from the mask
        ++dropped;
      } else {
        const double mean = acc / used;
        out[idx] = std::exp(mean);
        if (spread_out != nullptr)
          (*spread_out)[idx] = std::sqrt(std::max(0.0, acc2 / used - mean * mean));
      }
    }
  }
  if (dropped_count != nullptr) *dropped_count = dropped;
  return out;
}

ScalarField helmholtz_coefficient(const VectorField2& g, const Mask& mask,
                                  const ReconConfig& cfg) {
  const auto& grid = g.grid_ptr();
  VectorField2 gs;
  gs.x = gaussian_smooth_fit(g.x, cfg.smooth_width_grad);
  gs.y = gaussian_smooth_fit(g.y, cfg.smooth_width_grad);
  const ScalarField div = divergence(gs);
  ScalarField q(grid, kSentinel);
#pragma omp parallel for schedule(static)
  for (int idx = 0; idx < grid->size(); ++idx) {
    if (!mask[idx]) continue;
    const double gx = gs.x[idx], gy = gs.y[idx], dv = div[idx];
    if (!is_value(gx) || !is_value(gy) || !is_value(dv)) continue;
    q[idx] = 0.25 * (gx * gx + gy * gy) + 0.5 * dv;
  }
  return q;
}

ScalarField complete_field(const ScalarField& f, const Mask& mask,
                           const Completion& strategy) {
  const auto& grid = f.grid_ptr();
  double fill = strategy.value;
  if (strategy.kind == CompletionKind::Average) {
    double acc = 0;
    int cnt = 0;
    for (int idx = 0; idx < grid->size(); ++idx) {
      if (mask[idx] && is_value(f[idx])) {
        acc += f[idx];
        ++cnt;
      }
    }
    if (cnt == 0)
      throw Error(ErrorCode::EmptyRegion, "cannot average over an empty mask");
    fill = acc / cnt;
  }
  ScalarField out(grid, kSentinel);
  for (int idx = 0; idx < grid->size(); ++idx) {
    if (grid->node_class(idx) == NodeClass::Exterior) continue;
    out[idx] = (mask[idx] && is_value(f[idx])) ? f[idx] : fill;
  }
  return out;
}

ScalarField solve_sqrt_diffusion(const ScalarField& q_completed,
                                 const ScalarField& h1,
                                 const ScalarField& sigma_completed,
                                 const ReconConfig& cfg, SolveReport* report,
                                 int* clamped_count) {
  const auto& grid = q_completed.grid_ptr();
  ScalarField one(grid, 1.0);
  ScalarField src(grid, kSentinel);
  for (int idx = 0; idx < grid->size(); ++idx) {
    if (grid->node_class(idx) == NodeClass::Exterior) continue;
    const double s = sigma_completed[idx];
    if (!is_value(s) || s <= 0)
      throw_config("completed sigma must be strictly positive on the disc");
    if (!is_value(h1[idx])) throw_config("H1 undefined on a disc node");
    src[idx] = h1[idx] / std::sqrt(s);
  }
  const BoundaryData bd = cfg.boundary_diffusion;
  const BoundaryData sqrt_bd = BoundaryData::from_function(
      [bd](double angle) { return std::sqrt(std::max(0.0, bd(angle))); });

  auto [op, rhs] = assemble(one, q_completed, sqrt_bd, src);
  auto [w, rep] = solve(op, rhs, cfg.solver_tol, cfg.solver_max_iter);
  if (report != nullptr) *report = rep;

  int clamped = 0;
  for (int idx = 0; idx < grid->size(); ++idx) {
    if (grid->node_class(idx) == NodeClass::Exterior) continue;
    if (is_value(w[idx]) && w[idx] < 0) {
      w[idx] = 0;
      ++clamped;
    }
  }
  if (clamped_count != nullptr) *clamped_count = clamped;
  return w;
}

ScalarField recover_absorption(const ScalarField& h1,
                               const ScalarField& sqrt_diffusion,
                               const ScalarField& sigma, const Mask& mask) {
  const auto& grid = h1.grid_ptr();
  ScalarField out(grid, kSentinel);
#pragma omp parallel for schedule(static)
  for (int idx = 0; idx < grid->size(); ++idx) {
    if (!mask[idx]) continue;
    const double h = h1[idx], w = sqrt_diffusion[idx], s = sigma[idx];
    if (!is_value(h) || !is_value(w) || !is_value(s) || !(s > 0)) continue;
    out[idx] = h * w / std::sqrt(s);
  }
  return out;
}

double relative_error(const ScalarField& recon, const ScalarField& truth,
                      const std::function<bool(double, double)>& region) {
  const DiscGrid& g = recon.grid();
  if (!truth.grid_ptr()->same_geometry(g))
    throw_config("relative_error requires fields on one grid");
  const int n = g.n();
  double num = 0, den = 0;
  int cnt = 0;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      if (g.node_class(ix, iy) == NodeClass::Exterior) continue;
      if (!region(g.x(ix), g.y(iy))) continue;
      const double r = recon.at(ix, iy), t = truth.at(ix, iy);
      if (!is_value(r) || !is_value(t)) continue;
      num += (r - t) * (r - t);
      den += t * t;
      ++cnt;
    }
  }
  if (cnt == 0)
    throw Error(ErrorCode::EmptyRegion, "error region holds no compared nodes");
  if (den == 0) throw_config("relative error against a zero-norm truth");
  return std::sqrt(num / den);
}

Mask erode_mask(const DiscGrid& grid, const Mask& mask, int rings) {
  Mask cur = mask;
  const int n = grid.n();
  for (int pass = 0; pass < rings; ++pass) {
    Mask next = cur;
    for (int iy = 0; iy < n; ++iy) {
      for (int ix = 0; ix < n; ++ix) {
        const int idx = grid.index(ix, iy);
        if (!cur[idx]) continue;
        for (int d = 0; d < 4; ++d) {
          const int jx = ix + kDirDx[d], jy = iy + kDirDy[d];
          if (!grid.in_bounds(jx, jy) || !cur[grid.index(jx, jy)]) {
            next[idx] = 0;
            break;
          }
        }
      }
    }
    cur = std::move(next);
  }
  return cur;
}

int mask_count(const Mask& mask) {
  return static_cast<int>(std::count(mask.begin(), mask.end(), 1));
}

double mask_mean(const ScalarField& f, const Mask& mask) {
  double acc = 0;
  int cnt = 0;
  for (int idx = 0; idx < f.size(); ++idx) {
    if (mask[idx] && is_value(f[idx])) {
      acc += f[idx];
      ++cnt;
    }
  }
  return cnt > 0 ? acc / cnt : kSentinel;
}

namespace {

double masked_l2(const ScalarField& f, const Mask& mask) {
  double acc = 0;
  for (int idx = 0; idx < f.size(); ++idx)
    if (mask[idx] && is_value(f[idx])) acc += f[idx] * f[idx];
  return std::sqrt(acc);
}

}  // namespace

ReconResult run_pipeline(const DataSet& data, const ReconConfig& cfg) {
  cfg.validate();
  if (data.illuminations.empty())
    throw_config("the data set must carry its illumination specs");
  const auto& grid = data.H[0].grid_ptr();

  ReconResult res;
  res.grid = grid;
  auto& diag = res.diagnostics;

  // Resolve the H1 threshold once so every stage sees the same value.
  const ScalarField smoothed_h1 = gaussian_smooth_fit(data.H[0], cfg.smooth_width_data);
  ReconConfig run_cfg = cfg;
  if (run_cfg.h1_threshold <= 0)
    run_cfg.h1_threshold = default_h1_threshold(smoothed_h1, data.noise_level);
  diag.scalars["h1_threshold"] = run_cfg.h1_threshold;
  diag.scalars["h1_smoothed_max"] = smoothed_h1.max_abs();

  const auto v = ratio_fields(data, run_cfg);
  diag.stages.push_back("ratio_fields");

  // Circle values of the ratio fields are the illumination ratios. They are
  // consistent with the sampled field only when no pre-smoothing is applied;
  // the unequal-arm stencil amplifies any smoothing offset by 1/h^2.
  std::vector<BoundaryData> v_boundaries;
  if (run_cfg.smooth_width_grad == 0) {
    for (std::size_t j = 1; j < data.illuminations.size() && j <= 2; ++j) {
      const IlluminationSpec lead = data.illuminations[0];
      const IlluminationSpec other = data.illuminations[j];
      v_boundaries.push_back(BoundaryData::from_function([lead, other](double a) {
        return illumination_value(other, a) / illumination_value(lead, a);
      }));
    }
  }
  const auto systems = local_systems(
      v, run_cfg, v_boundaries.size() >= 2 ? &v_boundaries : nullptr);
  diag.stages.push_back("local_systems");

  res.reliable_mask = reliable_region(systems, smoothed_h1, run_cfg);
  diag.stages.push_back("reliable_region");

  res.grad_ln_sigma = solve_grad_ln_sigma(systems, res.reliable_mask);
  diag.stages.push_back("solve_grad_ln_sigma");

  // Boundary values of ln sigma from the known boundary diffusion and the
  // leading illumination: sigma = D g1^2 on the circle.
  const IlluminationSpec g1 = data.illuminations[0];
  const BoundaryData bd = run_cfg.boundary_diffusion;
  const BoundaryData ln_sigma_boundary = BoundaryData::from_function(
      [g1, bd](double angle) {
        const double gv = illumination_value(g1, angle);
        return std::log(bd(angle) * gv * gv);
      });

  int dropped = 0;
  ScalarField path_spread;
  res.sigma = integrate_ln_sigma(res.grad_ln_sigma, res.reliable_mask,
                                 ln_sigma_boundary, run_cfg, &dropped,
                                 &path_spread);
  diag.scalars["unreachable_dropped"] = dropped;
  diag.scalars["ln_sigma_path_spread_max"] = path_spread.max_abs();
  diag.stages.push_back("integrate_ln_sigma");

  res.helmholtz_q = helmholtz_coefficient(res.grad_ln_sigma, res.reliable_mask,
                                          run_cfg);
  diag.stages.push_back("helmholtz_coefficient");

  // Completion: the Helmholtz coefficient is filled with a constant; sigma is
  // extended so the source H1/sqrt(sigma) lands at the same constant policy
  // (mu/sqrt(D) for Background, the mask average of the source otherwise).
  Completion q_completion{run_cfg.completion,
                          run_cfg.background_absorption / run_cfg.background_diffusion};
  const ScalarField q_completed =
      complete_field(res.helmholtz_q, res.reliable_mask, q_completion);

  double source_fill;
  if (run_cfg.completion == CompletionKind::Background) {
    source_fill =
        run_cfg.background_absorption / std::sqrt(run_cfg.background_diffusion);
  } else {
    double acc = 0;
    int cnt = 0;
    for (int idx = 0; idx < grid->size(); ++idx) {
      if (!res.reliable_mask[idx]) continue;
      const double s = res.sigma[idx], h = data.H[0][idx];
      if (!is_value(s) || s <= 0 || !is_value(h)) continue;
      acc += h / std::sqrt(s);
      ++cnt;
    }
    if (cnt == 0) throw Error(ErrorCode::EmptyRegion, "empty mask at completion");
    source_fill = acc / cnt;
  }
  diag.scalars["source_fill"] = source_fill;

  double sigma_floor = 0;
  for (int idx = 0; idx < grid->size(); ++idx)
    if (res.reliable_mask[idx] && is_value(res.sigma[idx]))
      sigma_floor = std::max(sigma_floor, res.sigma[idx]);
  sigma_floor *= 1e-30;

  ScalarField sigma_completed(grid, kSentinel);
  for (int idx = 0; idx < grid->size(); ++idx) {
    if (grid->node_class(idx) == NodeClass::Exterior) continue;
    const double s = res.sigma[idx];
    if (res.reliable_mask[idx] && is_value(s) && s > 0) {
      sigma_completed[idx] = s;
    } else {
      // Off the mask: sigma such that H1/sqrt(sigma) = source_fill.
      const double h = data.H[0][idx];
      const double implied = is_value(h) ? (h / source_fill) * (h / source_fill) : 0.0;
      sigma_completed[idx] = std::max(implied, sigma_floor);
    }
  }
  diag.stages.push_back("complete_field");

  int clamped = 0;
  res.sqrt_diffusion =
      solve_sqrt_diffusion(q_completed, data.H[0], sigma_completed, run_cfg,
                           &diag.sqrt_diffusion_report, &clamped);
  diag.scalars["negative_sqrtd_clamped"] = clamped;
  diag.stages.push_back("solve_sqrt_diffusion");

  res.diffusion = ScalarField(grid, kSentinel);
  for (int idx = 0; idx < grid->size(); ++idx)
    if (res.reliable_mask[idx] && is_value(res.sqrt_diffusion[idx]))
      res.diffusion[idx] = res.sqrt_diffusion[idx] * res.sqrt_diffusion[idx];

  res.absorption = recover_absorption(data.H[0], res.sqrt_diffusion, res.sigma,
                                      res.reliable_mask);
  diag.stages.push_back("recover_absorption");

  diag.scalars["mask_nodes"] = mask_count(res.reliable_mask);
  const Mask interior = erode_mask(*grid, res.reliable_mask, 3);
  diag.scalars["mask_interior_nodes"] = mask_count(interior);
  diag.scalars["q_mask_mean"] = mask_mean(res.helmholtz_q, res.reliable_mask);
  diag.scalars["q_interior_mean"] = mask_mean(res.helmholtz_q, interior);
  double min_det = std::numeric_limits<double>::infinity();
  double max_cond = 0;
  for (int idx = 0; idx < grid->size(); ++idx) {
    if (!res.reliable_mask[idx] || !systems.valid(idx)) continue;
    min_det = std::min(min_det, std::abs(systems[idx].det));
    max_cond = std::max(max_cond, systems[idx].cond);
  }
  diag.scalars["min_abs_det_on_mask"] = min_det;
  diag.scalars["max_cond_on_mask"] = max_cond;
  diag.scalars["sigma_l2_on_mask"] = masked_l2(res.sigma, res.reliable_mask);
  diag.scalars["q_l2_on_mask"] = masked_l2(res.helmholtz_q, res.reliable_mask);
  diag.scalars["diffusion_l2_on_mask"] = masked_l2(res.diffusion, res.reliable_mask);
  diag.scalars["absorption_l2_on_mask"] =
      masked_l2(res.absorption, res.reliable_mask);

  return res;
}

}  // namespace qpat
