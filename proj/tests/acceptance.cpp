// Acceptance suite: one line per criterion, nonzero exit when any fails.
//
// The phantom criteria run the full chain (fine-grid simulation, restriction
// to the measurement grid, reconstruction) with the configurations frozen
// below; bounds marked "lock" are regression locks on measured results and
// sit well inside the criterion ceilings.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qpat/calculus.hpp"
#include "qpat/errors.hpp"
#include "qpat/forward.hpp"
#include "qpat/phantom.hpp"
#include "qpat/recon.hpp"
#include "qpat/solver.hpp"
#include "qpat/stability.hpp"

using namespace qpat;
namespace chrono = std::chrono;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
              what.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(chrono::steady_clock::time_point t0) {
  return chrono::duration<double>(chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

double bessel_i0(double x) {
  double sum = 0, term = 1;
  for (int k = 0; k < 30; ++k) {
    if (k > 0) term *= (x * x / 4.0) / (k * k);
    sum += term;
  }
  return sum;
}

// Relative l2 error over a region; recon sentinels restrict the domain.
double rel_err(const ScalarField& rec, const ScalarField& truth, const Mask* mask,
               const std::function<bool(double, double)>& region) {
  const DiscGrid& g = rec.grid();
  double num = 0, den = 0;
  for (int iy = 0; iy < g.n(); ++iy) {
    for (int ix = 0; ix < g.n(); ++ix) {
      const int idx = g.index(ix, iy);
      if (g.node_class(idx) == NodeClass::Exterior) continue;
      if (!region(g.x(ix), g.y(iy))) continue;
      if (mask && !(*mask)[idx]) continue;
      const double r = rec[idx], t = truth[idx];
      if (!is_value(r) || !is_value(t)) continue;
      num += (r - t) * (r - t);
      den += t * t;
    }
  }
  return den > 0 ? std::sqrt(num / den) : 1e300;
}

struct PhantomRun {
  ReconResult res;
  ScalarField d_truth;  // restricted to the measurement grid
  ScalarField mu_truth;
};

PhantomRun run_phantom(const PhantomPair* pair, double wd, double wg, double noise,
                       unsigned long long seed) {
  const int fine_n = 512, meas_n = 256;
  auto fine = build_disc_grid(fine_n, 1.0);
  ScalarField dt, mt;
  if (pair != nullptr) {
    dt = rasterize(pair->diffusion, fine);
    mt = rasterize(pair->absorption, fine);
  } else {
    dt = ScalarField(fine, 0.2);
    mt = ScalarField(fine, 20.0);
  }
  PhantomRun run;
  const DataSet data =
      simulate(dt, mt, default_illuminations(), fine_n, meas_n, noise, seed);
  ReconConfig cfg;
  cfg.smooth_width_data = wd;
  cfg.smooth_width_grad = wg;
  cfg.boundary_diffusion = BoundaryData::constant(0.2);
  run.res = run_pipeline(data, cfg);
  run.d_truth = restrict_to(dt, run.res.grid);
  run.mu_truth = restrict_to(mt, run.res.grid);
  return run;
}

const auto kUpperRegion = [](double, double y) { return y > 0.2; };
const auto kEverywhere = [](double, double) { return true; };

void criterion_1() {
  const auto t0 = chrono::steady_clock::now();
  auto u_star = [](double x, double y) { return std::sin(x) * std::cos(y); };
  double err[2];
  int i = 0;
  for (int n : {129, 257}) {
    auto grid = build_disc_grid(n, 1.0);
    ScalarField one(grid, 1.0), b(grid, 1.0);
    const auto f = ScalarField::from_function(
        grid, [&](double x, double y) { return 3.0 * u_star(x, y); });
    const BoundaryData g = BoundaryData::from_function(
        [&](double a) { return u_star(std::cos(a), std::sin(a)); });
    auto [op, rhs] = assemble(one, b, g, f);
    auto [u, rep] = solve(op, rhs);
    double acc = 0;
    int cnt = 0;
    for (int k = 0; k < op.dimension(); ++k) {
      const int idx = op.node_of_unknown(k);
      const double d = u[idx] - u_star(grid->x(idx % n), grid->y(idx / n));
      acc += d * d;
      ++cnt;
    }
    err[i++] = std::sqrt(acc / cnt);
  }
  const double ratio = err[0] / err[1];
  const double secs = seconds_since(t0);
  report(1, ratio >= 3.4 && ratio <= 4.6 && secs < 30.0,
         fmt("forward-solver order: L2 error ratio 129->257 = %.3f (need [3.4, 4.6]), "
             "%.1fs (< 30s)",
             ratio, secs));
}

void criterion_2() {
  auto grid = build_disc_grid(257, 1.0);
  ScalarField one(grid, 1.0), b(grid, 1.0), zero(grid, 0.0);
  auto [op, rhs] = assemble(one, b, BoundaryData::constant(1.0), zero);
  auto [u, rep] = solve(op, rhs);
  const double center = u.at(128, 128);
  const double oracle = 1.0 / bessel_i0(1.0);  // 30-term series: 0.7898483...
  const double dev = std::abs(center / oracle - 1.0);
  report(2, dev < 0.01,
         fmt("Bessel oracle: center %.6f vs 1/I0(1) = %.6f, deviation %.3g%% (< 1%%)",
             center, oracle, 100 * dev));
}

void criterion_3() {
  const PhantomRun run = run_phantom(nullptr, 0.003, 0.003, 0.0, 1);
  const Mask interior = erode_mask(*run.res.grid, run.res.reliable_mask, 3);
  const double err_d = rel_err(run.res.diffusion, run.d_truth, &interior, kEverywhere);
  const double err_mu =
      rel_err(run.res.absorption, run.mu_truth, &interior, kEverywhere);
  const double q_mean = run.res.diagnostics.scalars.at("q_interior_mean");
  const bool pass =
      err_d <= 0.02 && err_mu <= 0.02 && std::abs(q_mean / 100.0 - 1.0) <= 0.03;
  report(3, pass,
         fmt("homogeneous end-to-end: errD %.2f%%, errMu %.2f%% (<= 2%%), q mean "
             "%.2f vs 100 (within 3%%)",
             100 * err_d, 100 * err_mu, q_mean));
}

void criterion_4() {
  const auto t0 = chrono::steady_clock::now();
  const PhantomPair pair = phantom_a(0.04);
  const PhantomRun run = run_phantom(&pair, 0.003, 0.003, 0.0, 1);
  const double err_d =
      rel_err(run.res.diffusion, run.d_truth, &run.res.reliable_mask, kUpperRegion);
  const double err_mu =
      rel_err(run.res.absorption, run.mu_truth, &run.res.reliable_mask, kUpperRegion);
  const double secs = seconds_since(t0);
  // Measured 1.24% / 0.61%; locked at 3% inside the 10% ceiling.
  const bool pass = err_d <= 0.10 && err_mu <= 0.10 && err_d <= 0.03 &&
                    err_mu <= 0.03 && secs < 300.0;
  report(4, pass,
         fmt("smooth phantom (y > 0.2): errD %.2f%%, errMu %.2f%% (<= 10%%, lock 3%%), "
             "%.0fs (< 300s)",
             100 * err_d, 100 * err_mu, secs));
}

void criterion_5() {
  const PhantomPair pair = phantom_a(0.0);
  const PhantomRun run = run_phantom(&pair, 0.01, 0.01, 0.0, 1);
  const double err_d =
      rel_err(run.res.diffusion, run.d_truth, &run.res.reliable_mask, kUpperRegion);
  const double err_mu =
      rel_err(run.res.absorption, run.mu_truth, &run.res.reliable_mask, kUpperRegion);

  // Localization: the mean over each inclusion's eroded interior must recover
  // at least half the true contrast.
  const DiscGrid& g = *run.res.grid;
  bool localized = true;
  std::string weakest;
  double weakest_frac = 1e300;
  auto check_shapes = [&](const PhantomSpec& spec, const ScalarField& rec, double bg,
                          const char* name) {
    for (std::size_t si = 0; si < spec.shapes.size(); ++si) {
      const Shape& s = spec.shapes[si];
      double acc = 0;
      int cnt = 0;
      const double e = 2.5 * g.h();
      for (int iy = 0; iy < g.n(); ++iy) {
        for (int ix = 0; ix < g.n(); ++ix) {
          const int idx = g.index(ix, iy);
          if (!run.res.reliable_mask[idx] || !is_value(rec[idx])) continue;
          const double x = g.x(ix), y = g.y(iy);
          if (!(s.contains(x, y) && s.contains(x - e, y) && s.contains(x + e, y) &&
                s.contains(x, y - e) && s.contains(x, y + e)))
            continue;
          acc += rec[idx];
          ++cnt;
        }
      }
      const double frac = cnt ? (acc / cnt - bg) / (s.value - bg) : 0.0;
      if (frac < weakest_frac) {
        weakest_frac = frac;
        weakest = fmt("%s inclusion %zu at %.2f", name, si, frac);
      }
      if (cnt == 0 || frac < 0.5) localized = false;
    }
  };
  check_shapes(pair.diffusion, run.res.diffusion, 0.2, "D");
  check_shapes(pair.absorption, run.res.absorption, 20.0, "mu");

  // Measured 8.3% / 5.4%; locked at 12% inside the 15% ceiling.
  const bool pass =
      err_d <= 0.15 && err_mu <= 0.15 && err_d <= 0.12 && err_mu <= 0.12 && localized;
  report(5, pass,
         fmt("discontinuous phantom: errD %.2f%%, errMu %.2f%% (<= 15%%, lock 12%%); "
             "inclusion contrast >= 50%% (weakest: %s)",
             100 * err_d, 100 * err_mu, weakest.c_str()));
}

void criterion_6() {
  const PhantomPair pair = phantom_a(0.04);
  bool completed = true;
  double cd = 0, cmu = 0, nd = 0, nmu = 0;
  try {
    const PhantomRun clean = run_phantom(&pair, 0.02, 0.02, 0.0, 2);
    cd = rel_err(clean.res.diffusion, clean.d_truth, &clean.res.reliable_mask,
                 kUpperRegion);
    cmu = rel_err(clean.res.absorption, clean.mu_truth, &clean.res.reliable_mask,
                  kUpperRegion);
    const PhantomRun noisy = run_phantom(&pair, 0.02, 0.02, 0.01, 2);
    nd = rel_err(noisy.res.diffusion, noisy.d_truth, &noisy.res.reliable_mask,
                 kUpperRegion);
    nmu = rel_err(noisy.res.absorption, noisy.mu_truth, &noisy.res.reliable_mask,
                  kUpperRegion);
  } catch (const Error&) {
    completed = false;
  }
  const bool pass = completed && nd <= 2.0 * cd && nmu <= 2.0 * cmu;
  report(6, pass,
         fmt("1%% noise robustness: clean errD %.2f%%/errMu %.2f%%, noisy "
             "%.2f%%/%.2f%% (each <= 2x clean), pipeline %s",
             100 * cd, 100 * cmu, 100 * nd, 100 * nmu,
             completed ? "completed" : "FAILED"));
}

void criterion_7() {
  const auto t0 = chrono::steady_clock::now();
  StabilityParams base{1.0, 0.5, 1.5, 1.5, 1e-8};
  const double g_limit = gamma_exponent(base);
  const bool a_ok = std::abs(g_limit - 0.5) < 1e-6;

  bool b_ok = true;
  for (int it = 1; it <= 9 && b_ok; ++it) {
    for (int il = 1; il <= 30 && b_ok; ++il) {
      StabilityParams p{1.0, 0.1 * it, 1.0 + 0.1 * il, 1.0, 0.1};
      p.r0 = 4.0 * r_bound(p);
      if (!check_monotone_decreasing(p, 1000).pass) b_ok = false;
    }
  }

  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  bool c_ok = true;
  for (int trial = 0; trial < 10000 && c_ok; ++trial) {
    StabilityParams p;
    p.rho = std::exp(std::log(0.1) + uni(rng) * std::log(100.0));
    p.theta = 0.02 + 0.96 * uni(rng);
    p.lambda0 = 1.01 + 3.0 * uni(rng);
    const double bound = r_bound(p);
    p.r = bound * std::pow(10.0, -6.0 * uni(rng));
    p.r0 = 2.0 * std::max(p.r, bound);
    const auto [alpha, beta] = alpha_beta(p);
    const double lhs = gamma_exponent(p);
    if (std::abs(lhs - alpha / (alpha + beta)) > 1e-12 * lhs) c_ok = false;
  }

  const double bound = r_bound(StabilityParams{1.0, 0.5, 1.5, 1.5, 0.1});
  const bool d_ok = bound == 0.75;

  const double secs = seconds_since(t0);
  report(7, a_ok && b_ok && c_ok && d_ok && secs < 10.0,
         fmt("gamma suite: r->0 limit %.9f %s; monotone sweep %s; alpha/beta identity "
             "%s; r_bound(1,0.5,1.5)=%.6g %s; %.1fs (< 10s)",
             g_limit, a_ok ? "ok" : "FAIL", b_ok ? "ok" : "FAIL",
             c_ok ? "ok" : "FAIL", bound, d_ok ? "ok" : "FAIL", secs));
}

void criterion_8() {
  // A cap-forming threshold (10% of peak H1) realizes the determinant
  // criterion around the illuminated arc.
  const int fine_n = 512, meas_n = 256;
  auto fine = build_disc_grid(fine_n, 1.0);
  ScalarField dt(fine, 0.2), mt(fine, 20.0);
  const DataSet data =
      simulate(dt, mt, default_illuminations(), fine_n, meas_n, 0.0, 1);
  ReconConfig cfg;
  cfg.smooth_width_data = 0.003;
  cfg.smooth_width_grad = 0.003;
  cfg.boundary_diffusion = BoundaryData::constant(0.2);
  const ScalarField sH1 = gaussian_smooth_fit(data.H[0], cfg.smooth_width_data);
  cfg.h1_threshold = 0.1 * sH1.max_abs();
  const ReconResult res = run_pipeline(data, cfg);

  const DiscGrid& g = *res.grid;
  const int nodes = mask_count(res.reliable_mask);

  // Connectivity: flood fills from one seed must cover the whole mask.
  int components = 0;
  {
    std::vector<int> seen(g.size(), 0);
    for (int seed = 0; seed < g.size(); ++seed) {
      if (!res.reliable_mask[seed] || seen[seed]) continue;
      ++components;
      std::vector<int> queue{seed};
      seen[seed] = 1;
      while (!queue.empty()) {
        const int idx = queue.back();
        queue.pop_back();
        const int ix = idx % g.n(), iy = idx / g.n();
        for (int d = 0; d < 4; ++d) {
          const int jx = ix + kDirDx[d], jy = iy + kDirDy[d];
          if (!g.in_bounds(jx, jy)) continue;
          const int jdx = g.index(jx, jy);
          if (res.reliable_mask[jdx] && !seen[jdx]) {
            seen[jdx] = 1;
            queue.push_back(jdx);
          }
        }
      }
    }
  }

  // Boundary contact near the illumination peak at pi/2.
  bool touches_near_peak = false;
  for (int iy = 0; iy < g.n(); ++iy) {
    for (int ix = 0; ix < g.n(); ++ix) {
      if (!res.reliable_mask[g.index(ix, iy)]) continue;
      const double r = std::hypot(g.x(ix), g.y(iy));
      if (1.0 - r > 3.0 * g.h()) continue;
      if (std::abs(std::atan2(g.y(iy), g.x(ix)) - std::numbers::pi / 2) < 0.25)
        touches_near_peak = true;
    }
  }

  const double min_det = res.diagnostics.scalars.at("min_abs_det_on_mask");
  const double kDetFloor = 0.03;  // regression lock; measured 0.096
  const bool pass = nodes > 1000 && components == 1 && touches_near_peak &&
                    min_det >= kDetFloor;
  report(8, pass,
         fmt("determinant criterion: mask %d nodes, %d component(s), boundary contact "
             "near pi/2 %s, min |det M| %.4f (>= %.2f)",
             nodes, components, touches_near_peak ? "yes" : "NO", min_det, kDetFloor));
}

}  // namespace

int main() {
  std::printf("qpat2d acceptance suite\n");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  if (g_failures == 0) {
    std::printf("all 8 criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", g_failures);
  return 1;
}
