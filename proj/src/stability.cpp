#include "qpat/stability.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qpat/errors.hpp"

namespace qpat {

void StabilityParams::validate() const {
  if (!(rho > 0)) throw_config("stability: rho must be positive");
  if (!(theta > 0 && theta < 1)) throw_config("stability: theta must lie in (0,1)");
  if (!(lambda0 > 1)) throw_config("stability: lambda0 must exceed 1");
  if (!(r > 0)) throw_config("stability: r must be positive");
  if (!(r0 > r)) throw_config("stability: r0 must exceed r");
}

double gamma_exponent(const StabilityParams& p) {
  p.validate();
  // gamma = (x^2l - y^2l) rho^2l / ((x^2l - rho^2l) y^2l) with x = rho + r,
  // y = rho + theta r, rewritten as expm1 ratios so the small-r differences
  // do not cancel:
  //   gamma = expm1(2l log1p((1-theta) r / (rho+theta r))) / expm1(2l log1p(r/rho)).
  const double tl = 2.0 * p.lambda0;
  const double num = std::expm1(tl * std::log1p((1.0 - p.theta) * p.r /
                                                (p.rho + p.theta * p.r)));
  const double den = std::expm1(tl * std::log1p(p.r / p.rho));
  return num / den;
}

double gamma_small_r_expansion(const StabilityParams& p) {
  p.validate();
  // First order in r/rho: gamma ~ (1-theta) (1 - (2 lambda0 + 1) theta r /
  // (2 rho) + ...); used only to cross-check tiny-r evaluations.
  const double x = p.r / p.rho;
  return (1.0 - p.theta) *
         (1.0 - 0.5 * (2.0 * p.lambda0 + 1.0) * p.theta * x);
}

double r_bound(const StabilityParams& p) {
  if (!(p.rho > 0)) throw_config("stability: rho must be positive");
  if (!(p.theta > 0 && p.theta < 1)) throw_config("stability: theta must lie in (0,1)");
  if (!(p.lambda0 > 1)) throw_config("stability: lambda0 must exceed 1");
  const double pow4 = std::exp2(2.0 * (p.lambda0 - 1.0));  // 4^(lambda0-1)
  const double second =
      3.0 * (1.0 - p.theta) / ((2.0 * p.lambda0 - 1.0) * (pow4 - 1.0));
  return std::min(1.0 / p.theta, second) * p.rho;
}

std::pair<double, double> alpha_beta(const StabilityParams& p) {
  p.validate();
  const double tl = 2.0 * p.lambda0;
  const double top = std::pow(p.rho + p.r0, tl);
  const double phi0 = top / std::pow(p.rho + p.theta * p.r, tl);
  const double phi1 = top / std::pow(p.rho + p.r, tl);
  // Difference forms mirror gamma_exponent: alpha = 2 phi1 expm1(...),
  // beta = 2 phi0 expm1(...), exact where the direct subtraction cancels.
  const double alpha =
      2.0 * phi1 *
      std::expm1(tl * std::log1p((1.0 - p.theta) * p.r / (p.rho + p.theta * p.r)));
  const double beta =
      2.0 * phi0 * std::expm1(tl * std::log1p(p.theta * p.r / p.rho));
  return {alpha, beta};
}

MonotoneReport check_monotone_decreasing(const StabilityParams& p, int samples) {
  if (samples < 10) throw_config("monotonicity sweep needs at least 10 samples");
  MonotoneReport rep;
  rep.samples = samples;
  rep.r_max = r_bound(p);
  StabilityParams q = p;
  q.r0 = 2.0 * rep.r_max;  // gamma does not depend on r0; keep params valid
  double prev = 0;
  double max_diff = -std::numeric_limits<double>::infinity();
  for (int i = 1; i <= samples; ++i) {
    q.r = rep.r_max * i / (samples + 1);
    const double g = gamma_exponent(q);
    if (i > 1) max_diff = std::max(max_diff, g - prev);
    prev = g;
  }
  rep.max_forward_diff = max_diff;
  rep.pass = max_diff <= 1e-12;
  return rep;
}

}  // namespace qpat
