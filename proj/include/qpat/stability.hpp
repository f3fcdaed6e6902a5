#pragma once

#include <utility>

namespace qpat {

/// Parameters of the depth-stability exponent: exterior-sphere radius rho,
/// shape constant theta in (0,1), weight exponent lambda0 > 1, outer radius
/// r0 and probe radius r with 0 < r < r0.
struct StabilityParams {
  double rho = 1.0;
  double theta = 0.5;
  double lambda0 = 1.5;
  double r0 = 1.5;
  double r = 0.1;

  void validate() const;  // Config error on violation
};

/// The Holder exponent
///   gamma = ((rho+r)^{2 l} - (rho+theta r)^{2 l}) rho^{2 l}
///         / (((rho+r)^{2 l} - rho^{2 l}) (rho+theta r)^{2 l}),
/// evaluated in a cancellation-free expm1/log1p form so tiny r keeps full
/// precision. Lies in (0, 1-theta) and tends to 1-theta as r -> 0.
double gamma_exponent(const StabilityParams& p);

/// First-order small-r expansion of gamma; diagnostic cross-check only.
double gamma_small_r_expansion(const StabilityParams& p);

/// Upper limit of the r-range on which gamma is guaranteed decreasing:
/// min(1/theta, 3(1-theta) / ((2 lambda0 - 1)(4^{lambda0-1} - 1))) * rho.
/// Rejects lambda0 <= 1.
double r_bound(const StabilityParams& p);

/// The pair (alpha, beta) = (2(phi0 - phi1), 2(phi2 - phi0)) built from the
/// Carleman weight levels phi_i = (rho+r0)^{2 l} / s_i^{2 l} at
/// s = rho + theta r, rho + r, rho. Satisfies gamma = alpha / (alpha+beta).
std::pair<double, double> alpha_beta(const StabilityParams& p);

struct MonotoneReport {
  bool pass = false;
  double max_forward_diff = 0;
  int samples = 0;
  double r_max = 0;  // sweep upper end (= r_bound)
};

/// Samples gamma on an equispaced r-grid inside (0, r_bound) and checks the
/// forward differences are <= 1e-12.
MonotoneReport check_monotone_decreasing(const StabilityParams& p, int samples);

}  // namespace qpat
