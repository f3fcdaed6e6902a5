#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "qpat/boundary.hpp"
#include "qpat/field.hpp"
#include "qpat/forward.hpp"
#include "qpat/solver.hpp"

namespace qpat {

enum class CompletionKind { Background, Average };

/// Constant used to fill a field outside the reliable region before the
/// full-disc elliptic solve.
struct Completion {
  CompletionKind kind = CompletionKind::Average;
  double value = 0;  // Background only
};

struct ReconConfig {
  /// Absolute floor on (smoothed) H1; <= 0 selects the default policy:
  /// 5 * noise_level * max(H1) for noisy data, 1e-3 * max(H1) for clean.
  double h1_threshold = 0;
  double cond_threshold = 50;
  double smooth_width_data = 0.02;
  double smooth_width_grad = 0.02;
  int n_path_starts = 10;
  CompletionKind completion = CompletionKind::Average;
  /// Background coefficients; used by Background completion to fill the
  /// Helmholtz coefficient (mu/D) and the source (mu/sqrt(D)).
  double background_diffusion = 0.2;
  double background_absorption = 20.0;
  /// Dirichlet data for the sqrt(D) solve; the diffusion coefficient is
  /// known on the circle.
  BoundaryData boundary_diffusion = BoundaryData::constant(0.2);
  /// Region used for reported relative errors.
  std::function<bool(double, double)> error_region =
      [](double, double y) { return y > 0.2; };
  double solver_tol = 1e-10;
  int solver_max_iter = 20000;

  void validate() const;
};

double default_h1_threshold(const ScalarField& smoothed_h1, double noise_level);

/// Per-node 2x2 system for grad(ln sigma): rows grad(v_j), right side
/// -lap(v_j) (the sign comes from expanding div(sigma grad v) = 0);
/// condition number and determinant from the closed-form singular values.
struct LocalSystem {
  double m[2][2] = {{0, 0}, {0, 0}};
  double n[2] = {0, 0};
  double cond = 0;
  double det = 0;
};

class LocalSystemField {
 public:
  LocalSystemField() = default;
  explicit LocalSystemField(std::shared_ptr<const DiscGrid> grid);

  const DiscGrid& grid() const { return *grid_; }
  const std::shared_ptr<const DiscGrid>& grid_ptr() const { return grid_; }
  bool valid(int idx) const { return valid_[idx] != 0; }
  const LocalSystem& operator[](int idx) const { return systems_[idx]; }
  LocalSystem& operator[](int idx) { return systems_[idx]; }
  void set_valid(int idx, bool v) { valid_[idx] = v ? 1 : 0; }
  int valid_count() const;

 private:
  std::shared_ptr<const DiscGrid> grid_;
  std::vector<LocalSystem> systems_;
  std::vector<std::uint8_t> valid_;
};

struct PipelineDiagnostics {
  std::map<std::string, double> scalars;
  SolveReport sqrt_diffusion_report;
  std::vector<std::string> stages;  // one line per completed stage
};

struct ReconResult {
  ScalarField sigma;             // on the reliable mask
  VectorField2 grad_ln_sigma;    // on the reliable mask
  ScalarField helmholtz_q;       // on the reliable mask
  ScalarField sqrt_diffusion;    // full disc (clamped at 0)
  ScalarField diffusion;         // sqrt_diffusion^2, masked
  ScalarField absorption;        // masked
  Mask reliable_mask;
  std::shared_ptr<const DiscGrid> grid;
  PipelineDiagnostics diagnostics;
};

/// v_j = smooth(H_{j+1}) / smooth(H_1) where smooth(H_1) exceeds the
/// threshold, sentinel elsewhere. Throws EmptyRegion when nothing passes.
std::vector<ScalarField> ratio_fields(const DataSet& data, const ReconConfig& cfg);

/// Gradient and Laplacian of the (pre-smoothed) ratio fields at every node
/// where both exist; invalid entries propagate as such. The ratio fields
/// have known circle values g_{j+1}/g_1; passing them lets the unequal-arm
/// Laplacian cover the rim ring so the region genuinely reaches the
/// boundary where the integration paths anchor.
LocalSystemField local_systems(const std::vector<ScalarField>& v,
                               const ReconConfig& cfg,
                               const std::vector<BoundaryData>* v_boundaries = nullptr);

/// Nodes passing both thresholds, reduced to the largest connected component
/// that touches the circle. Throws EmptyRegion when no component does.
Mask reliable_region(const LocalSystemField& systems, const ScalarField& h1,
                     const ReconConfig& cfg);

/// Solves each masked 2x2 system by partial pivoting.
VectorField2 solve_grad_ln_sigma(const LocalSystemField& systems, const Mask& mask);

/// Recovered sigma: per masked node, average of ln sigma(start) + integral
/// of g along the straight path over the admissible boundary starts, then
/// exponentiate. Nodes all of whose paths leave the data are dropped from
/// the mask (count reported). spread_out, when given, receives the per-node
/// standard deviation of the ln sigma estimates across the used paths.
ScalarField integrate_ln_sigma(const VectorField2& g, Mask& mask,
                               const BoundaryData& ln_sigma_boundary,
                               const ReconConfig& cfg,
                               int* dropped_count = nullptr,
                               ScalarField* spread_out = nullptr);

/// q = 1/4 |g|^2 + 1/2 div g, with smooth_width_grad smoothing of g first.
ScalarField helmholtz_coefficient(const VectorField2& g, const Mask& mask,
                                  const ReconConfig& cfg);

/// Fills off-mask non-exterior nodes with the completion constant.
ScalarField complete_field(const ScalarField& f, const Mask& mask,
                           const Completion& strategy);

/// Full-disc solve of -lap(w) + q w = H1 / sqrt(sigma) with Dirichlet
/// w = sqrt(boundary diffusion); result clamped below at 0.
ScalarField solve_sqrt_diffusion(const ScalarField& q_completed,
                                 const ScalarField& h1,
                                 const ScalarField& sigma_completed,
                                 const ReconConfig& cfg,
                                 SolveReport* report = nullptr,
                                 int* clamped_count = nullptr);

/// absorption = H1 * sqrt_diffusion / sqrt(sigma) on the mask.
ScalarField recover_absorption(const ScalarField& h1,
                               const ScalarField& sqrt_diffusion,
                               const ScalarField& sigma, const Mask& mask);

/// Relative discrete l2 error over region nodes where both fields hold
/// values. Throws EmptyRegion when the intersection is empty.
double relative_error(const ScalarField& recon, const ScalarField& truth,
                      const std::function<bool(double, double)>& region);

/// The full inversion: ratios, local systems, reliable region, grad ln
/// sigma, path-integrated sigma, Helmholtz coefficient, completion, the
/// sqrt(D) solve, absorption recovery.
ReconResult run_pipeline(const DataSet& data, const ReconConfig& cfg);

/// Mask helpers shared by the pipeline, diagnostics and tests.
Mask erode_mask(const DiscGrid& grid, const Mask& mask, int rings);
int mask_count(const Mask& mask);
double mask_mean(const ScalarField& f, const Mask& mask);

}  // namespace qpat
