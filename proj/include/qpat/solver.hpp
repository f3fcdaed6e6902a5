#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "qpat/boundary.hpp"
#include "qpat/calculus.hpp"
#include "qpat/errors.hpp"
#include "qpat/field.hpp"

namespace qpat {

struct SolveReport {
  int iterations = 0;
  double residual_norm = 0;  // relative l2 residual at exit
  bool converged = false;
  std::string method;
};

/// Row-compressed operator for -div(a grad u) + b u on the disc grid with
/// Dirichlet elimination. Unknowns are the non-exterior nodes off the
/// circle; boundary values are folded into rhs_boundary.
class SparseOperator {
 public:
  int dimension() const { return dim_; }
  const std::shared_ptr<const DiscGrid>& grid() const { return grid_; }

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& cols() const { return cols_; }
  const std::vector<double>& coefs() const { return coefs_; }

  /// Dirichlet contribution folded into the right-hand side (already
  /// evaluated against the boundary data passed to assemble).
  const std::vector<double>& rhs_boundary() const { return rhs_boundary_; }

  int unknown_of_node(int node) const { return unknown_of_node_[node]; }
  int node_of_unknown(int u) const { return node_of_unknown_[u]; }

  /// True when b >= 0 everywhere, so the operator is symmetric positive
  /// definite and plain CG applies.
  bool positive_definite_hint() const { return spd_hint_; }

  void apply(const std::vector<double>& x, std::vector<double>& y) const;

  /// Scatters an unknown vector into a field: Dirichlet values at on-circle
  /// nodes, boundary values copied onto the first exterior ring (ghost
  /// positions) so downstream interpolation can straddle the circle.
  ScalarField scatter(const std::vector<double>& x) const;

  friend std::pair<SparseOperator, std::vector<double>> assemble(
      const ScalarField& a, const ScalarField& b, const BoundaryData& g,
      const ScalarField& f);

 private:
  std::shared_ptr<const DiscGrid> grid_;
  int dim_ = 0;
  std::vector<int> row_ptr_;
  std::vector<int> cols_;
  std::vector<double> coefs_;
  std::vector<double> rhs_boundary_;
  std::vector<int> unknown_of_node_;
  std::vector<int> node_of_unknown_;
  std::vector<double> dirichlet_node_value_;  // per node, NaN where unused
  BoundaryData dirichlet_;
  bool spd_hint_ = true;
};

/// Flux-form assembly: harmonic face averaging of a, Shortley-Weller cut
/// arms with g at the cut point. Returns the operator and the full
/// right-hand side (f plus boundary folding). Throws Coefficient error when
/// a is not strictly positive on a non-exterior node.
std::pair<SparseOperator, std::vector<double>> assemble(const ScalarField& a,
                                                        const ScalarField& b,
                                                        const BoundaryData& g,
                                                        const ScalarField& f);

class NotConvergedError : public Error {
 public:
  NotConvergedError(ScalarField best, SolveReport report)
      : Error(ErrorCode::NotConverged,
              "solver did not converge in " + std::to_string(report.iterations) +
                  " iterations (relative residual " +
                  std::to_string(report.residual_norm) + ")"),
        best_iterate(std::move(best)),
        report(std::move(report)) {}

  ScalarField best_iterate;
  SolveReport report;
};

/// Preconditioned conjugate gradients (Jacobi preconditioner) for positive
/// definite operators; BiCGStab fallback when b takes negative values or CG
/// meets nonpositive curvature. Deterministic: serial reductions, identical
/// reports for identical inputs. Throws NotConvergedError past max_iter.
std::pair<ScalarField, SolveReport> solve(const SparseOperator& op,
                                          const std::vector<double>& rhs,
                                          double tol = 1e-10,
                                          int max_iter = 20000);

}  // namespace qpat
