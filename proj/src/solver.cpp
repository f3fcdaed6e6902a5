#include "qpat/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qpat {

namespace {

double harmonic(double a, double b) { return 2.0 * a * b / (a + b); }

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

void SparseOperator::apply(const std::vector<double>& x, std::vector<double>& y) const {
  y.resize(dim_);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < dim_; ++r) {
    double acc = 0;
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += coefs_[k] * x[cols_[k]];
    y[r] = acc;
  }
}

ScalarField SparseOperator::scatter(const std::vector<double>& x) const {
  const DiscGrid& g = *grid_;
  ScalarField out(grid_, kSentinel);
  auto vals = out.values();
  for (int u = 0; u < dim_; ++u) vals[node_of_unknown_[u]] = x[u];
  const int n = g.n();
  // Dirichlet values at on-circle nodes, then boundary values copied onto
  // the first exterior ring so interpolation can straddle the circle.
  std::vector<double> ghost_sum(g.size(), 0.0);
  std::vector<int> ghost_cnt(g.size(), 0);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const int idx = g.index(ix, iy);
      if (g.node_class(idx) == NodeClass::Exterior) continue;
      if (g.on_circle(idx)) vals[idx] = dirichlet_node_value_[idx];
      if (g.node_class(idx) != NodeClass::BoundaryAdjacent) continue;
      const auto cut = g.cut_fractions(idx);
      for (int d = 0; d < 4; ++d) {
        if (cut[d] >= 1.0) continue;
        const int jx = ix + kDirDx[d], jy = iy + kDirDy[d];
        if (!g.in_bounds(jx, jy)) continue;
        const double bx = g.x(ix) + cut[d] * g.h() * kDirDx[d];
        const double by = g.y(iy) + cut[d] * g.h() * kDirDy[d];
        ghost_sum[g.index(jx, jy)] += dirichlet_(std::atan2(by, bx));
        ghost_cnt[g.index(jx, jy)] += 1;
      }
    }
  }
  for (int idx = 0; idx < g.size(); ++idx)
    if (ghost_cnt[idx] > 0) vals[idx] = ghost_sum[idx] / ghost_cnt[idx];
  return out;
}

std::pair<SparseOperator, std::vector<double>> assemble(const ScalarField& a,
                                                        const ScalarField& b,
                                                        const BoundaryData& g,
                                                        const ScalarField& f) {
  const auto& grid = a.grid_ptr();
  const DiscGrid& gr = *grid;
  const int n = gr.n();
  const double h = gr.h();

  for (int idx = 0; idx < gr.size(); ++idx) {
    if (gr.node_class(idx) == NodeClass::Exterior) continue;
    if (!is_value(a[idx]) || a[idx] <= 0)
      throw Error(ErrorCode::Coefficient,
                  "leading coefficient must be strictly positive on the disc");
  }

  SparseOperator op;
  op.grid_ = grid;
  op.dirichlet_ = g;
  op.unknown_of_node_.assign(gr.size(), -1);
  op.dirichlet_node_value_.assign(gr.size(), kSentinel);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const int idx = gr.index(ix, iy);
      if (gr.node_class(idx) == NodeClass::Exterior) continue;
      if (gr.on_circle(idx)) {
        op.dirichlet_node_value_[idx] = g(std::atan2(gr.y(iy), gr.x(ix)));
        continue;
      }
      op.unknown_of_node_[idx] = static_cast<int>(op.node_of_unknown_.size());
      op.node_of_unknown_.push_back(idx);
    }
  }
  op.dim_ = static_cast<int>(op.node_of_unknown_.size());

  std::vector<double> rhs(op.dim_, 0.0);
  op.rhs_boundary_.assign(op.dim_, 0.0);
  op.row_ptr_.assign(op.dim_ + 1, 0);
  op.cols_.reserve(op.dim_ * 5);
  op.coefs_.reserve(op.dim_ * 5);
  op.spd_hint_ = true;

  for (int u = 0; u < op.dim_; ++u) {
    const int idx = op.node_of_unknown_[u];
    const int ix = idx % n, iy = idx / n;
    if (!is_value(b[idx]) || !is_value(f[idx]))
      throw_config("coefficient or source undefined on an unknown node");
    if (b[idx] < 0) op.spd_hint_ = false;

    const auto cut = gr.cut_fractions(idx);
    // Arm data per direction: length fraction, face coefficient, and either
    // the neighbor unknown or a Dirichlet value.
    double theta[4], aface[4], gval[4];
    int col[4];
    for (int d = 0; d < 4; ++d) {
      const int jx = ix + kDirDx[d], jy = iy + kDirDy[d];
      const bool ext = gr.is_exterior(jx, jy);
      if (!ext) {
        const int jdx = gr.index(jx, jy);
        theta[d] = 1.0;
        aface[d] = harmonic(a[idx], a[jdx]);
        if (gr.on_circle(jdx)) {
          col[d] = -1;
          gval[d] = op.dirichlet_node_value_[jdx];
        } else {
          col[d] = op.unknown_of_node_[jdx];
          gval[d] = 0;
        }
      } else {
        theta[d] = cut[d];
        aface[d] = a[idx];  // one-sided: no node value beyond the cut
        col[d] = -1;
        const double bx = gr.x(ix) + cut[d] * h * kDirDx[d];
        const double by = gr.y(iy) + cut[d] * h * kDirDy[d];
        gval[d] = g(std::atan2(by, bx));
      }
    }

    double diag = b[idx];
    double fold = 0;
    double offdiag[4];
    for (int axis = 0; axis < 2; ++axis) {
      const int dp = axis == 0 ? kEast : kNorth;
      const int dm = axis == 0 ? kWest : kSouth;
      const double scale = 2.0 / ((theta[dp] + theta[dm]) * h * h);
      for (int d : {dp, dm}) {
        const double c = scale * aface[d] / theta[d];
        diag += c;
        offdiag[d] = -c;
        if (col[d] < 0) fold += c * gval[d];
      }
    }

    op.cols_.push_back(u);
    op.coefs_.push_back(diag);
    for (int d = 0; d < 4; ++d) {
      if (col[d] >= 0) {
        op.cols_.push_back(col[d]);
        op.coefs_.push_back(offdiag[d]);
      }
    }
    op.row_ptr_[u + 1] = static_cast<int>(op.cols_.size());
    op.rhs_boundary_[u] = fold;
    rhs[u] = f[idx] + fold;
  }

  return {std::move(op), std::move(rhs)};
}

namespace {

struct KrylovResult {
  std::vector<double> x;
  SolveReport report;
  bool breakdown = false;  // nonpositive curvature met in CG
};

KrylovResult run_cg(const SparseOperator& op, const std::vector<double>& rhs,
                    const std::vector<double>& inv_diag, double tol, int max_iter) {
  const int dim = op.dimension();
  KrylovResult res;
  res.x.assign(dim, 0.0);
  res.report.method = "cg";
  const double bnorm = norm2(rhs);
  if (bnorm == 0) {
    res.report.converged = true;
    return res;
  }
  std::vector<double> r = rhs, z(dim), p(dim), q(dim);
  for (int i = 0; i < dim; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    op.apply(p, q);
    const double pq = dot(p, q);
    if (pq <= 0) {
      res.breakdown = true;
      res.report.iterations = it;
      res.report.residual_norm = norm2(r) / bnorm;
      return res;
    }
    const double alpha = rz / pq;
    for (int i = 0; i < dim; ++i) res.x[i] += alpha * p[i];
    for (int i = 0; i < dim; ++i) r[i] -= alpha * q[i];
    const double rn = norm2(r) / bnorm;
    res.report.iterations = it;
    res.report.residual_norm = rn;
    if (rn <= tol) {
      res.report.converged = true;
      return res;
    }
    for (int i = 0; i < dim; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    for (int i = 0; i < dim; ++i) p[i] = z[i] + beta * p[i];
    rz = rz_new;
  }
  return res;
}

KrylovResult run_bicgstab(const SparseOperator& op, const std::vector<double>& rhs,
                          const std::vector<double>& inv_diag, double tol,
                          int max_iter) {
  const int dim = op.dimension();
  KrylovResult res;
  res.x.assign(dim, 0.0);
  res.report.method = "bicgstab";
  const double bnorm = norm2(rhs);
  if (bnorm == 0) {
    res.report.converged = true;
    return res;
  }
  std::vector<double> r = rhs, r0 = rhs, p(dim, 0.0), v(dim, 0.0);
  std::vector<double> ph(dim), sh(dim), s(dim), t(dim);
  double rho_prev = 1, alpha = 1, omega = 1;
  for (int it = 1; it <= max_iter; ++it) {
    const double rho = dot(r0, r);
    if (rho == 0) break;
    if (it == 1) {
      p = r;
    } else {
      const double beta = (rho / rho_prev) * (alpha / omega);
      for (int i = 0; i < dim; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    }
    for (int i = 0; i < dim; ++i) ph[i] = inv_diag[i] * p[i];
    op.apply(ph, v);
    const double r0v = dot(r0, v);
    if (r0v == 0) break;
    alpha = rho / r0v;
    for (int i = 0; i < dim; ++i) s[i] = r[i] - alpha * v[i];
    double rn = norm2(s) / bnorm;
    res.report.iterations = it;
    if (rn <= tol) {
      for (int i = 0; i < dim; ++i) res.x[i] += alpha * ph[i];
      res.report.residual_norm = rn;
      res.report.converged = true;
      return res;
    }
    for (int i = 0; i < dim; ++i) sh[i] = inv_diag[i] * s[i];
    op.apply(sh, t);
    const double tt = dot(t, t);
    if (tt == 0) break;
    omega = dot(t, s) / tt;
    for (int i = 0; i < dim; ++i) res.x[i] += alpha * ph[i] + omega * sh[i];
    for (int i = 0; i < dim; ++i) r[i] = s[i] - omega * t[i];
    rn = norm2(r) / bnorm;
    res.report.residual_norm = rn;
    if (rn <= tol) {
      res.report.converged = true;
      return res;
    }
    if (omega == 0) break;
    rho_prev = rho;
  }
  return res;
}

}  // namespace

std::pair<ScalarField, SolveReport> solve(const SparseOperator& op,
                                          const std::vector<double>& rhs,
                                          double tol, int max_iter) {
  if (!(tol > 0 && tol <= 1e-2)) throw_config("solver tolerance must lie in (0, 1e-2]");
  if (static_cast<int>(rhs.size()) != op.dimension())
    throw_config("right-hand side size does not match the operator");

  std::vector<double> inv_diag(op.dimension(), 1.0);
  for (int r = 0; r < op.dimension(); ++r) {
    for (int k = op.row_ptr()[r]; k < op.row_ptr()[r + 1]; ++k) {
      if (op.cols()[k] == r) {
        inv_diag[r] = 1.0 / std::max(std::abs(op.coefs()[k]),
                                     std::numeric_limits<double>::min());
        break;
      }
    }
  }

  KrylovResult res;
  if (op.positive_definite_hint()) {
    res = run_cg(op, rhs, inv_diag, tol, max_iter);
    if (res.breakdown) {
      res = run_bicgstab(op, rhs, inv_diag, tol, max_iter);
      res.report.method = "cg->bicgstab";
    }
  } else {
    res = run_bicgstab(op, rhs, inv_diag, tol, max_iter);
  }

  if (!res.report.converged)
    throw NotConvergedError(op.scatter(res.x), res.report);
  return {op.scatter(res.x), res.report};
}

}  // namespace qpat
