#pragma once

#include "qpat/calculus.hpp"
#include "qpat/field.hpp"

// Serial reference implementations of the data-parallel kernels. These are
// plain loop nests with the same per-node arithmetic as the OpenMP versions
// in calculus.cpp; tests assert bit-identical outputs and the benchmark
// compares their runtimes.
namespace qpat::reference {

VectorField2 gradient(const ScalarField& f);
ScalarField divergence(const VectorField2& v);
ScalarField laplacian(const ScalarField& f, const BoundaryData* dirichlet = nullptr);
ScalarField gaussian_smooth(const ScalarField& f, double width);
ScalarField gaussian_smooth_fit(const ScalarField& f, double width);

/// y = A*x for the row-compressed operator layout used by the solver.
void spmv(int dim, const int* row_ptr, const int* cols, const double* coefs,
          const double* x, double* y);

}  // namespace qpat::reference
