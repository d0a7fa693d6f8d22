// kernels.hpp — sparse*dense accumulation kernels used by the Liouvillian.
//
// Work is partitioned by output column, so every matrix element is
// accumulated by exactly one thread in a fixed order: results are
// bit-identical for any thread count. Each kernel can run standalone
// (spawning its own parallel region above a size threshold) or inside an
// enclosing `omp parallel` region, where it becomes an orphaned
// worksharing loop; the implied barrier at the end of each loop orders
// dependent kernels. The `ref` namespace holds naive Eigen
// implementations kept as a serial reference for tests and benchmarks.

#pragma once

#include "ensq/hilbert.hpp"

namespace ensq::kernel {

// Global cap on threads used by the parallel kernels (0 = OpenMP default).
void set_max_threads(int n);
int max_threads();

// C += alpha * S * B
void spmm_acc(DenseMatrix& C, cplx alpha, const SpMat& S, const DenseMatrix& B);
// C += alpha * B * S
void mmsp_acc(DenseMatrix& C, cplx alpha, const DenseMatrix& B, const SpMat& S);
// C += alpha * X + conj(alpha) * X^dagger
void add_scaled_adjoint(DenseMatrix& C, cplx alpha, const DenseMatrix& X);
// C = alpha * X + conj(alpha) * X^dagger (assignment form)
void assign_scaled_adjoint(DenseMatrix& C, cplx alpha, const DenseMatrix& X);
// C = A + alpha * B
void assign_sum(DenseMatrix& C, const DenseMatrix& A, cplx alpha, const DenseMatrix& B);
// A += s * (k1 + 2 k2 + 2 k3 + k4)
void rk4_combine(DenseMatrix& A, double s, const DenseMatrix& k1, const DenseMatrix& k2,
                 const DenseMatrix& k3, const DenseMatrix& k4);
// M = (M + M^dagger) / 2, in place
void symmetrize_inplace(DenseMatrix& M);
// C = 0 (worksharing-aware, for use inside parallel regions)
void set_zero(DenseMatrix& C);

namespace ref {
void spmm_acc(DenseMatrix& C, cplx alpha, const SpMat& S, const DenseMatrix& B);
void mmsp_acc(DenseMatrix& C, cplx alpha, const DenseMatrix& B, const SpMat& S);
void add_scaled_adjoint(DenseMatrix& C, cplx alpha, const DenseMatrix& X);
} // namespace ref

} // namespace ensq::kernel
