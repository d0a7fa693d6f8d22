#include "ensq/kernels.hpp"

#include <atomic>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ensq::kernel {

namespace {

std::atomic<int> g_max_threads{0};

// Columns below this size are processed serially when a kernel runs
// standalone: the parallel-region overhead exceeds the work.
constexpr Eigen::Index kSerialThreshold = 64;

bool in_parallel() {
#ifdef _OPENMP
    return omp_in_parallel() != 0;
#else
    return false;
#endif
}

int standalone_threads(Eigen::Index cols) {
#ifdef _OPENMP
    if (cols < kSerialThreshold) return 1;
    int n = g_max_threads.load(std::memory_order_relaxed);
    if (n <= 0) n = omp_get_max_threads();
    return static_cast<int>(std::min<Eigen::Index>(n, cols));
#else
    (void)cols;
    return 1;
#endif
}

// Per-thread buffer for sparse values pre-scaled by alpha; scaling once per
// call instead of once per (row, column) pair keeps the complex multiply
// off the inner dependency chain.
const cplx* prescale(cplx alpha, const SpMat& S) {
    static thread_local std::vector<cplx> buf;
    if (alpha == cplx(1.0, 0.0)) return S.valuePtr();
    const auto nnz = static_cast<std::size_t>(S.nonZeros());
    if (buf.size() < nnz) buf.resize(nnz);
    const cplx* vals = S.valuePtr();
    for (std::size_t i = 0; i < nnz; ++i) buf[i] = alpha * vals[i];
    return buf.data();
}

// The inner loops below view complex arrays as interleaved re/im doubles;
// the explicit arithmetic with __restrict pointers is ~3x faster than the
// std::complex equivalent under gcc.
inline const double* re_im(const cplx* p) { return reinterpret_cast<const double*>(p); }
inline double* re_im(cplx* p) { return reinterpret_cast<double*>(p); }

inline void spmm_col(cplx* cc, const cplx* cb, const int* outer, const int* inner, const cplx* cvals,
                     Eigen::Index rows) {
    double* __restrict c = re_im(cc);
    const double* __restrict b = re_im(cb);
    const double* __restrict vals = re_im(cvals);
    for (Eigen::Index k = 0; k < rows; ++k) {
        const int begin = outer[k], end = outer[k + 1];
        if (begin == end) continue;
        const double br = b[2 * k], bi = b[2 * k + 1];
        for (int idx = begin; idx < end; ++idx) {
            const double vr = vals[2 * idx], vi = vals[2 * idx + 1];
            const int r = inner[idx];
            c[2 * r] += vr * br - vi * bi;
            c[2 * r + 1] += vr * bi + vi * br;
        }
    }
}

inline void mmsp_col(cplx* cc, const DenseMatrix& B, const int* outer, const int* inner,
                     const cplx* cvals, Eigen::Index j) {
    const Eigen::Index rows = B.rows();
    double* __restrict c = re_im(cc);
    const double* __restrict vals = re_im(cvals);
    for (int idx = outer[j]; idx < outer[j + 1]; ++idx) {
        const double vr = vals[2 * idx], vi = vals[2 * idx + 1];
        const double* __restrict b = re_im(B.data() + static_cast<Eigen::Index>(inner[idx]) * rows);
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double br = b[2 * i], bi = b[2 * i + 1];
            c[2 * i] += vr * br - vi * bi;
            c[2 * i + 1] += vr * bi + vi * br;
        }
    }
}

// c[i] (+)= alpha * X(i, j) + conj(alpha) * conj(X(j, i))
template <bool kAssign>
inline void adjoint_col(cplx* cc, const DenseMatrix& X, cplx alpha, Eigen::Index j, Eigen::Index n) {
    const double ar = alpha.real(), ai = alpha.imag();
    double* __restrict c = re_im(cc);
    const double* __restrict xcol = re_im(X.data() + j * X.rows());
    const double* __restrict xall = re_im(X.data());
    const Eigen::Index rows = X.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double xr = xcol[2 * i], xi = xcol[2 * i + 1];
        // row-side element X(j, i), conjugated, scaled by conj(alpha)
        const double yr = xall[2 * (j + i * rows)], yi = -xall[2 * (j + i * rows) + 1];
        const double re = (ar * xr - ai * xi) + (ar * yr + ai * yi);
        const double im = (ar * xi + ai * xr) + (ar * yi - ai * yr);
        if (kAssign) {
            c[2 * i] = re;
            c[2 * i + 1] = im;
        } else {
            c[2 * i] += re;
            c[2 * i + 1] += im;
        }
    }
}

} // namespace

void set_max_threads(int n) { g_max_threads.store(n); }

int max_threads() {
#ifdef _OPENMP
    int n = g_max_threads.load();
    return n > 0 ? n : omp_get_max_threads();
#else
    return 1;
#endif
}

void spmm_acc(DenseMatrix& C, cplx alpha, const SpMat& S, const DenseMatrix& B) {
    const Eigen::Index n = C.cols();
    const int* outer = S.outerIndexPtr();
    const int* inner = S.innerIndexPtr();
    const Eigen::Index rows = S.rows();

    if (in_parallel()) {
        const cplx* vals = prescale(alpha, S);
#pragma omp for schedule(static)
        for (Eigen::Index j = 0; j < n; ++j)
            spmm_col(C.data() + j * C.rows(), B.data() + j * B.rows(), outer, inner, vals, rows);
        return;
    }
    const int threads = standalone_threads(n);
    if (threads == 1) {
        const cplx* vals = prescale(alpha, S);
        for (Eigen::Index j = 0; j < n; ++j)
            spmm_col(C.data() + j * C.rows(), B.data() + j * B.rows(), outer, inner, vals, rows);
        return;
    }
#pragma omp parallel num_threads(threads)
    {
        const cplx* vals = prescale(alpha, S); // per-thread buffer
#pragma omp for schedule(static)
        for (Eigen::Index j = 0; j < n; ++j)
            spmm_col(C.data() + j * C.rows(), B.data() + j * B.rows(), outer, inner, vals, rows);
    }
}

void mmsp_acc(DenseMatrix& C, cplx alpha, const DenseMatrix& B, const SpMat& S) {
    const Eigen::Index n = S.cols();
    const int* outer = S.outerIndexPtr();
    const int* inner = S.innerIndexPtr();

    if (in_parallel()) {
        const cplx* vals = prescale(alpha, S);
#pragma omp for schedule(static)
        for (Eigen::Index j = 0; j < n; ++j) mmsp_col(C.data() + j * C.rows(), B, outer, inner, vals, j);
        return;
    }
    const int threads = standalone_threads(n);
    if (threads == 1) {
        const cplx* vals = prescale(alpha, S);
        for (Eigen::Index j = 0; j < n; ++j) mmsp_col(C.data() + j * C.rows(), B, outer, inner, vals, j);
        return;
    }
#pragma omp parallel num_threads(threads)
    {
        const cplx* vals = prescale(alpha, S);
#pragma omp for schedule(static)
        for (Eigen::Index j = 0; j < n; ++j) mmsp_col(C.data() + j * C.rows(), B, outer, inner, vals, j);
    }
}

void add_scaled_adjoint(DenseMatrix& C, cplx alpha, const DenseMatrix& X) {
    const Eigen::Index n = C.cols();
    if (in_parallel()) {
#pragma omp for schedule(static)
        for (Eigen::Index j = 0; j < n; ++j)
            adjoint_col<false>(C.data() + j * C.rows(), X, alpha, j, n);
        return;
    }
    const int threads = standalone_threads(n);
    if (threads == 1) {
        for (Eigen::Index j = 0; j < n; ++j)
            adjoint_col<false>(C.data() + j * C.rows(), X, alpha, j, n);
        return;
    }
#pragma omp parallel for schedule(static) num_threads(threads)
    for (Eigen::Index j = 0; j < n; ++j) adjoint_col<false>(C.data() + j * C.rows(), X, alpha, j, n);
}

void assign_scaled_adjoint(DenseMatrix& C, cplx alpha, const DenseMatrix& X) {
    const Eigen::Index n = C.cols();
    if (in_parallel()) {
#pragma omp for schedule(static)
        for (Eigen::Index j = 0; j < n; ++j)
            adjoint_col<true>(C.data() + j * C.rows(), X, alpha, j, n);
        return;
    }
    const int threads = standalone_threads(n);
    if (threads == 1) {
        for (Eigen::Index j = 0; j < n; ++j)
            adjoint_col<true>(C.data() + j * C.rows(), X, alpha, j, n);
        return;
    }
#pragma omp parallel for schedule(static) num_threads(threads)
    for (Eigen::Index j = 0; j < n; ++j) adjoint_col<true>(C.data() + j * C.rows(), X, alpha, j, n);
}

void assign_sum(DenseMatrix& C, const DenseMatrix& A, cplx alpha, const DenseMatrix& B) {
    const Eigen::Index n = C.cols();
    const Eigen::Index rows = C.rows();
    const double ar = alpha.real(), ai = alpha.imag();
    auto body = [&](Eigen::Index j) {
        double* __restrict c = re_im(C.data() + j * rows);
        const double* __restrict a = re_im(A.data() + j * rows);
        const double* __restrict b = re_im(B.data() + j * rows);
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double br = b[2 * i], bi = b[2 * i + 1];
            c[2 * i] = a[2 * i] + ar * br - ai * bi;
            c[2 * i + 1] = a[2 * i + 1] + ar * bi + ai * br;
        }
    };
    if (in_parallel()) {
#pragma omp for schedule(static)
        for (Eigen::Index j = 0; j < n; ++j) body(j);
        return;
    }
    for (Eigen::Index j = 0; j < n; ++j) body(j);
}

void rk4_combine(DenseMatrix& A, double s, const DenseMatrix& k1, const DenseMatrix& k2,
                 const DenseMatrix& k3, const DenseMatrix& k4) {
    const Eigen::Index n = A.cols();
    const Eigen::Index rows = A.rows();
    auto body = [&](Eigen::Index j) {
        double* __restrict a = re_im(A.data() + j * rows);
        const double* __restrict p1 = re_im(k1.data() + j * rows);
        const double* __restrict p2 = re_im(k2.data() + j * rows);
        const double* __restrict p3 = re_im(k3.data() + j * rows);
        const double* __restrict p4 = re_im(k4.data() + j * rows);
        for (Eigen::Index i = 0; i < 2 * rows; ++i)
            a[i] += s * (p1[i] + 2.0 * p2[i] + 2.0 * p3[i] + p4[i]);
    };
    if (in_parallel()) {
#pragma omp for schedule(static)
        for (Eigen::Index j = 0; j < n; ++j) body(j);
        return;
    }
    for (Eigen::Index j = 0; j < n; ++j) body(j);
}

void symmetrize_inplace(DenseMatrix& M) {
    const Eigen::Index n = M.cols();
    // Pair (i, j) with i < j is owned by column j; the diagonal keeps its
    // real part. Each element has exactly one writer for any thread count.
    auto body = [&](Eigen::Index j) {
        cplx* col = M.data() + j * M.rows();
        for (Eigen::Index i = 0; i < j; ++i) {
            const cplx v = 0.5 * (col[i] + std::conj(M(j, i)));
            col[i] = v;
            M(j, i) = std::conj(v);
        }
        col[j] = cplx(col[j].real(), 0.0);
    };
    if (in_parallel()) {
#pragma omp for schedule(static)
        for (Eigen::Index j = 0; j < n; ++j) body(j);
        return;
    }
    for (Eigen::Index j = 0; j < n; ++j) body(j);
}

void set_zero(DenseMatrix& C) {
    const Eigen::Index n = C.cols();
    if (in_parallel()) {
#pragma omp for schedule(static)
        for (Eigen::Index j = 0; j < n; ++j)
            std::fill_n(C.data() + j * C.rows(), C.rows(), cplx(0.0, 0.0));
        return;
    }
    C.setZero();
}

namespace ref {

void spmm_acc(DenseMatrix& C, cplx alpha, const SpMat& S, const DenseMatrix& B) {
    C.noalias() += alpha * (S * B);
}

void mmsp_acc(DenseMatrix& C, cplx alpha, const DenseMatrix& B, const SpMat& S) {
    C.noalias() += alpha * (B * S);
}

void add_scaled_adjoint(DenseMatrix& C, cplx alpha, const DenseMatrix& X) {
    C.noalias() += alpha * X;
    C.noalias() += std::conj(alpha) * X.adjoint();
}

} // namespace ref

} // namespace ensq::kernel
