// bench_liouvillian.cpp — right-hand-side throughput: naive Eigen reference
// vs the column-parallel kernels at 1..N threads.

#include <chrono>
#include <cstdio>

#include "ensq/kernels.hpp"
#include "ensq/manifold.hpp"
#include "ensq/model.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace ensq;

namespace {

// Reference Liouvillian built from plain Eigen dense algebra.
DenseMatrix rhs_reference(const MasterEquation& me, const DenseMatrix& rho, double t) {
    const int d = me.space().total_dim();
    DenseMatrix h = DenseMatrix::Zero(d, d);
    for (const auto& term : me.h_terms()) h += term.profile.at(t) * term.op.dense();
    DenseMatrix out = cplx(0.0, -1.0) * (h * rho - rho * h);
    for (const auto& c : me.c_terms()) {
        const DenseMatrix o = c.op.dense();
        const DenseMatrix od = o.adjoint();
        out += c.rate * (o * rho * od - 0.5 * (od * o * rho + rho * od * o));
    }
    return out;
}

double time_ms(const std::function<void()>& fn, int reps) {
    fn(); // warm up
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

} // namespace

int main() {
    model::ModelParams params;
    params.trunc = {3, 4, 10, 2};
    MasterEquation me = model::build_full(params);
    const int d = me.space().total_dim();
    const DensityMatrix rho = manifold::random_density(me.space(), 42);

    std::printf("Liouvillian RHS on the full tier, dim = %d\n", d);

    DenseMatrix out_ref;
    const double t_ref = time_ms([&] { out_ref = rhs_reference(me, rho.mat, 0.0); }, 50);
    std::printf("  eigen reference      : %8.3f ms\n", t_ref);

    int max_threads = 1;
#ifdef _OPENMP
    max_threads = omp_get_max_threads();
#endif
    for (int threads = 1; threads <= max_threads; threads *= 2) {
        kernel::set_max_threads(threads);
        DenseMatrix out;
        const double t_kernel = time_ms([&] { out = liouvillian_apply(me, rho, 0.0); }, 200);
        const double err = (out - out_ref).cwiseAbs().maxCoeff();
        std::printf("  kernels, %d thread%s  : %8.3f ms   (speedup %.2fx, max dev %.2e)\n", threads,
                    threads == 1 ? " " : "s", t_kernel, t_ref / t_kernel, err);
    }
    kernel::set_max_threads(0);
    return 0;
}
