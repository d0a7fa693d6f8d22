#include <doctest.h>

#include <random>

#include "ensq/kernels.hpp"

using namespace ensq;

namespace {

SpMat random_sparse(int dim, double density, unsigned seed) {
    std::mt19937 eng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::uniform_real_distribution<double> keep(0.0, 1.0);
    std::vector<Eigen::Triplet<cplx>> trips;
    for (int j = 0; j < dim; ++j)
        for (int i = 0; i < dim; ++i)
            if (keep(eng) < density) trips.emplace_back(i, j, cplx(dist(eng), dist(eng)));
    SpMat m(dim, dim);
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
}

DenseMatrix random_dense(int dim, unsigned seed) {
    std::mt19937 eng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    DenseMatrix m(dim, dim);
    for (int j = 0; j < dim; ++j)
        for (int i = 0; i < dim; ++i) m(i, j) = cplx(dist(eng), dist(eng));
    return m;
}

} // namespace

TEST_CASE("parallel kernels match the serial reference") {
    for (int dim : {5, 24, 60}) {
        const SpMat s = random_sparse(dim, 0.15, 17u + static_cast<unsigned>(dim));
        const DenseMatrix b = random_dense(dim, 23u + static_cast<unsigned>(dim));
        const cplx alpha(0.3, -1.2);

        DenseMatrix c1 = random_dense(dim, 5);
        DenseMatrix c2 = c1;
        kernel::spmm_acc(c1, alpha, s, b);
        kernel::ref::spmm_acc(c2, alpha, s, b);
        CHECK(max_abs_diff(c1, c2) < 1e-12);

        c1 = random_dense(dim, 6);
        c2 = c1;
        kernel::mmsp_acc(c1, alpha, b, s);
        kernel::ref::mmsp_acc(c2, alpha, b, s);
        CHECK(max_abs_diff(c1, c2) < 1e-12);

        c1 = random_dense(dim, 7);
        c2 = c1;
        kernel::add_scaled_adjoint(c1, alpha, b);
        kernel::ref::add_scaled_adjoint(c2, alpha, b);
        CHECK(max_abs_diff(c1, c2) < 1e-12);
    }
}

TEST_CASE("kernel output is identical for any thread count") {
    const int dim = 80;
    const SpMat s = random_sparse(dim, 0.2, 91);
    const DenseMatrix b = random_dense(dim, 92);

    kernel::set_max_threads(1);
    DenseMatrix c1 = DenseMatrix::Zero(dim, dim);
    kernel::spmm_acc(c1, cplx(1.0, 0.5), s, b);

    kernel::set_max_threads(0); // OpenMP default
    DenseMatrix cn = DenseMatrix::Zero(dim, dim);
    kernel::spmm_acc(cn, cplx(1.0, 0.5), s, b);

    CHECK((c1 - cn).cwiseAbs().maxCoeff() == 0.0);
    kernel::set_max_threads(0);
}
