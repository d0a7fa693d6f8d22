#include "ensq/manifold.hpp"

#include <cmath>
#include <random>

namespace ensq::manifold {

bool SteadyCoeffs::is_physical(double tol) const {
    if (c00 < -tol || c11 < -tol) return false;
    if (std::abs(c00 + c11 - 1.0) > 1e-10) return false;
    return std::norm(c01) <= c00 * c11 + tol;
}

DensityMatrix SteadyCoeffs::to_density(int dim, const std::string& label) const {
    if (dim < 2) throw ConfigError("SteadyCoeffs::to_density: dim must be >= 2");
    HilbertSpace space = make_space({{label, dim}});
    DenseMatrix m = DenseMatrix::Zero(dim, dim);
    m(0, 0) = c00;
    m(1, 1) = c11;
    m(0, 1) = c01;
    m(1, 0) = std::conj(c01);
    return DensityMatrix{std::move(space), std::move(m)};
}

Operator pi00(int dim) {
    if (dim < 2) throw ConfigError("pi00: dim must be >= 2");
    HilbertSpace space = make_space({{"b", dim}});
    std::vector<Eigen::Triplet<cplx>> trips;
    for (int n = 0; n < dim; n += 2) trips.emplace_back(n, n, cplx(1.0, 0.0));
    SpMat m(dim, dim);
    m.setFromTriplets(trips.begin(), trips.end());
    return Operator(std::move(space), std::move(m));
}

Operator pi01(int dim) {
    if (dim < 2) throw ConfigError("pi01: dim must be >= 2");
    HilbertSpace space = make_space({{"b", dim}});
    std::vector<Eigen::Triplet<cplx>> trips;
    // w_n = sqrt(2n+1) (2n-1)!!/(2n)!! with (-1)!! = 0!! = 1, built up
    // iteratively: ratio (2n-1)/(2n) per step.
    double ratio = 1.0;
    for (int n = 0; 2 * n + 1 < dim; ++n) {
        if (n > 0) ratio *= (2.0 * n - 1.0) / (2.0 * n);
        const double w = std::sqrt(2.0 * n + 1.0) * ratio;
        trips.emplace_back(2 * n, 2 * n + 1, cplx(w, 0.0));
    }
    SpMat m(dim, dim);
    m.setFromTriplets(trips.begin(), trips.end());
    return Operator(std::move(space), std::move(m));
}

DensityMatrix random_density(const HilbertSpace& space, unsigned long long seed) {
    const int d = space.total_dim();
    std::mt19937_64 eng(seed);
    auto uniform = [&eng]() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };
    auto gauss = [&]() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    };
    DenseMatrix g(d, d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) g(i, j) = cplx(gauss(), gauss());
    DenseMatrix m = g * g.adjoint();
    m /= m.trace().real();
    return DensityMatrix{space, std::move(m)};
}

double conserved_check(const MasterEquation& me, const Operator& op, int n_states,
                       double t_end_rate_units, unsigned long long seed) {
    if (op.space() != me.space()) throw ConfigError("conserved_check: operator on wrong space");
    double fastest_rate = 0.0;
    for (const auto& c : me.c_terms()) fastest_rate = std::max(fastest_rate, c.rate);
    if (fastest_rate <= 0.0) throw ConfigError("conserved_check: equation has no decay");
    const double t_end = t_end_rate_units / fastest_rate;

    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(t_end * i / 20.0);

    // conservation under the exact generator survives any stable step, so
    // integrate near the stability limit
    IntegratorConfig cfg;
    cfg.dt_factor = 0.08;
    double max_drift = 0.0;
    for (int k = 0; k < n_states; ++k) {
        const DensityMatrix rho0 = random_density(me.space(), seed + static_cast<unsigned long long>(k));
        Trajectory traj = evolve(me, rho0, grid, cfg, {{"op", op}});
        const cplx initial = traj.observables.at("op").front();
        for (const cplx& v : traj.observables.at("op"))
            max_drift = std::max(max_drift, std::abs(v - initial));
    }
    return max_drift;
}

SteadyCoeffs steady_coeffs(const DensityMatrix& rho0) {
    if (rho0.space.n_modes() != 1) throw ConfigError("steady_coeffs: state is not single-mode");
    const int dim = rho0.space.total_dim();
    const Operator p00 = pi00(dim);
    const Operator p01 = pi01(dim);
    // Operators are built on a canonical "b"-labelled space; rebind to the
    // state's space so mixed labels still work.
    SteadyCoeffs out;
    const DensityMatrix rho{p00.space(), rho0.mat};
    out.c00 = expectation(rho, p00).real();
    out.c11 = 1.0 - out.c00;
    out.c01 = expectation(rho, p01.dagger());
    return out;
}

SteadyCoeffs coherent_coeffs(cplx alpha) {
    const double x = std::norm(alpha);
    SteadyCoeffs out;
    out.c00 = 0.5 * (1.0 + std::exp(-2.0 * x));
    out.c11 = 1.0 - out.c00;
    out.c01 = std::conj(alpha) * std::exp(-x) * bessel_i0(x);
    return out;
}

double bessel_i0(double x) {
    if (x < 0.0) throw ConfigError("bessel_i0: negative argument");
    if (x <= 15.0) {
        // I0(x) = sum_k ((x/2)^(2k)) / (k!)^2; all terms positive.
        const double y = 0.25 * x * x;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 200; ++k) {
            term *= y / (static_cast<double>(k) * static_cast<double>(k));
            sum += term;
            if (term < 1e-17 * sum) break;
        }
        return sum;
    }
    // Asymptotic: I0(x) ~ e^x / sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! (8x)^k).
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 40; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = term * odd * odd / (8.0 * x * static_cast<double>(k));
        if (next >= term) break; // divergent tail reached
        term = next;
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return std::exp(x) / std::sqrt(2.0 * M_PI * x) * sum;
}

} // namespace ensq::manifold
