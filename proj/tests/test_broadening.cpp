#include <doctest.h>

#include <cmath>

#include "ensq/broadening.hpp"
#include "ensq/manifold.hpp"

using namespace ensq;
using namespace ensq::broadening;

namespace {

model::ModelParams paper_defaults() {
    model::ModelParams p;
    p.g_col = 0.03;
    p.J = 3.0 * p.g_col;
    p.Delta_q = 20.0 * p.g_col;
    p.n_atoms = 6;
    return p;
}

std::vector<double> k2at_grid(double t_end, int points) {
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = t_end * i / (points - 1);
    return g;
}

} // namespace

TEST_CASE("detuning samples are centered, rescaled and deterministic") {
    const double target = 3.1e-4;
    const auto deltas = sample_detunings(6, target, 99);
    REQUIRE(deltas.size() == 6);
    double mean = 0.0, ms = 0.0;
    for (double d : deltas) mean += d;
    mean /= 6.0;
    for (double d : deltas) ms += d * d;
    CHECK(std::abs(mean) < 1e-12);
    CHECK(std::sqrt(ms / 6.0) == doctest::Approx(target).epsilon(1e-12));

    CHECK(sample_detunings(6, target, 99) == deltas);
    CHECK(sample_detunings(6, target, 100) != deltas);

    const auto zeros = sample_detunings(4, 0.0, 7);
    for (double d : zeros) CHECK(d == 0.0);
    CHECK_THROWS_AS(sample_detunings(1, target, 1), ConfigError);
}

TEST_CASE("broadened equation structure") {
    model::ModelParams p = paper_defaults();
    SUBCASE("two hard-core atoms: s^2 is the cross term") {
        const std::vector<double> deltas = {1e-4, -1e-4};
        const MasterEquation me = build_broadened_me(p, deltas, false);
        const HilbertSpace& space = me.space();
        const Operator b0 = annihilation(space, "b0");
        const Operator b1 = annihilation(space, "b1");
        CHECK(max_abs_diff(me.c_terms()[0].op, b0 * b1) < 1e-15);
    }
    SUBCASE("protection adds the collective shift") {
        const auto deltas = sample_detunings(4, 2e-4, 5);
        const MasterEquation plain = build_broadened_me(p, deltas, false);
        const MasterEquation prot = build_broadened_me(p, deltas, true);
        const model::DerivedParams d = model::derive(p);
        const HilbertSpace& space = plain.space();
        Operator s = cplx(0.5) * annihilation(space, "b0");
        for (int j = 1; j < 4; ++j) s += cplx(0.5) * annihilation(space, "b" + std::to_string(j));
        const Operator diff = prot.h_terms().front().op - plain.h_terms().front().op;
        CHECK(max_abs_diff(diff, cplx(d.delta_q_shift) * (s.dagger() * s)) < 1e-15);
    }
    SUBCASE("dimension budget guard") {
        const std::vector<double> many(13, 1e-4);
        CHECK_THROWS_AS(build_broadened_me(p, many, false), GuardError);
    }
}

TEST_CASE("superradiant decomposition") {
    const auto deltas = sample_detunings(6, 4.2e-4, 11);
    const SuperradiantDecomposition dec = superradiant_decomposition(deltas);
    CHECK(dec.coupling == doctest::Approx(4.2e-4).epsilon(1e-12));
    CHECK(std::abs(dec.s_vector.dot(dec.d_vector)) < 1e-10);
    CHECK(dec.s_vector.norm() == doctest::Approx(1.0));
    CHECK(dec.d_vector.norm() == doctest::Approx(1.0));
    // <s|H_inh|s> = mean detuning = 0 exactly after centering
    double diag = 0.0;
    for (std::size_t j = 0; j < deltas.size(); ++j)
        diag += dec.s_vector(static_cast<int>(j)) * deltas[j] * dec.s_vector(static_cast<int>(j));
    CHECK(std::abs(diag) < 1e-12);
    CHECK_THROWS_AS(superradiant_decomposition(std::vector<double>(6, 0.0)), ConfigError);
}

TEST_CASE("clean ensemble converges to the ideal coherence and stays there") {
    model::ModelParams p = paper_defaults();
    const std::vector<double> deltas(6, 0.0);
    const BroadeningRun run = broadened_coherence(p, deltas, false, k2at_grid(20.0, 81), 1.0);

    const double ideal = std::abs(manifold::coherent_coeffs(1.0).c01);
    CHECK(std::abs(run.coherence_modulus.back() - ideal) < 0.03);
    // no dephasing: once relaxed, the modulus is static
    for (std::size_t i = run.times.size() / 2; i < run.times.size(); ++i)
        CHECK(std::abs(run.coherence_modulus[i] - run.coherence_modulus.back()) < 1e-3);
    CHECK(run.max_trace_error < 1e-8);
}

TEST_CASE("clean N-atom run matches the single-mode reduced dynamics") {
    model::ModelParams p = paper_defaults();
    p.trunc.dim_b = 12;
    const model::DerivedParams d = model::derive(p);
    const auto grid = k2at_grid(12.0, 41);

    const BroadeningRun natom = broadened_coherence(p, std::vector<double>(6, 0.0), false, grid, 1.0);

    const MasterEquation single = model::build_adiabatic(p);
    std::vector<double> phys(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) phys[i] = grid[i] / d.kappa_2at;
    Trajectory traj = evolve(single, pure_density(coherent_state(single.space(), "b", 1.0)), phys, {},
                             {{"sm", transition_op(single.space(), "b", 0, 1)}});
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(std::abs(natom.coherence_modulus[i] -
                       std::abs(traj.observables.at("sm")[i])) < 0.03);
}

TEST_CASE("coherence series is invariant under atom permutations") {
    model::ModelParams p = paper_defaults();
    p.n_atoms = 4;
    auto deltas = sample_detunings(4, 1.5e-4, 21);
    const auto grid = k2at_grid(6.0, 31);
    const BroadeningRun base = broadened_coherence(p, deltas, false, grid, 1.0);
    std::rotate(deltas.begin(), deltas.begin() + 1, deltas.end());
    std::swap(deltas[0], deltas[2]);
    const BroadeningRun permuted = broadened_coherence(p, deltas, false, grid, 1.0);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(std::abs(base.coherence_modulus[i] - permuted.coherence_modulus[i]) < 1e-10);
}

TEST_CASE("protected phase grows linearly at the collective shift") {
    model::ModelParams p = paper_defaults();
    const auto grid = k2at_grid(8.0, 41);

    SUBCASE("deltas = 0: slope is exactly the shift") {
        const BroadeningRun run = broadened_coherence(p, std::vector<double>(6, 0.0), true, grid, 1.0);
        const PhaseFit fit = phase_linearity(run);
        CHECK(fit.r_squared >= 0.999);
        CHECK(std::abs(fit.slope) == doctest::Approx(1.0).epsilon(0.02));
    }
    SUBCASE("unprotected with deltas = 0 has no phase drift") {
        const BroadeningRun run = broadened_coherence(p, std::vector<double>(6, 0.0), false, grid, 1.0);
        const PhaseFit fit = phase_linearity(run);
        CHECK(std::abs(fit.slope) < 1e-8);
    }
    SUBCASE("phase unwrapping keeps inter-sample jumps below pi") {
        const BroadeningRun run = broadened_coherence(p, sample_detunings(6, model::derive(p).delta_inh, 3),
                                                      true, grid, 1.0);
        for (std::size_t i = 1; i < run.coherence_phase.size(); ++i)
            CHECK(std::abs(run.coherence_phase[i] - run.coherence_phase[i - 1]) < M_PI);
    }
    SUBCASE("too few points are rejected") {
        const BroadeningRun run = broadened_coherence(p, std::vector<double>(6, 0.0), true,
                                                      k2at_grid(1.0, 10), 1.0);
        CHECK_THROWS_AS(phase_linearity(run), ConfigError);
    }
}
