// acceptance_main.cpp — end-to-end acceptance suite. Each criterion prints
// one PASS/FAIL line; the process exit code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "ensq/broadening.hpp"
#include "ensq/effective.hpp"
#include "ensq/manifold.hpp"
#include "ensq/spectrum.hpp"

using namespace ensq;

namespace {

struct Hygiene {
    double max_trace{0.0};
    double max_herm{0.0};
    double min_eig{1.0};

    void absorb(double trace, double herm, double eig) {
        max_trace = std::max(max_trace, trace);
        max_herm = std::max(max_herm, herm);
        min_eig = std::min(min_eig, eig);
    }
    void absorb(const Trajectory& t) { absorb(t.max_trace_error, t.max_hermiticity_error, t.min_eigenvalue); }
    void absorb(const effective::TierSeries& s) {
        absorb(s.max_trace_error, s.max_hermiticity_error, s.min_eigenvalue);
    }
};

Hygiene g_hygiene;
int g_failures = 0;

class Criterion {
public:
    Criterion(int id, const std::string& name) : id_(id), name_(name) {
        start_ = std::chrono::steady_clock::now();
    }

    void check(bool ok, const std::string& detail) {
        all_ok_ &= ok;
        details_.push_back(std::string(ok ? "    ok   " : "    FAIL ") + detail);
    }

    void finish() {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        std::printf("[%s] criterion %d: %s (%.1f s)\n", all_ok_ ? "PASS" : "FAIL", id_,
                    name_.c_str(), secs);
        for (const auto& d : details_) std::printf("%s\n", d.c_str());
        std::fflush(stdout);
        if (!all_ok_) ++g_failures;
    }

private:
    int id_;
    std::string name_;
    bool all_ok_{true};
    std::vector<std::string> details_;
    std::chrono::steady_clock::time_point start_;
};

std::string fmt(const char* pattern, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), pattern, a, b);
    return buf;
}

model::ModelParams paper_params() {
    model::ModelParams p;
    p.g_col = 0.03;
    p.J = 3.0 * p.g_col;
    p.Delta_q = 20.0 * p.g_col;
    return p;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
    return out;
}

void criterion_conserved_quantities() {
    Criterion c(1, "conserved-quantity suite (dim 12, 20 random states, kappa_2at t = 20)");

    model::ModelParams p = paper_params();
    p.trunc.dim_b = 12;
    const model::DerivedParams d = model::derive(p);
    const MasterEquation me = model::build_adiabatic(p);
    const Operator p00 = manifold::pi00(12);
    const Operator p01 = manifold::pi01(12);

    IntegratorConfig cfg;
    cfg.dt_factor = 0.08; // conserved traces are exact for any stable step
    const auto grid = linspace(0.0, 20.0 / d.kappa_2at, 21);

    double drift00 = 0.0, drift01 = 0.0;
    for (int k = 0; k < 20; ++k) {
        const DensityMatrix rho0 = manifold::random_density(me.space(), 1000 + k);
        Trajectory traj = evolve(me, rho0, grid, cfg, {{"p00", p00}, {"p01", p01}});
        g_hygiene.absorb(traj);
        const cplx a0 = traj.observables.at("p00").front();
        const cplx b0 = traj.observables.at("p01").front();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            drift00 = std::max(drift00, std::abs(traj.observables.at("p00")[i] - a0));
            drift01 = std::max(drift01, std::abs(traj.observables.at("p01")[i] - b0));
        }
    }
    c.check(drift00 <= 1e-6, fmt("max <Pi00> drift %.2e <= 1e-6", drift00));
    c.check(drift01 <= 1e-6, fmt("max <Pi01> drift %.2e <= 1e-6", drift01));
    c.finish();
}

void criterion_steady_coefficients() {
    Criterion c(2, "steady-state coefficients vs closed form (alpha = 0.5, 1, 2)");

    for (double alpha : {0.5, 1.0, 2.0}) {
        model::ModelParams p = paper_params();
        p.trunc.dim_b = model::coherent_dim_for(alpha);
        const MasterEquation me = model::build_adiabatic(p);
        const DensityMatrix rho0 = pure_density(coherent_state(me.space(), "b", alpha));
        const DensityMatrix ss = steady_state(me, rho0);
        g_hygiene.absorb(std::abs(ss.trace() - cplx(1.0)), ss.hermiticity_error(), ss.min_eigenvalue());

        const manifold::SteadyCoeffs ideal = manifold::coherent_coeffs(alpha);
        const double e00 = std::abs(ss.mat(0, 0).real() - ideal.c00);
        const double e11 = std::abs(ss.mat(1, 1).real() - ideal.c11);
        const double e01 = std::abs(ss.mat(0, 1) - ideal.c01);
        const double worst = std::max({e00, e11, e01});
        c.check(worst <= 1e-3, fmt("alpha=%.1f entrywise error %.2e <= 1e-3", alpha, worst));

        if (alpha == 1.0) {
            c.check(std::abs(ss.mat(0, 0).real() - 0.567668) <= 1e-3,
                    fmt("c00(alpha=1) = %.6f within 1e-3 of 0.567668", ss.mat(0, 0).real()));
            c.check(std::abs(std::abs(ss.mat(0, 1)) - 0.46576) <= 1e-3,
                    fmt("|c01|(alpha=1) = %.6f within 1e-3 of 0.46576", std::abs(ss.mat(0, 1))));
        }
    }
    c.finish();
}

void criterion_avoided_crossing() {
    Criterion c(3, "avoided crossing location and gap");

    const model::ModelParams p = paper_params();
    const model::DerivedParams d = model::derive(p);
    const spectrum::SpectrumScan scan = spectrum::scan_pump_frequency(p, 1.96, 2.06, 201, 6);
    const spectrum::AvoidedCrossing cx = spectrum::avoided_crossing(scan);

    const double gap_ref = 2.0 * std::sqrt(2.0) * d.chi;
    c.check(std::abs(cx.gap - gap_ref) <= 0.05 * gap_ref,
            fmt("gap/chi = %.4f within 5%% of 2*sqrt(2) = %.4f", cx.gap / d.chi, gap_ref / d.chi));
    const double loc_ref = 2.0 * p.omega_q + d.delta;
    c.check(std::abs(cx.omega_p_star - loc_ref) <= 0.002,
            fmt("omega_p* = %.6f within 0.002 of %.6f", cx.omega_p_star, loc_ref));
    c.check(cx.overlap_pump >= 0.45 && cx.overlap_pair >= 0.45,
            fmt("hybridization overlaps %.3f / %.3f >= 0.45", cx.overlap_pump, cx.overlap_pair));
    c.finish();
}

bool monotone_after_transient(const std::vector<double>& t, const std::vector<double>& eta) {
    std::size_t peak = 0;
    for (std::size_t i = 1; i < eta.size(); ++i)
        if (eta[i] > eta[peak]) peak = i;
    for (std::size_t i = std::max<std::size_t>(peak, 1); i + 1 < eta.size(); ++i) {
        (void)t;
        if (eta[i + 1] > eta[i] + 5e-4) return false;
    }
    return true;
}

void criterion_stabilization() {
    Criterion c(4, "stabilization threshold (full tier alpha=1, time-averaged alpha=1,2,3)");

    {
        model::ModelParams p = paper_params();
        p.trunc = {3, 4, 10, 2};
        const auto cmp = effective::stabilization_experiment(p, 1.0, {model::ModelTier::Full}, 2.0, 81);
        const auto& s = cmp.series.at(model::ModelTier::Full);
        g_hygiene.absorb(s);
        c.check(s.eta.back() < 0.1, fmt("full tier: eta(chi t = 2) = %.4f < 0.1", s.eta.back()));
    }
    for (double alpha : {1.0, 2.0, 3.0}) {
        model::ModelParams p = paper_params();
        const auto cmp =
            effective::stabilization_experiment(p, alpha, {model::ModelTier::TimeAveraged}, 2.0, 81);
        const auto& s = cmp.series.at(model::ModelTier::TimeAveraged);
        g_hygiene.absorb(s);
        c.check(s.eta.back() < 0.1,
                fmt("time-averaged alpha=%.0f: eta(chi t = 2) = %.4f < 0.1", alpha, s.eta.back()));
        c.check(monotone_after_transient(cmp.times, s.eta),
                fmt("time-averaged alpha=%.0f: eta monotone after transient", alpha));
    }
    c.finish();
}

void criterion_rabi() {
    Criterion c(5, "Rabi tier agreement and decay law (Omega_d = 0.1 kappa_2at)");

    model::ModelParams p = paper_params();
    const model::DerivedParams base = model::derive(p);
    p.Omega_d = 0.1 * base.kappa_2at;
    const auto cmp = effective::rabi_experiment(
        p, {model::ModelTier::Adiabatic, model::ModelTier::Qubit}, 200.0, 801);
    const auto& a = cmp.series.at(model::ModelTier::Adiabatic);
    const auto& q = cmp.series.at(model::ModelTier::Qubit);
    g_hygiene.absorb(a);
    g_hygiene.absorb(q);

    double gap = 0.0;
    for (std::size_t i = 0; i < cmp.times.size(); ++i)
        gap = std::max(gap, std::abs(a.p1[i] - q.p1[i]));
    c.check(gap <= 0.05, fmt("max |P1_adiabatic - P1_qubit| = %.4f <= 0.05", gap));

    const effective::RabiFit fit = effective::fit_rabi_decay(cmp.times, a.p1);
    const double expected = 0.04;
    c.check(std::abs(fit.gamma - expected) <= 0.15 * expected,
            fmt("fitted gamma/kappa_2at = %.4f within 15%% of 0.04", fit.gamma));
    c.finish();
}

void criterion_broadening() {
    Criterion c(6, "cavity protection (N=6, delta_inh = 0.1 delta_q, 10 seeds)");

    model::ModelParams p = paper_params();
    const model::DerivedParams d = model::derive(p);
    const auto grid = linspace(0.0, 20.0, 201);
    const double ideal = std::abs(manifold::coherent_coeffs(1.0).c01);

    double prot_sum = 0.0, unprot_sum = 0.0, slope_sum = 0.0, min_r2 = 1.0;
    for (int seed = 1; seed <= 10; ++seed) {
        const auto deltas = broadening::sample_detunings(6, d.delta_inh, seed);
        const auto prot = broadening::broadened_coherence(p, deltas, true, grid, 1.0);
        const auto unprot = broadening::broadened_coherence(p, deltas, false, grid, 1.0);
        g_hygiene.absorb(prot.max_trace_error, prot.max_hermiticity_error, prot.min_eigenvalue);
        g_hygiene.absorb(unprot.max_trace_error, unprot.max_hermiticity_error, unprot.min_eigenvalue);
        prot_sum += prot.coherence_modulus.back();
        unprot_sum += unprot.coherence_modulus.back();
        const broadening::PhaseFit fit = broadening::phase_linearity(prot);
        slope_sum += std::abs(fit.slope);
        min_r2 = std::min(min_r2, fit.r_squared);
    }
    const double prot_mean = prot_sum / 10.0;
    const double unprot_mean = unprot_sum / 10.0;
    const double slope_mean = slope_sum / 10.0;

    c.check(std::abs(prot_mean - ideal) <= 0.10 * ideal,
            fmt("protected end modulus %.4f within 10%% of %.4f", prot_mean, ideal));
    c.check(unprot_mean < 0.70 * ideal,
            fmt("unprotected end modulus %.4f degraded by > 30%%", unprot_mean));
    c.check(min_r2 >= 0.99, fmt("protected phase linear fits: min r^2 = %.4f >= 0.99", min_r2));
    c.check(std::abs(slope_mean - 1.0) <= 0.20,
            fmt("protected phase |slope|/delta_q = %.3f within 20%% of 1", slope_mean));
    c.finish();
}

void criterion_hygiene() {
    Criterion c(7, "numerical hygiene across all acceptance trajectories");

    c.check(g_hygiene.max_trace <= 1e-8, fmt("max |Tr rho - 1| = %.2e <= 1e-8", g_hygiene.max_trace));
    c.check(g_hygiene.max_herm <= 1e-10, fmt("max Hermiticity error = %.2e <= 1e-10", g_hygiene.max_herm));
    c.check(g_hygiene.min_eig >= -1e-6, fmt("min eigenvalue = %.2e >= -1e-6", g_hygiene.min_eig));

    // RK4 order on the damped driven oscillator reference
    HilbertSpace space = make_space({{"b", 4}});
    const Operator a = annihilation(space, "b");
    MasterEquation me(space);
    me.add_hamiltonian(cplx(1.0) * (a + a.dagger()));
    me.add_collapse(1.0, a);
    const DensityMatrix rho0 = pure_density(basis_state(space, {2}));
    auto end_state = [&](double dt) {
        IntegratorConfig cfg;
        cfg.dt = dt;
        cfg.record_snapshots = true;
        cfg.monitor_positivity = false;
        return evolve(me, rho0, {0.0, 2.0}, cfg).snapshots.back().mat;
    };
    const DenseMatrix ref = end_state(0.005);
    const double e1 = (end_state(0.08) - ref).cwiseAbs().maxCoeff();
    const double e2 = (end_state(0.04) - ref).cwiseAbs().maxCoeff();
    const double ratio = e1 / e2;
    c.check(ratio >= 13.0 && ratio <= 19.0, fmt("RK4 dt-halving error ratio %.1f in [13, 19]", ratio));
    c.finish();
}

} // namespace

int main() {
    std::printf("acceptance suite, version %s\n", "0.1.0");
    criterion_conserved_quantities();
    criterion_steady_coefficients();
    criterion_avoided_crossing();
    criterion_stabilization();
    criterion_rabi();
    criterion_broadening();
    criterion_hygiene();
    if (g_failures == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criterion/criteria FAILED\n", g_failures);
    return g_failures;
}
