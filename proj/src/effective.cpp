#include "ensq/effective.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace ensq::effective {

PumpEliminationResult eliminate_pump(const MasterEquation& me_time_averaged, double probe_time_rate_units) {
    const HilbertSpace& space = me_time_averaged.space();
    if (!space.has_mode("p") || !space.has_mode("b"))
        throw ConfigError("eliminate_pump: input equation must carry modes 'p' and 'b'");
    const int dim_b = space.dim_of("b");

    // kappa_p is the rate of the pump-loss channel.
    const Operator a_p = annihilation(space, "p");
    double kappa_p = -1.0;
    for (const auto& c : me_time_averaged.c_terms()) {
        if (max_abs_diff(c.op, a_p) < 1e-12) {
            kappa_p = c.rate;
            break;
        }
    }
    if (kappa_p < 0.0) throw ConfigError("eliminate_pump: no pump-loss collapse term found");
    if (kappa_p == 0.0) throw ConfigError("eliminate_pump: kappa_p must be positive");

    // chi read back from the coupling matrix element <1_p 0_b|H|0_p 2_b> = sqrt(2) chi.
    cplx element(0.0, 0.0);
    const int row = space.basis_index({1, 0});
    const int col = space.basis_index({0, 2});
    for (const auto& term : me_time_averaged.h_terms())
        element += term.profile.at(0.0) * term.op.dense()(row, col);
    const double chi = std::abs(element) / std::sqrt(2.0);

    PumpEliminationResult out{MasterEquation{}, chi, kappa_p, 0.0, 0.0, {}};
    if (kappa_p < 3.0 * chi)
        throw GuardError("eliminate_pump: kappa_p < 3 chi, pump mode is not fast enough to eliminate");
    if (kappa_p < 5.0 * chi)
        out.warnings.push_back("eliminate_pump: kappa_p < 5 chi, reduction accuracy is marginal");
    out.kappa_2at = 4.0 * chi * chi / kappa_p;

    // Probe run: relax an excited Fock state and watch the pump population.
    if (out.kappa_2at > 0.0 && probe_time_rate_units > 0.0) {
        const int n0 = std::min(3, dim_b - 1);
        std::vector<int> occ(static_cast<std::size_t>(space.n_modes()), 0);
        occ[static_cast<std::size_t>(space.mode_index("b"))] = n0;
        const DensityMatrix rho0 = pure_density(basis_state(space, occ));
        const double t_end = probe_time_rate_units / out.kappa_2at;
        std::vector<double> grid;
        for (int i = 0; i <= 200; ++i) grid.push_back(t_end * i / 200.0);
        IntegratorConfig cfg;
        cfg.dt_factor = 0.25; // a population bound needs stability, not accuracy
        cfg.monitor_positivity = false;
        Trajectory traj = evolve(me_time_averaged, rho0, grid, cfg, {{"n_p", number_op(space, "p")}});
        for (const cplx& v : traj.observables.at("n_p"))
            out.max_pump_population = std::max(out.max_pump_population, v.real());
    }

    HilbertSpace sub = make_space({{"b", dim_b}});
    const Operator s = annihilation(sub, "b");
    MasterEquation adiabatic(sub);
    adiabatic.add_collapse(out.kappa_2at, s * s);
    adiabatic.set_stiffness_hint(out.kappa_2at * std::max(1.0, static_cast<double>((dim_b - 1) * (dim_b - 2))));
    out.adiabatic = std::move(adiabatic);
    return out;
}

EffectiveReduction effective_operator_reduction(const Operator& h_nh, const Operator& v,
                                                const Operator& ground_projector,
                                                const std::vector<CollapseTerm>& collapses,
                                                const Operator* ground_hamiltonian) {
    const HilbertSpace& space = h_nh.space();
    if (v.space() != space || ground_projector.space() != space)
        throw ConfigError("effective_operator_reduction: operands on different spaces");
    const int d = space.total_dim();

    // Require a basis-aligned projector and classify indices.
    const DenseMatrix p = ground_projector.dense();
    std::vector<int> ground, excited;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j)
            if (i != j && std::abs(p(i, j)) > 1e-12)
                throw ConfigError("effective_operator_reduction: projector must be diagonal");
        const double diag = p(i, i).real();
        if (std::abs(diag - 1.0) < 1e-12)
            ground.push_back(i);
        else if (std::abs(diag) < 1e-12)
            excited.push_back(i);
        else
            throw ConfigError("effective_operator_reduction: projector diagonal must be 0/1");
    }
    if (excited.empty()) throw ConfigError("effective_operator_reduction: no excited subspace");

    // v must map ground into excited.
    const DenseMatrix vd = v.dense();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const bool i_excited = std::abs(p(i, i).real()) < 1e-12;
            const bool j_ground = std::abs(p(j, j).real() - 1.0) < 1e-12;
            if (std::abs(vd(i, j)) > 1e-12 && !(i_excited && j_ground))
                throw ConfigError("effective_operator_reduction: v must map ground to excited");
        }

    // Invert the excited-subspace block of h_nh.
    const int ne = static_cast<int>(excited.size());
    DenseMatrix block(ne, ne);
    const DenseMatrix hd = h_nh.dense();
    for (int i = 0; i < ne; ++i)
        for (int j = 0; j < ne; ++j) block(i, j) = hd(excited[static_cast<std::size_t>(i)], excited[static_cast<std::size_t>(j)]);
    Eigen::FullPivLU<DenseMatrix> lu(block);
    if (!lu.isInvertible())
        throw ConfigError("effective_operator_reduction: h_nh singular on the excited subspace");
    const DenseMatrix inv_block = lu.inverse();

    DenseMatrix inv_full = DenseMatrix::Zero(d, d);
    for (int i = 0; i < ne; ++i)
        for (int j = 0; j < ne; ++j)
            inv_full(excited[static_cast<std::size_t>(i)], excited[static_cast<std::size_t>(j)]) = inv_block(i, j);

    const DenseMatrix sym = 0.5 * (inv_full + inv_full.adjoint());
    DenseMatrix h_eff_mat = -(vd.adjoint() * sym * vd);
    if (ground_hamiltonian) {
        if (ground_hamiltonian->space() != space)
            throw ConfigError("effective_operator_reduction: ground Hamiltonian on wrong space");
        h_eff_mat += ground_hamiltonian->dense();
    }

    EffectiveReduction out{Operator(space, h_eff_mat.sparseView(1.0, 1e-15)), {}};
    for (const auto& c : collapses) {
        if (c.op.space() != space) throw ConfigError("effective_operator_reduction: collapse on wrong space");
        DenseMatrix l_eff = c.op.dense() * inv_full * vd;
        if (l_eff.cwiseAbs().maxCoeff() > 1e-14)
            out.lindblad_ops.push_back({c.rate, Operator(space, l_eff.sparseView(1.0, 1e-15))});
    }
    return out;
}

namespace {

struct GridSpec {
    std::vector<double> physical;      // integration times
    std::vector<double> dimensionless; // reported times
};

GridSpec make_grid(double t_end_dimensionless, double unit_rate, int points) {
    if (points < 2) throw ConfigError("experiment: need at least 2 grid points");
    if (unit_rate <= 0.0) throw GuardError("experiment: time unit rate is not positive");
    GridSpec g;
    g.physical.resize(static_cast<std::size_t>(points));
    g.dimensionless.resize(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        g.dimensionless[static_cast<std::size_t>(i)] = t_end_dimensionless * i / (points - 1);
        g.physical[static_cast<std::size_t>(i)] = g.dimensionless[static_cast<std::size_t>(i)] / unit_rate;
    }
    return g;
}

} // namespace

TierComparison stabilization_experiment(const model::ModelParams& params, double alpha,
                                        const std::vector<model::ModelTier>& tiers,
                                        double t_end_chi, int points) {
    model::ModelParams p = params;
    p.trunc = model::resolve_truncations(params, alpha);
    const model::DerivedParams d = model::derive(p);

    TierComparison cmp;
    cmp.derived = d;
    cmp.warnings = d.warnings;
    const GridSpec grid = make_grid(t_end_chi, d.chi, points);
    cmp.times = grid.dimensionless;

    const DensityMatrix ideal = manifold::coherent_coeffs(alpha).to_density(p.trunc.dim_b);

    for (model::ModelTier tier : tiers) {
        if (tier == model::ModelTier::Qubit)
            throw ConfigError("stabilization_experiment: qubit tier has no coherent-state preparation");

        MasterEquation me;
        switch (tier) {
            case model::ModelTier::Full: me = model::build_full(p); break;
            case model::ModelTier::TimeAveraged: me = model::build_time_averaged(p); break;
            default: me = model::build_adiabatic(p); break;
        }
        const HilbertSpace& space = me.space();
        const DensityMatrix rho0 = pure_density(coherent_state(space, "b", alpha));

        Operator parity = parity_operator(space, "b");
        if (tier == model::ModelTier::Full)
            parity = parity * parity_operator(space, "s");

        TierSeries series;
        series.eta.reserve(grid.physical.size());
        double parity0 = 0.0;

        auto on_grid = [&](int idx, double t, const DensityMatrix& rho) {
            DensityMatrix reduced = space.n_modes() > 1 ? partial_trace(rho, {"b"}) : rho;
            if (tier == model::ModelTier::Full)
                reduced = rotate_fock_phase(reduced, "b", d.delta_q_shift * t);
            series.eta.push_back(1.0 - fidelity(reduced, ideal));
            series.p0.push_back(population(reduced, 0));
            series.p1.push_back(population(reduced, 1));
            const double par = expectation(rho, parity).real();
            if (idx == 0) parity0 = par;
            series.parity_drift.push_back(std::abs(par - parity0));
        };

        Trajectory traj = evolve(me, rho0, grid.physical, {}, {}, on_grid);
        series.max_trace_error = traj.max_trace_error;
        series.max_hermiticity_error = traj.max_hermiticity_error;
        series.min_eigenvalue = traj.min_eigenvalue;
        cmp.series[tier] = std::move(series);
    }
    return cmp;
}

TierComparison rabi_experiment(const model::ModelParams& params,
                               const std::vector<model::ModelTier>& tiers, double t_end_k2at,
                               int points) {
    const model::DerivedParams d = model::derive(params);
    if (d.kappa_2at <= 0.0) throw GuardError("rabi_experiment: kappa_2at is not positive");

    TierComparison cmp;
    cmp.derived = d;
    cmp.warnings = d.warnings;
    if (params.Omega_d > 0.3 * d.kappa_2at)
        cmp.warnings.push_back("rabi_experiment: Omega_d > 0.3 kappa_2at, outside the weak-drive regime");

    const GridSpec grid = make_grid(t_end_k2at, d.kappa_2at, points);
    cmp.times = grid.dimensionless;

    for (model::ModelTier tier : tiers) {
        MasterEquation me;
        switch (tier) {
            case model::ModelTier::Full: me = model::build_full(params); break;
            case model::ModelTier::TimeAveraged: me = model::build_time_averaged(params); break;
            case model::ModelTier::Adiabatic: me = model::build_adiabatic(params); break;
            case model::ModelTier::Qubit: me = model::build_qubit(params); break;
        }
        if (tier != model::ModelTier::Qubit) {
            const double base = me.stiffness();
            for (auto& term : model::build_drive(params, tier, me.space()))
                me.add_hamiltonian(term.op, term.profile);
            me.set_stiffness_hint(std::max(base, params.Omega_d * me.space().dim_of("b")));
        }

        const HilbertSpace& space = me.space();
        std::vector<int> vac(static_cast<std::size_t>(space.n_modes()), 0);
        const DensityMatrix rho0 = pure_density(basis_state(space, vac));

        TierSeries series;
        auto on_grid = [&](int, double, const DensityMatrix& rho) {
            const DensityMatrix reduced = space.n_modes() > 1 ? partial_trace(rho, {"b"}) : rho;
            series.p0.push_back(population(reduced, 0));
            series.p1.push_back(population(reduced, 1));
        };

        Trajectory traj = evolve(me, rho0, grid.physical, {}, {}, on_grid);
        series.max_trace_error = traj.max_trace_error;
        series.max_hermiticity_error = traj.max_hermiticity_error;
        series.min_eigenvalue = traj.min_eigenvalue;
        cmp.series[tier] = std::move(series);
    }
    return cmp;
}

RabiFit fit_rabi_decay(const std::vector<double>& times, const std::vector<double>& p1) {
    if (times.size() != p1.size() || times.size() < 5)
        throw ConfigError("fit_rabi_decay: series too short");

    // Local maxima, refined by quadratic interpolation.
    std::vector<double> t_max, m_max;
    for (std::size_t i = 1; i + 1 < p1.size(); ++i) {
        if (!(p1[i] > p1[i - 1] && p1[i] >= p1[i + 1])) continue;
        const double y0 = p1[i - 1], y1 = p1[i], y2 = p1[i + 1];
        const double denom = y0 - 2.0 * y1 + y2;
        double dt_frac = 0.0;
        if (std::abs(denom) > 1e-300) dt_frac = 0.5 * (y0 - y2) / denom;
        dt_frac = std::clamp(dt_frac, -0.5, 0.5);
        const double h = times[i + 1] - times[i];
        t_max.push_back(times[i] + dt_frac * h);
        m_max.push_back(y1 - 0.25 * (y0 - y2) * dt_frac);
    }
    if (t_max.size() < 3) throw GuardError("fit_rabi_decay: fewer than 3 oscillation maxima");

    RabiFit fit;
    fit.n_maxima = static_cast<int>(t_max.size());
    fit.frequency = M_PI * static_cast<double>(t_max.size() - 1) / (t_max.back() - t_max.front());

    // m_k = A exp(-3 gamma t_k / 4) + c with equally spaced t_k: successive
    // differences d_k = m_k - m_{k+1} cancel the unknown baseline, leaving
    // log d_k linear in t_k with slope -3 gamma / 4.
    std::vector<double> td, ld;
    for (std::size_t k = 0; k + 1 < t_max.size(); ++k) {
        const double d = m_max[k] - m_max[k + 1];
        if (d <= 0.0) continue;
        if (!td.empty() && d < 1e-5 * std::exp(ld.front())) break; // noise floor
        td.push_back(t_max[k]);
        ld.push_back(std::log(d));
    }
    if (td.size() < 2) throw GuardError("fit_rabi_decay: envelope differences too noisy to fit");

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < td.size(); ++k) {
        sx += td[k];
        sy += ld[k];
        sxx += td[k] * td[k];
        sxy += td[k] * ld[k];
    }
    const double n = static_cast<double>(td.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    double sse = 0.0;
    for (std::size_t k = 0; k < td.size(); ++k) {
        const double r = ld[k] - (slope * td[k] + intercept);
        sse += r * r;
    }
    fit.residual = sse;
    fit.gamma = -slope * 4.0 / 3.0;
    return fit;
}

} // namespace ensq::effective
