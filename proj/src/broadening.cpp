#include "ensq/broadening.hpp"

#include <cmath>
#include <random>

namespace ensq::broadening {

std::vector<double> sample_detunings(int n, double delta_inh, unsigned long long seed) {
    if (n < 2) throw ConfigError("sample_detunings: need at least 2 atoms");
    if (delta_inh < 0.0) throw ConfigError("sample_detunings: delta_inh must be nonnegative");
    std::vector<double> deltas(static_cast<std::size_t>(n), 0.0);
    if (delta_inh == 0.0) return deltas;

    // Explicit Box-Muller on mt19937_64 so draws are identical across
    // platforms and standard libraries.
    std::mt19937_64 eng(seed);
    auto uniform = [&eng]() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };
    for (int i = 0; i < n; ++i) {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        deltas[static_cast<std::size_t>(i)] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Center to exact zero mean and rescale to exact rms = delta_inh; the
    // mean transition frequency defines omega_q.
    double mean = 0.0;
    for (double d : deltas) mean += d;
    mean /= n;
    double ms = 0.0;
    for (double& d : deltas) {
        d -= mean;
        ms += d * d;
    }
    ms /= n;
    if (ms == 0.0) throw GuardError("sample_detunings: degenerate draw, try another seed");
    const double scale = delta_inh / std::sqrt(ms);
    for (double& d : deltas) d *= scale;
    return deltas;
}

namespace {

HilbertSpace atom_space(int n, int dim_atom) {
    std::vector<std::pair<std::string, int>> specs;
    specs.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) specs.emplace_back("b" + std::to_string(j), dim_atom);
    return make_space(specs);
}

Operator collective_lowering(const HilbertSpace& space) {
    const int n = space.n_modes();
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    Operator s = cplx(norm) * annihilation(space, space.mode(0).label);
    for (int j = 1; j < n; ++j) s += cplx(norm) * annihilation(space, space.mode(j).label);
    return s;
}

} // namespace

MasterEquation build_broadened_me(const model::ModelParams& params,
                                  const std::vector<double>& deltas, bool protected_) {
    const int n = static_cast<int>(deltas.size());
    if (n < 2) throw ConfigError("build_broadened_me: need at least 2 atoms");
    const int dim_atom = params.trunc.dim_atom > 0 ? params.trunc.dim_atom : 2;
    double total = 1.0;
    for (int j = 0; j < n; ++j) {
        total *= dim_atom;
        if (total > 4096.0)
            throw GuardError("build_broadened_me: total dimension exceeds the 4096 budget");
    }

    const model::DerivedParams d = model::derive(params);
    HilbertSpace space = atom_space(n, dim_atom);
    const Operator s = collective_lowering(space);

    MasterEquation me(space);
    double max_abs_delta = 0.0;
    Operator h = cplx(deltas[0]) * number_op(space, space.mode(0).label);
    for (int j = 1; j < n; ++j)
        h += cplx(deltas[static_cast<std::size_t>(j)]) * number_op(space, space.mode(j).label);
    for (double dj : deltas) max_abs_delta = std::max(max_abs_delta, std::abs(dj));
    if (protected_) {
        h += cplx(d.delta_q_shift) * (s.dagger() * s);
    }
    me.add_hamiltonian(std::move(h));
    me.add_collapse(d.kappa_2at, s * s);

    // s^dag^2 s^2 diagonal peaks near 2 for hard-core atoms; keep a margin.
    const double collapse_scale = d.kappa_2at * 2.0;
    me.set_stiffness_hint(std::max({max_abs_delta, protected_ ? d.delta_q_shift : 0.0, collapse_scale}));
    return me;
}

SuperradiantDecomposition superradiant_decomposition(const std::vector<double>& deltas) {
    const int n = static_cast<int>(deltas.size());
    if (n < 2) throw ConfigError("superradiant_decomposition: need at least 2 atoms");
    double ms = 0.0;
    for (double d : deltas) ms += d * d;
    if (ms == 0.0) throw ConfigError("superradiant_decomposition: all detunings vanish, d mode undefined");
    const double rms = std::sqrt(ms / n);

    SuperradiantDecomposition out;
    out.s_vector = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    out.d_vector.resize(n);
    for (int j = 0; j < n; ++j) out.d_vector(j) = deltas[static_cast<std::size_t>(j)] / (std::sqrt(static_cast<double>(n)) * rms);
    // <s|H_inh|d> with H_inh = diag(deltas) in the single-excitation sector.
    double coupling = 0.0;
    for (int j = 0; j < n; ++j) coupling += out.s_vector(j) * deltas[static_cast<std::size_t>(j)] * out.d_vector(j);
    out.coupling = coupling;
    return out;
}

BroadeningRun broadened_coherence(const model::ModelParams& params,
                                  const std::vector<double>& deltas, bool protected_,
                                  const std::vector<double>& t_grid_k2at, double alpha) {
    const int n = static_cast<int>(deltas.size());
    MasterEquation me = build_broadened_me(params, deltas, protected_);
    const model::DerivedParams d = model::derive(params);
    if (d.kappa_2at <= 0.0) throw GuardError("broadened_coherence: kappa_2at is not positive");
    const HilbertSpace& space = me.space();
    const int dim_atom = space.mode(0).dim;

    BroadeningRun run;
    run.deltas = deltas;
    run.protected_ = protected_;
    run.times = t_grid_k2at;
    run.kappa_2at = d.kappa_2at;
    run.delta_q = d.delta_q_shift;
    if (dim_atom == 2 && std::abs(alpha) / std::sqrt(static_cast<double>(n)) > 0.5)
        run.warnings.push_back("broadened_coherence: |alpha|/sqrt(N) > 0.5, hard-core truncation is coarse");

    // Product state over atoms: (|0> + (alpha/sqrt N)|1>)/norm each.
    const cplx amp = alpha / std::sqrt(static_cast<double>(n));
    DenseVector atom = DenseVector::Zero(dim_atom);
    atom(0) = 1.0;
    atom(1) = amp;
    atom.normalize();
    DenseVector psi = DenseVector::Ones(1);
    for (int j = 0; j < n; ++j) {
        DenseVector next(psi.size() * dim_atom);
        for (Eigen::Index i = 0; i < psi.size(); ++i)
            for (int a = 0; a < dim_atom; ++a) next(i * dim_atom + a) = psi(i) * atom(a);
        psi = std::move(next);
    }
    const DensityMatrix rho0 = pure_density(StateVector{space, psi});

    // sigma_- = |vac><1_s|, |1_s> = s^dag |vac>.
    std::vector<Eigen::Triplet<cplx>> trips;
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<int> occ(static_cast<std::size_t>(n), 0);
    const int vac_idx = space.basis_index(occ);
    for (int j = 0; j < n; ++j) {
        occ.assign(static_cast<std::size_t>(n), 0);
        occ[static_cast<std::size_t>(j)] = 1;
        trips.emplace_back(vac_idx, space.basis_index(occ), cplx(norm, 0.0));
    }
    SpMat sm(space.total_dim(), space.total_dim());
    sm.setFromTriplets(trips.begin(), trips.end());
    const Operator sigma_minus(space, std::move(sm));

    std::vector<double> physical(run.times.size());
    for (std::size_t i = 0; i < run.times.size(); ++i) physical[i] = run.times[i] / d.kappa_2at;

    Trajectory traj = evolve(me, rho0, physical, {}, {{"sigma_minus", sigma_minus}});
    run.max_trace_error = traj.max_trace_error;
    run.max_hermiticity_error = traj.max_hermiticity_error;
    run.min_eigenvalue = traj.min_eigenvalue;

    std::vector<double> phase_raw;
    for (const cplx& v : traj.observables.at("sigma_minus")) {
        run.coherence_modulus.push_back(std::abs(v));
        phase_raw.push_back(std::arg(v));
    }
    run.coherence_phase = unwrap_phase(phase_raw);
    return run;
}

std::vector<double> unwrap_phase(const std::vector<double>& wrapped) {
    std::vector<double> out = wrapped;
    double offset = 0.0;
    for (std::size_t i = 1; i < out.size(); ++i) {
        double diff = wrapped[i] - wrapped[i - 1];
        while (diff > M_PI) {
            diff -= 2.0 * M_PI;
            offset -= 2.0 * M_PI;
        }
        while (diff < -M_PI) {
            diff += 2.0 * M_PI;
            offset += 2.0 * M_PI;
        }
        out[i] = wrapped[i] + offset;
    }
    return out;
}

PhaseFit phase_linearity(const BroadeningRun& run) {
    const std::size_t n = run.times.size();
    if (n < 20) throw ConfigError("phase_linearity: need at least 20 time points");
    if (run.coherence_phase.size() != n) throw ConfigError("phase_linearity: series length mismatch");

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = run.times[i], y = run.coherence_phase[i];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    const double nn = static_cast<double>(n);
    const double denom = nn * sxx - sx * sx;
    const double slope_raw = (nn * sxy - sx * sy) / denom; // per kappa_2at*t unit
    const double ss_tot = syy - sy * sy / nn;
    const double intercept = (sy - slope_raw * sx) / nn;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = run.coherence_phase[i] - (slope_raw * run.times[i] + intercept);
        ss_res += r * r;
    }
    PhaseFit fit;
    fit.slope = run.delta_q > 0.0 ? slope_raw * run.kappa_2at / run.delta_q : slope_raw;
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

} // namespace ensq::broadening
