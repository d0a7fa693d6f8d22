#include "ensq/dynamics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "ensq/kernels.hpp"

namespace ensq {

void MasterEquation::add_hamiltonian(Operator op, TimeProfile profile) {
    if (op.space() != space_) throw ConfigError("MasterEquation: Hamiltonian term on wrong space");
    h_terms_.push_back({std::move(op), profile});
}

void MasterEquation::add_hermitian_pair(const Operator& op, TimeProfile profile) {
    add_hamiltonian(op, profile);
    add_hamiltonian(op.dagger(), TimeProfile{std::conj(profile.amplitude), -profile.omega});
}

void MasterEquation::add_collapse(double rate, Operator op) {
    if (op.space() != space_) throw ConfigError("MasterEquation: collapse term on wrong space");
    if (rate < 0.0) throw ConfigError("MasterEquation: negative collapse rate");
    c_terms_.push_back({rate, std::move(op)});
}

double MasterEquation::stiffness() const {
    if (stiffness_hint_ > 0.0) return stiffness_hint_;
    // Fallback: bound the Hamiltonian by the summed max-abs coefficients and
    // each collapse channel by its fastest basis-state decay rate.
    double nu = 0.0;
    double h_scale = 0.0;
    for (const auto& term : h_terms_) {
        h_scale += std::abs(term.profile.amplitude) * term.op.max_abs();
        nu = std::max(nu, std::abs(term.profile.omega));
    }
    nu = std::max(nu, h_scale);
    for (const auto& c : c_terms_) {
        const Operator odo = c.op.dagger() * c.op;
        double max_diag = 0.0;
        const SpMat& m = odo.sparse();
        for (int k = 0; k < m.outerSize(); ++k)
            for (SpMat::InnerIterator it(m, k); it; ++it)
                if (it.row() == k) max_diag = std::max(max_diag, std::abs(it.value()));
        nu = std::max(nu, c.rate * max_diag);
    }
    return nu > 0.0 ? nu : 1.0;
}

void MasterEquation::validate() const {
    for (const auto& term : h_terms_)
        if (term.op.space() != space_) throw ConfigError("MasterEquation: term space mismatch");
    for (const auto& c : c_terms_) {
        if (c.op.space() != space_) throw ConfigError("MasterEquation: collapse space mismatch");
        if (c.rate < 0.0) throw ConfigError("MasterEquation: negative collapse rate");
    }
    // Every oscillating term needs its conjugate partner.
    std::vector<bool> used(h_terms_.size(), false);
    for (std::size_t i = 0; i < h_terms_.size(); ++i) {
        if (h_terms_[i].profile.is_constant()) {
            if (!h_terms_[i].op.is_hermitian(1e-12) ) {
                // A constant non-Hermitian term must be paired too.
                bool found = false;
                for (std::size_t j = 0; j < h_terms_.size(); ++j) {
                    if (j == i || !h_terms_[j].profile.is_constant()) continue;
                    if (max_abs_diff(h_terms_[j].op, h_terms_[i].op.dagger()) < 1e-12 &&
                        std::abs(h_terms_[j].profile.amplitude - std::conj(h_terms_[i].profile.amplitude)) < 1e-12) {
                        found = true;
                        break;
                    }
                }
                if (!found) throw ConfigError("MasterEquation: non-Hermitian constant term without partner");
            }
            continue;
        }
        if (used[i]) continue;
        bool found = false;
        for (std::size_t j = i + 1; j < h_terms_.size(); ++j) {
            if (used[j]) continue;
            if (std::abs(h_terms_[j].profile.omega + h_terms_[i].profile.omega) < 1e-15 &&
                std::abs(h_terms_[j].profile.amplitude - std::conj(h_terms_[i].profile.amplitude)) < 1e-12 &&
                max_abs_diff(h_terms_[j].op, h_terms_[i].op.dagger()) < 1e-12) {
                used[i] = used[j] = true;
                found = true;
                break;
            }
        }
        if (!found) throw ConfigError("MasterEquation: oscillating term without Hermitian partner");
    }
}

namespace {

// Precomputed structure reused across steps. The static part of the
// generator is folded into one sparse matrix
//   l_static = -i H_static - 1/2 sum_k kappa_k o_k^dag o_k,
// so the right-hand side becomes
//   L(rho) = l_static rho + (l_static rho)^dag + sum_k kappa_k o_k rho o_k^dag
// for Hermitian rho. Oscillating Hamiltonian terms stay separate.
struct Workspace {
    SpMat l_static;
    std::vector<const HamiltonianTerm*> dynamic_terms;
    std::vector<SpMat> c_dag;
    DenseMatrix acc;  // l rho accumulator
    DenseMatrix a;    // collapse scratch

    explicit Workspace(const MasterEquation& me) {
        const int d = me.space().total_dim();
        SpMat stat(d, d);
        for (const auto& term : me.h_terms()) {
            if (term.profile.is_constant())
                stat += SpMat(cplx(0.0, -1.0) * term.profile.amplitude * term.op.sparse());
            else
                dynamic_terms.push_back(&term);
        }
        c_dag.reserve(me.c_terms().size());
        for (const auto& c : me.c_terms()) {
            SpMat adj = c.op.sparse().adjoint();
            adj.makeCompressed();
            c_dag.push_back(std::move(adj));
            if (c.rate > 0.0)
                stat += SpMat(cplx(-0.5 * c.rate, 0.0) * SpMat(c_dag.back() * c.op.sparse()));
        }
        stat.prune([](int, int, const cplx& v) { return std::abs(v) > 0.0; });
        stat.makeCompressed();
        l_static = std::move(stat);
        acc.resize(d, d);
        a.resize(d, d);
    }
};

// out = L(rho) at time t for Hermitian rho. May run serially or inside an
// enclosing parallel region: every statement is thread-uniform, and the
// worksharing barriers inside the kernels order the dependent stages.
void apply_liouvillian(const MasterEquation& me, Workspace& ws, const DenseMatrix& rho, double t,
                       DenseMatrix& out) {
    kernel::set_zero(ws.acc);
    kernel::spmm_acc(ws.acc, cplx(1.0, 0.0), ws.l_static, rho);
    for (const HamiltonianTerm* term : ws.dynamic_terms)
        kernel::spmm_acc(ws.acc, cplx(0.0, -1.0) * term->profile.at(t), term->op.sparse(), rho);
    kernel::assign_scaled_adjoint(out, cplx(1.0, 0.0), ws.acc);

    for (std::size_t k = 0; k < me.c_terms().size(); ++k) {
        const auto& c = me.c_terms()[k];
        if (c.rate == 0.0) continue;
        kernel::set_zero(ws.a);
        kernel::spmm_acc(ws.a, cplx(1.0, 0.0), c.op.sparse(), rho); // a = o rho
        kernel::mmsp_acc(out, cplx(c.rate, 0.0), ws.a, ws.c_dag[k]); // out += rate * o rho o^dag
    }
}

void check_finite(const DenseMatrix& m, double t) {
    if (!m.allFinite())
        throw NumericalError("evolve: non-finite density matrix at t=" + std::to_string(t));
}

} // namespace

DenseMatrix liouvillian_apply(const MasterEquation& me, const DensityMatrix& rho, double t) {
    if (rho.space != me.space()) throw ConfigError("liouvillian_apply: space mismatch");
    Workspace ws(me);
    DenseMatrix out(rho.mat.rows(), rho.mat.cols());
    apply_liouvillian(me, ws, rho.mat, t, out);
    kernel::symmetrize_inplace(out);
    return out;
}

namespace {

// Classic RK4 over [t, t+h], with the state re-Hermitized afterwards.
// Thread-uniform; see apply_liouvillian.
void rk4_step(const MasterEquation& me, Workspace& ws, DenseMatrix& rho, double t, double h,
              DenseMatrix& k1, DenseMatrix& k2, DenseMatrix& k3, DenseMatrix& k4, DenseMatrix& stage) {
    apply_liouvillian(me, ws, rho, t, k1);
    kernel::assign_sum(stage, rho, cplx(0.5 * h, 0.0), k1);
    apply_liouvillian(me, ws, stage, t + 0.5 * h, k2);
    kernel::assign_sum(stage, rho, cplx(0.5 * h, 0.0), k2);
    apply_liouvillian(me, ws, stage, t + 0.5 * h, k3);
    kernel::assign_sum(stage, rho, cplx(h, 0.0), k3);
    apply_liouvillian(me, ws, stage, t + h, k4);
    kernel::rk4_combine(rho, h / 6.0, k1, k2, k3, k4);
    kernel::symmetrize_inplace(rho);
}

// Dormand-Prince 5(4) embedded pair.
struct Dopri {
    static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                            a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                            a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                            b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
};

class AdaptiveStepper {
public:
    AdaptiveStepper(const MasterEquation& me, Workspace& ws, double rtol, double atol, int dim)
        : me_(me), ws_(ws), rtol_(rtol), atol_(atol) {
        for (auto* m : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &stage_, &cand_}) m->resize(dim, dim);
        have_k1_ = false;
    }

    // Advances rho from t to exactly t_target.
    void advance(DenseMatrix& rho, double& t, double t_target, double& h) {
        while (t < t_target) {
            const double remaining = t_target - t;
            double step = std::min(h, remaining);
            if (step < 1e-14 * std::max(1.0, std::abs(t)))
                throw NumericalError("evolve: adaptive step size underflow at t=" + std::to_string(t));
            if (!have_k1_) {
                apply_liouvillian(me_, ws_, rho, t, k1_);
                have_k1_ = true;
            }
            stage_ = rho + step * Dopri::a21 * k1_;
            apply_liouvillian(me_, ws_, stage_, t + Dopri::c2 * step, k2_);
            stage_ = rho + step * (Dopri::a31 * k1_ + Dopri::a32 * k2_);
            apply_liouvillian(me_, ws_, stage_, t + Dopri::c3 * step, k3_);
            stage_ = rho + step * (Dopri::a41 * k1_ + Dopri::a42 * k2_ + Dopri::a43 * k3_);
            apply_liouvillian(me_, ws_, stage_, t + Dopri::c4 * step, k4_);
            stage_ = rho + step * (Dopri::a51 * k1_ + Dopri::a52 * k2_ + Dopri::a53 * k3_ + Dopri::a54 * k4_);
            apply_liouvillian(me_, ws_, stage_, t + Dopri::c5 * step, k5_);
            stage_ = rho + step * (Dopri::a61 * k1_ + Dopri::a62 * k2_ + Dopri::a63 * k3_ +
                                   Dopri::a64 * k4_ + Dopri::a65 * k5_);
            apply_liouvillian(me_, ws_, stage_, t + step, k6_);
            cand_ = rho + step * (Dopri::b1 * k1_ + Dopri::b3 * k3_ + Dopri::b4 * k4_ +
                                  Dopri::b5 * k5_ + Dopri::b6 * k6_);
            apply_liouvillian(me_, ws_, cand_, t + step, k7_);

            stage_ = step * (Dopri::e1 * k1_ + Dopri::e3 * k3_ + Dopri::e4 * k4_ + Dopri::e5 * k5_ +
                             Dopri::e6 * k6_ + Dopri::e7 * k7_);
            double err = 0.0;
            for (Eigen::Index i = 0; i < stage_.size(); ++i) {
                const double scale = atol_ + rtol_ * std::max(std::abs(rho.data()[i]), std::abs(cand_.data()[i]));
                err = std::max(err, std::abs(stage_.data()[i]) / scale);
            }
            if (err <= 1.0) {
                rho = cand_;
                t += step;
                k1_ = k7_; // FSAL
                have_k1_ = true;
                const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
                h = step * std::min(5.0, std::max(0.2, grow));
            } else {
                h = step * std::max(0.2, 0.9 * std::pow(err, -0.2));
                have_k1_ = true; // k1 still valid at unchanged t
            }
        }
    }

    void invalidate() { have_k1_ = false; }

private:
    const MasterEquation& me_;
    Workspace& ws_;
    double rtol_, atol_;
    DenseMatrix k1_, k2_, k3_, k4_, k5_, k6_, k7_, stage_, cand_;
    bool have_k1_;
};

} // namespace

Trajectory evolve(const MasterEquation& me, const DensityMatrix& rho0,
                  const std::vector<double>& t_grid, const IntegratorConfig& config,
                  const Observables& observables, const GridCallback& callback) {
    if (rho0.space != me.space()) throw ConfigError("evolve: initial state on wrong space");
    if (t_grid.empty()) throw ConfigError("evolve: empty time grid");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (t_grid[i] <= t_grid[i - 1]) throw ConfigError("evolve: time grid not increasing");
    me.validate();
    for (const auto& [name, op] : observables)
        if (op.space() != me.space()) throw ConfigError("evolve: observable '" + name + "' on wrong space");

    const int d = me.space().total_dim();
    Workspace ws(me);
    DenseMatrix rho = rho0.mat;
    DenseMatrix k1(d, d), k2(d, d), k3(d, d), k4(d, d), stage(d, d);

    const double dt_target = config.dt > 0.0 ? config.dt : config.dt_factor / me.stiffness();

    Trajectory traj;
    traj.times = t_grid;
    for (const auto& [name, op] : observables) traj.observables[name] = {};

    auto record = [&](int idx, double t) {
        check_finite(rho, t);
        DensityMatrix r{me.space(), rho};
        traj.max_trace_error = std::max(traj.max_trace_error, std::abs(r.trace() - cplx(1.0, 0.0)));
        traj.max_hermiticity_error = std::max(traj.max_hermiticity_error, r.hermiticity_error());
        if (config.monitor_positivity)
            traj.min_eigenvalue = std::min(traj.min_eigenvalue, r.min_eigenvalue());
        for (const auto& [name, op] : observables)
            traj.observables[name].push_back(expectation(r, op));
        if (config.record_snapshots) traj.snapshots.push_back(r);
        if (callback) callback(idx, t, r);
    };

    double t = t_grid[0];
    record(0, t);

    if (config.method == IntegratorConfig::Method::RK45) {
        AdaptiveStepper stepper(me, ws, config.rtol, config.atol, d);
        double h = dt_target;
        for (std::size_t gi = 1; gi < t_grid.size(); ++gi) {
            stepper.advance(rho, t, t_grid[gi], h);
            kernel::symmetrize_inplace(rho);
            stepper.invalidate();
            record(static_cast<int>(gi), t);
        }
    } else {
        // One parallel region carries all fixed steps between grid points;
        // every thread executes the step loop, the kernels split the work.
        int team = 1;
#ifdef _OPENMP
        if (d >= 64) team = std::min(kernel::max_threads(), d);
#endif
        for (std::size_t gi = 1; gi < t_grid.size(); ++gi) {
            const double t0 = t;
            const double span = t_grid[gi] - t0;
            const int steps = std::max(1, static_cast<int>(std::ceil(span / dt_target - 1e-12)));
            const double h = span / steps;
#ifdef _OPENMP
#pragma omp parallel num_threads(team) if (team > 1)
#endif
            for (int s = 0; s < steps; ++s)
                rk4_step(me, ws, rho, t0 + s * h, h, k1, k2, k3, k4, stage);
            t = t_grid[gi];
            record(static_cast<int>(gi), t);
        }
    }
    return traj;
}

DensityMatrix steady_state(const MasterEquation& me, const DensityMatrix& rho0, SteadyStateConfig config) {
    if (me.c_terms().empty()) throw ConfigError("steady_state: equation has no collapse term");

    double slowest = 0.0;
    for (const auto& c : me.c_terms())
        if (c.rate > 0.0) slowest = slowest == 0.0 ? c.rate : std::min(slowest, c.rate);
    if (slowest == 0.0) throw ConfigError("steady_state: all collapse rates vanish");

    const double interval = config.check_interval > 0.0 ? config.check_interval : 1.0 / slowest;
    const double max_time = config.max_time > 0.0 ? config.max_time : 400.0 * interval;
    // Transient accuracy is irrelevant here; run the fixed-step integrator
    // close to its stability limit.
    IntegratorConfig icfg = config.integrator;
    if (icfg.dt == 0.0 && icfg.dt_factor == IntegratorConfig{}.dt_factor) icfg.dt_factor = 0.35;
    icfg.monitor_positivity = false;

    icfg.record_snapshots = true;

    DensityMatrix current = rho0;
    double t = 0.0;
    while (t < max_time) {
        Trajectory tr = evolve(me, current, {t, t + interval}, icfg);
        DensityMatrix next = std::move(tr.snapshots.back());
        const double delta = (next.mat - current.mat).cwiseAbs().maxCoeff();
        current = std::move(next);
        t += interval;
        if (delta < config.tol) {
            const double residual = liouvillian_apply(me, current, t).cwiseAbs().maxCoeff();
            if (residual <= 1e-9) return current;
        }
    }
    throw GuardError("steady_state: no convergence within max time");
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.space != sigma.space) throw ConfigError("fidelity: states on different spaces");

    auto sqrt_psd = [](const DenseMatrix& m) {
        Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (m + m.adjoint()));
        Eigen::VectorXd ev = es.eigenvalues();
        if (ev.minCoeff() < -1e-6) throw NumericalError("fidelity: input not PSD within tolerance");
        // zero the noise cluster before the root: sqrt amplifies eigenvalue
        // noise from eps to sqrt(eps) on rank-deficient states
        const double floor = 1e-14 * std::max(0.0, ev.maxCoeff());
        Eigen::VectorXd root = ev;
        for (Eigen::Index i = 0; i < root.size(); ++i)
            root(i) = root(i) > floor ? std::sqrt(root(i)) : 0.0;
        return DenseMatrix(es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint());
    };

    const DenseMatrix sr = sqrt_psd(rho.mat);
    const DenseMatrix inner = sr * sigma.mat * sr;
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (inner + inner.adjoint()));
    if (es.eigenvalues().minCoeff() < -1e-6) throw NumericalError("fidelity: input not PSD within tolerance");
    const double floor = 1e-14 * std::max(0.0, es.eigenvalues().maxCoeff());
    double tr = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) > floor) tr += std::sqrt(es.eigenvalues()(i));
    return std::min(1.0, tr * tr);
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::string>& keep_labels) {
    const HilbertSpace& space = rho.space;
    std::vector<int> keep;
    for (const auto& label : keep_labels) keep.push_back(space.mode_index(label));
    std::sort(keep.begin(), keep.end());
    if (std::adjacent_find(keep.begin(), keep.end()) != keep.end())
        throw ConfigError("partial_trace: repeated label");

    std::vector<Mode> kept_modes;
    std::vector<int> traced;
    for (int i = 0; i < space.n_modes(); ++i) {
        if (std::binary_search(keep.begin(), keep.end(), i))
            kept_modes.push_back(space.mode(i));
        else
            traced.push_back(i);
    }
    if (kept_modes.empty()) throw ConfigError("partial_trace: must keep at least one mode");

    HilbertSpace sub(kept_modes);
    const int dk = sub.total_dim();
    int dt = 1;
    for (int i : traced) dt *= space.mode(i).dim;

    // Decompose a sub-space index / traced index pair into a full index.
    auto full_index = [&](int keep_idx, int traced_idx) {
        std::vector<int> occ(static_cast<std::size_t>(space.n_modes()), 0);
        int k = keep_idx;
        for (int i = static_cast<int>(keep.size()) - 1; i >= 0; --i) {
            const int d = space.mode(keep[static_cast<std::size_t>(i)]).dim;
            occ[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])] = k % d;
            k /= d;
        }
        int tr = traced_idx;
        for (int i = static_cast<int>(traced.size()) - 1; i >= 0; --i) {
            const int d = space.mode(traced[static_cast<std::size_t>(i)]).dim;
            occ[static_cast<std::size_t>(traced[static_cast<std::size_t>(i)])] = tr % d;
            tr /= d;
        }
        return space.basis_index(occ);
    };

    DenseMatrix out = DenseMatrix::Zero(dk, dk);
    for (int i = 0; i < dk; ++i)
        for (int j = 0; j < dk; ++j) {
            cplx sum(0.0, 0.0);
            for (int m = 0; m < dt; ++m) sum += rho.mat(full_index(i, m), full_index(j, m));
            out(i, j) = sum;
        }
    return DensityMatrix{sub, std::move(out)};
}

DensityMatrix rotate_fock_phase(const DensityMatrix& rho, const std::string& label, double theta) {
    const HilbertSpace& space = rho.space;
    const int mi = space.mode_index(label);
    const int d = space.mode(mi).dim;
    const int inner = space.stride(mi);
    const int total = space.total_dim();

    // Phase exp(-i theta n) per basis state on the labelled mode.
    Eigen::VectorXcd phase(total);
    for (int idx = 0; idx < total; ++idx) {
        const int n = (idx / inner) % d;
        phase(idx) = std::exp(cplx(0.0, -theta * n));
    }
    DenseMatrix out = phase.asDiagonal() * rho.mat * phase.conjugate().asDiagonal();
    return DensityMatrix{space, std::move(out)};
}

double population(const DensityMatrix& rho, int n) {
    if (rho.space.n_modes() != 1) throw ConfigError("population: state is not single-mode");
    if (n < 0 || n >= rho.space.total_dim()) throw ConfigError("population: index out of range");
    return rho.mat(n, n).real();
}

} // namespace ensq
