// dynamics.hpp — Lindblad master equation, integrators, state metrics.
//
// drho/dt = -i[H(t), rho] + sum_k kappa_k L(o_k) rho,
// L(o) rho = (2 o rho o^dag - o^dag o rho - rho o^dag o) / 2.
//
// H(t) = sum_m f_m(t) T_m with f_m(t) = amplitude * exp(i omega t); every
// non-constant term must appear together with its Hermitian-conjugate
// partner so H(t) is Hermitian at all times.

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ensq/hilbert.hpp"

namespace ensq {

struct TimeProfile {
    cplx amplitude{1.0, 0.0};
    double omega{0.0};

    bool is_constant() const { return omega == 0.0; }
    cplx at(double t) const {
        if (omega == 0.0) return amplitude;
        return amplitude * std::exp(cplx(0.0, omega * t));
    }
};

struct HamiltonianTerm {
    Operator op;
    TimeProfile profile;
};

struct CollapseTerm {
    double rate{0.0};
    Operator op;
};

class MasterEquation {
public:
    MasterEquation() = default;
    explicit MasterEquation(HilbertSpace space) : space_(std::move(space)) {}

    const HilbertSpace& space() const { return space_; }
    const std::vector<HamiltonianTerm>& h_terms() const { return h_terms_; }
    const std::vector<CollapseTerm>& c_terms() const { return c_terms_; }

    void add_hamiltonian(Operator op, TimeProfile profile = {});
    // Adds op*f + op^dag*conj(f): a Hermitian pair in one call.
    void add_hermitian_pair(const Operator& op, TimeProfile profile);
    void add_collapse(double rate, Operator op);

    // Scale used for the default integrator step; builders set this to the
    // fastest coefficient (including collapse-operator norm scaling).
    void set_stiffness_hint(double nu) { stiffness_hint_ = nu; }
    double stiffness() const;

    // Shared space, rates >= 0, conjugate-partner pairing of oscillating terms.
    void validate() const;

private:
    HilbertSpace space_;
    std::vector<HamiltonianTerm> h_terms_;
    std::vector<CollapseTerm> c_terms_;
    double stiffness_hint_{0.0};
};

struct IntegratorConfig {
    enum class Method { RK4, RK45 };
    Method method{Method::RK4};
    double dt{0.0};           // 0 = dt_factor / stiffness
    double dt_factor{0.02};
    double rtol{1e-8};        // RK45 only
    double atol{1e-10};       // RK45 only
    bool record_snapshots{false};
    bool monitor_positivity{true};
};

struct Trajectory {
    std::vector<double> times;
    std::map<std::string, std::vector<cplx>> observables;
    std::vector<DensityMatrix> snapshots; // empty unless requested

    double max_trace_error{0.0};
    double max_hermiticity_error{0.0};
    double min_eigenvalue{1.0}; // smallest eigenvalue seen at recorded points
};

// Right-hand side at time t. The result is Hermitian and traceless up to
// roundoff.
DenseMatrix liouvillian_apply(const MasterEquation& me, const DensityMatrix& rho, double t);

using Observables = std::vector<std::pair<std::string, Operator>>;
using GridCallback = std::function<void(int /*grid index*/, double /*t*/, const DensityMatrix&)>;

Trajectory evolve(const MasterEquation& me, const DensityMatrix& rho0,
                  const std::vector<double>& t_grid, const IntegratorConfig& config = {},
                  const Observables& observables = {}, const GridCallback& callback = nullptr);

struct SteadyStateConfig {
    double check_interval{0.0};  // 0 = auto from slowest collapse rate
    double max_time{0.0};        // 0 = auto (400 check intervals)
    double tol{1e-10};           // max-norm change per interval
    IntegratorConfig integrator{};
};

// Relaxes rho0 under the equation until the state stops changing. The
// reachable steady state depends on rho0 whenever the equation has a
// decoherence-free manifold.
DensityMatrix steady_state(const MasterEquation& me, const DensityMatrix& rho0,
                           SteadyStateConfig config = {});

// Uhlmann fidelity (squared convention): F = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::string>& keep_labels);

// rho -> V rho V^dag with V = exp(-i theta n) on `label`; element (m,n) picks
// up exp(i theta (n - m)).
DensityMatrix rotate_fock_phase(const DensityMatrix& rho, const std::string& label, double theta);

// <n|rho|n> for a single-mode state.
double population(const DensityMatrix& rho, int n);

} // namespace ensq
