// effective.hpp — tier-reduction machinery and the tier-comparison
// experiments: pump-mode adiabatic elimination, non-Hermitian
// effective-operator reduction, manifold stabilization and Rabi runs.

#pragma once

#include <map>

#include "ensq/manifold.hpp"
#include "ensq/model.hpp"

namespace ensq::effective {

struct PumpEliminationResult {
    MasterEquation adiabatic;
    double chi{0.0};
    double kappa_p{0.0};
    double kappa_2at{0.0};
    // Largest <n_p> reached while relaxing a probe state under the input
    // equation; must stay well below 1 for the reduction to be trusted.
    double max_pump_population{0.0};
    std::vector<std::string> warnings;
};

// Reduces the pump x ensemble equation H = chi(a_p s^dag^2 + h.c.) with pump
// loss kappa_p to the ensemble-only equation with collapse
// (kappa_2at = 4 chi^2 / kappa_p, s^2). Requires kappa_p >= 3 chi, warns
// below 5 chi. A nonpositive probe time skips the validity probe.
PumpEliminationResult eliminate_pump(const MasterEquation& me_time_averaged,
                                     double probe_time_rate_units = 5.0);

struct EffectiveReduction {
    Operator h_eff;
    std::vector<CollapseTerm> lindblad_ops;
};

// Second-order reduction of a ground subspace coupled to a decaying excited
// subspace: h_eff = -1/2 v^dag [h_nh^{-1} + (h_nh^{-1})^dag] v plus the
// passed-through ground Hamiltonian; each collapse (kappa, o) maps to
// (kappa, o h_nh^{-1} v). `ground_projector` must be a diagonal 0/1
// projector; `v` must map ground into excited.
EffectiveReduction effective_operator_reduction(const Operator& h_nh, const Operator& v,
                                                const Operator& ground_projector,
                                                const std::vector<CollapseTerm>& collapses,
                                                const Operator* ground_hamiltonian = nullptr);

struct TierSeries {
    std::vector<double> eta;        // 1 - fidelity to the ideal stationary state
    std::vector<double> p0, p1;     // |0>, |1> populations of the ensemble mode
    std::vector<double> parity_drift;
    double max_trace_error{0.0};
    double max_hermiticity_error{0.0};
    double min_eigenvalue{1.0};
};

struct TierComparison {
    std::vector<double> times;      // dimensionless (chi t or kappa_2at t)
    std::map<model::ModelTier, TierSeries> series;
    model::DerivedParams derived;
    std::vector<std::string> warnings;
};

// Relaxation of a coherent state onto the stationary 2x2 manifold; times in
// units of 1/chi. Full-tier states are reduced to the ensemble mode and
// dephased back by delta_q t before comparison.
TierComparison stabilization_experiment(const model::ModelParams& params, double alpha,
                                        const std::vector<model::ModelTier>& tiers,
                                        double t_end_chi, int points = 201);

// Driven Rabi oscillations between |0> and |1>; times in units of
// 1/kappa_2at. Warns when Omega_d > 0.3 kappa_2at.
TierComparison rabi_experiment(const model::ModelParams& params,
                               const std::vector<model::ModelTier>& tiers, double t_end_k2at,
                               int points = 401);

struct RabiFit {
    double gamma{0.0};     // decay rate inferred from the envelope of P1 maxima
    double frequency{0.0}; // angular frequency of the P1 oscillation
    int n_maxima{0};
    double residual{0.0};
};

// Fits the local maxima of P1 to A exp(-3 gamma t / 4) + c (the resonant
// drive damps the oscillating Bloch components at 3 gamma / 4).
RabiFit fit_rabi_decay(const std::vector<double>& times, const std::vector<double>& p1);

} // namespace ensq::effective
