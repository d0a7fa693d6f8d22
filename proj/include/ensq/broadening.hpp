// broadening.hpp — N-atom disorder model: per-atom frequency scatter, the
// superradiant/subradiant decomposition, and the protected/unprotected
// coherence runs.

#pragma once

#include "ensq/model.hpp"

namespace ensq::broadening {

// n Gaussian draws centered to exact zero mean and rescaled to exact
// root-mean-square delta_inh. Deterministic for a fixed seed.
std::vector<double> sample_detunings(int n, double delta_inh, unsigned long long seed);

// Space of n per-atom bosonic modes (dim `params.trunc.dim_atom` each);
// H = sum_j delta_j n_j (+ delta_q s^dag s when protected), collapse
// (kappa_2at, s^2) with s = (1/sqrt N) sum_j b_j.
MasterEquation build_broadened_me(const model::ModelParams& params,
                                  const std::vector<double>& deltas, bool protected_);

struct SuperradiantDecomposition {
    Eigen::VectorXd s_vector; // (1,...,1)/sqrt(N)
    Eigen::VectorXd d_vector; // deltas normalized
    double coupling{0.0};     // <s|H_inh|d> = delta_inh for centered, rescaled deltas
};

SuperradiantDecomposition superradiant_decomposition(const std::vector<double>& deltas);

struct BroadeningRun {
    std::vector<double> deltas;
    unsigned long long seed{0};
    bool protected_{false};
    std::vector<double> times;             // kappa_2at * t
    std::vector<double> coherence_modulus; // |<sigma_->|
    std::vector<double> coherence_phase;   // unwrapped radians
    double kappa_2at{0.0};
    double delta_q{0.0};
    double max_trace_error{0.0};
    double max_hermiticity_error{0.0};
    double min_eigenvalue{1.0};
    std::vector<std::string> warnings;
};

// Initial state: product over atoms of (|0> + (alpha/sqrt N)|1>), normalized.
// Records <sigma_-> with sigma_- = |vac><1_s|. Times are given in units of
// 1/kappa_2at.
BroadeningRun broadened_coherence(const model::ModelParams& params,
                                  const std::vector<double>& deltas, bool protected_,
                                  const std::vector<double>& t_grid_k2at, double alpha);

struct PhaseFit {
    double slope{0.0}; // in units of delta_q
    double r_squared{0.0};
};

// Least-squares line through the unwrapped phase; needs >= 20 points.
PhaseFit phase_linearity(const BroadeningRun& run);

std::vector<double> unwrap_phase(const std::vector<double>& wrapped);

} // namespace ensq::broadening
