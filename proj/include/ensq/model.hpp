// model.hpp — physical parameters, derived quantities and tier builders.
//
// Everything is expressed in units of the atomic transition frequency
// (omega_q = 1). The four tiers:
//   Full         pump x signal x ensemble, rotating frame at
//                omega_q (n_s + n_b) + 2 omega_q n_p
//   TimeAveraged pump x ensemble, H = chi (a_p s^dag^2 + h.c.), pump loss
//   Adiabatic    ensemble only, two-excitation collapse at kappa_2at
//   Qubit        driven two-level system with drive-induced decay gamma

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ensq/dynamics.hpp"

namespace ensq::model {

struct Truncations {
    int dim_p{0}; // 0 = resolve to context default
    int dim_s{0};
    int dim_b{0};
    int dim_atom{2}; // per-atom truncation for the N-mode model
};

struct ModelParams {
    double omega_q{1.0};
    double g_col{0.03};
    double J{0.09};       // 3 g_col
    double Delta_q{0.6};  // 20 g_col
    std::optional<double> kappa_p{}; // default 5 chi
    std::optional<double> kappa_s{}; // default 0.3 kappa_p
    double Omega_d{0.0};
    double theta_d{0.0};
    int n_atoms{6};
    std::optional<double> delta_inh{}; // default 0.1 delta_q
    Truncations trunc{};
};

struct DerivedParams {
    double chi{0.0};
    double kappa_2at{0.0};
    double delta_q_shift{0.0}; // g^2 / Delta_q
    double delta{0.0};         // omega_p - 2 omega_q, shift-compensating detuning
    double Delta_p{0.0};       // 2 omega_s - omega_p
    double gamma{0.0};         // 4 Omega_d^2 / kappa_2at
    double omega_d{0.0};       // omega_q + delta_q
    double omega_s{0.0};
    double omega_p{0.0};
    double kappa_p{0.0};       // resolved value
    double kappa_s{0.0};
    double delta_inh{0.0};
    bool kappa_p_defaulted{false};
    bool kappa_s_defaulted{false};
    std::vector<std::string> warnings;
};

enum class ModelTier { Full, TimeAveraged, Adiabatic, Qubit };

std::string tier_name(ModelTier tier);
ModelTier tier_from_name(const std::string& name);

DerivedParams derive(const ModelParams& params);

// Truncations with context defaults applied; dim_b grows with the largest
// coherent amplitude used in a run so the truncated Poisson tail stays
// below 1e-6.
Truncations resolve_truncations(const ModelParams& params, double max_alpha);
int coherent_dim_for(double alpha);

MasterEquation build_full(const ModelParams& params);
MasterEquation build_time_averaged(const ModelParams& params);
MasterEquation build_adiabatic(const ModelParams& params);
MasterEquation build_qubit(const ModelParams& params);

// Drive terms for the given frame. TimeAveraged/Adiabatic/Qubit frames get
// the static Omega_d (e^{-i theta} s + e^{i theta} s^dag); the Full frame
// carries profile e^{+i delta_q t} on the lowering part and the conjugate
// on the raising part.
std::vector<HamiltonianTerm> build_drive(const ModelParams& params, ModelTier frame,
                                         const HilbertSpace& space);

struct SecondOrderShifts {
    double lamb_shift_ensemble{0.0}; // -g^2/Delta_q per ensemble excitation
    double pump_shift{0.0};          // -2J^2/Delta_p per pump photon
};

SecondOrderShifts second_order_shifts(const ModelParams& params);

} // namespace ensq::model
