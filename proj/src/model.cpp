#include "ensq/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace ensq::model {

std::string tier_name(ModelTier tier) {
    switch (tier) {
        case ModelTier::Full: return "full";
        case ModelTier::TimeAveraged: return "timeaveraged";
        case ModelTier::Adiabatic: return "adiabatic";
        case ModelTier::Qubit: return "qubit";
    }
    return "?";
}

ModelTier tier_from_name(const std::string& name) {
    std::string s;
    for (char c : name)
        if (c != '-' && c != '_') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (s == "full") return ModelTier::Full;
    if (s == "timeaveraged") return ModelTier::TimeAveraged;
    if (s == "adiabatic") return ModelTier::Adiabatic;
    if (s == "qubit") return ModelTier::Qubit;
    throw ConfigError("unknown model tier '" + name + "'");
}

DerivedParams derive(const ModelParams& p) {
    if (p.Delta_q <= 0.0) throw ConfigError("derive: Delta_q must be positive");
    if (p.g_col < 0.0 || p.J < 0.0) throw ConfigError("derive: couplings must be nonnegative");
    if (p.kappa_p && *p.kappa_p < 0.0) throw ConfigError("derive: kappa_p must be nonnegative");
    if (p.kappa_s && *p.kappa_s < 0.0) throw ConfigError("derive: kappa_s must be nonnegative");
    if (p.Omega_d < 0.0) throw ConfigError("derive: Omega_d must be nonnegative");

    DerivedParams d;
    d.chi = p.g_col * p.g_col * p.J / (p.Delta_q * p.Delta_q);
    d.delta_q_shift = p.g_col * p.g_col / p.Delta_q;

    // delta solves delta = 2J^2/(2 Delta_q - delta) - 2 g^2/Delta_q, i.e. the
    // small root of delta^2 - (2 Delta_q - c) delta + (2J^2 - 2 c Delta_q) = 0
    // with c = 2 g^2/Delta_q. Solving exactly keeps both identities
    // Delta_p = 2 Delta_q - delta and delta = 2J^2/Delta_p - c to roundoff.
    const double c = 2.0 * p.g_col * p.g_col / p.Delta_q;
    const double b = 2.0 * p.Delta_q - c;
    const double q = 2.0 * p.J * p.J - 2.0 * c * p.Delta_q;
    const double disc = b * b - 4.0 * q;
    if (disc <= 0.0 || b <= 0.0)
        throw GuardError("derive: no valid shift-compensating detuning (couplings too strong)");
    d.delta = 2.0 * q / (b + std::sqrt(disc));
    d.Delta_p = 2.0 * p.Delta_q - d.delta;
    if (d.Delta_p <= 0.0) throw GuardError("derive: nonpositive pump detuning after solution");

    d.omega_s = p.omega_q + p.Delta_q;
    d.omega_p = 2.0 * p.omega_q + d.delta;
    d.omega_d = p.omega_q + d.delta_q_shift;

    d.kappa_p = p.kappa_p.value_or(5.0 * d.chi);
    d.kappa_p_defaulted = !p.kappa_p.has_value();
    d.kappa_s = p.kappa_s.value_or(0.3 * d.kappa_p);
    d.kappa_s_defaulted = !p.kappa_s.has_value();
    d.kappa_2at = d.kappa_p > 0.0 ? 4.0 * d.chi * d.chi / d.kappa_p : 0.0;
    d.gamma = d.kappa_2at > 0.0 ? 4.0 * p.Omega_d * p.Omega_d / d.kappa_2at : 0.0;
    d.delta_inh = p.delta_inh.value_or(0.1 * d.delta_q_shift);

    if (p.g_col > 0.1 * p.Delta_q)
        d.warnings.push_back("g_col/Delta_q > 0.1: outside the largely-detuned regime");
    if (p.J > 0.1 * d.Delta_p)
        d.warnings.push_back("J/Delta_p > 0.1: outside the largely-detuned regime");
    if (d.kappa_p <= 0.0)
        d.warnings.push_back("kappa_p <= 0: two-excitation decay rate undefined");
    return d;
}

int coherent_dim_for(double alpha) {
    const double a = std::abs(alpha);
    return std::max(12, static_cast<int>(std::ceil(a * a + 5.0 * a + 6.0)));
}

Truncations resolve_truncations(const ModelParams& params, double max_alpha) {
    Truncations tr = params.trunc;
    if (tr.dim_p <= 0) tr.dim_p = 3;
    if (tr.dim_s <= 0) tr.dim_s = 4;
    if (tr.dim_b <= 0) tr.dim_b = coherent_dim_for(max_alpha);
    if (tr.dim_atom <= 0) tr.dim_atom = 2;
    return tr;
}

MasterEquation build_full(const ModelParams& params) {
    const DerivedParams d = derive(params);
    const Truncations tr = resolve_truncations(params, 1.0);
    HilbertSpace space = make_space({{"p", tr.dim_p}, {"s", tr.dim_s}, {"b", tr.dim_b}});

    const Operator a_p = annihilation(space, "p");
    const Operator a_s = annihilation(space, "s");
    const Operator s = annihilation(space, "b");
    const Operator n_s = number_op(space, "s");
    const Operator n_p = number_op(space, "p");

    const Operator exchange = a_s.dagger() * s; // a_s^dag s
    const Operator pair = a_p * a_s.dagger() * a_s.dagger(); // a_p a_s^dag^2
    Operator h = cplx(params.Delta_q) * n_s + cplx(d.delta) * n_p +
                 cplx(params.g_col) * (exchange + exchange.dagger()) +
                 cplx(params.J) * (pair + pair.dagger());

    MasterEquation me(space);
    me.add_hamiltonian(std::move(h));
    me.add_collapse(d.kappa_p, a_p);
    me.add_collapse(d.kappa_s, a_s);
    me.set_stiffness_hint(std::max({params.Delta_q, std::abs(d.delta), params.g_col, params.J,
                                    d.kappa_p, d.kappa_s}));
    return me;
}

MasterEquation build_time_averaged(const ModelParams& params) {
    const DerivedParams d = derive(params);
    const Truncations tr = resolve_truncations(params, 1.0);
    HilbertSpace space = make_space({{"p", tr.dim_p}, {"b", tr.dim_b}});

    const Operator a_p = annihilation(space, "p");
    const Operator s = annihilation(space, "b");
    const Operator pair = a_p * s.dagger() * s.dagger();
    Operator h = cplx(d.chi) * (pair + pair.dagger());

    MasterEquation me(space);
    me.add_hamiltonian(std::move(h));
    me.add_collapse(d.kappa_p, a_p);
    me.set_stiffness_hint(std::max(d.chi * tr.dim_b, d.kappa_p * tr.dim_p));
    return me;
}

MasterEquation build_adiabatic(const ModelParams& params) {
    const DerivedParams d = derive(params);
    const Truncations tr = resolve_truncations(params, 1.0);
    HilbertSpace space = make_space({{"b", tr.dim_b}});

    const Operator s = annihilation(space, "b");
    MasterEquation me(space);
    me.add_collapse(d.kappa_2at, s * s);
    const double fastest = static_cast<double>((tr.dim_b - 1) * (tr.dim_b - 2));
    me.set_stiffness_hint(d.kappa_2at * std::max(1.0, fastest));
    return me;
}

MasterEquation build_qubit(const ModelParams& params) {
    const DerivedParams d = derive(params);
    HilbertSpace space = make_space({{"q", 2}});

    const Operator lower = transition_op(space, "q", 0, 1);
    const cplx phase = std::exp(cplx(0.0, -params.theta_d));
    Operator h = params.Omega_d * phase * lower + params.Omega_d * std::conj(phase) * lower.dagger();

    MasterEquation me(space);
    me.add_hamiltonian(std::move(h));
    me.add_collapse(d.gamma, lower);
    me.set_stiffness_hint(std::max({d.gamma, params.Omega_d, d.kappa_2at}));
    return me;
}

std::vector<HamiltonianTerm> build_drive(const ModelParams& params, ModelTier frame,
                                         const HilbertSpace& space) {
    const std::string label = frame == ModelTier::Qubit ? "q" : "b";
    const Operator lower = frame == ModelTier::Qubit ? transition_op(space, "q", 0, 1)
                                                     : annihilation(space, label);
    const cplx amp_lower = params.Omega_d * std::exp(cplx(0.0, -params.theta_d));

    if (frame == ModelTier::Full) {
        const DerivedParams d = derive(params);
        // Drive at omega_q + delta_q seen from the omega_q rotating frame.
        return {HamiltonianTerm{lower, TimeProfile{amp_lower, +d.delta_q_shift}},
                HamiltonianTerm{lower.dagger(), TimeProfile{std::conj(amp_lower), -d.delta_q_shift}}};
    }
    Operator h = amp_lower * lower + std::conj(amp_lower) * lower.dagger();
    return {HamiltonianTerm{std::move(h), TimeProfile{}}};
}

SecondOrderShifts second_order_shifts(const ModelParams& params) {
    const DerivedParams d = derive(params);
    return {-params.g_col * params.g_col / params.Delta_q, -2.0 * params.J * params.J / d.Delta_p};
}

} // namespace ensq::model
