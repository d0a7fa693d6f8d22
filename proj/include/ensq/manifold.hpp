// manifold.hpp — conserved quantities of the two-excitation decay and the
// stationary-manifold coefficients they fix.
//
// Under dr/dt = kappa L(s^2) r the projector onto even Fock states Pi00 and
// the pairing operator Pi01 = sum_n w_n |2n><2n+1| with
// w_n = sqrt(2n+1) (2n-1)!!/(2n)!! are constants of motion; their initial
// expectation values give the population and coherence of the stationary
// 2x2 block on span{|0>, |1>}.

#pragma once

#include "ensq/dynamics.hpp"

namespace ensq::manifold {

struct SteadyCoeffs {
    double c00{1.0};
    double c11{0.0};
    cplx c01{0.0, 0.0};

    cplx c10() const { return std::conj(c01); }
    // The 2x2 block must be PSD: |c01|^2 <= c00 c11 within tolerance.
    bool is_physical(double tol = 1e-8) const;
    // Stationary state on a dim-sized mode: the 2x2 block, zero elsewhere.
    DensityMatrix to_density(int dim, const std::string& label = "b") const;
};

Operator pi00(int dim);
Operator pi01(int dim);

// Max drift of <op> across a battery of seeded random initial states evolved
// under `me` (intended for the two-excitation-decay equation).
double conserved_check(const MasterEquation& me, const Operator& op, int n_states = 8,
                       double t_end_rate_units = 20.0, unsigned long long seed = 12345);

SteadyCoeffs steady_coeffs(const DensityMatrix& rho0);

// Closed form for a coherent initial state:
// c00 = (1 + e^{-2|a|^2})/2, c01 = conj(a) e^{-|a|^2} I0(|a|^2).
SteadyCoeffs coherent_coeffs(cplx alpha);

// Modified Bessel function of the first kind, order zero. Power series for
// x <= 15, asymptotic expansion beyond; relative error <= 1e-10 on [0, 50].
double bessel_i0(double x);

// Seeded full-rank random density matrix (Ginibre construction).
DensityMatrix random_density(const HilbertSpace& space, unsigned long long seed);

} // namespace ensq::manifold
