// spectrum.hpp — eigenstructure scans of the lab-frame Hamiltonian and
// avoided-crossing extraction.

#pragma once

#include <optional>

#include "ensq/model.hpp"

namespace ensq::spectrum {

struct SpectrumScan {
    std::vector<double> omega_p_values; // units of omega_q
    Eigen::MatrixXd levels;             // [point x level], ascending per row,
                                        // relative to the instantaneous ground level
    model::ModelParams params;
    int k{0};
};

// k smallest eigenvalues of a Hermitian operator, ascending.
std::vector<double> eigenenergies(const Operator& h, int k);

// Lab-frame Hamiltonian omega_s n_s + omega_p n_p + omega_q n_b + couplings
// on the scan truncations (default dims 2, 4, 4).
Operator build_lab_hamiltonian(const model::ModelParams& params, double omega_p,
                               const HilbertSpace& space);
HilbertSpace scan_space(const model::ModelParams& params);

SpectrumScan scan_pump_frequency(const model::ModelParams& params, double wp_min, double wp_max,
                                 int points, int k);

struct AvoidedCrossing {
    double omega_p_star{0.0};
    double gap{0.0};
    int lower_level{0}; // index of the lower level of the pair
    // Squared overlap with the bare states |1_p 0_s>|0> and |0_p 0_s>|2>,
    // worst case over the two eigenvectors at the minimum (~1/2 when fully
    // hybridized, ~0 when not).
    double overlap_pump{0.0};
    double overlap_pair{0.0};
};

// Minimum separation of an adjacent level pair, refined by golden-section
// search on the continuous omega_p axis. Picks the pair automatically when
// none is given.
AvoidedCrossing avoided_crossing(const SpectrumScan& scan,
                                 std::optional<std::pair<int, int>> level_pair = std::nullopt);

} // namespace ensq::spectrum
