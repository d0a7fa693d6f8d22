#include "ensq/spectrum.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ensq::spectrum {

std::vector<double> eigenenergies(const Operator& h, int k) {
    if (k < 1 || k > h.dim()) throw ConfigError("eigenenergies: k out of range for dimension");
    if (!h.is_hermitian(1e-10)) throw ConfigError("eigenenergies: operator is not Hermitian");
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h.dense(), Eigen::EigenvaluesOnly);
    std::vector<double> out(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    return out;
}

HilbertSpace scan_space(const model::ModelParams& params) {
    model::Truncations tr = params.trunc;
    if (tr.dim_p <= 0) tr.dim_p = 2;
    if (tr.dim_s <= 0) tr.dim_s = 4;
    if (tr.dim_b <= 0) tr.dim_b = 4;
    return make_space({{"p", tr.dim_p}, {"s", tr.dim_s}, {"b", tr.dim_b}});
}

Operator build_lab_hamiltonian(const model::ModelParams& params, double omega_p,
                               const HilbertSpace& space) {
    const double omega_s = params.omega_q + params.Delta_q;
    const Operator a_p = annihilation(space, "p");
    const Operator a_s = annihilation(space, "s");
    const Operator s = annihilation(space, "b");
    const Operator exchange = a_s.dagger() * s;
    const Operator pair = a_p * a_s.dagger() * a_s.dagger();
    return cplx(omega_s) * number_op(space, "s") + cplx(omega_p) * number_op(space, "p") +
           cplx(params.omega_q) * number_op(space, "b") +
           cplx(params.g_col) * (exchange + exchange.dagger()) +
           cplx(params.J) * (pair + pair.dagger());
}

SpectrumScan scan_pump_frequency(const model::ModelParams& params, double wp_min, double wp_max,
                                 int points, int k) {
    if (wp_min >= wp_max) throw ConfigError("scan_pump_frequency: wp_min must be < wp_max");
    if (points < 2) throw ConfigError("scan_pump_frequency: need at least 2 points");
    if (k < 4) throw ConfigError("scan_pump_frequency: need at least 4 levels");
    HilbertSpace space = scan_space(params);
    if (k > space.total_dim()) throw GuardError("scan_pump_frequency: k exceeds truncated dimension");

    SpectrumScan scan;
    scan.params = params;
    scan.k = k;
    scan.omega_p_values.resize(static_cast<std::size_t>(points));
    scan.levels.resize(points, k);
    for (int i = 0; i < points; ++i)
        scan.omega_p_values[static_cast<std::size_t>(i)] =
            wp_min + (wp_max - wp_min) * i / (points - 1);

#pragma omp parallel for schedule(static)
    for (int i = 0; i < points; ++i) {
        const Operator h = build_lab_hamiltonian(params, scan.omega_p_values[static_cast<std::size_t>(i)], space);
        Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h.dense(), Eigen::EigenvaluesOnly);
        for (int l = 0; l < k; ++l) scan.levels(i, l) = es.eigenvalues()(l) - es.eigenvalues()(0);
    }
    return scan;
}

namespace {

double pair_gap_at(const model::ModelParams& params, const HilbertSpace& space, double omega_p,
                   int lower) {
    const Operator h = build_lab_hamiltonian(params, omega_p, space);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h.dense(), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(lower + 1) - es.eigenvalues()(lower);
}

} // namespace

AvoidedCrossing avoided_crossing(const SpectrumScan& scan, std::optional<std::pair<int, int>> level_pair) {
    const int points = static_cast<int>(scan.omega_p_values.size());
    const int k = scan.k;
    if (points < 3) throw ConfigError("avoided_crossing: scan too short");

    int lower = -1;
    int min_idx = -1;
    double min_gap = 0.0;
    if (level_pair) {
        lower = level_pair->first;
        if (level_pair->second != lower + 1 || lower < 0 || lower + 1 >= k)
            throw ConfigError("avoided_crossing: level pair must be adjacent indices inside the scan");
        for (int i = 1; i + 1 < points; ++i) {
            const double g = scan.levels(i, lower + 1) - scan.levels(i, lower);
            if (min_idx < 0 || g < min_gap) {
                min_gap = g;
                min_idx = i;
            }
        }
        // require an interior local minimum: gap grows toward both ends
        const double g_lo = scan.levels(0, lower + 1) - scan.levels(0, lower);
        const double g_hi = scan.levels(points - 1, lower + 1) - scan.levels(points - 1, lower);
        if (!(min_gap < g_lo && min_gap < g_hi))
            throw GuardError("avoided_crossing: no local gap minimum inside the scan window");
    } else {
        // pick the adjacent pair with the most pronounced interior minimum
        double best_contrast = 0.0;
        for (int l = 0; l + 1 < k; ++l) {
            int idx = -1;
            double g_min = 0.0;
            for (int i = 1; i + 1 < points; ++i) {
                const double g = scan.levels(i, l + 1) - scan.levels(i, l);
                if (idx < 0 || g < g_min) {
                    g_min = g;
                    idx = i;
                }
            }
            const double g_lo = scan.levels(0, l + 1) - scan.levels(0, l);
            const double g_hi = scan.levels(points - 1, l + 1) - scan.levels(points - 1, l);
            const double contrast = std::min(g_lo, g_hi) - g_min;
            if (contrast > best_contrast) {
                best_contrast = contrast;
                lower = l;
                min_idx = idx;
                min_gap = g_min;
            }
        }
        if (lower < 0) throw GuardError("avoided_crossing: no local gap minimum inside the scan window");
    }

    // Golden-section refinement around the bracketing scan points.
    HilbertSpace space = scan_space(scan.params);
    double a = scan.omega_p_values[static_cast<std::size_t>(std::max(0, min_idx - 1))];
    double b = scan.omega_p_values[static_cast<std::size_t>(std::min(points - 1, min_idx + 1))];
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = pair_gap_at(scan.params, space, x1, lower);
    double f2 = pair_gap_at(scan.params, space, x2, lower);
    for (int iter = 0; iter < 60 && (b - a) > 1e-12; ++iter) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = pair_gap_at(scan.params, space, x1, lower);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = pair_gap_at(scan.params, space, x2, lower);
        }
    }

    AvoidedCrossing out;
    out.omega_p_star = 0.5 * (a + b);
    out.lower_level = lower;

    const Operator h = build_lab_hamiltonian(scan.params, out.omega_p_star, space);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h.dense());
    out.gap = es.eigenvalues()(lower + 1) - es.eigenvalues()(lower);

    // At the crossing both eigenvectors should carry ~1/2 weight on each of
    // |1_p 0_s>|0> and |0_p 0_s>|2>; report the worse of the two.
    const int idx_pump = space.basis_index({1, 0, 0});
    const int idx_pair = space.basis_index({0, 0, 2});
    const auto& v_lo = es.eigenvectors().col(lower);
    const auto& v_hi = es.eigenvectors().col(lower + 1);
    out.overlap_pump = std::min(std::norm(v_lo(idx_pump)), std::norm(v_hi(idx_pump)));
    out.overlap_pair = std::min(std::norm(v_lo(idx_pair)), std::norm(v_hi(idx_pair)));
    return out;
}

} // namespace ensq::spectrum
