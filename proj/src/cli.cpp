#include "ensq/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <sstream>

#include "ensq/broadening.hpp"
#include "ensq/csv.hpp"
#include "ensq/config.hpp"
#include "ensq/effective.hpp"
#include "ensq/kernels.hpp"
#include "ensq/manifold.hpp"
#include "ensq/spectrum.hpp"
#include "ensq/version.hpp"

namespace ensq::cli {

namespace {

const char* kUsage =
    "usage: ensq <params|spectrum|stabilize|rabi|broadening>\n"
    "            [--config FILE] [--key value ...] [--out DIR] [--threads N] [--seed-base S]\n";

std::set<std::string> with_common(std::initializer_list<std::string> extra) {
    std::set<std::string> keys = RunConfig::common_keys();
    keys.insert(extra.begin(), extra.end());
    return keys;
}

std::string format_alpha(double alpha) {
    std::string s = csv::format_number(alpha);
    for (char& c : s)
        if (c == '.') c = 'p';
    return s;
}

void write_config_header(csv::Writer& w, const std::string& subcommand, const RunConfig& cfg,
                         const model::DerivedParams& d) {
    w.key_value("version", std::string(ENSQ_VERSION));
    w.key_value("subcommand", subcommand);
    for (const auto& [key, value] : cfg.entries()) w.key_value(key, value);
    w.key_value("resolved_chi", d.chi);
    w.key_value("resolved_kappa_2at", d.kappa_2at);
    w.key_value("resolved_kappa_p", d.kappa_p);
    w.key_value("resolved_kappa_s", d.kappa_s);
    w.key_value("resolved_delta_q", d.delta_q_shift);
    w.key_value("resolved_delta", d.delta);
    for (const auto& warning : d.warnings) w.comment("warning: " + warning);
}

// Physical-time scale factor: microseconds per omega_q^{-1}, from g_col/2pi in MHz.
double us_per_unit(const RunConfig& cfg, const model::ModelParams& p) {
    if (!cfg.has("gcol_mhz")) return 0.0;
    const double gcol_mhz = cfg.get_double("gcol_mhz", 0.0);
    if (gcol_mhz <= 0.0) throw ConfigError("gcol_mhz must be positive");
    const double omega_q_rad_per_us = 2.0 * M_PI * gcol_mhz / p.g_col; // rad/us
    return 1.0 / omega_q_rad_per_us;
}

int cmd_params(const RunConfig& cfg, std::ostream& out) {
    cfg.require_known(with_common({}));
    const model::ModelParams p = cfg.to_model_params(0.0);
    const model::DerivedParams d = model::derive(p);

    auto line = [&](const std::string& name, double value, const std::string& note = "") {
        out << name << " = " << csv::format_number(value) << " omega_q";
        if (!note.empty()) out << "   (" << note << ")";
        out << "\n";
    };
    line("chi", d.chi, "effective pair-conversion coupling g_col^2 J / Delta_q^2");
    line("kappa_2at", d.kappa_2at, "two-excitation decay rate 4 chi^2 / kappa_p");
    line("delta_q", d.delta_q_shift, "ensemble frequency shift g_col^2 / Delta_q");
    line("delta", d.delta, "pump detuning omega_p - 2 omega_q");
    line("Delta_p", d.Delta_p, "pump-conversion detuning 2 omega_s - omega_p");
    line("gamma", d.gamma, "drive-induced qubit decay 4 Omega_d^2 / kappa_2at");
    line("omega_d", d.omega_d, "drive frequency omega_q + delta_q");
    line("kappa_p", d.kappa_p, d.kappa_p_defaulted ? "default 5 chi" : "user value");
    line("kappa_s", d.kappa_s, d.kappa_s_defaulted ? "default 0.3 kappa_p" : "user value");
    line("Omega_d", p.Omega_d, "drive amplitude");
    for (const auto& w : d.warnings) out << "# warning: " << w << "\n";
    return 0;
}

int cmd_spectrum(const RunConfig& cfg, const std::string& out_dir, std::ostream& out) {
    cfg.require_known(with_common({"wp_min", "wp_max", "points", "levels"}));
    const model::ModelParams p = cfg.to_model_params(0.0);
    const model::DerivedParams d = model::derive(p);
    const double wp_min = cfg.get_double("wp_min", 1.96);
    const double wp_max = cfg.get_double("wp_max", 2.06);
    const int points = cfg.get_int("points", 201);
    const int levels = cfg.get_int("levels", 6);

    const spectrum::SpectrumScan scan = spectrum::scan_pump_frequency(p, wp_min, wp_max, points, levels);
    const spectrum::AvoidedCrossing crossing = spectrum::avoided_crossing(scan);

    const std::string path = out_dir + "/spectrum.csv";
    csv::Writer w(path);
    write_config_header(w, "spectrum", cfg, d);
    std::vector<std::string> cols = {"omega_p_over_omega_q"};
    for (int l = 0; l < levels; ++l) cols.push_back("level_" + std::to_string(l));
    w.comment("levels are relative to the instantaneous ground level, in units of omega_q");
    w.header(cols);
    for (int i = 0; i < points; ++i) {
        std::vector<double> row = {scan.omega_p_values[static_cast<std::size_t>(i)]};
        for (int l = 0; l < levels; ++l) row.push_back(scan.levels(i, l));
        w.row(row);
    }
    w.key_value("gap_over_chi", crossing.gap / d.chi);
    w.key_value("omega_p_star_over_omega_q", crossing.omega_p_star);
    w.key_value("predicted_omega_p_star_over_omega_q", 2.0 * p.omega_q + d.delta);
    w.key_value("hybridization_overlap_pump", crossing.overlap_pump);
    w.key_value("hybridization_overlap_pair", crossing.overlap_pair);
    out << "spectrum: gap/chi = " << csv::format_number(crossing.gap / d.chi)
        << " at omega_p/omega_q = " << csv::format_number(crossing.omega_p_star) << "\n"
        << "wrote " << path << "\n";
    return 0;
}

int cmd_stabilize(const RunConfig& cfg, const std::string& out_dir, std::ostream& out) {
    cfg.require_known(with_common({"alpha", "tiers", "t_end", "points"}));
    const model::ModelParams p = cfg.to_model_params(0.0);
    const model::DerivedParams d = model::derive(p);

    std::vector<double> alphas;
    for (const auto& a : cfg.get_list("alpha", {"1"})) {
        try {
            alphas.push_back(std::stod(a));
        } catch (const std::exception&) {
            throw ConfigError("config: malformed alpha value '" + a + "'");
        }
    }
    std::vector<model::ModelTier> tiers;
    for (const auto& t : cfg.get_list("tiers", {"adiabatic", "timeaveraged"}))
        tiers.push_back(model::tier_from_name(t));
    const double t_end = cfg.get_double("t_end", 2.5);
    const int points = cfg.get_int("points", 201);

    for (model::ModelTier tier : tiers)
        if (tier == model::ModelTier::Full)
            for (double a : alphas)
                if (a > 2.0)
                    throw GuardError("stabilize: full tier with alpha > 2 exceeds the runtime budget; "
                                     "use the timeaveraged tier for large alpha");

    const double us = us_per_unit(cfg, p);
    for (double alpha : alphas) {
        const effective::TierComparison cmp =
            effective::stabilization_experiment(p, alpha, tiers, t_end, points);

        const std::string path = out_dir + "/stabilize_alpha" + format_alpha(alpha) + ".csv";
        csv::Writer w(path);
        write_config_header(w, "stabilize", cfg, cmp.derived);
        w.key_value("alpha", alpha);
        for (const auto& warning : cmp.warnings) w.comment("warning: " + warning);
        if (us > 0.0) {
            w.comment("physical_time_note: t_us = (chi t) / chi in physical units derived from "
                      "gcol_mhz; absolute microsecond scales are convention-dependent, the "
                      "dimensionless chi*t axis is the contract");
        }
        std::vector<std::string> cols = {"t_chi"};
        if (us > 0.0) cols.push_back("t_us");
        for (model::ModelTier tier : tiers) cols.push_back("eta_" + model::tier_name(tier));
        cols.push_back("trace_err");
        cols.push_back("parity_drift");
        w.header(cols);

        for (std::size_t i = 0; i < cmp.times.size(); ++i) {
            std::vector<double> row = {cmp.times[i]};
            if (us > 0.0) row.push_back(cmp.times[i] / cmp.derived.chi * us);
            double trace_err = 0.0, parity_drift = 0.0;
            for (model::ModelTier tier : tiers) {
                const auto& series = cmp.series.at(tier);
                row.push_back(series.eta[i]);
                trace_err = std::max(trace_err, series.max_trace_error);
                parity_drift = std::max(parity_drift, series.parity_drift[i]);
            }
            row.push_back(trace_err);
            row.push_back(parity_drift);
            w.row(row);
        }
        for (model::ModelTier tier : tiers) {
            const auto& series = cmp.series.at(tier);
            w.key_value("final_eta_" + model::tier_name(tier), series.eta.back());
        }
        out << "wrote " << path << "\n";
    }
    return 0;
}

int cmd_rabi(const RunConfig& cfg, const std::string& out_dir, std::ostream& out) {
    cfg.require_known(with_common({"tiers", "t_end", "points"}));
    const model::ModelParams p = cfg.to_model_params(0.1); // Omega_d defaults to 0.1 kappa_2at
    std::vector<model::ModelTier> tiers;
    for (const auto& t : cfg.get_list("tiers", {"adiabatic", "qubit"}))
        tiers.push_back(model::tier_from_name(t));
    const double t_end = cfg.get_double("t_end", 200.0);
    const int points = cfg.get_int("points", 801);

    const effective::TierComparison cmp = effective::rabi_experiment(p, tiers, t_end, points);

    const std::string path = out_dir + "/rabi.csv";
    csv::Writer w(path);
    write_config_header(w, "rabi", cfg, cmp.derived);
    for (const auto& warning : cmp.warnings) w.comment("warning: " + warning);
    const double us = us_per_unit(cfg, p);
    std::vector<std::string> cols = {"t_k2at"};
    if (us > 0.0) cols.push_back("t_us");
    for (model::ModelTier tier : tiers) {
        cols.push_back("P0_" + model::tier_name(tier));
        cols.push_back("P1_" + model::tier_name(tier));
    }
    w.header(cols);
    for (std::size_t i = 0; i < cmp.times.size(); ++i) {
        std::vector<double> row = {cmp.times[i]};
        if (us > 0.0) row.push_back(cmp.times[i] / cmp.derived.kappa_2at * us);
        for (model::ModelTier tier : tiers) {
            const auto& series = cmp.series.at(tier);
            row.push_back(series.p0[i]);
            row.push_back(series.p1[i]);
        }
        w.row(row);
    }

    // Fit the decay on the adiabatic tier when present, else the first tier.
    const model::ModelTier fit_tier =
        cmp.series.count(model::ModelTier::Adiabatic) ? model::ModelTier::Adiabatic : tiers.front();
    const effective::RabiFit fit = effective::fit_rabi_decay(cmp.times, cmp.series.at(fit_tier).p1);
    w.key_value("fit_tier", model::tier_name(fit_tier));
    w.key_value("gamma_over_k2at", fit.gamma);
    w.key_value("gamma_over_k2at_expected", cmp.derived.gamma / cmp.derived.kappa_2at);
    w.key_value("rabi_frequency_k2at", fit.frequency);
    out << "rabi: fitted gamma/kappa_2at = " << csv::format_number(fit.gamma) << "\n"
        << "wrote " << path << "\n";
    return 0;
}

int cmd_broadening(const RunConfig& cfg, const std::string& out_dir, std::ostream& out) {
    cfg.require_known(with_common({"alpha", "t_end", "points", "seeds"}));
    const model::ModelParams p = cfg.to_model_params(0.0);
    const model::DerivedParams d = model::derive(p);
    const double alpha = cfg.get_double("alpha", 1.0);
    const double t_end = cfg.get_double("t_end", 20.0);
    const int points = cfg.get_int("points", 201);
    const int seeds = cfg.get_int("seeds", 10);
    const unsigned long long seed_base =
        static_cast<unsigned long long>(cfg.get_int("seed_base", 1));
    if (seeds < 1) throw ConfigError("broadening: seeds must be >= 1");

    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        grid[static_cast<std::size_t>(i)] = t_end * i / (points - 1);

    const double ideal_modulus = std::abs(manifold::coherent_coeffs(alpha).c01);

    struct SeedResult {
        broadening::BroadeningRun protected_run;
        broadening::BroadeningRun unprotected_run;
    };
    std::vector<SeedResult> results(static_cast<std::size_t>(seeds));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(seeds));

#pragma omp parallel for schedule(dynamic) num_threads(std::min(seeds, kernel::max_threads()))
    for (int si = 0; si < seeds; ++si) {
        try {
            const auto deltas = broadening::sample_detunings(
                p.n_atoms, d.delta_inh, seed_base + static_cast<unsigned long long>(si));
            auto& slot = results[static_cast<std::size_t>(si)];
            slot.protected_run = broadening::broadened_coherence(p, deltas, true, grid, alpha);
            slot.unprotected_run = broadening::broadened_coherence(p, deltas, false, grid, alpha);
            slot.protected_run.seed = seed_base + static_cast<unsigned long long>(si);
            slot.unprotected_run.seed = slot.protected_run.seed;
        } catch (...) {
            errors[static_cast<std::size_t>(si)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    for (int si = 0; si < seeds; ++si) {
        const auto& r = results[static_cast<std::size_t>(si)];
        const std::string path = out_dir + "/broadening_seed" +
                                 std::to_string(seed_base + static_cast<unsigned long long>(si)) + ".csv";
        csv::Writer w(path);
        write_config_header(w, "broadening", cfg, d);
        w.key_value("seed", static_cast<double>(r.protected_run.seed));
        w.key_value("alpha", alpha);
        for (const auto& warning : r.protected_run.warnings) w.comment("warning: " + warning);
        w.header({"t_k2at", "modulus_protected", "phase_protected", "modulus_unprotected",
                  "phase_unprotected"});
        for (std::size_t i = 0; i < grid.size(); ++i)
            w.row({grid[i], r.protected_run.coherence_modulus[i], r.protected_run.coherence_phase[i],
                   r.unprotected_run.coherence_modulus[i], r.unprotected_run.coherence_phase[i]});
        w.key_value("ideal_modulus", ideal_modulus);
        const broadening::PhaseFit fit = broadening::phase_linearity(r.protected_run);
        w.key_value("phase_slope_over_delta_q", fit.slope);
        w.key_value("phase_fit_r_squared", fit.r_squared);
    }

    // Aggregate: per-time seed mean and standard deviation of each series.
    const std::string agg_path = out_dir + "/broadening_aggregate.csv";
    csv::Writer w(agg_path);
    write_config_header(w, "broadening", cfg, d);
    w.key_value("seeds", static_cast<double>(seeds));
    w.key_value("alpha", alpha);
    w.header({"t_k2at", "modulus_protected_mean", "modulus_protected_std", "phase_protected_mean",
              "phase_protected_std", "modulus_unprotected_mean", "modulus_unprotected_std",
              "phase_unprotected_mean", "phase_unprotected_std"});
    auto stats = [&](auto getter, std::size_t i) {
        double mean = 0.0;
        for (const auto& r : results) mean += getter(r)[i];
        mean /= seeds;
        double var = 0.0;
        for (const auto& r : results) {
            const double dev = getter(r)[i] - mean;
            var += dev * dev;
        }
        var = seeds > 1 ? var / (seeds - 1) : 0.0;
        return std::pair<double, double>{mean, std::sqrt(var)};
    };
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto mp = stats([](const SeedResult& r) -> const std::vector<double>& {
            return r.protected_run.coherence_modulus; }, i);
        const auto pp = stats([](const SeedResult& r) -> const std::vector<double>& {
            return r.protected_run.coherence_phase; }, i);
        const auto mu = stats([](const SeedResult& r) -> const std::vector<double>& {
            return r.unprotected_run.coherence_modulus; }, i);
        const auto pu = stats([](const SeedResult& r) -> const std::vector<double>& {
            return r.unprotected_run.coherence_phase; }, i);
        w.row({grid[i], mp.first, mp.second, pp.first, pp.second, mu.first, mu.second, pu.first,
               pu.second});
    }
    w.key_value("ideal_modulus", ideal_modulus);
    out << "wrote " << std::to_string(seeds) << " seed files and " << agg_path << "\n";
    return 0;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    try {
        if (argc < 2) {
            err << kUsage;
            return 2;
        }
        const std::string subcommand = argv[1];
        RunConfig cfg;
        std::string config_path;
        for (int i = 2; i < argc; ++i) {
            std::string flag = argv[i];
            if (flag.rfind("--", 0) != 0)
                throw ConfigError("cli: expected --key, got '" + flag + "'");
            if (i + 1 >= argc) throw ConfigError("cli: flag '" + flag + "' is missing a value");
            cfg.set(flag.substr(2), argv[++i]);
        }
        if (cfg.has("config")) cfg.load_file(cfg.get_string("config", ""));

        const int threads = cfg.get_int("threads", 0);
        if (threads < 0) throw ConfigError("cli: threads must be >= 0");
        kernel::set_max_threads(threads);

        const std::string out_dir = cfg.get_string("out", ".");
        if (subcommand != "params") std::filesystem::create_directories(out_dir);

        if (subcommand == "params") return cmd_params(cfg, out);
        if (subcommand == "spectrum") return cmd_spectrum(cfg, out_dir, out);
        if (subcommand == "stabilize") return cmd_stabilize(cfg, out_dir, out);
        if (subcommand == "rabi") return cmd_rabi(cfg, out_dir, out);
        if (subcommand == "broadening") return cmd_broadening(cfg, out_dir, out);
        err << "unknown subcommand '" << subcommand << "'\n" << kUsage;
        return 2;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const GuardError& e) {
        err << "refused: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace ensq::cli
