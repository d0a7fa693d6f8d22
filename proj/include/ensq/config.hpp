// config.hpp — flat `key = value` run configuration with CLI-flag overlay.
// Precedence: flags > file > defaults. Unknown keys are rejected.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ensq/model.hpp"

namespace ensq::cli {

class RunConfig {
public:
    // Parses `key = value` lines; '#' starts a comment.
    void load_file(const std::string& path);
    void set(const std::string& key, const std::string& value); // flag overlay

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::optional<double> get_optional_double(const std::string& key) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& key,
                                      const std::vector<std::string>& fallback) const;

    // Throws ConfigError naming the first key outside `known`.
    void require_known(const std::set<std::string>& known) const;

    // Resolved key=value pairs for CSV headers, sorted by key.
    std::vector<std::pair<std::string, std::string>> entries() const;

    // Keys understood by every subcommand (model parameters + output control).
    static const std::set<std::string>& common_keys();

    // ModelParams from the generic keys. Omega_d is read in units of
    // kappa_2at and resolved against `omega_d_default` when absent.
    model::ModelParams to_model_params(double omega_d_in_k2at_default) const;

private:
    std::map<std::string, std::string> values_;
};

std::string normalize_key(const std::string& key);

} // namespace ensq::cli
