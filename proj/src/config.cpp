#include "ensq/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

namespace ensq::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

} // namespace

std::string normalize_key(const std::string& key) {
    std::string out;
    for (char c : key) out.push_back(c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " of '" + path +
                              "' is not a key = value pair");
        const std::string key = normalize_key(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config: empty key or value on line " + std::to_string(lineno));
        // flags already set take precedence; first file wins otherwise
        values_.emplace(key, value);
    }
}

void RunConfig::set(const std::string& key, const std::string& value) {
    values_[normalize_key(key)] = value;
}

bool RunConfig::has(const std::string& key) const { return values_.count(normalize_key(key)) > 0; }

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(normalize_key(key));
    return it == values_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(normalize_key(key));
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' has malformed number '" + it->second + "'");
    }
}

std::optional<double> RunConfig::get_optional_double(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return get_double(key, 0.0);
}

int RunConfig::get_int(const std::string& key, int fallback) const {
    auto it = values_.find(normalize_key(key));
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const int v = std::stoi(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' has malformed integer '" + it->second + "'");
    }
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(normalize_key(key));
    if (it == values_.end()) return fallback;
    std::string v = it->second;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config: key '" + key + "' has malformed boolean '" + it->second + "'");
}

std::vector<std::string> RunConfig::get_list(const std::string& key,
                                             const std::vector<std::string>& fallback) const {
    auto it = values_.find(normalize_key(key));
    if (it == values_.end()) return fallback;
    std::vector<std::string> out;
    std::string item;
    for (char c : it->second + ",") {
        if (c == ',') {
            const std::string t = trim(item);
            if (!t.empty()) out.push_back(t);
            item.clear();
        } else {
            item.push_back(c);
        }
    }
    if (out.empty()) throw ConfigError("config: key '" + key + "' has an empty list");
    return out;
}

void RunConfig::require_known(const std::set<std::string>& known) const {
    for (const auto& [key, value] : values_)
        if (!known.count(key)) throw ConfigError("config: unknown key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
    return {values_.begin(), values_.end()};
}

const std::set<std::string>& RunConfig::common_keys() {
    static const std::set<std::string> keys = {
        "g_col", "j", "delta_q", "kappa_p", "kappa_s", "omega_d", "theta_d",
        "n_atoms", "delta_inh", "dim_p", "dim_s", "dim_b", "atom_dim",
        "out", "threads", "seed_base", "gcol_mhz", "method", "config",
    };
    return keys;
}

model::ModelParams RunConfig::to_model_params(double omega_d_in_k2at_default) const {
    model::ModelParams p;
    p.g_col = get_double("g_col", p.g_col);
    p.J = get_double("j", 3.0 * p.g_col);
    p.Delta_q = get_double("delta_q", 20.0 * p.g_col);
    p.kappa_p = get_optional_double("kappa_p");
    p.kappa_s = get_optional_double("kappa_s");
    p.theta_d = get_double("theta_d", 0.0);
    p.n_atoms = get_int("n_atoms", 6);
    p.delta_inh = get_optional_double("delta_inh");
    p.trunc.dim_p = get_int("dim_p", 0);
    p.trunc.dim_s = get_int("dim_s", 0);
    p.trunc.dim_b = get_int("dim_b", 0);
    p.trunc.dim_atom = get_int("atom_dim", 2);

    // Omega_d is specified in units of kappa_2at.
    const double omega_d_ratio = get_double("omega_d", omega_d_in_k2at_default);
    if (omega_d_ratio != 0.0) {
        const model::DerivedParams d = model::derive(p);
        p.Omega_d = omega_d_ratio * d.kappa_2at;
    }
    return p;
}

} // namespace ensq::cli
