#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "cavlamb/params.hpp"
#include "cavlamb/sweep.hpp"

// Line-oriented `key = value` configuration (SI units, '#' comments).

namespace cavlamb {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace detail

inline const char* config_keys[] = {"omega0", "dipole", "eta", "omega_c",
                                    "q_factor", "volume", "omega", "radius"};

inline bool is_config_key(const std::string& k) {
    for (const char* known : config_keys) {
        if (k == known) return true;
    }
    return false;
}

/// Parse `key = value` lines; later occurrences of a key override earlier
/// ones. Diagnostics carry the 1-based line number.
inline std::map<std::string, double> parse_config(std::istream& in) {
    std::map<std::string, double> values;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = detail::trim(line);
        if (body.empty()) continue;
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = detail::trim(body.substr(0, eq));
        const std::string val = detail::trim(body.substr(eq + 1));
        if (!is_config_key(key)) {
            throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        try {
            std::size_t used = 0;
            const double v = std::stod(val, &used);
            if (used != val.size()) throw std::invalid_argument(val);
            values[key] = v;
        } catch (const std::exception&) {
            throw ConfigError("config line " + std::to_string(lineno) + ": cannot parse value '" + val +
                              "' for key '" + key + "'");
        }
    }
    return values;
}

inline std::map<std::string, double> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse_config(in);
}

/// Assemble the full parameter set from parsed keys (overrides already
/// applied by the caller). Exactly one of dipole / eta must be present; eta
/// back-solves the dipole from the mode volume.
inline FixedParams make_params(const std::map<std::string, double>& values) {
    auto get = [&values](const char* key) -> double {
        const auto it = values.find(key);
        if (it == values.end()) throw ConfigError(std::string("missing required key '") + key + "'");
        return it->second;
    };
    auto get_or = [&values](const char* key, double fallback) -> double {
        const auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    };

    FixedParams p;
    p.atom.omega0 = get("omega0");
    p.cavity.omega_c = get("omega_c");
    p.cavity.q_factor = get("q_factor");
    p.cavity.volume = get("volume");
    const bool has_dipole = values.count("dipole") > 0;
    const bool has_eta = values.count("eta") > 0;
    if (has_dipole == has_eta) {
        throw ConfigError("exactly one of 'dipole' or 'eta' must be given");
    }
    p.atom.dipole = has_dipole ? values.at("dipole") : dipole_from_eta(values.at("eta"), p.cavity.volume);
    p.traj.omega = get_or("omega", 0.0);
    p.traj.radius = get_or("radius", 0.0);
    return p;
}

} // namespace cavlamb
