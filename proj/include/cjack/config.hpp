#pragma once

// key = value configuration files for the simulate and placebo commands.
// Lines starting with '#' are comments.  Exactly one simulate key may carry a
// comma-separated list; that key defines the sweep grid.

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cjack/dataset.hpp"
#include "cjack/placebo.hpp"
#include "cjack/sim.hpp"

namespace cjack {

namespace detail {

inline std::map<std::string, std::string> read_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        if (kv.count(key)) throw ConfigError("duplicate key: " + key);
        kv[key] = val;
    }
    return kv;
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& val) {
    std::vector<double> out;
    std::stringstream ss(val);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        double v;
        if (!parse_double(tok, v)) throw ConfigError("key '" + key + "': bad number '" + trim(tok) + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("key '" + key + "': empty value");
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& val) {
    if (val == "true" || val == "1" || val == "yes") return true;
    if (val == "false" || val == "0" || val == "no") return false;
    throw ConfigError("key '" + key + "': expected true/false");
}

}  // namespace detail

// Parses a sweep configuration.  Every numeric key accepts either a single
// value or a comma list; at most one key may be a list, and it defines the
// grid.
inline SweepGrid parse_sweep_config(const std::string& path) {
    auto kv = detail::read_kv_file(path);

    SimConfig base;
    // key -> setter over a SimConfig given one numeric value
    using Setter = std::function<void(SimConfig&, double)>;
    const std::vector<std::pair<std::string, Setter>> numeric_keys = {
        {"G", [](SimConfig& c, double v) { c.G = static_cast<int>(v); }},
        {"H", [](SimConfig& c, double v) { c.H = static_cast<int>(v); }},
        {"N", [](SimConfig& c, double v) { c.N = static_cast<long>(v); }},
        {"gamma", [](SimConfig& c, double v) { c.gamma_g = c.gamma_h = v; }},
        {"gamma_g", [](SimConfig& c, double v) { c.gamma_g = v; }},
        {"gamma_h", [](SimConfig& c, double v) { c.gamma_h = v; }},
        {"rho", [](SimConfig& c, double v) { c.rho_g = c.rho_h = v; }},
        {"rho_g", [](SimConfig& c, double v) { c.rho_g = v; }},
        {"rho_h", [](SimConfig& c, double v) { c.rho_h = v; }},
        {"rho_x", [](SimConfig& c, double v) { c.rho_gx = c.rho_hx = v; }},
        {"rho_gx", [](SimConfig& c, double v) { c.rho_gx = v; }},
        {"rho_hx", [](SimConfig& c, double v) { c.rho_hx = v; }},
        {"p", [](SimConfig& c, double v) { c.p = static_cast<int>(v); }},
        {"q", [](SimConfig& c, double v) { c.q = static_cast<int>(v); }},
        {"binary_prob", [](SimConfig& c, double v) { c.binary_prob = v; }},
        {"empty_frac", [](SimConfig& c, double v) { c.empty_frac = v; }},
        {"beta1", [](SimConfig& c, double v) { c.beta1 = v; }},
        {"reps", [](SimConfig& c, double v) { c.reps = static_cast<long>(v); }},
        {"seed", [](SimConfig& c, double v) { c.seed = static_cast<uint64_t>(v); }},
        {"level", [](SimConfig& c, double v) { c.level = v; }},
    };

    std::string grid_key;
    std::vector<double> grid_values;
    Setter grid_setter;
    std::map<std::string, bool> known;
    for (auto& [key, setter] : numeric_keys) known[key] = true;
    known["fe"] = known["q_scope"] = true;
    for (auto& [key, val] : kv)
        if (!known.count(key)) throw ConfigError("unknown key: " + key);

    if (kv.count("fe")) base.fe = detail::parse_bool("fe", kv["fe"]);
    if (kv.count("q_scope")) {
        if (kv["q_scope"] == "observation")
            base.q_scope = BinaryScope::observation;
        else if (kv["q_scope"] == "intersection")
            base.q_scope = BinaryScope::intersection;
        else
            throw ConfigError("key 'q_scope': expected observation or intersection");
    }
    for (auto& [key, setter] : numeric_keys) {
        auto it = kv.find(key);
        if (it == kv.end()) continue;
        auto vals = detail::parse_double_list(key, it->second);
        if (vals.size() == 1) {
            setter(base, vals[0]);
        } else {
            if (!grid_key.empty())
                throw ConfigError("only one key may hold a list; got '" + grid_key + "' and '" +
                                  key + "'");
            grid_key = key;
            grid_values = vals;
            grid_setter = setter;
        }
    }

    SweepGrid grid;
    if (grid_key.empty()) {
        base.validate();
        grid.param = "";
        grid.values = {0.0};
        grid.configs = {base};
    } else {
        grid.param = grid_key;
        for (double v : grid_values) {
            SimConfig c = base;
            grid_setter(c, v);
            c.validate();
            grid.values.push_back(v);
            grid.configs.push_back(c);
        }
    }
    return grid;
}

inline PlaceboGen parse_placebo_config(const std::string& path) {
    auto kv = detail::read_kv_file(path);
    PlaceboGen gen;
    for (auto& [key, val] : kv) {
        double v;
        if (key == "pi" && detail::parse_double(val, v))
            gen.pi = v;
        else if (key == "scale" && detail::parse_double(val, v))
            gen.scale = v;
        else if (key == "loading" && detail::parse_double(val, v))
            gen.loading = v;
        else if (key == "group")
            gen.group_col = val;
        else if (key == "period")
            gen.period_col = val;
        else
            throw ConfigError("unknown or malformed key: " + key);
    }
    gen.validate();
    return gen;
}

}  // namespace cjack
