/**
 * @file config.hpp
 * @brief YAML run configuration with benchmark defaults.
 *
 * Every setting has a dotted name such as `contract.c`; in a file it is written
 * as a nested section or as the dotted key itself. Every key must be known and
 * may appear once. Missing keys keep their defaults.
 */
#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "va/boundary_solver.hpp"
#include "va/contract.hpp"
#include "va/mc_oracle.hpp"
#include "va/mortality.hpp"

namespace va {

/// Malformed configuration: carries the offending line (0 if not from a file) and key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line, std::string key)
        : std::runtime_error(what), line_(line), key_(std::move(key)) {}
    [[nodiscard]] int line() const noexcept { return line_; }
    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    int line_;
    std::string key_;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
        throw std::invalid_argument("not a number: '" + t + "'");
    }
    return v;
}

inline long long parse_integer(const std::string& text) {
    const std::string t = trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
        throw std::invalid_argument("not an integer: '" + t + "'");
    }
    return v;
}

inline bool parse_bool(const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw std::invalid_argument("not a boolean: '" + t + "'");
}

/// "t0:k0, t1:k1, ..." into knot pairs.
inline std::vector<std::pair<double, double>> parse_knots(const std::string& text) {
    std::vector<std::pair<double, double>> knots;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("knot '" + item + "' is not t:k");
        knots.emplace_back(parse_double(item.substr(0, colon)), parse_double(item.substr(colon + 1)));
    }
    if (knots.empty()) throw std::invalid_argument("no knots given");
    return knots;
}

}  // namespace detail

struct RunConfig {
    // Mortality.
    std::string mortality_kind = "gompertz_makeham";
    GompertzMakeham gm{};
    double mu0 = 0.01;
    double eta = 50.0;
    double hazard_factor = 0.0;
    // Contract and penalty.
    double T = 10.0;
    double r = 0.05;
    double sigma = 0.20;
    double c = 0.025;
    double g = 0.0;
    double x0 = 100.0;
    std::string penalty_kind = "exponential";
    double K = 0.014;
    std::vector<std::pair<double, double>> knots;
    // Numerics.
    int solver_n = 200;
    double solver_eps = 1e-2;
    int solver_max_sweeps = 500;
    SweepOrder solver_order = SweepOrder::Jacobi;
    NearLag solver_near_lag = NearLag::OwnLevel;
    McConfig mc{};
    int dp_n_time = 400;
    int dp_n_space = 400;
    std::string output_dir = ".";

    /// Assigns one key from its textual value. Throws std::invalid_argument
    /// for bad values and ConfigError for unknown keys.
    void set(const std::string& key, const std::string& value) {
        const auto& table = setters();
        const auto it = table.find(key);
        if (it == table.end()) throw ConfigError("unknown configuration key '" + key + "'", 0, key);
        it->second(*this, value);
    }

    [[nodiscard]] static std::vector<std::string> keys() {
        std::vector<std::string> out;
        for (const auto& [k, v] : setters()) out.push_back(k);
        return out;
    }

    [[nodiscard]] MortalityModel mortality() const {
        if (mortality_kind == "gompertz_makeham") return {gm, eta, hazard_factor};
        if (mortality_kind == "constant") return {ConstantForce{mu0}, eta, hazard_factor};
        throw ConfigError("mortality.kind must be gompertz_makeham or constant", 0, "mortality.kind");
    }

    [[nodiscard]] ContractSpec contract() const {
        ContractSpec spec;
        spec.T = T;
        spec.r = r;
        spec.sigma = sigma;
        spec.c = c;
        spec.g = g;
        spec.x0 = x0;
        if (penalty_kind == "exponential") {
            spec.penalty = ExponentialPenalty{K};
        } else if (penalty_kind == "cubic") {
            if (knots.empty()) throw ConfigError("penalty.kind = cubic needs penalty.knots", 0, "penalty.knots");
            spec.penalty = PiecewiseCubicPenalty(knots);
        } else {
            throw ConfigError("penalty.kind must be exponential or cubic", 0, "penalty.kind");
        }
        spec.validate();
        return spec;
    }

    [[nodiscard]] PicardOptions picard_options() const {
        PicardOptions opt;
        opt.max_sweeps = solver_max_sweeps;
        opt.order = solver_order;
        opt.near_lag = solver_near_lag;
        return opt;
    }

    /// Builds and validates every model object; any failure becomes a ConfigError.
    void validate() const {
        try {
            (void)mortality();
            (void)contract();
            mc.validate();
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(e.what(), 0, "");
        }
        if (solver_n < 2) throw ConfigError("solver.n must be at least 2", 0, "solver.n");
        if (!(solver_eps > 0.0)) throw ConfigError("solver.eps must be positive", 0, "solver.eps");
        if (solver_max_sweeps < 1) throw ConfigError("solver.max_sweeps must be positive", 0, "solver.max_sweeps");
        if (dp_n_time < 50) throw ConfigError("dp.n_time must be at least 50", 0, "dp.n_time");
        if (dp_n_space < 200) throw ConfigError("dp.n_space must be at least 200", 0, "dp.n_space");
    }

private:
    using Setter = std::function<void(RunConfig&, const std::string&)>;

    static const std::map<std::string, Setter>& setters() {
        using detail::parse_bool;
        using detail::parse_double;
        using detail::parse_integer;
        using detail::trim;
        static const std::map<std::string, Setter> table = {
            {"mortality.kind", [](RunConfig& c, const std::string& v) { c.mortality_kind = trim(v); }},
            {"mortality.A", [](RunConfig& c, const std::string& v) { c.gm.A = parse_double(v); }},
            {"mortality.B", [](RunConfig& c, const std::string& v) { c.gm.B = parse_double(v); }},
            {"mortality.C", [](RunConfig& c, const std::string& v) { c.gm.C = parse_double(v); }},
            {"mortality.mu0", [](RunConfig& c, const std::string& v) { c.mu0 = parse_double(v); }},
            {"mortality.eta", [](RunConfig& c, const std::string& v) { c.eta = parse_double(v); }},
            {"mortality.hazard_factor", [](RunConfig& c, const std::string& v) { c.hazard_factor = parse_double(v); }},
            {"contract.T", [](RunConfig& c, const std::string& v) { c.T = parse_double(v); }},
            {"contract.r", [](RunConfig& c, const std::string& v) { c.r = parse_double(v); }},
            {"contract.sigma", [](RunConfig& c, const std::string& v) { c.sigma = parse_double(v); }},
            {"contract.c", [](RunConfig& c, const std::string& v) { c.c = parse_double(v); }},
            {"contract.g", [](RunConfig& c, const std::string& v) { c.g = parse_double(v); }},
            {"contract.x0", [](RunConfig& c, const std::string& v) { c.x0 = parse_double(v); }},
            {"penalty.kind", [](RunConfig& c, const std::string& v) { c.penalty_kind = trim(v); }},
            {"penalty.K", [](RunConfig& c, const std::string& v) { c.K = parse_double(v); }},
            {"penalty.knots", [](RunConfig& c, const std::string& v) { c.knots = detail::parse_knots(v); }},
            {"solver.n", [](RunConfig& c, const std::string& v) { c.solver_n = static_cast<int>(parse_integer(v)); }},
            {"solver.eps", [](RunConfig& c, const std::string& v) { c.solver_eps = parse_double(v); }},
            {"solver.max_sweeps",
             [](RunConfig& c, const std::string& v) { c.solver_max_sweeps = static_cast<int>(parse_integer(v)); }},
            {"solver.order",
             [](RunConfig& c, const std::string& v) {
                 const std::string t = trim(v);
                 if (t == "jacobi") c.solver_order = SweepOrder::Jacobi;
                 else if (t == "gauss_seidel") c.solver_order = SweepOrder::BackwardGaussSeidel;
                 else throw std::invalid_argument("expected jacobi or gauss_seidel");
             }},
            {"solver.near_lag",
             [](RunConfig& c, const std::string& v) {
                 const std::string t = trim(v);
                 if (t == "own_level") c.solver_near_lag = NearLag::OwnLevel;
                 else if (t == "previous_iterate") c.solver_near_lag = NearLag::PreviousIterate;
                 else throw std::invalid_argument("expected own_level or previous_iterate");
             }},
            {"mc.n_paths",
             [](RunConfig& c, const std::string& v) {
                 const long long n = parse_integer(v);
                 if (n < 0) throw std::invalid_argument("must be non-negative");
                 c.mc.n_paths = static_cast<std::size_t>(n);
             }},
            {"mc.n_steps", [](RunConfig& c, const std::string& v) { c.mc.n_steps = static_cast<int>(parse_integer(v)); }},
            {"mc.seed",
             [](RunConfig& c, const std::string& v) {
                 const std::string t = trim(v);
                 std::uint64_t s = 0;
                 const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), s);
                 if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
                     throw std::invalid_argument("not an unsigned 64-bit seed");
                 }
                 c.mc.seed = s;
             }},
            {"mc.antithetic", [](RunConfig& c, const std::string& v) { c.mc.antithetic = parse_bool(v); }},
            {"dp.n_time", [](RunConfig& c, const std::string& v) { c.dp_n_time = static_cast<int>(parse_integer(v)); }},
            {"dp.n_space", [](RunConfig& c, const std::string& v) { c.dp_n_space = static_cast<int>(parse_integer(v)); }},
            {"output.dir", [](RunConfig& c, const std::string& v) { c.output_dir = trim(v); }},
        };
        return table;
    }
};

namespace detail {

/// 1-based line of a node, 0 when yaml-cpp has no position for it.
inline int line_of(const YAML::Node& node) { return node.Mark().line >= 0 ? node.Mark().line + 1 : 0; }

/// "t:k, t:k" text for a knot list written as [[t, k], ...].
inline std::string knots_text(const YAML::Node& seq, int line, const std::string& key) {
    std::string text;
    for (const auto& knot : seq) {
        if (!knot.IsSequence() || knot.size() != 2) {
            throw ConfigError("line " + std::to_string(line) + ": " + key + ": each knot must be [t, k]", line, key);
        }
        if (!text.empty()) text += ',';
        text += knot[0].Scalar() + ":" + knot[1].Scalar();
    }
    return text;
}

/// Walks nested maps and assigns every leaf under its dotted key.
inline void assign_tree(const YAML::Node& node, const std::string& prefix, RunConfig& cfg,
                        std::map<std::string, int>& seen) {
    for (const auto& entry : node) {
        const std::string name = entry.first.Scalar();
        const std::string key = prefix.empty() ? name : prefix + "." + name;
        const YAML::Node& value = entry.second;
        const int line = line_of(entry.first);
        auto fail = [&](const std::string& why) {
            throw ConfigError("line " + std::to_string(line) + ": " + why, line, key);
        };
        if (value.IsMap()) {
            assign_tree(value, key, cfg, seen);
            continue;
        }
        if (auto [it, fresh] = seen.emplace(key, line); !fresh) {
            fail("key '" + key + "' already set on line " + std::to_string(it->second));
        }
        std::string text;
        if (value.IsScalar()) {
            text = value.Scalar();
        } else if (value.IsSequence() && key == "penalty.knots") {
            text = knots_text(value, line, key);
        } else {
            fail("key '" + key + "' needs a value");
        }
        try {
            cfg.set(key, text);
        } catch (const ConfigError& e) {
            fail(e.what());
        } catch (const std::exception& e) {
            fail(key + ": " + e.what());
        }
    }
}

}  // namespace detail

/// Parses a YAML run configuration. Sections nest (`contract: {c: 0.04}`) or
/// use dotted keys (`contract.c: 0.04`). Errors name the line and key.
[[nodiscard]] inline RunConfig parse_config(std::istream& in) {
    YAML::Node root;
    try {
        root = YAML::Load(in);
    } catch (const YAML::ParserException& e) {
        const int line = e.mark.line >= 0 ? e.mark.line + 1 : 0;
        throw ConfigError("line " + std::to_string(line) + ": " + e.msg, line, "");
    }
    RunConfig cfg;
    if (root.IsNull()) return cfg;
    if (!root.IsMap()) throw ConfigError("configuration must be a mapping of sections", detail::line_of(root), "");
    std::map<std::string, int> seen;
    detail::assign_tree(root, "", cfg, seen);
    return cfg;
}

[[nodiscard]] inline RunConfig parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

[[nodiscard]] inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file '" + path + "'", 0, "");
    return parse_config(in);
}

}  // namespace va
