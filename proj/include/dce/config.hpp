// config.hpp — Strict INI experiment configuration and figure presets

#pragma once

#include "dce/dynamics.hpp"
#include "dce/models.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace dce {

struct OutputSpec {
    std::string csv_path;
    std::string svg_path;
    std::vector<std::string> columns; // empty: tier defaults
    std::optional<double> omega1_ghz;
};

struct SweepSpec {
    std::string field; // "<section>.<key>" or bare model key
    std::vector<double> values;
};

struct SpectrumSpec {
    double g_min{0.0};
    double g_max{1.25};
    Index points{126};
    Index levels{8};

    std::vector<double> grid() const {
        if (points < 1) throw ConfigError("spectrum.points must be >= 1");
        if (!(g_max >= g_min) || g_min < 0.0) throw ConfigError("spectrum range must satisfy 0 <= g_min <= g_max");
        std::vector<double> g;
        for (Index i = 0; i < points; ++i)
            g.push_back(points == 1 ? g_min : g_min + (g_max - g_min) * static_cast<double>(i) / static_cast<double>(points - 1));
        return g;
    }
};

struct ExperimentConfig {
    std::optional<std::string> preset;
    ModelSpec model;
    PropagationConfig simulation;
    OutputSpec output;
    std::optional<SweepSpec> sweep;
    SpectrumSpec spectrum;
};

// ----------------------------------------------------------------------------
// Presets. All frequencies in units of omega1.
// ----------------------------------------------------------------------------

struct PresetInfo {
    std::string name;
    std::string figure;
    std::string description;
};

inline const std::vector<PresetInfo>& preset_list() {
    static const std::vector<PresetInfo> p{
        {"fig2", "Fig. 2", "SC, lossless: g0 = 0.04, omega2 = 1.25, alpha0 = 0.1 g0, t_SO = 1200"},
        {"fig4", "Fig. 4", "SC, dissipative: kappa = gamma = gamma_phi = 5e-6, alpha0 = 0.2 g0, t_SO = 377 (12 ns at 5 GHz)"},
        {"fig5", "Fig. 5", "Rabi spectrum vs g0/omega on [0, 1.25], lowest 8 levels"},
        {"fig6", "Fig. 6(a)", "USC, lossless: g0 = 0.15, alpha0 = 0.05 g0, one period of |sin(lambda t)|"},
        {"fig6_dissipative", "Fig. 6(b)", "USC, kappa = gamma = 0.5e-4, t_SO = pi/(2 lambda)"},
        {"fig7_upper", "Fig. 7 (upper)", "DSC: omega2 = 1.25, beta = 1.5, Omega = 1, alpha0 = 0.01"},
        {"fig7_lower", "Fig. 7 (lower)", "DSC: omega2 = 1.25, beta = 1.5, Omega = 0.1, alpha0 = 0.005"},
    };
    return p;
}

namespace preset_constants {
inline constexpr double fig2_g0 = 0.04;
inline constexpr double fig2_omega2 = 1.25;
inline constexpr double fig2_alpha0_over_g0 = 0.1;
inline constexpr double fig2_t_so = 1200.0;
inline constexpr double fig4_rate = 5e-6;
inline constexpr double fig4_alpha0_over_g0 = 0.2;
inline constexpr double fig4_t_so_ns = 12.0;
inline constexpr double fig4_omega1_ghz = 5.0;
inline constexpr double fig6_g0 = 0.15;
inline constexpr double fig6_alpha0_over_g0 = 0.05;
inline constexpr double fig6_rate = 0.5e-4;
inline constexpr double fig7_omega2 = 1.25;
inline constexpr double fig7_beta = 1.5;
inline constexpr double fig7_upper_omega_q = 1.0;
inline constexpr double fig7_upper_alpha0 = 0.01;
inline constexpr double fig7_lower_omega_q = 0.1;
inline constexpr double fig7_lower_alpha0 = 0.005;
} // namespace preset_constants

inline ExperimentConfig make_preset(const std::string& name) {
    namespace pc = preset_constants;
    ExperimentConfig c;
    c.preset = name;
    auto& m = c.model;
    auto& s = c.simulation;
    if (name == "fig2" || name == "fig4") {
        const bool lossy = name == "fig4";
        m.tier = Tier::rwa_drive;
        m.omega1 = m.omega_q1 = 1.0;
        m.omega2 = m.omega_q2 = pc::fig2_omega2;
        m.g1 = m.g2 = pc::fig2_g0;
        m.alpha0 = (lossy ? pc::fig4_alpha0_over_g0 : pc::fig2_alpha0_over_g0) * pc::fig2_g0;
        m.drive_policy = DrivePolicy::sum_of_modes;
        if (lossy) {
            // omega1 t = 2 pi f t with f = 5 GHz, t = 12 ns
            m.t_switch_off = 2.0 * std::numbers::pi * pc::fig4_omega1_ghz * pc::fig4_t_so_ns;
            m.noise.kappa1 = m.noise.kappa2 = m.noise.gamma1 = m.noise.gamma2 = pc::fig4_rate;
            m.noise.gamma_phi1 = m.noise.gamma_phi2 = pc::fig4_rate;
            m.n_max = 20;
            s.t_max = 400.0;
            c.output.omega1_ghz = pc::fig4_omega1_ghz;
        } else {
            m.t_switch_off = pc::fig2_t_so;
            m.n_max = 15;
            s.t_max = 1500.0;
        }
        s.dt_out = 1.0;
    } else if (name == "fig5") {
        m.tier = Tier::full;
        m.omega1 = m.omega_q1 = m.omega2 = m.omega_q2 = 1.0;
        m.n_max = 64;
        s.t_max = 1.0;
    } else if (name == "fig6" || name == "fig6_dissipative") {
        m.tier = Tier::full;
        m.full_basis = FullBasis::dressed;
        m.omega1 = m.omega_q1 = m.omega2 = m.omega_q2 = 1.0;
        m.g1 = m.g2 = pc::fig6_g0;
        m.alpha0 = pc::fig6_alpha0_over_g0 * pc::fig6_g0;
        m.drive_policy = DrivePolicy::dressed_gap_sum;
        m.n_max = 40;
        m.k_dressed = 8;
        if (name == "fig6_dissipative") {
            m.switch_off_policy = SwitchOffPolicy::half_pi_over_lambda;
            m.noise.kappa1 = m.noise.kappa2 = m.noise.gamma1 = m.noise.gamma2 = pc::fig6_rate;
            s.t_max = 1200.0;
        } else {
            s.t_max = 700.0; // one period pi/lambda ~ 663
        }
        s.dt_out = 1.0;
    } else if (name == "fig7_upper" || name == "fig7_lower") {
        const bool upper = name == "fig7_upper";
        m.tier = Tier::full;
        m.full_basis = FullBasis::dressed;
        m.initial = InitialState::dsc_pair;
        m.omega1 = 1.0;
        m.omega2 = pc::fig7_omega2;
        m.omega_q1 = m.omega_q2 = upper ? pc::fig7_upper_omega_q : pc::fig7_lower_omega_q;
        m.g1 = pc::fig7_beta * m.omega1;
        m.g2 = pc::fig7_beta * m.omega2;
        m.alpha0 = upper ? pc::fig7_upper_alpha0 : pc::fig7_lower_alpha0;
        m.drive_policy = DrivePolicy::sum_of_modes;
        m.n_max = 60;
        m.k_dressed = 16;
        s.t_max = upper ? 60.0 : 80.0;
        s.dt_out = 0.5;
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return c;
}

// ----------------------------------------------------------------------------
// Parsing
// ----------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& raw) {
    const std::string v = trim(raw);
    if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity();
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    }
}

inline Index parse_index(const std::string& key, const std::string& raw) {
    const double d = parse_double(key, raw);
    if (d != std::floor(d) || !std::isfinite(d)) throw ConfigError("key '" + key + "': expected an integer");
    return static_cast<Index>(d);
}

inline bool parse_bool(const std::string& key, const std::string& raw) {
    const std::string v = trim(raw);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& raw) {
    std::vector<std::string> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class E>
E parse_enum(const std::string& key, const std::string& raw, const std::vector<std::pair<std::string, E>>& options) {
    const std::string v = trim(raw);
    for (const auto& [name, e] : options)
        if (v == name) return e;
    std::string allowed;
    for (const auto& [name, e] : options) allowed += (allowed.empty() ? "" : ", ") + name;
    throw ConfigError("key '" + key + "': '" + v + "' is not one of {" + allowed + "}");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

// Keys that the sweep subcommand may not vary.
inline bool is_structural(const std::string& full_key) {
    static const std::vector<std::string> s{"model.n_max",        "model.k_dressed",        "model.n_ladder",
                                            "model.tier",         "model.initial",          "model.full_basis",
                                            "model.drive_policy", "model.switch_off_policy", "model.noise_spectrum",
                                            "simulation.picture", "simulation.auto_truncation", "simulation.max_n_max"};
    return std::find(s.begin(), s.end(), full_key) != s.end();
}

inline const std::map<std::string, Setter>& setter_table() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto num = [&t](const std::string& k, std::function<void(ExperimentConfig&, double)> f) {
            t[k] = [k, f](ExperimentConfig& c, const std::string& v) { f(c, parse_double(k, v)); };
        };
        auto idx = [&t](const std::string& k, std::function<void(ExperimentConfig&, Index)> f) {
            t[k] = [k, f](ExperimentConfig& c, const std::string& v) { f(c, parse_index(k, v)); };
        };
        // [model]
        num("model.omega1", [](auto& c, double v) { c.model.omega1 = v; });
        num("model.omega2", [](auto& c, double v) { c.model.omega2 = v; });
        num("model.omega", [](auto& c, double v) { c.model.omega1 = c.model.omega2 = v; });
        num("model.omega_q1", [](auto& c, double v) { c.model.omega_q1 = v; });
        num("model.omega_q2", [](auto& c, double v) { c.model.omega_q2 = v; });
        num("model.omega_q", [](auto& c, double v) { c.model.omega_q1 = c.model.omega_q2 = v; });
        num("model.g1", [](auto& c, double v) { c.model.g1 = v; });
        num("model.g2", [](auto& c, double v) { c.model.g2 = v; });
        num("model.g0", [](auto& c, double v) { c.model.g1 = c.model.g2 = v; });
        num("model.alpha0", [](auto& c, double v) { c.model.alpha0 = v; });
        num("model.alpha1", [](auto& c, double v) { c.model.alpha1 = v; });
        num("model.alpha2", [](auto& c, double v) { c.model.alpha2 = v; });
        num("model.omega_d", [](auto& c, double v) {
            c.model.omega_d = v;
            c.model.drive_policy = DrivePolicy::fixed;
        });
        num("model.t_switch_off", [](auto& c, double v) {
            c.model.t_switch_off = v;
            c.model.switch_off_policy = SwitchOffPolicy::fixed;
        });
        num("model.kappa1", [](auto& c, double v) { c.model.noise.kappa1 = v; });
        num("model.kappa2", [](auto& c, double v) { c.model.noise.kappa2 = v; });
        num("model.kappa", [](auto& c, double v) { c.model.noise.kappa1 = c.model.noise.kappa2 = v; });
        num("model.gamma1", [](auto& c, double v) { c.model.noise.gamma1 = v; });
        num("model.gamma2", [](auto& c, double v) { c.model.noise.gamma2 = v; });
        num("model.gamma", [](auto& c, double v) { c.model.noise.gamma1 = c.model.noise.gamma2 = v; });
        num("model.gamma_phi1", [](auto& c, double v) { c.model.noise.gamma_phi1 = v; });
        num("model.gamma_phi2", [](auto& c, double v) { c.model.noise.gamma_phi2 = v; });
        num("model.gamma_phi", [](auto& c, double v) { c.model.noise.gamma_phi1 = c.model.noise.gamma_phi2 = v; });
        num("model.gamma_over_lambda", [](auto& c, double v) { c.model.gamma_over_lambda = v; });
        idx("model.n_max", [](auto& c, Index v) { c.model.n_max = v; });
        idx("model.k_dressed", [](auto& c, Index v) { c.model.k_dressed = v; });
        idx("model.n_ladder", [](auto& c, Index v) { c.model.n_ladder = v; });
        t["model.tier"] = [](ExperimentConfig& c, const std::string& v) {
            const auto tier = parse_tier(trim(v));
            if (!tier) throw ConfigError("key 'model.tier': unknown tier '" + trim(v) + "'");
            c.model.tier = *tier;
        };
        t["model.drive_policy"] = [](ExperimentConfig& c, const std::string& v) {
            c.model.drive_policy = parse_enum<DrivePolicy>(
                "model.drive_policy", v,
                {{"fixed", DrivePolicy::fixed}, {"sum_of_modes", DrivePolicy::sum_of_modes}, {"dressed_gap_sum", DrivePolicy::dressed_gap_sum}});
        };
        t["model.switch_off_policy"] = [](ExperimentConfig& c, const std::string& v) {
            c.model.switch_off_policy = parse_enum<SwitchOffPolicy>(
                "model.switch_off_policy", v, {{"fixed", SwitchOffPolicy::fixed}, {"half_pi_over_lambda", SwitchOffPolicy::half_pi_over_lambda}});
        };
        t["model.initial"] = [](ExperimentConfig& c, const std::string& v) {
            c.model.initial =
                parse_enum<InitialState>("model.initial", v, {{"ground", InitialState::ground}, {"dsc_pair", InitialState::dsc_pair}});
        };
        t["model.full_basis"] = [](ExperimentConfig& c, const std::string& v) {
            c.model.full_basis = parse_enum<FullBasis>("model.full_basis", v, {{"dressed", FullBasis::dressed}, {"fock", FullBasis::fock}});
        };
        t["model.noise_spectrum"] = [](ExperimentConfig& c, const std::string& v) {
            c.model.noise.spectrum = parse_enum<SpectrumModel>("model.noise_spectrum", v, {{"flat", SpectrumModel::flat}});
        };
        // [simulation]
        num("simulation.t_max", [](auto& c, double v) { c.simulation.t_max = v; });
        num("simulation.dt_out", [](auto& c, double v) { c.simulation.dt_out = v; });
        num("simulation.rtol", [](auto& c, double v) { c.simulation.rtol = v; });
        num("simulation.atol", [](auto& c, double v) { c.simulation.atol = v; });
        num("simulation.leakage_tol", [](auto& c, double v) { c.simulation.leakage_tol = v; });
        idx("simulation.max_n_max", [](auto& c, Index v) { c.simulation.max_n_max = v; });
        t["simulation.picture"] = [](ExperimentConfig& c, const std::string& v) {
            c.simulation.picture = parse_enum<Picture>("simulation.picture", v,
                                                       {{"schrodinger", Picture::schrodinger}, {"interaction", Picture::interaction}});
        };
        t["simulation.auto_truncation"] = [](ExperimentConfig& c, const std::string& v) {
            c.simulation.auto_truncation = parse_bool("simulation.auto_truncation", v);
        };
        // [output]
        t["output.csv_path"] = [](ExperimentConfig& c, const std::string& v) { c.output.csv_path = trim(v); };
        t["output.svg_path"] = [](ExperimentConfig& c, const std::string& v) { c.output.svg_path = trim(v); };
        t["output.columns"] = [](ExperimentConfig& c, const std::string& v) { c.output.columns = split_list(v); };
        num("output.omega1_ghz", [](auto& c, double v) { c.output.omega1_ghz = v; });
        // [spectrum]
        num("spectrum.g_min", [](auto& c, double v) { c.spectrum.g_min = v; });
        num("spectrum.g_max", [](auto& c, double v) { c.spectrum.g_max = v; });
        idx("spectrum.points", [](auto& c, Index v) { c.spectrum.points = v; });
        idx("spectrum.levels", [](auto& c, Index v) { c.spectrum.levels = v; });
        return t;
    }();
    return table;
}

} // namespace detail

// Applies one "<section>.<key> = value" assignment (also used by sweeps).
inline void apply_setting(ExperimentConfig& c, const std::string& full_key, const std::string& value) {
    const auto& t = detail::setter_table();
    const auto it = t.find(full_key);
    if (it == t.end()) throw ConfigError("unknown configuration key '" + full_key + "'");
    it->second(c, value);
}

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline ExperimentConfig parse_config(std::istream& in) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
    }

    ExperimentConfig c;
    std::optional<Tier> preset_tier;
    for (const auto& [key, node] : tree) {
        if (!node.empty()) continue;
        if (key == "preset") {
            c = make_preset(detail::trim(node.data()));
            preset_tier = c.model.tier;
        } else {
            throw ConfigError("unknown top-level key '" + key + "' (only 'preset' is allowed outside sections)");
        }
    }

    std::optional<double> beta;
    std::optional<std::string> sweep_field, sweep_values, sweep_start, sweep_stop, sweep_count;
    for (const auto& [section, node] : tree) {
        if (node.empty()) continue;
        if (section != "model" && section != "simulation" && section != "output" && section != "sweep" && section != "spectrum")
            throw ConfigError("unknown section [" + section + "]");
        for (const auto& [key, leaf] : node) {
            const std::string full = section + "." + key;
            const std::string value = leaf.data();
            if (full == "model.beta") {
                beta = detail::parse_double(full, value);
            } else if (section == "sweep") {
                if (key == "field") sweep_field = detail::trim(value);
                else if (key == "values") sweep_values = value;
                else if (key == "start") sweep_start = value;
                else if (key == "stop") sweep_stop = value;
                else if (key == "count") sweep_count = value;
                else throw ConfigError("unknown configuration key '" + full + "'");
            } else {
                if (full == "model.tier" && preset_tier) {
                    const auto t = parse_tier(detail::trim(value));
                    if (t && *t != *preset_tier)
                        throw ConfigError("preset '" + *c.preset + "' uses tier " + to_string(*preset_tier) + "; conflicting tier " +
                                          detail::trim(value) + " rejected");
                }
                apply_setting(c, full, value);
            }
        }
    }
    if (beta) {
        c.model.g1 = *beta * c.model.omega1;
        c.model.g2 = *beta * c.model.omega2;
    }

    if (sweep_field || sweep_values || sweep_start || sweep_stop || sweep_count) {
        if (!sweep_field) throw ConfigError("[sweep] requires 'field'");
        SweepSpec s;
        s.field = sweep_field->find('.') == std::string::npos ? "model." + *sweep_field : *sweep_field;
        if (detail::is_structural(s.field)) throw ConfigError("sweeping structural field '" + s.field + "' is not allowed");
        if (!detail::setter_table().count(s.field) || s.field.rfind("output.", 0) == 0 || s.field.rfind("spectrum.", 0) == 0)
            throw ConfigError("sweep field '" + s.field + "' is not a numeric model/simulation field");
        if (sweep_values) {
            if (sweep_start || sweep_stop || sweep_count) throw ConfigError("[sweep] use either 'values' or 'start/stop/count'");
            for (const auto& v : detail::split_list(*sweep_values)) s.values.push_back(detail::parse_double("sweep.values", v));
        } else if (sweep_start || sweep_stop || sweep_count) {
            if (!(sweep_start && sweep_stop && sweep_count)) throw ConfigError("[sweep] needs all of start, stop, count");
            const double a = detail::parse_double("sweep.start", *sweep_start);
            const double b = detail::parse_double("sweep.stop", *sweep_stop);
            const Index n = detail::parse_index("sweep.count", *sweep_count);
            for (Index i = 0; i < n; ++i)
                s.values.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
        }
        if (s.values.empty()) throw ConfigError("sweep range is empty");
        c.sweep = std::move(s);
    }
    return c;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    return parse_config(in);
}

} // namespace dce
