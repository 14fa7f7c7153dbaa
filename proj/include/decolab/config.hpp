// config.hpp -- strict JSON run configuration. Unknown keys are rejected,
// defaults are recorded for the manifest, complex numbers are written as a
// plain number or an [re, im] pair.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "decolab/bath.hpp"
#include "decolab/csv.hpp"
#include "decolab/gaussian.hpp"
#include "decolab/model.hpp"
#include "decolab/saddle.hpp"

namespace decolab {

using Json = nlohmann::json;

struct TimeGrid {
    double t_min = 0.1;
    double t_max = 10.0;
    std::size_t n_points = 100;
    bool log_spacing = false;

    void validate() const {
        if (!(t_min > 0.0)) throw ValidationError("time_grid: t_min must be > 0");
        if (t_min > t_max) throw ValidationError("time_grid: t_min must be <= t_max");
        if (n_points < 1) throw ValidationError("time_grid: n_points must be >= 1");
    }

    std::vector<double> times() const {
        validate();
        std::vector<double> t(n_points);
        if (n_points == 1) { t[0] = t_min; return t; }
        if (log_spacing) {
            const double la = std::log(t_min), lb = std::log(t_max);
            for (std::size_t i = 0; i < n_points; ++i)
                t[i] = std::exp(la + (lb - la) * double(i) / double(n_points - 1));
        } else {
            for (std::size_t i = 0; i < n_points; ++i)
                t[i] = t_min + (t_max - t_min) * double(i) / double(n_points - 1);
        }
        return t;
    }
};

struct SolverTolerances {
    std::size_t n_nodes = 512;
    std::size_t n_segments = 8;
    double boundary_tol = 1e-10;
    double residual_tol = 1e-8;
    double newton_tol = 1e-12;
    double pole_tol = kDefaultPoleTol;
};

struct RunConfig {
    std::string command;
    ModelParams model;
    double coupling_scale = 1.0;  // system-environment strength; scales nu, d0, d2 by its square
    BoundaryData boundary;
    bool has_boundary = false;
    TimeGrid time_grid;
    bool has_time_grid = false;
    double state_q2 = 1.0, state_r2 = 0.25, state_s2 = 0.0;
    bool has_state = false;
    std::vector<double> g_grid;
    SpectralModel bath;
    bool has_bath = false;
    std::string output_dir = ".";
    SolverTolerances tol;
    std::vector<std::string> figures;  // empty = all
    std::vector<std::string> defaults_applied;
    Json resolved;

    GaussianState initial_state() const { return GaussianState::make(state_q2, state_r2, state_s2); }

    SaddleProblem saddle_problem() const {
        SaddleProblem prob;
        prob.model = model;
        prob.boundary = boundary;
        prob.n_nodes = tol.n_nodes;
        prob.n_segments = tol.n_segments;
        prob.boundary_tol = tol.boundary_tol;
        prob.residual_tol = tol.residual_tol;
        prob.newton_tol = tol.newton_tol;
        return prob;
    }
};

namespace detail {

inline void reject_unknown(const Json& obj, const std::vector<std::string>& allowed,
                           const std::string& where) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const auto& k : allowed)
            if (item.key() == k) { ok = true; break; }
        if (!ok) throw ParseError("unknown key '" + item.key() + "' in " + where);
    }
}

inline double number_at(const Json& obj, const std::string& key, const std::string& where) {
    const Json& v = obj.at(key);
    if (!v.is_number()) throw ParseError(where + "." + key + " must be a number");
    return v.get<double>();
}

inline Complex complex_at(const Json& obj, const std::string& key, const std::string& where) {
    const Json& v = obj.at(key);
    if (v.is_number()) return Complex(v.get<double>(), 0.0);
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return Complex(v[0].get<double>(), v[1].get<double>());
    throw ParseError(where + "." + key + " must be a number or an [re, im] pair");
}

}  // namespace detail

inline const std::vector<std::string>& known_commands() {
    static const std::vector<std::string> cmds = {"harmonic",  "brownian", "wavepacket", "saddle",
                                                  "sweep-g",   "drude",    "figures"};
    return cmds;
}

// Parse and fully resolve a configuration. `command` is the CLI subcommand;
// a "command" key in the config must agree with it when both are present.
inline RunConfig parse_config(const std::string& text, const std::string& command) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("config root must be a JSON object");

    detail::reject_unknown(j, {"command", "model", "boundary", "time_grid", "state", "g_grid",
                               "bath", "output_dir", "tolerances", "figures"},
                           "config");

    RunConfig cfg;
    cfg.command = command;
    if (j.contains("command")) {
        const std::string c = j.at("command").get<std::string>();
        if (cfg.command.empty()) cfg.command = c;
        else if (c != cfg.command)
            throw ValidationError("config command '" + c + "' does not match the CLI subcommand '" +
                                  cfg.command + "'");
    }
    if (cfg.command.empty()) throw ValidationError("no command given");
    bool known = false;
    for (const auto& c : known_commands()) known |= (c == cfg.command);
    if (!known) throw ValidationError("unknown command '" + cfg.command + "'");

    auto defaulted = [&](const std::string& what) { cfg.defaults_applied.push_back(what); };

    // model block: hbar = m = 1 and d0 = d2 = 1 are the documented defaults
    cfg.model = ModelParams{};
    cfg.model.d0 = 1.0;
    cfg.model.d2 = 1.0;
    const Json model = j.contains("model") ? j.at("model") : Json::object();
    detail::reject_unknown(model, {"m", "omega", "nu", "d0", "d2", "g", "g_d", "hbar",
                                   "coupling_scale"},
                           "model");
    const auto model_field = [&](const char* key, double& target) {
        if (model.contains(key)) target = detail::number_at(model, key, "model");
        else defaulted(std::string("model.") + key + " = " + format_value(target));
    };
    model_field("m", cfg.model.m);
    model_field("omega", cfg.model.omega);
    model_field("nu", cfg.model.nu);
    model_field("d0", cfg.model.d0);
    model_field("d2", cfg.model.d2);
    model_field("g", cfg.model.g);
    model_field("g_d", cfg.model.g_d);
    model_field("hbar", cfg.model.hbar);
    if (model.contains("coupling_scale"))
        cfg.coupling_scale = detail::number_at(model, "coupling_scale", "model");
    if (cfg.coupling_scale != 1.0) {
        const double c2 = cfg.coupling_scale * cfg.coupling_scale;
        cfg.model.nu *= c2;
        cfg.model.d0 *= c2;
        cfg.model.d2 *= c2;
        defaulted("coupling_scale^2 applied to nu, d0, d2");
    }
    cfg.model.validate();

    if (j.contains("boundary")) {
        const Json b = j.at("boundary");
        detail::reject_unknown(b, {"t_i", "t_f", "x_i", "xd_i", "x_f", "xd_f"}, "boundary");
        cfg.boundary.t_i = b.contains("t_i") ? detail::number_at(b, "t_i", "boundary") : 0.0;
        cfg.boundary.t_f = detail::number_at(b, "t_f", "boundary");
        cfg.boundary.x_i = detail::complex_at(b, "x_i", "boundary");
        cfg.boundary.xd_i = detail::complex_at(b, "xd_i", "boundary");
        cfg.boundary.x_f = detail::complex_at(b, "x_f", "boundary");
        cfg.boundary.xd_f = detail::complex_at(b, "xd_f", "boundary");
        cfg.boundary.validate();
        cfg.has_boundary = true;
    }

    if (j.contains("time_grid")) {
        const Json t = j.at("time_grid");
        detail::reject_unknown(t, {"t_min", "t_max", "n_points", "spacing"}, "time_grid");
        cfg.time_grid.t_min = detail::number_at(t, "t_min", "time_grid");
        cfg.time_grid.t_max = detail::number_at(t, "t_max", "time_grid");
        if (t.contains("n_points")) cfg.time_grid.n_points = t.at("n_points").get<std::size_t>();
        else defaulted("time_grid.n_points = 100");
        if (t.contains("spacing")) {
            const std::string s = t.at("spacing").get<std::string>();
            if (s == "log") cfg.time_grid.log_spacing = true;
            else if (s == "linear") cfg.time_grid.log_spacing = false;
            else throw ParseError("time_grid.spacing must be 'linear' or 'log'");
        } else {
            defaulted("time_grid.spacing = linear");
        }
        cfg.time_grid.validate();
        cfg.has_time_grid = true;
    }

    if (j.contains("state")) {
        const Json s = j.at("state");
        detail::reject_unknown(s, {"q2", "r2", "s2", "kappa"}, "state");
        cfg.state_q2 = s.contains("q2") ? detail::number_at(s, "q2", "state") : 1.0;
        if (!s.contains("q2")) defaulted("state.q2 = 1");
        if (s.contains("r2") && s.contains("kappa"))
            throw ValidationError("state: give either r2 or kappa, not both");
        if (s.contains("kappa")) {
            const double kap = detail::number_at(s, "kappa", "state");
            cfg.state_r2 = kap * kap * cfg.state_q2;
        } else if (s.contains("r2")) {
            cfg.state_r2 = detail::number_at(s, "r2", "state");
        } else {
            cfg.state_r2 = 0.25 * cfg.state_q2;
            defaulted("state.kappa = 1/2 (pure)");
        }
        cfg.state_s2 = s.contains("s2") ? detail::number_at(s, "s2", "state") : 0.0;
        if (!s.contains("s2")) defaulted("state.s2 = 0");
        cfg.initial_state();  // validates
        cfg.has_state = true;
    }

    if (j.contains("g_grid")) {
        const Json g = j.at("g_grid");
        if (!g.is_array() || g.empty()) throw ValidationError("g_grid must be a nonempty array");
        for (const auto& v : g) cfg.g_grid.push_back(v.get<double>());
        if (!std::is_sorted(cfg.g_grid.begin(), cfg.g_grid.end()))
            throw ValidationError("g_grid must be sorted ascending");
    }

    if (j.contains("bath")) {
        const Json b = j.at("bath");
        detail::reject_unknown(b, {"kind", "lambda", "OmegaD", "m_B", "T", "hbar", "table_csv"},
                               "bath");
        const std::string kind = b.contains("kind") ? b.at("kind").get<std::string>() : "drude";
        if (kind == "drude") {
            cfg.bath = SpectralModel::drude(
                b.contains("lambda") ? detail::number_at(b, "lambda", "bath") : 1.0,
                detail::number_at(b, "OmegaD", "bath"),
                b.contains("m_B") ? detail::number_at(b, "m_B", "bath") : 1.0,
                b.contains("T") ? detail::number_at(b, "T", "bath") : 0.0,
                b.contains("hbar") ? detail::number_at(b, "hbar", "bath") : 1.0);
        } else if (kind == "tabulated") {
            cfg.bath = SpectralModel::tabulated_from_csv(
                b.at("table_csv").get<std::string>(),
                b.contains("m_B") ? detail::number_at(b, "m_B", "bath") : 1.0,
                b.contains("hbar") ? detail::number_at(b, "hbar", "bath") : 1.0);
        } else {
            throw ParseError("bath.kind must be 'drude' or 'tabulated'");
        }
        cfg.has_bath = true;
    }

    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();

    if (j.contains("tolerances")) {
        const Json t = j.at("tolerances");
        detail::reject_unknown(t, {"n_nodes", "n_segments", "boundary_tol", "residual_tol",
                                   "newton_tol", "pole_tol"},
                               "tolerances");
        if (t.contains("n_nodes")) cfg.tol.n_nodes = t.at("n_nodes").get<std::size_t>();
        if (t.contains("n_segments")) cfg.tol.n_segments = t.at("n_segments").get<std::size_t>();
        if (t.contains("boundary_tol")) cfg.tol.boundary_tol = detail::number_at(t, "boundary_tol", "tolerances");
        if (t.contains("residual_tol")) cfg.tol.residual_tol = detail::number_at(t, "residual_tol", "tolerances");
        if (t.contains("newton_tol")) cfg.tol.newton_tol = detail::number_at(t, "newton_tol", "tolerances");
        if (t.contains("pole_tol")) cfg.tol.pole_tol = detail::number_at(t, "pole_tol", "tolerances");
    }

    if (j.contains("figures")) {
        for (const auto& f : j.at("figures")) cfg.figures.push_back(f.get<std::string>());
    }

    // fully resolved echo for the manifest
    cfg.resolved = j;
    cfg.resolved["command"] = cfg.command;
    cfg.resolved["model"] = {{"m", cfg.model.m},   {"omega", cfg.model.omega},
                             {"nu", cfg.model.nu}, {"d0", cfg.model.d0},
                             {"d2", cfg.model.d2}, {"g", cfg.model.g},
                             {"g_d", cfg.model.g_d}, {"hbar", cfg.model.hbar},
                             {"coupling_scale", cfg.coupling_scale}};
    cfg.resolved["output_dir"] = cfg.output_dir;
    return cfg;
}

}  // namespace decolab
