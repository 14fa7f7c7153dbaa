// runner.hpp -- experiment orchestration: dispatches a parsed RunConfig into
// dataset tasks, runs them (optionally across threads), emits deterministic
// CSVs and assembles the manifest.

#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "decolab/config.hpp"
#include "decolab/csv.hpp"
#include "decolab/version.hpp"

namespace decolab {

struct TaskResult {
    std::string name;
    std::string status = "ok";  // "ok" or "failed: <reason>"
    std::vector<CsvFile> outputs;
    std::vector<std::string> notes;
    bool ok() const { return status == "ok"; }
};

struct RunManifest {
    std::string command;
    std::string tool = std::string(kToolName) + " " + kVersion;
    long long wall_ms = 0;
    Json resolved_config;
    std::vector<std::string> defaults_applied;
    std::vector<TaskResult> tasks;

    bool all_ok() const {
        for (const auto& t : tasks) if (!t.ok()) return false;
        return true;
    }
    bool any_ok() const {
        for (const auto& t : tasks) if (t.ok()) return true;
        return false;
    }

    Json to_json() const {
        Json jt = Json::array();
        for (const auto& t : tasks) {
            Json files = Json::array();
            for (const auto& f : t.outputs) files.push_back({{"path", f.path}, {"fnv1a64", f.hash}});
            jt.push_back({{"name", t.name}, {"status", t.status}, {"outputs", files},
                          {"notes", t.notes}});
        }
        return Json{{"tool", tool},
                    {"command", command},
                    {"wall_ms", wall_ms},
                    {"resolved_config", resolved_config},
                    {"defaults_applied", defaults_applied},
                    {"tasks", jt}};
    }
};

namespace detail {

using TaskFn = std::function<void(TaskResult&)>;

struct Task {
    std::string name;
    TaskFn fn;
};

inline std::string out_path(const RunConfig& cfg, const std::string& file) {
    return (std::filesystem::path(cfg.output_dir) / file).string();
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// --- basic commands --------------------------------------------------------

inline void task_harmonic(const RunConfig& cfg, TaskResult& res) {
    if (!cfg.has_time_grid) throw ValidationError("harmonic: time_grid block required");
    if (cfg.model.omega <= 0.0) throw ValidationError("harmonic: omega must be > 0");
    std::vector<std::vector<double>> rows, poles;
    for (double t : cfg.time_grid.times()) {
        try {
            const QuadraticAction qa = quadratic_action(cfg.model, t, cfg.tol.pole_tol);
            rows.push_back({t, qa.M, qa.Omega2, qa.K, qa.D_i, qa.D_f, qa.D_m});
        } catch (const PoleError& e) {
            rows.push_back({t, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN});
            poles.push_back({t, e.nearest_pole_time});
        }
    }
    res.outputs.push_back(emit_csv(out_path(cfg, "harmonic.csv"),
                                   {"t", "M", "Omega2", "K", "D_i", "D_f", "D_m"}, rows));
    res.outputs.push_back(
        emit_csv(out_path(cfg, "harmonic_poles.csv"), {"t", "nearest_pole"}, poles));
}

inline void task_brownian(const RunConfig& cfg, TaskResult& res) {
    if (!cfg.has_time_grid) throw ValidationError("brownian: time_grid block required");
    if (cfg.model.omega != 0.0) throw ValidationError("brownian: omega must be 0");
    std::vector<std::vector<double>> rows;
    for (double t : cfg.time_grid.times()) {
        const DecoherenceCoeffs d = brownian_action_decoherence(cfg.model, t);
        rows.push_back({t, d.D_i, d.D_f, d.D_m});
    }
    res.outputs.push_back(
        emit_csv(out_path(cfg, "brownian.csv"), {"t", "D_i", "D_f", "D_m"}, rows));
}

inline void task_wavepacket(const RunConfig& cfg, TaskResult& res) {
    if (!cfg.has_time_grid) throw ValidationError("wavepacket: time_grid block required");
    if (!cfg.has_state) throw ValidationError("wavepacket: state block required");
    GaussianState st = cfg.initial_state();
    double t_now = 0.0;
    std::vector<std::vector<double>> rows;
    for (double t : cfg.time_grid.times()) {
        st = propagate_interval(cfg.model, st, t - t_now, cfg.model.hbar);
        t_now = t;
        const auto mix = mixedness(st);
        const auto sup = instantaneous_suppression(st, 1.0, 0.0);
        rows.push_back({t, st.q2, st.r2, st.s2, mix.kappa, mix.purity, sup.length});
    }
    res.outputs.push_back(emit_csv(out_path(cfg, "wavepacket.csv"),
                                   {"t", "q2", "r2", "s2", "kappa", "purity", "ell_id"}, rows));
}

inline void append_saddle_notes(TaskResult& res, const SaddleSolution& sol, double hbar) {
    res.notes.push_back("S_eff = " + format_value(sol.S_eff.real()) + " + i " +
                        format_value(sol.S_eff.imag()));
    res.notes.push_back("boundary_residual = " + format_value(sol.boundary_residual));
    res.notes.push_back("ode_residual = " + format_value(sol.ode_residual));
    if (sol.S_eff.imag() > 0.0) {
        const double T = sol.times.back() - sol.times.front();
        res.notes.push_back("tau_edd = " +
                            format_value(effective_decoherence_time(sol, T, hbar)));
    }
    if (sol.collocation_fallback_used) res.notes.push_back("collocation fallback used");
}

inline void task_saddle(const RunConfig& cfg, TaskResult& res) {
    if (!cfg.has_boundary) throw ValidationError("saddle: boundary block required");
    const SaddleSolution sol = solve_saddle(cfg.saddle_problem());
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < sol.times.size(); ++i)
        rows.push_back({sol.times[i], sol.x[i].real(), sol.x[i].imag(), sol.xd[i].real(),
                        sol.xd[i].imag(), sol.vx[i].real(), sol.vx[i].imag(), sol.vxd[i].real(),
                        sol.vxd[i].imag()});
    res.outputs.push_back(emit_csv(out_path(cfg, "saddle.csv"),
                                   {"t", "re_x", "im_x", "re_xd", "im_xd", "re_vx", "im_vx",
                                    "re_vxd", "im_vxd"},
                                   rows));
    append_saddle_notes(res, sol, cfg.model.hbar);
}

inline void task_sweep_g(const RunConfig& cfg, TaskResult& res) {
    if (!cfg.has_boundary) throw ValidationError("sweep-g: boundary block required");
    if (cfg.g_grid.empty()) throw ValidationError("sweep-g: g_grid required");
    const auto sols = sweep_g(cfg.saddle_problem(), cfg.g_grid);
    std::vector<std::vector<double>> rows;
    const double T = cfg.boundary.duration();
    for (std::size_t i = 0; i < sols.size(); ++i) {
        const auto& s = sols[i];
        double tau = kNaN;
        if (s.converged && s.S_eff.imag() > 0.0)
            tau = effective_decoherence_time(s, T, cfg.model.hbar);
        rows.push_back({cfg.g_grid[i], s.converged ? s.S_eff.real() : kNaN,
                        s.converged ? s.S_eff.imag() : kNaN, tau,
                        s.converged ? s.boundary_residual : kNaN, s.converged ? 1.0 : 0.0});
        if (!s.converged) res.notes.push_back("g = " + format_value(cfg.g_grid[i]) + ": " + s.note);
    }
    res.outputs.push_back(emit_csv(out_path(cfg, "sweep_g.csv"),
                                   {"g", "re_S_eff", "im_S_eff", "tau_edd", "boundary_residual",
                                    "converged"},
                                   rows));
}

inline void task_drude(const RunConfig& cfg, TaskResult& res) {
    if (!cfg.has_bath) throw ValidationError("drude: bath block required");
    const DrudeEffectiveParams e = drude_effective_params(cfg.bath);
    res.outputs.push_back(emit_csv(out_path(cfg, "drude.csv"),
                                   {"delta_m", "delta_omega2", "k", "d0", "d2"},
                                   {{e.delta_m, e.delta_omega2, e.k, e.d0, e.d2}}));
    const DrudeConversion conv = drude_to_model(cfg.bath);
    if (conv.ok) {
        res.notes.push_back("ModelParams: m = " + format_value(conv.params.m) +
                            ", nu = " + format_value(conv.params.nu) +
                            ", omega = " + format_value(conv.params.omega));
        res.notes.push_back(std::string("positivity_ok = ") +
                            (conv.params.positivity_ok() ? "true" : "false"));
    } else {
        res.notes.push_back("no ModelParams built: " + conv.note);
    }
}

// --- figure presets --------------------------------------------------------

struct Fig1Set {
    double coupling;  // nu = d0 = d2
    std::string tag;
};

inline const std::vector<Fig1Set>& fig1_sets() {
    static const std::vector<Fig1Set> s = {{2.0, "nu2"}, {1.0, "nu1"}, {0.25, "nu0.25"}};
    return s;
}

inline ModelParams fig1_model(double coupling) {
    ModelParams p;
    p.m = 1.0; p.hbar = 1.0; p.omega = 0.1;
    p.nu = p.d0 = p.d2 = coupling;
    return p;
}

inline void fig1_task(const RunConfig& cfg, TaskResult& res, const std::string& name, bool want_Di,
                      bool log_grid) {
    TimeGrid grid;
    grid.t_min = log_grid ? 1e-3 : 0.25;
    grid.t_max = 50.0;
    grid.n_points = 200;
    grid.log_spacing = log_grid;
    std::vector<std::string> header = {"t"};
    for (const auto& s : fig1_sets()) header.push_back((want_Di ? "D_i_" : "D_f_") + s.tag);
    std::vector<std::vector<double>> rows, poles;
    for (double t : grid.times()) {
        std::vector<double> row = {t};
        bool pole = false;
        for (const auto& s : fig1_sets()) {
            try {
                const DecoherenceCoeffs d =
                    quadratic_action_decoherence(fig1_model(s.coupling), t, cfg.tol.pole_tol);
                row.push_back(want_Di ? d.D_i : d.D_f);
            } catch (const PoleError& e) {
                row.push_back(kNaN);
                poles.push_back({t, e.nearest_pole_time});
                pole = true;
            }
        }
        (void)pole;
        rows.push_back(row);
    }
    res.outputs.push_back(emit_csv(out_path(cfg, name + ".csv"), header, rows));
    res.outputs.push_back(emit_csv(out_path(cfg, name + "_poles.csv"), {"t", "nearest_pole"}, poles));
    res.notes.push_back("omega = 0.1, nu = d0 = d2 in {2, 1, 0.25}, m = hbar = 1");
}

inline void fig2_task(const RunConfig& cfg, TaskResult& res, const std::string& name,
                      int which) {  // 0: q2, 1: r2, 2: kappa
    const std::vector<double> couplings = {1.0, 0.08, 0.01};
    const std::vector<std::string> ctags = {"nu1", "nu0.08", "nu0.01"};
    const std::vector<double> kappas = {0.5, 40.0};
    const std::vector<std::string> ktags = {"pure", "mixed"};
    TimeGrid grid;
    grid.t_min = 0.1; grid.t_max = 2000.0; grid.n_points = 151; grid.log_spacing = true;
    const auto times = grid.times();

    std::vector<std::string> header = {"t"};
    std::vector<std::vector<double>> cols;
    for (std::size_t ci = 0; ci < couplings.size(); ++ci) {
        ModelParams p;
        p.omega = 0.1; p.m = p.hbar = 1.0;
        p.nu = p.d0 = p.d2 = couplings[ci];
        for (std::size_t ki = 0; ki < kappas.size(); ++ki) {
            const char* base = which == 0 ? "q2_" : which == 1 ? "r2_" : "kappa_";
            header.push_back(base + ctags[ci] + "_" + ktags[ki]);
            GaussianState st = GaussianState::with_kappa(1.0, kappas[ki]);
            std::vector<double> col;
            double t_now = 0.0;
            for (double t : times) {
                st = propagate_interval(p, st, t - t_now, p.hbar);
                t_now = t;
                col.push_back(which == 0 ? st.q2 : which == 1 ? st.r2 : st.kappa());
            }
            cols.push_back(std::move(col));
        }
    }
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < times.size(); ++i) {
        std::vector<double> row = {times[i]};
        for (const auto& c : cols) row.push_back(c[i]);
        rows.push_back(row);
    }
    res.outputs.push_back(emit_csv(out_path(cfg, name + ".csv"), header, rows));
    res.notes.push_back(
        "omega = 0.1, q2(t_i) = 1, nu = d0 = d2 in {1, 0.08, 0.01}, kappa(t_i) in {1/2, 40}");
}

inline std::vector<double> equidistant(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo + (hi - lo) * double(i) / double(n - 1);
    return v;
}

inline std::string g_tag(double g) {
    std::string s = "g" + format_value(g);
    return s;
}

inline void fig3_task(const RunConfig& cfg, TaskResult& res) {
    SaddleProblem prob;
    prob.model.m = prob.model.hbar = 1.0;
    prob.model.omega = 1.0;
    prob.model.nu = 1.0;
    prob.model.d0 = prob.model.d2 = 1.0;
    prob.boundary.t_i = 0.0;
    prob.boundary.t_f = 5.0;
    prob.boundary.x_i = 0.0;
    prob.boundary.xd_i = 0.5;
    prob.boundary.x_f = 2.0;
    prob.boundary.xd_f = 0.0;
    prob.n_nodes = cfg.tol.n_nodes;
    prob.n_segments = cfg.tol.n_segments;
    const std::vector<double> gs = equidistant(0.0, 0.01, 6);
    const auto sols = sweep_g(prob, gs);

    std::vector<std::string> header = {"t"};
    for (double g : gs)
        for (const char* part : {"re_x_", "im_x_", "re_xd_", "im_xd_"})
            header.push_back(part + g_tag(g));
    std::vector<std::vector<double>> rows;
    const std::size_t n = sols.front().times.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row = {sols.front().times[i]};
        for (const auto& s : sols) {
            if (s.converged) {
                row.push_back(s.x[i].real());
                row.push_back(s.x[i].imag());
                row.push_back(s.xd[i].real());
                row.push_back(s.xd[i].imag());
            } else {
                row.insert(row.end(), {kNaN, kNaN, kNaN, kNaN});
            }
        }
        rows.push_back(row);
    }
    res.outputs.push_back(emit_csv(out_path(cfg, "fig3.csv"), header, rows));
    res.notes.push_back(
        "omega0 = 1, x_i = 0, xd_i = 0.5, x_f = 2, xd_f = 0, g equidistant in [0, 0.01]");
    res.notes.push_back("defaulted: nu = 1, d0 = d2 = 1, t_f = 5 (not fixed by the caption)");
    for (std::size_t i = 0; i < sols.size(); ++i)
        if (!sols[i].converged)
            res.notes.push_back("g = " + format_value(gs[i]) + " failed: " + sols[i].note);
}

inline void fig4_task(const RunConfig& cfg, TaskResult& res) {
    SaddleProblem prob;
    prob.model.m = prob.model.hbar = 1.0;
    prob.model.omega = 0.48;
    prob.model.nu = 1.0;
    prob.model.d0 = prob.model.d2 = 1.0;
    prob.boundary.x_i = 0.0;
    prob.boundary.xd_i = 0.5;
    prob.boundary.x_f = 0.0;
    prob.boundary.xd_f = 0.0;
    prob.n_nodes = cfg.tol.n_nodes;
    prob.n_segments = cfg.tol.n_segments;
    const std::vector<double> gs = equidistant(0.0, 0.024, 7);
    const std::vector<double> ts = {2.0, 4.0, 6.0, 8.0, 10.0, 12.0};

    std::vector<std::string> header = {"t"};
    for (double g : gs) header.push_back("tau_edd_" + g_tag(g));
    std::vector<std::vector<double>> rows;
    for (double t : ts) {
        prob.boundary.t_f = t;
        const auto sols = sweep_g(prob, gs);
        std::vector<double> row = {t};
        for (std::size_t i = 0; i < sols.size(); ++i) {
            const auto& s = sols[i];
            if (s.converged && s.S_eff.imag() > 0.0)
                row.push_back(effective_decoherence_time(s, t, prob.model.hbar));
            else {
                row.push_back(kNaN);
                res.notes.push_back("t = " + format_value(t) + ", g = " + format_value(gs[i]) +
                                    (s.converged ? ": Im S_eff <= 0" : ": " + s.note));
            }
        }
        rows.push_back(row);
    }
    res.outputs.push_back(emit_csv(out_path(cfg, "fig4.csv"), header, rows));
    res.notes.push_back(
        "omega0 = 0.48, d0 = d2 = 1, x_i = x_f = xd_f = 0, xd_i = 0.5, g equidistant in [0, 0.024]");
    res.notes.push_back("defaulted: nu = 1 (slightly overdamped; not fixed by the caption)");
}

inline std::vector<Task> build_tasks(const RunConfig& cfg) {
    std::vector<Task> tasks;
    const auto add = [&](std::string name, TaskFn fn) {
        tasks.push_back({std::move(name), std::move(fn)});
    };
    if (cfg.command == "harmonic") add("harmonic", [&cfg](TaskResult& r) { task_harmonic(cfg, r); });
    else if (cfg.command == "brownian") add("brownian", [&cfg](TaskResult& r) { task_brownian(cfg, r); });
    else if (cfg.command == "wavepacket") add("wavepacket", [&cfg](TaskResult& r) { task_wavepacket(cfg, r); });
    else if (cfg.command == "saddle") add("saddle", [&cfg](TaskResult& r) { task_saddle(cfg, r); });
    else if (cfg.command == "sweep-g") add("sweep_g", [&cfg](TaskResult& r) { task_sweep_g(cfg, r); });
    else if (cfg.command == "drude") add("drude", [&cfg](TaskResult& r) { task_drude(cfg, r); });
    else if (cfg.command == "figures") {
        const auto wanted = [&](const std::string& name) {
            if (cfg.figures.empty()) return true;
            for (const auto& f : cfg.figures)
                if (name.rfind(f, 0) == 0) return true;
            return false;
        };
        if (wanted("fig1a")) add("fig1a", [&cfg](TaskResult& r) { fig1_task(cfg, r, "fig1a", true, true); });
        if (wanted("fig1b")) add("fig1b", [&cfg](TaskResult& r) { fig1_task(cfg, r, "fig1b", true, false); });
        if (wanted("fig1c")) add("fig1c", [&cfg](TaskResult& r) { fig1_task(cfg, r, "fig1c", false, true); });
        if (wanted("fig2a")) add("fig2a", [&cfg](TaskResult& r) { fig2_task(cfg, r, "fig2a", 0); });
        if (wanted("fig2b")) add("fig2b", [&cfg](TaskResult& r) { fig2_task(cfg, r, "fig2b", 1); });
        if (wanted("fig2c")) add("fig2c", [&cfg](TaskResult& r) { fig2_task(cfg, r, "fig2c", 2); });
        if (wanted("fig3")) add("fig3", [&cfg](TaskResult& r) { fig3_task(cfg, r); });
        if (wanted("fig4")) add("fig4", [&cfg](TaskResult& r) { fig4_task(cfg, r); });
        if (tasks.empty()) throw ValidationError("figures: no known figure selected");
    } else {
        throw ValidationError("unknown command '" + cfg.command + "'");
    }
    return tasks;
}

}  // namespace detail

// Execute the configured command. Tasks are independent and may run on
// several threads; outputs are deterministic either way.
inline RunManifest run(const RunConfig& cfg, unsigned threads = 1) {
    const auto t0 = std::chrono::steady_clock::now();
    std::filesystem::create_directories(cfg.output_dir);

    auto tasks = detail::build_tasks(cfg);
    std::vector<TaskResult> results(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i) results[i].name = tasks[i].name;

    const auto work = [&](std::size_t i) {
        try {
            tasks[i].fn(results[i]);
        } catch (const std::exception& e) {
            results[i].status = std::string("failed: ") + e.what();
        }
    };

    if (threads <= 1 || tasks.size() <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const unsigned n = std::min<unsigned>(threads, unsigned(tasks.size()));
        for (unsigned w = 0; w < n; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1))
                    work(i);
            });
        for (auto& th : pool) th.join();
    }

    RunManifest man;
    man.command = cfg.command;
    man.resolved_config = cfg.resolved;
    man.defaults_applied = cfg.defaults_applied;
    man.tasks = std::move(results);
    man.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();

    std::ofstream mf(detail::out_path(cfg, "manifest.json"), std::ios::binary | std::ios::trunc);
    if (!mf) throw IoError("cannot write manifest.json in " + cfg.output_dir);
    mf << man.to_json().dump(2) << "\n";
    return man;
}

}  // namespace decolab
