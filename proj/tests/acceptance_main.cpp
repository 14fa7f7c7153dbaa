// Acceptance suite: end-to-end checks of the closed forms, the propagation
// fixed point, the BVP solver and the bath module, each printed as one
// pass/fail line with its runtime budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <decolab/decolab.hpp>

#include "oracles.hpp"

using namespace decolab;

namespace {

struct Criterion {
    std::string name;
    double budget_s;
    std::function<bool(std::string&)> fn;
};

ModelParams model(double omega, double nu, double d0, double d2, double g = 0.0) {
    ModelParams p;
    p.omega = omega; p.nu = nu; p.d0 = d0; p.d2 = d2; p.g = g;
    return p;
}

BoundaryData boundary(double T, Complex xi, Complex xdi, Complex xf, Complex xdf) {
    BoundaryData b;
    b.t_f = T; b.x_i = xi; b.xd_i = xdi; b.x_f = xf; b.xd_f = xdf;
    return b;
}

bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

// C1: closed-form action vs quadrature along the numerically solved saddle
bool c1(std::string& detail) {
    std::size_t evaluated = 0;
    double worst = 0.0;
    for (double om : {0.1, 0.5, 1.0})
        for (double nu : {0.25, 1.0, 2.0})
            for (double T : {0.5, 1.0, 3.0}) {
                const ModelParams p = model(om, nu, 1.0, 1.0);
                // skip pole neighborhoods of the closed forms
                const double disc = om * om - 0.25 * nu * nu;
                if (disc > 0.0 && std::abs(std::sin(std::sqrt(disc) * T)) < 0.05) continue;
                SaddleProblem prob;
                prob.model = p;
                prob.boundary = boundary(T, 0.3, -0.2, 1.1, 0.4);
                prob.n_nodes = 512;
                const SaddleSolution sol = solve_saddle(prob);
                if (!sol.converged) { detail = "solver failed"; return false; }
                const Complex closed = action_value(quadratic_action(p, T), prob.boundary);
                const double dev = std::abs(sol.S_eff - closed) / std::abs(closed);
                worst = std::max(worst, dev);
                ++evaluated;
            }
    detail = std::to_string(evaluated) + " grid points, worst rel dev " + format_value(worst);
    return evaluated >= 20 && worst <= 1e-6;
}

// C2: small-t universality of t*D_i, t*D_f -> d2 and t*D_m -> -d2
bool c2(std::string& detail) {
    double worst = 0.0;
    {
        const double nu = 0.2, t = 1e-4 / nu;
        const auto d = quadratic_action_decoherence(model(0.3, nu, 1.0, 0.8), t);
        worst = std::max({worst, std::abs(t * d.D_i - 0.8) / 0.8,
                          std::abs(t * d.D_f - 0.8) / 0.8, std::abs(t * d.D_m + 0.8) / 0.8});
    }
    {
        const double nu = 1.0, t = 1e-4;
        const auto d = brownian_action_decoherence(model(0.0, nu, 1.0, 0.8), t);
        worst = std::max({worst, std::abs(t * d.D_i - 0.8) / 0.8,
                          std::abs(t * d.D_f - 0.8) / 0.8, std::abs(t * d.D_m + 0.8) / 0.8});
    }
    detail = "worst rel dev " + format_value(worst);
    return worst <= 5e-3;
}

// C3: Brownian relaxed regime
bool c3(std::string& detail) {
    const double nu = 1.0, d0 = 1.0, d2 = 0.8;
    const ModelParams p = model(0.0, nu, d0, d2);
    const double t = 50.0 / nu, h = 0.25;
    const double slope =
        (brownian_action_decoherence(p, t + h).D_i - brownian_action_decoherence(p, t - h).D_i) /
        (2.0 * h);
    const auto d = brownian_action_decoherence(p, t);
    const bool ok = close_rel(slope, d0, 5e-3) &&
                    close_rel(d.D_f, d0 / (2.0 * nu) + d2 * nu / 2.0, 5e-3) &&
                    close_rel(d.D_m, d0 / (2.0 * nu) - d2 * nu / 2.0, 5e-3);
    detail = "dD_i/dt = " + format_value(slope) + ", D_f = " + format_value(d.D_f) +
             ", D_m = " + format_value(d.D_m);
    return ok;
}

// C4: overdamped relaxed growth rates of D_i at the figure-1 parameters
bool c4(std::string& detail) {
    const std::vector<std::pair<double, double>> cases = {
        {2.0, 0.010050}, {1.0, 0.020204}, {0.25, 0.10}};
    detail.clear();
    for (const auto& [nu, target] : cases) {
        const ModelParams p = model(0.1, nu, nu, nu);
        const double rate = regime_info(p).asymptotic_slope;
        const double t1 = 12.0 / rate, dt = 1.5 / rate;
        const double f1 = quadratic_action_decoherence(p, t1).D_i;
        const double f2 = quadratic_action_decoherence(p, t1 + dt).D_i;
        const double f3 = quadratic_action_decoherence(p, t1 + 2.0 * dt).D_i;
        const double fitted = oracles::three_point_rate(f1, f2, f3, dt);
        detail += "nu=" + format_value(nu) + ": " + format_value(fitted) + "  ";
        if (!close_rel(fitted, target, 2e-2)) return false;
    }
    return true;
}

// C5: figure-2 asymptotics independent of the initial mixedness
bool c5(std::string& detail) {
    const ModelParams p = model(0.1, 1.0, 1.0, 1.0);
    const auto target = asymptotic_state(p);
    for (double kappa : {0.5, 40.0}) {
        const auto st = propagate_interval(p, GaussianState::with_kappa(1.0, kappa), 2000.0, 1.0);
        if (!close_rel(st.q2, target.q2_inf, 1e-3) || !close_rel(st.r2, target.r2_inf, 1e-3)) {
            detail = "kappa_i = " + format_value(kappa) + ": q2 = " + format_value(st.q2) +
                     ", r2 = " + format_value(st.r2);
            return false;
        }
    }
    detail = "q2_inf = " + format_value(target.q2_inf) + ", r2_inf = " + format_value(target.r2_inf);
    return std::abs(target.q2_inf - 0.0198020) < 1e-7 && std::abs(target.r2_inf - 1.0000495) < 1e-7;
}

// C6: propagation property suite
bool c6(std::string& detail) {
    for (double c : {2.0, 1.0, 0.25}) {
        const ModelParams p = model(0.1, c, c, c);
        const auto st0 = GaussianState::make(1.0, 0.9, 0.2);
        // composition
        for (auto [t1, t2] : {std::pair{0.4, 0.9}, std::pair{1.7, 3.1}}) {
            const auto a = propagate(propagate(st0, quadratic_action(p, t1), 1.0),
                                     quadratic_action(p, t2), 1.0);
            const auto b = propagate(st0, quadratic_action(p, t1 + t2), 1.0);
            if (!close_rel(a.q2, b.q2, 1e-9) || !close_rel(a.r2, b.r2, 1e-9) ||
                std::abs(a.s2 - b.s2) > 1e-9 * (1.0 + std::abs(b.s2))) {
                detail = "composition failed at coupling " + format_value(c);
                return false;
            }
        }
        // trace, hermiticity (by construction), physicality, D_inst bounds
        auto st = st0;
        for (int i = 0; i < 25; ++i) {
            st = propagate(st, quadratic_action(p, 0.37), 1.0);
            if (std::abs(oracles::trace_by_quadrature(st) - 1.0) > 1e-9) {
                detail = "trace drifted";
                return false;
            }
            if (st.kappa() < 0.5 - 1e-10) {
                detail = "kappa < 1/2";
                return false;
            }
            const auto s = instantaneous_suppression(st, 1.3, -0.4);
            if (!(s.factor > 0.0 && s.factor <= 1.0)) {
                detail = "D_inst out of bounds";
                return false;
            }
            if (s.factor != instantaneous_suppression(st, 1.3 + 5.0, -0.4 + 5.0).factor) {
                detail = "translation invariance violated";
                return false;
            }
        }
        // D-matrix semidefiniteness over log-spaced times
        for (int i = 0; i < 60; ++i) {
            const double t = std::exp(std::log(1e-3) + (std::log(50.0) - std::log(1e-3)) * i / 59.0);
            DecoherenceCoeffs d;
            try {
                d = quadratic_action_decoherence(p, t);
            } catch (const PoleError&) {
                continue;
            }
            const double tr = d.D_i + d.D_f, det = d.D_i * d.D_f - d.D_m * d.D_m;
            const double min_eig = 0.5 * (tr - std::sqrt(tr * tr - 4.0 * det));
            if (min_eig < -1e-10 * (std::abs(d.D_i) + std::abs(d.D_f))) {
                detail = "D-matrix not PSD at t = " + format_value(t);
                return false;
            }
        }
    }
    detail = "composition, trace, hermiticity, physicality, D_inst, D-matrix PSD";
    return true;
}

// C7: anharmonic solver at g = 0 against the closed form
bool c7(std::string& detail) {
    auto rng = oracles::fixed_rng();
    std::uniform_real_distribution<double> ub(-1.0, 1.0), ut(0.8, 3.5);
    double worst_traj = 0.0, worst_S = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
        SaddleProblem prob;
        prob.model = model(0.2 + 0.8 * std::abs(ub(rng)), 0.25 + 1.5 * std::abs(ub(rng)), 1.0, 1.0);
        prob.boundary = boundary(ut(rng), Complex(ub(rng), 0.3 * ub(rng)),
                                 Complex(ub(rng), 0.3 * ub(rng)), Complex(ub(rng), 0.3 * ub(rng)),
                                 Complex(ub(rng), 0.3 * ub(rng)));
        const auto numeric = solve_saddle(prob);
        const auto closed = harmonic_saddle(prob.model, prob.boundary, numeric.times.size() - 1);
        if (!numeric.converged) { detail = "solve failed"; return false; }
        double dist = 0.0;
        for (std::size_t i = 0; i < numeric.times.size(); ++i) {
            dist = std::max(dist, std::abs(numeric.x[i] - closed.x[i]));
            dist = std::max(dist, std::abs(numeric.xd[i] - closed.xd[i]));
        }
        worst_traj = std::max(worst_traj, dist);
        worst_S = std::max(worst_S,
                           std::abs(numeric.S_eff - closed.S_eff) / std::abs(closed.S_eff));
    }
    // figure-4 boundary: tau_edd = 2 hbar t / (D_i xdi^2)
    const ModelParams p4 = model(0.48, 1.0, 1.0, 1.0);
    const double T = 6.0, xdi = 0.5;
    SaddleProblem prob4;
    prob4.model = p4;
    prob4.boundary = boundary(T, 0.0, xdi, 0.0, 0.0);
    const auto sol4 = solve_saddle(prob4);
    const double tau = effective_decoherence_time(sol4, T, 1.0);
    const double tau_ref = 2.0 * T / (quadratic_action_decoherence(p4, T).D_i * xdi * xdi);
    detail = "worst traj " + format_value(worst_traj) + ", worst S " + format_value(worst_S) +
             ", tau_edd dev " + format_value(std::abs(tau - tau_ref) / tau_ref);
    return worst_traj <= 1e-8 && worst_S <= 1e-6 && close_rel(tau, tau_ref, 1e-6);
}

// C8: figure-3/figure-4 qualitative reproduction
bool c8(std::string& detail) {
    // figure 3 grid: all solves converge; Im xd vanishes at g = 0 only
    SaddleProblem prob3;
    prob3.model = model(1.0, 1.0, 1.0, 1.0);
    prob3.boundary = boundary(5.0, 0.0, 0.5, 2.0, 0.0);
    std::vector<double> gs3;
    for (int i = 0; i < 6; ++i) gs3.push_back(0.01 * i / 5.0);
    const auto sols3 = sweep_g(prob3, gs3);
    for (std::size_t i = 0; i < sols3.size(); ++i) {
        if (!sols3[i].converged || sols3[i].boundary_residual > 1e-10) {
            detail = "fig3 g = " + format_value(gs3[i]) + " did not converge";
            return false;
        }
        double im_xd = 0.0;
        for (const auto& v : sols3[i].xd) im_xd = std::max(im_xd, std::abs(v.imag()));
        if (i == 0 && im_xd > 1e-10) { detail = "fig3: Im xd != 0 at g = 0"; return false; }
        if (i > 0 && im_xd <= 1e-8) { detail = "fig3: Im xd = 0 at g > 0"; return false; }
    }

    // figure 4 grid: Im S_eff strictly decreasing in g at the largest common t
    SaddleProblem prob4;
    prob4.model = model(0.48, 1.0, 1.0, 1.0);
    std::vector<double> gs4;
    for (int i = 0; i < 7; ++i) gs4.push_back(0.024 * i / 6.0);
    std::vector<double> im_at_largest;
    double largest_t = 0.0;
    for (double T : {12.0, 10.0, 8.0, 6.0}) {
        prob4.boundary = boundary(T, 0.0, 0.5, 0.0, 0.0);
        const auto sols = sweep_g(prob4, gs4);
        bool all = true;
        for (const auto& s : sols) all &= s.converged;
        if (!all) continue;
        largest_t = T;
        for (const auto& s : sols) im_at_largest.push_back(s.S_eff.imag());
        break;
    }
    if (im_at_largest.empty()) { detail = "fig4: no common converged t"; return false; }
    for (std::size_t i = 1; i < im_at_largest.size(); ++i)
        if (!(im_at_largest[i] < im_at_largest[i - 1])) {
            detail = "fig4: Im S_eff not strictly decreasing in g at t = " + format_value(largest_t);
            return false;
        }
    detail = "fig3 all converged; fig4 Im S_eff decreasing in g at t = " + format_value(largest_t) +
             " (" + format_value(im_at_largest.front()) + " .. " +
             format_value(im_at_largest.back()) + ")";
    return true;
}

// C9: bath module
bool c9(std::string& detail) {
    const auto s = SpectralModel::drude(1.0, 2.0, 1.0, 1.0);
    double worst_pv = 0.0;
    for (double w : {0.0, 0.3, 1.0, 2.0, 3.7}) {
        const double closed = self_energy(s, w).Sigma_n;
        worst_pv = std::max(worst_pv, std::abs(sigma_n_pv(s, w) - closed) / std::abs(closed));
    }
    double worst_parity = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double w = 0.05 + 0.12 * i;
        const auto a = self_energy(s, w), m = self_energy(s, -w);
        worst_parity = std::max({worst_parity,
                                 std::abs(a.Sigma_n - m.Sigma_n) / std::abs(a.Sigma_n),
                                 std::abs(a.Sigma_i - m.Sigma_i) / std::abs(a.Sigma_i),
                                 std::abs(a.Sigma_f + m.Sigma_f) / std::abs(a.Sigma_f)});
    }
    const auto e = drude_effective_params(s);
    const bool consts_ok = std::abs(e.d0 - 1.0) <= 1e-12 &&
                           std::abs(e.d2 - (1.0 / 12.0 - 0.5)) <= 1e-12 &&
                           std::abs(e.k - M_PI / 8.0) <= 1e-12 &&
                           std::abs(e.delta_m - M_PI / 16.0) <= 1e-12 &&
                           std::abs(e.delta_omega2 - M_PI / 4.0) <= 1e-12;
    detail = "PV dev " + format_value(worst_pv) + ", parity dev " + format_value(worst_parity);
    return worst_pv <= 1e-6 && worst_parity <= 1e-12 && consts_ok;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"C1 closed-form vs BVP action (harmonic grid)", 10.0, c1},
        {"C2 small-t universality of the D coefficients", 1.0, c2},
        {"C3 Brownian relaxed regime", 1.0, c3},
        {"C4 overdamped relaxed growth rates (fig 1)", 5.0, c4},
        {"C5 wave-packet asymptotics (fig 2)", 5.0, c5},
        {"C6 propagation property suite", 30.0, c6},
        {"C7 anharmonic solver vs closed form at g = 0", 60.0, c7},
        {"C8 fig 3 / fig 4 qualitative reproduction", 300.0, c8},
        {"C9 bath spectral module", 5.0, c9},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_s) {
            ok = false;
            detail += " [over budget " + std::to_string(c.budget_s) + " s]";
        }
        std::printf("[%s] %s  (%.2f s)  %s\n", ok ? "PASS" : "FAIL", c.name.c_str(), secs,
                    detail.c_str());
        if (!ok) ++failures;
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    else std::printf("all criteria passed\n");
    return failures == 0 ? 0 : 1;
}
