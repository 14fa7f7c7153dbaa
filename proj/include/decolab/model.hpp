// model.hpp -- physical model shared by every other module: the effective
// Lagrangian of the open particle, its potentials, stationary (rigid)
// decoherence weights and the stationary points of the saddle equations.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

#include "decolab/errors.hpp"

namespace decolab {

using Complex = std::complex<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Parameters of the effective Lagrangian
//   L = m vx vxd - (k/2)(vx xd - x vxd) - U(x + xd/2) + U(x - xd/2)
//       + i [ V(xd) + (d2/2) vxd^2 ],
// with U(x) = m omega^2 x^2/2 + g x^4/4!, V(xd) = d0 xd^2/2 + g_d xd^4/4!
// and friction constant k = m nu.
struct ModelParams {
    double m = 1.0;      // mass
    double omega = 0.0;  // harmonic frequency; omega = 0 selects Brownian motion
    double nu = 0.0;     // friction rate k/m
    double d0 = 0.0;     // velocity-independent decoherence coupling
    double d2 = 0.0;     // velocity-dependent decoherence coupling
    double g = 0.0;      // quartic coupling of U
    double g_d = 0.0;    // quartic coupling of V
    double hbar = 1.0;

    double friction() const { return m * nu; }

    // Asymptotic density matrix positivity condition; violating parameter
    // sets are accepted but flagged.
    bool positivity_ok() const { return nu * nu <= 2.0 * d0 * d2 / (m * m); }

    void validate() const {
        if (!(m > 0.0)) throw ValidationError("ModelParams: m must be > 0");
        if (!(hbar > 0.0)) throw ValidationError("ModelParams: hbar must be > 0");
        if (!(nu >= 0.0)) throw ValidationError("ModelParams: nu must be >= 0");
        if (!(omega >= 0.0)) throw ValidationError("ModelParams: omega must be >= 0");
        if (!(d0 >= 0.0)) throw ValidationError("ModelParams: d0 must be >= 0");
        if (!(d2 >= 0.0)) throw ValidationError("ModelParams: d2 must be >= 0");
        if (!(g_d >= 0.0)) throw ValidationError("ModelParams: g_d must be >= 0");
        if (!std::isfinite(g)) throw ValidationError("ModelParams: g must be finite");
    }
};

// Two-point boundary data for the saddle equations, complex in general.
struct BoundaryData {
    double t_i = 0.0;
    double t_f = 1.0;
    Complex x_i{}, xd_i{}, x_f{}, xd_f{};

    double duration() const { return t_f - t_i; }

    void validate() const {
        if (!(t_f > t_i)) throw ValidationError("BoundaryData: t_f must be > t_i");
        for (Complex z : {x_i, xd_i, x_f, xd_f})
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                throw ValidationError("BoundaryData: coordinates must be finite");
    }
};

// One sample of a saddle trajectory.
struct PhasePoint {
    Complex x{}, xd{};
    Complex vx{}, vxd{};
};

inline Complex potential(const ModelParams& p, Complex x) {
    const Complex x2 = x * x;
    return 0.5 * p.m * p.omega * p.omega * x2 + p.g / 24.0 * x2 * x2;
}

// U'(x) = m omega^2 x + g x^3/6
inline Complex potential_force(const ModelParams& p, Complex x) {
    return p.m * p.omega * p.omega * x + p.g / 6.0 * x * x * x;
}

inline Complex potential_curvature(const ModelParams& p, Complex x) {
    return p.m * p.omega * p.omega + 0.5 * p.g * x * x;
}

inline Complex decoherence_potential(const ModelParams& p, Complex xd) {
    const Complex xd2 = xd * xd;
    return 0.5 * p.d0 * xd2 + p.g_d / 24.0 * xd2 * xd2;
}

// V'(xd) = d0 xd + g_d xd^3/6
inline Complex decoherence_force(const ModelParams& p, Complex xd) {
    return p.d0 * xd + p.g_d / 6.0 * xd * xd * xd;
}

inline Complex decoherence_curvature(const ModelParams& p, Complex xd) {
    return p.d0 + 0.5 * p.g_d * xd * xd;
}

// Effective Lagrangian in (x, xd) coordinates. Vanishes identically on
// diagonal trajectories (xd = vxd = 0).
inline Complex effective_lagrangian(const ModelParams& p, const PhasePoint& s) {
    const double k = p.friction();
    const Complex real_part = p.m * s.vx * s.vxd - 0.5 * k * (s.vx * s.xd - s.x * s.vxd) -
                              potential(p, s.x + 0.5 * s.xd) + potential(p, s.x - 0.5 * s.xd);
    const Complex imag_part = decoherence_potential(p, s.xd) + 0.5 * p.d2 * s.vxd * s.vxd;
    return real_part + Complex(0.0, 1.0) * imag_part;
}

// Stationary (rigid) decoherence: the propagator exponent on a frozen pair
// of trajectories, plus the associated time and length scales.
struct StationaryWeight {
    Complex exponent;   // log of the frozen-trajectory propagator
    double tau_sd;      // hbar / V(xd); +inf when V(xd) = 0
    double ell_sd_sq;   // 2 hbar / (d0 t); +inf when d0 = 0
};

inline StationaryWeight stationary_propagator(const ModelParams& p, double x, double xd, double t) {
    if (!(t > 0.0)) throw DomainError("stationary_propagator: t must be > 0");
    const Complex du = potential(p, Complex(x + 0.5 * xd)) - potential(p, Complex(x - 0.5 * xd));
    const double v = decoherence_potential(p, Complex(xd)).real();
    StationaryWeight w;
    w.exponent = Complex(0.0, -t / (2.0 * p.hbar)) * du - Complex(t / p.hbar * v, 0.0);
    w.tau_sd = v > 0.0 ? p.hbar / v : kInf;
    w.ell_sd_sq = p.d0 > 0.0 ? 2.0 * p.hbar / (p.d0 * t) : kInf;
    return w;
}

// ---------------------------------------------------------------------------
// Stationary points of the saddle equations:
//   i V'(xd) = U'(x + xd/2) = U'(x - xd/2)
// solved over complex (x, xd) by damped Newton from a deterministic grid of
// starts. When U' vanishes identically (omega = 0, g = 0) the solution set is
// the line xd = 0 with x free; that case is detected by rank analysis of the
// Jacobian and reported through the degenerate_line flag.
// ---------------------------------------------------------------------------

struct ComplexRegion {
    Complex lo{-2.0, -2.0};  // corner with minimal real/imag parts
    Complex hi{2.0, 2.0};
};

struct StationaryPoint {
    Complex x, xd;
    double residual;
};

struct StationaryPointSet {
    std::vector<StationaryPoint> points;
    bool degenerate_line = false;  // every (x, 0) solves the system
    std::size_t failed_starts = 0;
};

namespace detail {

struct StatResidual {
    Complex f1, f2;  // f1 = iV'(xd) - U'(x+xd/2), f2 = U'(x+xd/2) - U'(x-xd/2)
};

inline StatResidual stationary_residual(const ModelParams& p, Complex x, Complex xd) {
    const Complex up = potential_force(p, x + 0.5 * xd);
    const Complex um = potential_force(p, x - 0.5 * xd);
    return {Complex(0.0, 1.0) * decoherence_force(p, xd) - up, up - um};
}

inline double stat_norm(const StatResidual& r) {
    return std::sqrt(std::norm(r.f1) + std::norm(r.f2));
}

}  // namespace detail

inline StationaryPointSet stationary_points(const ModelParams& p, const ComplexRegion& box,
                                            std::size_t n_starts) {
    if (n_starts < 1) throw DomainError("stationary_points: n_starts must be >= 1");
    constexpr double kResidualTol = 1e-10;
    constexpr double kDedupTol = 1e-8;

    // deterministic grid of starts in (Re x, Im x, Re xd, Im xd), (0,0) first
    std::vector<std::array<double, 4>> starts;
    starts.push_back({0.0, 0.0, 0.0, 0.0});
    std::size_t per_axis = 1;
    while (per_axis * per_axis * per_axis * per_axis < n_starts) ++per_axis;
    const auto coord = [&](double lo, double hi, std::size_t i) {
        return per_axis == 1 ? 0.5 * (lo + hi)
                             : lo + (hi - lo) * (0.5 + double(i)) / double(per_axis);
    };
    for (std::size_t a = 0; a < per_axis && starts.size() <= n_starts; ++a)
        for (std::size_t b = 0; b < per_axis && starts.size() <= n_starts; ++b)
            for (std::size_t c = 0; c < per_axis && starts.size() <= n_starts; ++c)
                for (std::size_t d = 0; d < per_axis && starts.size() <= n_starts; ++d)
                    starts.push_back({coord(box.lo.real(), box.hi.real(), a),
                                      coord(box.lo.imag(), box.hi.imag(), b),
                                      coord(box.lo.real(), box.hi.real(), c),
                                      coord(box.lo.imag(), box.hi.imag(), d)});

    StationaryPointSet out;
    // U' == 0 identically makes the x-direction flat; checked via the Jacobian
    // columns after convergence, but the algebraic case is caught up front so
    // the degenerate line is reported even when Newton has nothing to do.
    const bool u_flat = p.omega == 0.0 && p.g == 0.0;

    for (const auto& s0 : starts) {
        Complex x(s0[0], s0[1]), xd(s0[2], s0[3]);
        bool ok = false;
        for (int it = 0; it < 80; ++it) {
            const auto r = detail::stationary_residual(p, x, xd);
            const double rn = detail::stat_norm(r);
            if (rn <= kResidualTol) { ok = true; break; }
            // complex 2x2 Newton (the residual is holomorphic in (x, xd))
            const Complex upp = potential_curvature(p, x + 0.5 * xd);
            const Complex upm = potential_curvature(p, x - 0.5 * xd);
            const Complex j11 = -upp, j12 = Complex(0.0, 1.0) * decoherence_curvature(p, xd) - 0.5 * upp;
            const Complex j21 = upp - upm, j22 = 0.5 * (upp + upm);
            const Complex det = j11 * j22 - j12 * j21;
            if (std::abs(det) < 1e-300) break;
            const Complex dx = (r.f1 * j22 - j12 * r.f2) / det;
            const Complex dxd = (j11 * r.f2 - r.f1 * j21) / det;
            double lam = 1.0;
            bool stepped = false;
            for (int ls = 0; ls < 30; ++ls) {
                const Complex xn = x - lam * dx, xdn = xd - lam * dxd;
                if (detail::stat_norm(detail::stationary_residual(p, xn, xdn)) < rn) {
                    x = xn; xd = xdn; stepped = true; break;
                }
                lam *= 0.5;
            }
            if (!stepped) break;
        }
        if (!ok) { ++out.failed_starts; continue; }

        // rank analysis: vanishing x-columns of the Jacobian flag the line
        const Complex upp = potential_curvature(p, x + 0.5 * xd);
        const Complex upm = potential_curvature(p, x - 0.5 * xd);
        const double xcol = std::sqrt(std::norm(upp) + std::norm(upp - upm));
        const double jscale = std::abs(decoherence_curvature(p, xd)) + std::abs(upp) + std::abs(upm);
        if (u_flat || xcol <= 1e-12 * (1.0 + jscale)) {
            out.degenerate_line = true;
            continue;
        }

        bool dup = false;
        for (const auto& q : out.points)
            if (std::abs(q.x - x) + std::abs(q.xd - xd) < kDedupTol) { dup = true; break; }
        if (!dup)
            out.points.push_back({x, xd, detail::stat_norm(detail::stationary_residual(p, x, xd))});
    }

    if (out.degenerate_line) {
        // report the canonical representative of the line
        out.points.clear();
        out.points.push_back({Complex(0.0, 0.0), Complex(0.0, 0.0), 0.0});
    }
    return out;
}

}  // namespace decolab
