// harmonic.hpp -- closed-form quadratic effective action of the damped
// harmonic oscillator and the Brownian particle: normal frequencies, the
// coefficients {M, Omega^2, K, D_i, D_f, D_m}, the action as a quadratic
// form of the boundary data, regime time scales and the dynamical
// suppression factor.
//
// All coefficient formulas are evaluated through complex omega_nu in long
// double, with algebraically equivalent rewritings (expm1, sin(z)/z) that
// stay stable at small t, at critical damping and deep in the overdamped
// regime; a short series branch takes over below max(|omega_nu| t, nu t)
// < 1e-3 where the closed forms cancel.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "decolab/model.hpp"

namespace decolab {

enum class Regime { underdamped, overdamped, critical, brownian };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::underdamped: return "underdamped";
        case Regime::overdamped: return "overdamped";
        case Regime::critical: return "critical";
        case Regime::brownian: return "brownian";
    }
    return "?";
}

// The four normal frequencies omega_{ss'} = s i nu/2 + s' omega_nu with
// omega_nu = sqrt(omega^2 - nu^2/4), ordered (++), (+-), (-+), (--).
struct NormalFrequencies {
    std::array<Complex, 4> omega_ss;
    Complex omega_nu;
    double omega_bar;  // sqrt(nu^2/4 - omega^2) when overdamped, else 0
    Regime regime;
};

inline Regime classify_regime(const ModelParams& p) {
    if (p.omega == 0.0) return Regime::brownian;
    if (p.nu == 0.0 || p.omega > 0.5 * p.nu) return Regime::underdamped;
    if (p.omega == 0.5 * p.nu) return Regime::critical;
    return Regime::overdamped;
}

inline NormalFrequencies normal_frequencies(const ModelParams& p) {
    NormalFrequencies nf;
    nf.regime = classify_regime(p);
    const double disc = p.omega * p.omega - 0.25 * p.nu * p.nu;
    nf.omega_nu = std::sqrt(Complex(disc, 0.0));  // i*omega_bar when overdamped
    nf.omega_bar = disc < 0.0 ? std::sqrt(-disc) : 0.0;
    const Complex half_nu(0.0, 0.5 * p.nu);
    nf.omega_ss = {half_nu + nf.omega_nu, half_nu - nf.omega_nu,
                   -half_nu + nf.omega_nu, -half_nu - nf.omega_nu};
    return nf;
}

struct QuadraticAction {
    double t = 0.0;
    double M = 0.0, Omega2 = 0.0, K = 0.0;
    double D_i = 0.0, D_f = 0.0, D_m = 0.0;
};

struct RealCoeffs { double M, Omega2, K; };
struct DecoherenceCoeffs { double D_i, D_f, D_m; };

constexpr double kDefaultPoleTol = 1e-8;

namespace detail {

using LD = long double;
using CLD = std::complex<long double>;

// sin(z)/z, entire; series below |z| ~ 1e-8 where direct division loses digits
inline CLD sincard(CLD z) {
    if (std::abs(z) < 1e-8L) return CLD(1.0L) - z * z / 6.0L;
    return std::sin(z) / z;
}

inline double nearest_focus_pole(double wnu_real, double t) {
    if (wnu_real <= 0.0) return kInf;
    const double n = std::round(wnu_real * t / M_PI);
    return (n < 1.0 ? 1.0 : n) * M_PI / wnu_real;
}

struct Trig {
    CLD s;      // sin(omega_nu t)/omega_nu  (real and ~t at critical damping)
    CLD c;      // cos(omega_nu t)
    LD ch, sh;  // cosh(nu t/2), sinh(nu t/2)
    LD wnu_re;  // Re omega_nu (0 when overdamped)
};

inline Trig make_trig(const ModelParams& p, double t, double pole_tol) {
    const LD w2 = LD(p.omega) * p.omega, nu = p.nu;
    const CLD wnu = std::sqrt(CLD(w2 - nu * nu / 4.0L));
    Trig tr;
    tr.s = sincard(wnu * LD(t)) * LD(t);
    tr.c = std::cos(wnu * LD(t));
    tr.ch = std::cosh(nu * LD(t) / 2.0L);
    tr.sh = std::sinh(nu * LD(t) / 2.0L);
    tr.wnu_re = wnu.real();
    // focusing pole: zero of s(t); only reachable for real omega_nu
    if (std::abs(tr.s) < pole_tol * LD(t))
        throw PoleError("harmonic closed forms: focusing pole at sin(omega_nu t) = 0 near t = " +
                            std::to_string(nearest_focus_pole(double(tr.wnu_re), t)),
                        nearest_focus_pole(double(tr.wnu_re), t));
    // anti-focusing pole of Omega^2 and M: cosh(nu t/2) + cos(omega_nu t) = 0
    if (std::abs(tr.ch + tr.c) < pole_tol * tr.ch) {
        const double w = double(tr.wnu_re) > 0.0 ? double(tr.wnu_re) : p.omega;
        const double n = std::max(0.0, std::round((w * t / M_PI - 1.0) / 2.0));
        throw PoleError("harmonic closed forms: anti-focusing pole near t = " +
                            std::to_string((2.0 * n + 1.0) * M_PI / w),
                        (2.0 * n + 1.0) * M_PI / w);
    }
    return tr;
}

// strongly overdamped (omega << nu): coefficients regrouped so every term is
// explicitly O(omega^2); needed to keep the omega -> 0 limit accurate
inline bool strongly_overdamped(const ModelParams& p) {
    return p.omega < 0.25 * p.nu;
}

}  // namespace detail

// M, Omega^2, K of the quadratic action. Evaluated through complex omega_nu
// so every damping regime comes from the same expressions.
inline RealCoeffs quadratic_action_real(const ModelParams& p, double t,
                                        double pole_tol = kDefaultPoleTol) {
    using namespace detail;
    if (!(t > 0.0)) throw DomainError("quadratic_action_real: t must be > 0");
    if (p.omega == 0.0) {
        if (p.nu == 0.0) return {p.m, 0.0, 0.0};  // free particle
        const LD z = LD(p.nu) * t / 2.0L;
        return {double(LD(p.m) * z / std::tanh(z)), 0.0, p.m * p.nu};
    }
    if (strongly_overdamped(p)) {
        const LD w2 = LD(p.omega) * p.omega, nu = p.nu;
        const LD ob = std::sqrt(nu * nu / 4.0L - w2);
        const LD r = 4.0L * w2 / (nu + 2.0L * ob);   // nu - 2 omega_bar, stable
        const LD Sp = (nu / 2.0L + ob) * t;
        const LD sh = std::sinh(ob * LD(t));
        RealCoeffs rc;
        rc.M = double(LD(p.m) * t * ob * std::cosh(Sp / 2.0L) * std::cosh(r * t / 4.0L) / sh);
        rc.Omega2 = double(4.0L / (LD(t) * t) * std::tanh(Sp / 2.0L) * std::tanh(r * t / 4.0L));
        rc.K = double(2.0L * LD(p.m) * ob * std::sinh(nu * LD(t) / 2.0L) / sh);
        return rc;
    }
    const Trig tr = make_trig(p, t, pole_tol);
    const CLD M = LD(p.m) * (LD(t) / tr.s) * (tr.c + tr.ch) / 2.0L;
    // cosh - cos written as a sum of squares to survive t -> 0
    const CLD num = 2.0L * CLD(std::sinh(LD(p.nu) * t / 4.0L)) * std::sinh(LD(p.nu) * t / 4.0L) +
                    2.0L * std::sin(std::sqrt(CLD(LD(p.omega) * p.omega - LD(p.nu) * p.nu / 4.0L)) *
                                    LD(t) / 2.0L) *
                        std::sin(std::sqrt(CLD(LD(p.omega) * p.omega - LD(p.nu) * p.nu / 4.0L)) *
                                 LD(t) / 2.0L);
    const CLD Om2 = 4.0L * num / (LD(t) * t * (tr.ch + tr.c));
    const CLD K = 2.0L * LD(p.m) * tr.sh / tr.s;
    return {double(M.real()), double(Om2.real()), double(K.real())};
}

// Brownian decoherence coefficients (omega = 0). The d0 parts use exact
// polynomial rewritings in (eps, b) with b = 1 - e^{-eps}, plus a short
// series below eps < 1e-3 where the polynomials cancel.
inline DecoherenceCoeffs brownian_action_decoherence(const ModelParams& p, double t) {
    using detail::LD;
    if (p.omega != 0.0) throw DomainError("brownian_action_decoherence: omega must be 0");
    if (!(t > 0.0)) throw DomainError("brownian_action_decoherence: t must be > 0");
    if (p.nu == 0.0) {
        if (p.d0 == 0.0 && p.d2 == 0.0) return {0.0, 0.0, 0.0};
        throw DomainError("brownian_action_decoherence: nu = 0 with nonzero couplings has no limit");
    }
    const LD eps = LD(p.nu) * t;
    const LD b = -std::expm1(-eps);  // 1 - e^{-eps}
    LD Ni, Nf, Nm;
    if (eps < 1e-3L) {
        const LD e3 = eps * eps * eps;
        Ni = e3 * (2.0L / 3.0L + eps * (-0.5L + eps * (7.0L / 30.0L + eps * (-1.0L / 12.0L + eps * (31.0L / 1260.0L + eps * (-1.0L / 160.0L + eps * 127.0L / 90720.0L))))));
        Nf = e3 * (2.0L / 3.0L + eps * (-5.0L / 6.0L + eps * (17.0L / 30.0L + eps * (-49.0L / 180.0L + eps * (43.0L / 420.0L + eps * (-107.0L / 3360.0L + eps * 769.0L / 90720.0L))))));
        Nm = e3 * (1.0L / 3.0L + eps * (-1.0L / 3.0L + eps * (11.0L / 60.0L + eps * (-13.0L / 180.0L + eps * (19.0L / 840.0L + eps * (-1.0L / 168.0L + eps * 247.0L / 181440.0L))))));
    } else {
        // exact: Ni = 2eps - 3 + 4e^-eps - e^-2eps, Nf = 1 - 4e^-eps + (2eps+3)e^-2eps,
        //        Nm = 1 - 2eps e^-eps - e^-2eps, expanded in b to avoid cancellation
        Ni = 2.0L * eps - 2.0L * b - b * b;
        Nf = 2.0L * eps - 2.0L * b - 4.0L * eps * b + 3.0L * b * b + 2.0L * eps * b * b;
        Nm = -2.0L * eps + 2.0L * b + 2.0L * eps * b - b * b;
    }
    const LD den = 2.0L * LD(p.nu) * b * b;
    const LD d2term = LD(p.d2) * p.nu * (2.0L - b) / (2.0L * b);  // d2 nu (1-e^-2eps)/(2(1-e^-eps)^2)
    return {double(LD(p.d0) * Ni / den + d2term),
            double(LD(p.d0) * Nf / den + d2term),
            double(LD(p.d0) * Nm / den - d2term)};
}

// D_i, D_f, D_m of the harmonic quadratic action (omega > 0).
inline DecoherenceCoeffs quadratic_action_decoherence(const ModelParams& p, double t,
                                                      double pole_tol = kDefaultPoleTol) {
    using namespace detail;
    if (p.omega == 0.0)
        throw DomainError("quadratic_action_decoherence: omega = 0 is the Brownian branch");
    if (!(t > 0.0)) throw DomainError("quadratic_action_decoherence: t must be > 0");
    if (p.d0 == 0.0 && p.d2 == 0.0) return {0.0, 0.0, 0.0};

    const LD w2 = LD(p.omega) * p.omega, nu = p.nu, d0 = p.d0, d2 = p.d2, tt = t;
    const LD dpl = d0 + d2 * w2, dmi = d0 - d2 * w2;

    if (std::max(std::sqrt(std::abs(w2 - nu * nu / 4.0L)) * tt, nu * tt) < 1e-3L) {
        // joint small-t series (Laurent through t^5)
        const LD n2 = nu * nu;
        const LD ci1 = d0 / 3.0L + d2 * n2 / 12.0L;
        const LD ci2 = nu * (d0 + d2 * w2) / 12.0L;
        const LD ci3 = d0 * n2 / 180.0L + 2.0L * d0 * w2 / 45.0L - d2 * n2 * n2 / 720.0L +
                       d2 * n2 * w2 / 60.0L + d2 * w2 * w2 / 45.0L;
        const LD ci4 = -d0 * n2 * nu / 720.0L + d0 * nu * w2 / 60.0L - d2 * n2 * nu * w2 / 720.0L +
                       d2 * nu * w2 * w2 / 60.0L;
        const LD ci5 = -d0 * n2 * n2 / 5040.0L + d0 * n2 * w2 / 1260.0L + 2.0L * d0 * w2 * w2 / 315.0L +
                       d2 * n2 * n2 * n2 / 30240.0L - d2 * n2 * n2 * w2 / 1680.0L +
                       d2 * n2 * w2 * w2 / 420.0L + 4.0L * d2 * w2 * w2 * w2 / 945.0L;
        const LD cm1 = d0 / 6.0L - d2 * n2 / 12.0L;
        const LD cm3 = -d0 * n2 / 180.0L + 7.0L * d0 * w2 / 180.0L + d2 * n2 * n2 / 720.0L -
                       d2 * n2 * w2 / 60.0L + 7.0L * d2 * w2 * w2 / 360.0L;
        const LD cm5 = d0 * n2 * n2 / 5040.0L - 11.0L * d0 * n2 * w2 / 5040.0L +
                       31.0L * d0 * w2 * w2 / 5040.0L - d2 * n2 * n2 * n2 / 30240.0L +
                       d2 * n2 * n2 * w2 / 1680.0L - 31.0L * d2 * n2 * w2 * w2 / 10080.0L +
                       31.0L * d2 * w2 * w2 * w2 / 7560.0L;
        const LD even = d2 / tt + tt * (ci1 + tt * tt * (ci3 + tt * tt * ci5));
        const LD odd = tt * tt * (ci2 + tt * tt * ci4);
        return {double(even + odd), double(even - odd),
                double(-d2 / tt + tt * (cm1 + tt * tt * (cm3 + tt * tt * cm5)))};
    }

    if (strongly_overdamped(p)) {
        const LD ob = std::sqrt(nu * nu / 4.0L - w2);
        const LD r = 4.0L * w2 / (nu + 2.0L * ob);  // nu - 2 omega_bar
        const LD E2 = std::expm1(-2.0L * ob * tt);
        const LD ER = std::expm1(r * tt);
        const LD ERm = std::expm1(-r * tt);
        // dmi*nu - 2*dpl*ob regrouped so each piece carries the explicit w2
        const LD comb1 = dpl * r - 2.0L * d2 * w2 * nu;
        const LD Di = (4.0L * dpl * ob * ob * ER + 2.0L * ob * comb1 * E2 -
                       nu * (dmi * r / 2.0L + d2 * w2 * nu) * E2 * E2) /
                      (2.0L * w2 * nu * E2 * E2);
        const LD onep = 1.0L + E2;
        const LD Df = (8.0L * ob * comb1 * E2 +
                       (16.0L * dpl * w2 - 2.0L * nu * (dmi * r + 2.0L * d2 * w2 * nu)) * E2 * E2 -
                       16.0L * dpl * ob * ob * ERm * onep * onep) /
                      (8.0L * w2 * nu * E2 * E2);
        const LD Sp = (nu / 2.0L + ob) * tt;
        const LD shSp = std::sinh(Sp), shr = std::sinh(r * tt / 2.0L);
        const LD s = std::sinh(ob * tt) / ob;
        const LD Dm = (dmi * ((r / (2.0L * ob)) * shSp - ((nu + 2.0L * ob) / (2.0L * ob)) * shr) -
                       2.0L * d2 * w2 * (shSp + shr)) /
                      (2.0L * w2 * nu * s * s);
        return {double(Di), double(Df), double(Dm)};
    }

    const Trig tr = make_trig(p, t, pole_tol);
    const CLD s = tr.s, c = tr.c, s2 = s * s;
    CLD Di, Df, Dm;
    if (p.nu > 0.0) {
        const LD emp = std::expm1(nu * tt), emm = std::expm1(-nu * tt);
        Di = (4.0L * dpl * emp - 2.0L * dpl * nu * nu * s2 - 4.0L * dmi * nu * s * c) /
             (8.0L * w2 * nu * s2);
        Df = (-4.0L * dpl * emm + 2.0L * dpl * nu * nu * s2 - 4.0L * dmi * nu * s * c) /
             (8.0L * w2 * nu * s2);
        Dm = (dmi * nu * s * tr.ch - 2.0L * dpl * c * tr.sh) / (2.0L * w2 * nu * s2);
    } else {
        // frictionless limit of the same expressions
        Di = (dpl * tt - dmi * s * c) / (2.0L * w2 * s2);
        Df = Di;
        Dm = (dmi * s - dpl * c * tt) / (2.0L * w2 * s2);
    }
    return {double(Di.real()), double(Df.real()), double(Dm.real())};
}

inline QuadraticAction quadratic_action(const ModelParams& p, double t,
                                        double pole_tol = kDefaultPoleTol) {
    QuadraticAction qa;
    qa.t = t;
    const RealCoeffs rc = quadratic_action_real(p, t, pole_tol);
    qa.M = rc.M; qa.Omega2 = rc.Omega2; qa.K = rc.K;
    const DecoherenceCoeffs dc = p.omega == 0.0 ? brownian_action_decoherence(p, t)
                                                : quadratic_action_decoherence(p, t, pole_tol);
    qa.D_i = dc.D_i; qa.D_f = dc.D_f; qa.D_m = dc.D_m;
    return qa;
}

// Bilinear coefficients of the on-shell action,
//   S = a_ff x_f xd_f + a_fi x_f xd_i + a_if x_i xd_f + a_ii x_i xd_i
//       + i (D_i/2 xd_i^2 + D_f/2 xd_f^2 + D_m xd_i xd_f).
// The friction coefficient K enters the cross terms only; this is the
// convention in which S equals the Lagrangian quadrature along the saddle
// and the propagator obeys the composition law.
struct ActionKernel {
    double a_ff, a_fi, a_if, a_ii;
    double D_i, D_f, D_m;
    double t;
};

inline ActionKernel action_kernel(const QuadraticAction& qa) {
    const double diag = qa.M / qa.t - qa.t * qa.M * qa.Omega2 / 4.0;
    const double cross = -qa.M / qa.t - qa.t * qa.M * qa.Omega2 / 4.0;
    return {diag, cross - 0.5 * qa.K, cross + 0.5 * qa.K, diag, qa.D_i, qa.D_f, qa.D_m, qa.t};
}

inline Complex action_value(const QuadraticAction& qa, const BoundaryData& b) {
    if (std::abs(qa.t - b.duration()) > 1e-12 * std::max(1.0, std::abs(qa.t)))
        throw ValidationError("action_value: QuadraticAction time does not match the boundary data");
    const ActionKernel k = action_kernel(qa);
    const Complex real_part = k.a_ff * b.x_f * b.xd_f + k.a_fi * b.x_f * b.xd_i +
                              k.a_if * b.x_i * b.xd_f + k.a_ii * b.x_i * b.xd_i;
    const Complex imag_part = 0.5 * k.D_i * b.xd_i * b.xd_i + 0.5 * k.D_f * b.xd_f * b.xd_f +
                              k.D_m * b.xd_i * b.xd_f;
    return real_part + Complex(0.0, 1.0) * imag_part;
}

// D_dyn = exp(-D_i dx^2 / 2 hbar) for a pair of localized states a distance
// dx apart, and the dynamical decoherence length sqrt(2 hbar / D_i).
struct Suppression {
    double factor;
    double length;  // +inf for closed dynamics
};

inline Suppression dynamical_suppression(double D_i, double dx, double hbar) {
    if (!(hbar > 0.0)) throw DomainError("dynamical_suppression: hbar must be > 0");
    if (D_i < 0.0) throw DomainError("dynamical_suppression: D_i must be >= 0");
    if (D_i == 0.0) return {1.0, kInf};
    return {std::exp(-0.5 * D_i * dx * dx / hbar), std::sqrt(2.0 * hbar / D_i)};
}

// Transient/relaxed time scales from Im omega_{+sigma} and the asymptotic
// exponential growth rate of the decoherence parameters.
struct RegimeInfo {
    double tau_i, tau_r;
    double asymptotic_slope;  // nu (underdamped), nu - 2 omega_bar (overdamped), 0 (brownian)
    Regime regime;
};

inline RegimeInfo regime_info(const ModelParams& p) {
    if (!(p.nu > 0.0)) throw DomainError("regime_info: nu must be > 0");
    const Regime reg = classify_regime(p);
    switch (reg) {
        case Regime::brownian:
            return {1.0 / p.nu, 1.0 / p.nu, 0.0, reg};
        case Regime::overdamped: {
            const double ob = std::sqrt(0.25 * p.nu * p.nu - p.omega * p.omega);
            // nu - 2 omega_bar evaluated as 4 omega^2/(nu + 2 omega_bar)
            const double slope = 4.0 * p.omega * p.omega / (p.nu + 2.0 * ob);
            return {1.0 / (0.5 * p.nu + ob), 1.0 / (0.5 * p.nu - ob), slope, reg};
        }
        default:
            return {2.0 / p.nu, 2.0 / p.nu, p.nu, reg};
    }
}

}  // namespace decolab
