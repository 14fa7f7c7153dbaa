// gaussian.hpp -- Gaussian density matrices rho = N exp(-q2 x^2/2
// - r2 xd^2/2 + i s2 x xd), their evolution through the quadratic
// propagator and the instantaneous decoherence measures.

#pragma once

#include <cmath>
#include <complex>

#include "decolab/harmonic.hpp"
#include "decolab/model.hpp"

namespace decolab {

struct GaussianState {
    double q2 = 1.0;   // coefficient of -x^2/2
    double r2 = 0.25;  // coefficient of -xd^2/2
    double s2 = 0.0;   // coefficient of +i x xd
    double norm = 0.0; // N fixing Tr rho = 1

    double kappa() const { return std::sqrt(r2 / q2); }
    double purity() const { return 0.5 / kappa(); }

    void validate() const {
        if (!(q2 > 0.0) || !(r2 > 0.0))
            throw ValidationError("GaussianState: q2 and r2 must be > 0");
        if (!std::isfinite(s2)) throw ValidationError("GaussianState: s2 must be finite");
        if (kappa() < 0.5 - 1e-12)
            throw ValidationError("GaussianState: kappa = sqrt(r2/q2) must be >= 1/2");
    }

    static GaussianState make(double q2, double r2, double s2 = 0.0) {
        GaussianState st{q2, r2, s2, std::sqrt(q2 / (2.0 * M_PI))};
        st.validate();
        return st;
    }

    // kappa = 1/2, the pure wave packet
    static GaussianState pure(double q2, double s2 = 0.0) { return make(q2, 0.25 * q2, s2); }

    static GaussianState with_kappa(double q2, double kappa, double s2 = 0.0) {
        return make(q2, kappa * kappa * q2, s2);
    }
};

struct Mixedness {
    double kappa;
    double purity;  // 1/(2 kappa), 1 iff pure
};

inline Mixedness mixedness(const GaussianState& st) {
    st.validate();
    return {st.kappa(), st.purity()};
}

// D_inst = exp(-(x+ - x-)^2 / 2 ell_id^2) with 1/ell_id^2 = q^2 (kappa^2 - 1/4).
struct InstantSuppression {
    double factor;
    double length;  // +inf iff pure
};

inline InstantSuppression instantaneous_suppression(const GaussianState& st, double x_plus,
                                                    double x_minus) {
    st.validate();
    const double inv_len2 = st.r2 - 0.25 * st.q2;  // q2 (kappa^2 - 1/4)
    const double dx = x_plus - x_minus;
    if (inv_len2 <= 0.0) return {1.0, kInf};
    return {std::exp(-0.5 * dx * dx * inv_len2), 1.0 / std::sqrt(inv_len2)};
}

// One application of the quadratic propagator: the two-dimensional Gaussian
// integral over the initial coordinates done by completion of squares. The
// updated parameters are real up to roundoff; the imaginary residue is
// checked and discarded, and the trace is re-imposed through norm.
inline GaussianState propagate(const GaussianState& st, const QuadraticAction& qa, double hbar) {
    st.validate();
    if (!(hbar > 0.0)) throw DomainError("propagate: hbar must be > 0");
    const ActionKernel k = action_kernel(qa);
    const Complex I(0.0, 1.0);

    // integrand exponent in u = (x_i, xd_i): -u^T A u/2 + b^T u + (final terms)
    const double A11 = st.q2;
    const double A22 = st.r2 + k.D_i / hbar;
    const Complex A12 = -I * (st.s2 + k.a_ii / hbar);
    if (!(A22 > 0.0))
        throw NonIntegrableError("propagate: initial Gaussian integral diverges (r2 + D_i/hbar <= 0)");
    const Complex det = A11 * A22 - A12 * A12;
    if (std::abs(det) < 1e-300) throw NonIntegrableError("propagate: singular quadratic form");

    const Complex b1_d = I * k.a_if / hbar;                       // coefficient of xd_f in b1
    const Complex b2_f = I * k.a_fi / hbar;                       // coefficient of x_f in b2
    const Complex b2_d = Complex(-k.D_m / hbar, 0.0);             // coefficient of xd_f in b2
    const Complex iA11 = A11 / det, iA22 = A22 / det, iA12 = -A12 / det;

    // exponent of rho_f: cf2 x_f^2 + cd2 xd_f^2 + cfd x_f xd_f
    const Complex cf2 = 0.5 * iA11 * b2_f * b2_f;
    const Complex cd2 = -0.5 * k.D_f / hbar + 0.5 * iA22 * b1_d * b1_d + 0.5 * iA11 * b2_d * b2_d +
                        iA12 * b1_d * b2_d;
    const Complex cfd = I * k.a_ff / hbar + iA11 * b2_f * b2_d + iA12 * b1_d * b2_f;

    const Complex q2n = -2.0 * cf2;
    const Complex r2n = -2.0 * cd2;
    const Complex s2n = -I * cfd;

    const auto residue = [](Complex z) {
        return std::abs(z.imag()) / std::max(std::abs(z), 1e-300);
    };
    if (residue(q2n) > 1e-10 || residue(r2n) > 1e-10 || residue(s2n) > 1e-10)
        throw NonIntegrableError("propagate: updated parameters acquired an imaginary part");
    if (!(q2n.real() > 0.0) || !(r2n.real() > 0.0))
        throw NonIntegrableError("propagate: evolved state is not normalizable");

    return GaussianState::make(q2n.real(), r2n.real(), s2n.real());
}

// Propagate over a finite interval by composing pole-free steps. Steps avoid
// the focusing poles by halving on PoleError; the default step is 0.37/nu
// (or a frequency-limited value for weakly damped models).
inline GaussianState propagate_interval(const ModelParams& p, GaussianState st, double duration,
                                        double hbar, double dt_hint = 0.0) {
    if (duration < 0.0) throw DomainError("propagate_interval: duration must be >= 0");
    double dt = dt_hint;
    if (dt <= 0.0) {
        dt = kInf;
        if (p.nu > 0.0) dt = 0.37 / p.nu;
        if (p.omega > 0.0) dt = std::min(dt, 0.5 / p.omega);
        if (!std::isfinite(dt)) dt = duration;
    }
    double remaining = duration;
    while (remaining > 1e-15 * std::max(1.0, duration)) {
        double step = std::min(dt, remaining);
        for (int attempt = 0;; ++attempt) {
            try {
                st = propagate(st, quadratic_action(p, step), hbar);
                break;
            } catch (const PoleError&) {
                if (attempt >= 40) throw;
                step *= 0.5;
            }
        }
        remaining -= step;
    }
    return st;
}

// Relaxed values of the wave-packet parameters and the asymptotic
// instantaneous decoherence length.
struct AsymptoticState {
    double q2_inf, r2_inf;
    double ell_id_inf;   // NaN when the radicand is negative
    bool ell_real;
    bool positivity_ok;  // nu^2 <= 2 d0 d2 / m^2
};

inline AsymptoticState asymptotic_state(const ModelParams& p) {
    if (!(p.nu > 0.0) || !(p.omega > 0.0))
        throw DomainError("asymptotic_state: needs nu > 0 and omega > 0");
    const double dpl = p.d0 + p.d2 * p.omega * p.omega;
    if (!(dpl > 0.0)) throw DomainError("asymptotic_state: d0 + d2 omega^2 must be > 0");
    AsymptoticState a;
    a.q2_inf = 2.0 * p.m * p.m * p.nu * p.omega * p.omega / (p.hbar * dpl);
    a.r2_inf = (dpl * dpl + p.d0 * p.d2 * p.nu * p.nu) / (2.0 * p.hbar * p.nu * dpl);
    const double rad = dpl * dpl + p.nu * p.nu * (p.d0 * p.d2 - p.m * p.m * p.omega * p.omega);
    a.ell_real = rad > 0.0;
    a.ell_id_inf = a.ell_real ? std::sqrt(2.0 * p.hbar * p.nu * dpl / rad)
                              : std::numeric_limits<double>::quiet_NaN();
    a.positivity_ok = p.positivity_ok();
    return a;
}

}  // namespace decolab
