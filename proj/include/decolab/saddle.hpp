// saddle.hpp -- complex saddle-point trajectories of the effective action as
// a two-point boundary-value problem. The harmonic case is solved in closed
// form through the four normal modes; the quartic case by multiple shooting
// with damped Newton, homotopy continuation in g from the harmonic solution
// and a global midpoint-collocation fallback for stiff solves.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "decolab/harmonic.hpp"
#include "decolab/model.hpp"
#include "decolab/quadrature.hpp"

namespace decolab {

struct SaddleProblem {
    ModelParams model;           // model.g is the continuation target
    BoundaryData boundary;
    std::size_t n_nodes = 512;   // stored grid intervals
    std::size_t n_segments = 8;  // multiple-shooting segments
    double boundary_tol = 1e-10;
    double residual_tol = 1e-8;
    double newton_tol = 1e-12;
    std::size_t max_newton_iter = 60;

    void validate() const {
        model.validate();
        boundary.validate();
        if (n_nodes < 16) throw ValidationError("SaddleProblem: n_nodes must be >= 16");
        if (n_segments < 1) throw ValidationError("SaddleProblem: n_segments must be >= 1");
        if (!(boundary_tol > 0.0) || !(residual_tol > 0.0) || !(newton_tol > 0.0))
            throw ValidationError("SaddleProblem: tolerances must be > 0");
    }
};

struct SaddleSolution {
    std::vector<double> times;
    std::vector<Complex> x, xd, vx, vxd;
    Complex S_eff{};
    double boundary_residual = kInf;
    double ode_residual = kInf;
    bool converged = false;
    bool collocation_fallback_used = false;
    std::vector<double> continuation_path;
    std::string note;

    PhasePoint at(std::size_t i) const { return {x[i], xd[i], vx[i], vxd[i]}; }
};

// ---------------------------------------------------------------------------
// Closed-form linear saddle (g = 0) via the normal modes
// ---------------------------------------------------------------------------

namespace detail {

// Mode-based evaluator of the linear saddle trajectory. xd solves the
// homogeneous equation with inverted friction; Im x is driven by i V'(xd).
// Four branches: generic damped oscillator, frictionless, Brownian, free.
class HarmonicModes {
    using LD = long double;
    using C = std::complex<long double>;

    enum class Kind { generic, undamped, brownian, free_particle } kind_;
    LD m_, w2_, nu_, dpl_;
    C wnu2_;
    LD T_;
    // xd = e^{sig nu t/2}(alpha c + beta s) or polynomial/exponential forms
    C alpha_, beta_;
    C A_, B_;              // homogeneous x coefficients
    C P_, Q_;              // particular x coefficients (generic branch)
    C w0_, w1_;            // brownian drive pieces
    C res_a_, res_b_;      // undamped resonant particular coefficients
    double k_;             // friction constant m nu
    double d2_;

    C card_s(C z) const {  // sin(z)/z
        if (std::abs(z) < 1e-8L) return C(1.0L) - z * z / 6.0L;
        return std::sin(z) / z;
    }

public:
    HarmonicModes(const ModelParams& p, const BoundaryData& b, double pole_tol) {
        m_ = p.m; w2_ = LD(p.omega) * p.omega; nu_ = p.nu;
        dpl_ = p.d0 + p.d2 * p.omega * p.omega;
        k_ = p.friction(); d2_ = p.d2;
        T_ = b.duration();
        const C I(0.0L, 1.0L);
        const C xi(b.x_i.real(), b.x_i.imag()), xdi(b.xd_i.real(), b.xd_i.imag());
        const C xf(b.x_f.real(), b.x_f.imag()), xdf(b.xd_f.real(), b.xd_f.imag());
        constexpr double kTiny = 1e-6;

        if (p.omega < kTiny && p.nu < kTiny) kind_ = Kind::free_particle;
        else if (p.omega < kTiny) kind_ = Kind::brownian;
        else if (p.nu < kTiny) kind_ = Kind::undamped;
        else kind_ = Kind::generic;

        switch (kind_) {
            case Kind::generic: {
                wnu2_ = C(w2_ - nu_ * nu_ / 4.0L);
                const C wnu = std::sqrt(wnu2_);
                const C sT = card_s(wnu * T_) * T_, cT = std::cos(wnu * T_);
                if (std::abs(sT) < pole_tol * T_)
                    throw PoleError("harmonic_saddle: focusing pole (sin omega_nu t = 0)",
                                    nearest_focus_pole(double(wnu.real()), double(T_)));
                alpha_ = xdi;
                beta_ = (xdf * std::exp(C(-nu_ * T_ / 2.0L)) - alpha_ * cT) / sT;
                // particular solution e^{nu t/2}(P c + Q s) for the drive
                // (i/m)(dpl xd - d2 nu xd')
                const C Wc = I / m_ * (dpl_ * alpha_ - LD(d2_) * nu_ * (alpha_ * nu_ / 2.0L + beta_));
                const C Ws = I / m_ * (dpl_ * beta_ - LD(d2_) * nu_ * (beta_ * nu_ / 2.0L - alpha_ * wnu2_));
                const LD det = 4.0L * nu_ * nu_ * w2_;
                P_ = (nu_ * nu_ * Wc - 2.0L * nu_ * Ws) / det;
                Q_ = (2.0L * nu_ * wnu2_ * Wc + nu_ * nu_ * Ws) / det;
                const C xp0 = P_;  // x_p(0)
                const C xpT = std::exp(C(nu_ * T_ / 2.0L)) * (P_ * cT + Q_ * sT);
                A_ = xi - xp0;
                B_ = ((xf - xpT) - A_ * std::exp(C(-nu_ * T_ / 2.0L)) * cT) *
                     std::exp(C(nu_ * T_ / 2.0L)) / sT;
                break;
            }
            case Kind::undamped: {
                wnu2_ = C(w2_);
                const C wnu = std::sqrt(wnu2_);
                const C sT = card_s(wnu * T_) * T_, cT = std::cos(wnu * T_);
                if (std::abs(sT) < pole_tol * T_)
                    throw PoleError("harmonic_saddle: focusing pole (sin omega t = 0)",
                                    nearest_focus_pole(double(wnu.real()), double(T_)));
                alpha_ = xdi;
                beta_ = (xdf - alpha_ * cT) / sT;
                // resonant particular: (i dpl/m)[alpha t s/2 - beta t c/(2 w^2)]
                res_a_ = I * dpl_ / m_ * alpha_ / 2.0L;
                res_b_ = -I * dpl_ / m_ * beta_ / (2.0L * w2_);
                const C xpT = res_a_ * T_ * sT + res_b_ * T_ * cT;
                A_ = xi;
                B_ = (xf - xpT - A_ * cT) / sT;
                break;
            }
            case Kind::brownian: {
                const LD em = std::expm1(nu_ * T_);
                beta_ = (xdf - xdi) / em;       // xd = alpha + beta e^{nu t}
                alpha_ = xdi - beta_;
                w0_ = I / m_ * LD(p.d0) * alpha_;
                w1_ = I / m_ * (LD(p.d0) - LD(d2_) * nu_ * nu_) * beta_;
                // x_p = (w0/nu) t + w1 e^{nu t}/(2 nu^2)
                const C xp0 = w1_ / (2.0L * nu_ * nu_);
                const C xpT = w0_ / nu_ * T_ + w1_ * std::exp(C(nu_ * T_)) / (2.0L * nu_ * nu_);
                const C Di = xi - xp0, Df = xf - xpT;
                B_ = (Di - Df) / (-std::expm1(-nu_ * T_));  // x_h = A + B e^{-nu t}
                A_ = Di - B_;
                break;
            }
            case Kind::free_particle: {
                beta_ = (xdf - xdi) / T_;  // xd = alpha + beta t
                alpha_ = xdi;
                w0_ = I / m_ * LD(p.d0) * alpha_;
                w1_ = I / m_ * LD(p.d0) * beta_;
                // x_p = w0 t^2/2 + w1 t^3/6 ; x_h = A + B t
                const C xpT = w0_ * T_ * T_ / 2.0L + w1_ * T_ * T_ * T_ / 6.0L;
                A_ = xi;
                B_ = (xf - xpT - A_) / T_;
                break;
            }
        }
    }

    PhasePoint eval(double td) const {
        const LD t = td;
        const C I(0.0L, 1.0L);
        C x, xd, vx, vxd;
        switch (kind_) {
            case Kind::generic: {
                const C wnu = std::sqrt(wnu2_);
                const C s = card_s(wnu * t) * t, c = std::cos(wnu * t);
                const C ep = std::exp(C(nu_ * t / 2.0L)), em = std::exp(C(-nu_ * t / 2.0L));
                const C u_d = alpha_ * c + beta_ * s;
                const C du_d = -alpha_ * wnu2_ * s + beta_ * c;
                xd = ep * u_d;
                vxd = ep * (nu_ / 2.0L * u_d + du_d);
                const C u_p = P_ * c + Q_ * s, du_p = -P_ * wnu2_ * s + Q_ * c;
                const C u_h = A_ * c + B_ * s, du_h = -A_ * wnu2_ * s + B_ * c;
                x = em * u_h + ep * u_p;
                vx = em * (-nu_ / 2.0L * u_h + du_h) + ep * (nu_ / 2.0L * u_p + du_p);
                break;
            }
            case Kind::undamped: {
                const C wnu = std::sqrt(wnu2_);
                const C s = card_s(wnu * t) * t, c = std::cos(wnu * t);
                xd = alpha_ * c + beta_ * s;
                vxd = -alpha_ * wnu2_ * s + beta_ * c;
                x = A_ * c + B_ * s + res_a_ * t * s + res_b_ * t * c;
                vx = -A_ * wnu2_ * s + B_ * c + res_a_ * (s + t * c) + res_b_ * (c - wnu2_ * t * s);
                break;
            }
            case Kind::brownian: {
                const C e = std::exp(C(nu_ * t)), eh = std::exp(C(-nu_ * t));
                xd = alpha_ + beta_ * e;
                vxd = beta_ * nu_ * e;
                x = A_ + B_ * eh + w0_ / nu_ * t + w1_ * e / (2.0L * nu_ * nu_);
                vx = -B_ * nu_ * eh + w0_ / nu_ + w1_ * e / (2.0L * nu_);
                break;
            }
            case Kind::free_particle: {
                xd = alpha_ + beta_ * t;
                vxd = beta_;
                x = A_ + B_ * t + w0_ * t * t / 2.0L + w1_ * t * t * t / 6.0L;
                vx = B_ + w0_ * t + w1_ * t * t / 2.0L;
                break;
            }
        }
        const auto dn = [](C z) { return Complex(double(z.real()), double(z.imag())); };
        return {dn(x), dn(xd), dn(vx), dn(vxd)};
    }

    // on-shell action from the boundary term of the homogeneous quadratic
    // Lagrangian: S = 1/2 [x p_x + xd p_d] with p_x = m vxd - (k/2) xd,
    // p_d = m vx + (k/2) x + i d2 vxd
    Complex action(const BoundaryData& b) const {
        const auto bt = [&](double t) {
            const PhasePoint s = eval(t);
            const double m = double(m_);
            const Complex px = m * s.vxd - 0.5 * k_ * s.xd;
            const Complex pd = m * s.vx + 0.5 * k_ * s.x + Complex(0.0, d2_) * s.vxd;
            return 0.5 * (px * s.x + pd * s.xd);
        };
        return bt(b.duration()) - bt(0.0);
    }
};

}  // namespace detail

// Closed-form solution of the linear (g = 0) saddle equations. Boundary
// conditions are met to machine precision; S_eff is the analytic on-shell
// action (equal to action_value of the quadratic-action coefficients).
inline SaddleSolution harmonic_saddle(const ModelParams& p, const BoundaryData& b,
                                      std::size_t n_nodes = 512,
                                      double pole_tol = kDefaultPoleTol) {
    p.validate();
    b.validate();
    if (p.g != 0.0) throw DomainError("harmonic_saddle: model must have g = 0");
    if (n_nodes % 2 != 0) ++n_nodes;

    const detail::HarmonicModes modes(p, b, pole_tol);
    SaddleSolution sol;
    const double T = b.duration();
    sol.times.resize(n_nodes + 1);
    sol.x.resize(n_nodes + 1); sol.xd.resize(n_nodes + 1);
    sol.vx.resize(n_nodes + 1); sol.vxd.resize(n_nodes + 1);
    for (std::size_t i = 0; i <= n_nodes; ++i) {
        const double t = T * double(i) / double(n_nodes);
        sol.times[i] = b.t_i + t;
        const PhasePoint s = modes.eval(t);
        sol.x[i] = s.x; sol.xd[i] = s.xd; sol.vx[i] = s.vx; sol.vxd[i] = s.vxd;
    }
    sol.S_eff = modes.action(b);
    sol.boundary_residual = std::max(std::max(std::abs(sol.x.front() - b.x_i),
                                              std::abs(sol.xd.front() - b.xd_i)),
                                     std::max(std::abs(sol.x.back() - b.x_f),
                                              std::abs(sol.xd.back() - b.xd_f)));
    sol.ode_residual = 0.0;
    sol.converged = true;
    sol.continuation_path = {0.0};
    return sol;
}

// ---------------------------------------------------------------------------
// Nonlinear solver
// ---------------------------------------------------------------------------

namespace detail {

using Vec4 = Eigen::Vector4cd;
using Mat4 = Eigen::Matrix4cd;

// Explicit first-order system for y = (x, vx, xd, vxd). The implicit
// d2*xdd'' term of the x-equation is eliminated with the xd-equation:
//   xdd = (-(U'(x+xd/2) - U'(x-xd/2)) + k vxd)/m
//   ax  = (-(U'(x+xd/2) + U'(x-xd/2))/2 - k vx + i (V'(xd) - d2 xdd))/m
struct SaddleRhs {
    ModelParams p;

    Vec4 operator()(const Vec4& y) const {
        const Complex x = y[0], vx = y[1], xd = y[2], vxd = y[3];
        const double k = p.friction();
        const Complex up = potential_force(p, x + 0.5 * xd);
        const Complex um = potential_force(p, x - 0.5 * xd);
        const Complex axd = (-(up - um) + k * vxd) / p.m;
        const Complex ax =
            (-0.5 * (up + um) - k * vx + Complex(0, 1) * (decoherence_force(p, xd) - p.d2 * axd)) /
            p.m;
        Vec4 dy;
        dy << vx, ax, vxd, axd;
        return dy;
    }

    Mat4 jacobian(const Vec4& y) const {
        const Complex x = y[0], xd = y[2];
        const double k = p.friction();
        const Complex cp = potential_curvature(p, x + 0.5 * xd);
        const Complex cm = potential_curvature(p, x - 0.5 * xd);
        const Complex I(0, 1);
        Mat4 J = Mat4::Zero();
        // d(axd)/d(x, xd, vxd)
        const Complex daxd_dx = -(cp - cm) / p.m;
        const Complex daxd_dxd = -0.5 * (cp + cm) / p.m;
        const Complex daxd_dvxd = Complex(k / p.m, 0.0);
        // d(ax)/d...
        const Complex dax_dx = (-0.5 * (cp + cm) - I * p.d2 * daxd_dx * p.m / p.m) / p.m;
        const Complex dax_dxd =
            (-0.25 * (cp - cm) + I * (decoherence_curvature(p, xd) - p.d2 * daxd_dxd * p.m)) / p.m;
        const Complex dax_dvx = Complex(-k / p.m, 0.0);
        const Complex dax_dvxd = -I * p.d2 * daxd_dvxd * p.m / p.m;
        J(0, 1) = 1.0;
        J(1, 0) = dax_dx; J(1, 1) = dax_dvx; J(1, 2) = dax_dxd; J(1, 3) = dax_dvxd;
        J(2, 3) = 1.0;
        J(3, 0) = daxd_dx; J(3, 2) = daxd_dxd; J(3, 3) = daxd_dvxd;
        return J;
    }
};

// RK4 for the state and, optionally, the fundamental matrix.
inline void rk4_step(const SaddleRhs& f, Vec4& y, Mat4* Phi, double h) {
    const Vec4 k1 = f(y);
    const Vec4 k2 = f(y + 0.5 * h * k1);
    const Vec4 k3 = f(y + 0.5 * h * k2);
    const Vec4 k4 = f(y + h * k3);
    if (Phi) {
        const Mat4 J1 = f.jacobian(y) * (*Phi);
        const Mat4 J2 = f.jacobian(y + 0.5 * h * k1) * (*Phi + 0.5 * h * J1);
        const Mat4 J3 = f.jacobian(y + 0.5 * h * k2) * (*Phi + 0.5 * h * J2);
        const Mat4 J4 = f.jacobian(y + h * k3) * (*Phi + h * J3);
        *Phi += h / 6.0 * (J1 + 2.0 * J2 + 2.0 * J3 + J4);
    }
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline Vec4 integrate(const SaddleRhs& f, Vec4 y, double span, std::size_t steps, Mat4* Phi) {
    const double h = span / double(steps);
    for (std::size_t i = 0; i < steps; ++i) rk4_step(f, y, Phi, h);
    return y;
}

struct ShootingGrid {
    std::size_t segments;
    std::size_t nodes_per_segment;  // stored nodes per segment (even)
    std::size_t substeps;           // RK4 substeps between stored nodes
    double T;

    std::size_t total_nodes() const { return segments * nodes_per_segment; }
    double segment_span() const { return T / double(segments); }
    std::size_t steps_per_segment() const { return nodes_per_segment * substeps; }
};

inline ShootingGrid make_grid(const SaddleProblem& prob) {
    const double T = prob.boundary.duration();
    // extra segments keep each segment's e^{nu dt/2} growth mild
    std::size_t segs = std::max<std::size_t>(
        prob.n_segments, std::size_t(std::ceil(prob.model.nu * T / 1.5)));
    segs = std::min<std::size_t>(segs, 64);
    std::size_t per = (prob.n_nodes + segs - 1) / segs;
    per += per % 2;  // even, so the global grid suits Simpson
    per = std::max<std::size_t>(per, 2);
    return {segs, per, 4, T};
}

struct ShootingResult {
    std::vector<Vec4> seg_starts;  // converged segment start states
    double residual_inf;
    double boundary_residual;
    bool ok;
};

// Damped Newton on the multiple-shooting residual. Throws StiffnessError on
// stagnation.
inline ShootingResult shoot(const SaddleRhs& rhs, const BoundaryData& b, const ShootingGrid& grid,
                            std::vector<Vec4> Y, double tol, std::size_t max_iter) {
    const std::size_t S = grid.segments;
    const std::size_t n = 4 * S;
    const double span = grid.segment_span();

    Eigen::VectorXcd R(n);
    Eigen::MatrixXcd J(n, n);
    std::vector<Vec4> ends(S);
    std::vector<Mat4> mats(S);

    const auto eval_residual = [&](const std::vector<Vec4>& Ys, Eigen::VectorXcd& out,
                                   bool with_jac) {
        for (std::size_t j = 0; j < S; ++j) {
            Mat4 Phi = Mat4::Identity();
            Vec4 y = Ys[j];
            y = integrate(rhs, y, span, grid.steps_per_segment(), with_jac ? &Phi : nullptr);
            ends[j] = y;
            if (with_jac) mats[j] = Phi;
        }
        out[0] = Ys[0][0] - b.x_i;
        out[1] = Ys[0][2] - b.xd_i;
        for (std::size_t j = 1; j < S; ++j)
            out.segment<4>(2 + 4 * (j - 1)) = ends[j - 1] - Ys[j];
        out[n - 2] = ends[S - 1][0] - b.x_f;
        out[n - 1] = ends[S - 1][2] - b.xd_f;
    };

    double rnorm = kInf;
    for (std::size_t it = 0; it < max_iter; ++it) {
        eval_residual(Y, R, true);
        rnorm = R.lpNorm<Eigen::Infinity>();
        double scale = 1.0;
        for (const auto& y : Y) scale = std::max(scale, y.lpNorm<Eigen::Infinity>());
        if (rnorm <= tol * scale) {
            ShootingResult res;
            res.seg_starts = Y;
            res.residual_inf = rnorm;
            res.boundary_residual = std::max(
                std::max(std::abs(R[0]), std::abs(R[1])),
                std::max(std::abs(R[n - 2]), std::abs(R[n - 1])));
            res.ok = true;
            return res;
        }

        J.setZero();
        J(0, 0) = 1.0;
        J(1, 2) = 1.0;
        for (std::size_t j = 1; j < S; ++j) {
            J.block<4, 4>(2 + 4 * (j - 1), 4 * (j - 1)) = mats[j - 1];
            J.block<4, 4>(2 + 4 * (j - 1), 4 * j) = -Mat4::Identity();
        }
        J.row(n - 2).segment(4 * (S - 1), 4) = mats[S - 1].row(0);
        J.row(n - 1).segment(4 * (S - 1), 4) = mats[S - 1].row(2);

        const Eigen::VectorXcd dY = J.partialPivLu().solve(R);
        if (!dY.allFinite()) throw StiffnessError("shooting Newton: singular Jacobian", rnorm);

        // backtracking line search on ||R||_2
        const double r2 = R.norm();
        double lam = 1.0;
        bool accepted = false;
        Eigen::VectorXcd Rtrial(n);
        std::vector<Vec4> Ytrial(S);
        for (int ls = 0; ls < 12 && !accepted; ++ls) {
            for (std::size_t j = 0; j < S; ++j) Ytrial[j] = Y[j] - lam * dY.segment<4>(4 * j);
            eval_residual(Ytrial, Rtrial, false);
            if (Rtrial.allFinite() && Rtrial.norm() <= (1.0 - 0.25 * lam) * r2) {
                Y = Ytrial;
                accepted = true;
            } else {
                lam *= 0.5;
            }
        }
        if (!accepted)
            throw StiffnessError(
                "shooting Newton stagnated (residual " + std::to_string(rnorm) +
                    "); consider more segments",
                rnorm);
    }
    throw StiffnessError("shooting Newton: iteration limit (residual " + std::to_string(rnorm) + ")",
                         rnorm);
}

// Global midpoint-collocation Newton, used to rescue a stagnated shooting
// solve. Accuracy is O(h^2); the result only seeds a shooting polish.
inline std::vector<Vec4> collocate(const SaddleRhs& rhs, const BoundaryData& b,
                                   const std::vector<Vec4>& guess, double T, double tol,
                                   std::size_t max_iter) {
    const std::size_t npts = guess.size();
    const std::size_t N = npts - 1;
    const std::size_t n = 4 * npts;
    const double h = T / double(N);
    using Trip = Eigen::Triplet<Complex>;

    std::vector<Vec4> Y = guess;
    Eigen::VectorXcd R(n);

    const auto residual = [&](const std::vector<Vec4>& Ys, Eigen::VectorXcd& out) {
        out[0] = Ys[0][0] - b.x_i;
        out[1] = Ys[0][2] - b.xd_i;
        for (std::size_t k = 0; k < N; ++k) {
            const Vec4 ym = 0.5 * (Ys[k] + Ys[k + 1]);
            out.segment<4>(2 + 4 * k) = Ys[k + 1] - Ys[k] - h * rhs(ym);
        }
        out[n - 2] = Ys[N][0] - b.x_f;
        out[n - 1] = Ys[N][2] - b.xd_f;
    };

    for (std::size_t it = 0; it < max_iter; ++it) {
        residual(Y, R);
        double scale = 1.0;
        for (const auto& y : Y) scale = std::max(scale, y.lpNorm<Eigen::Infinity>());
        if (R.lpNorm<Eigen::Infinity>() <= tol * scale) return Y;

        std::vector<Trip> trips;
        trips.reserve(36 * npts);
        trips.emplace_back(0, 0, Complex(1.0));
        trips.emplace_back(1, 2, Complex(1.0));
        for (std::size_t k = 0; k < N; ++k) {
            const Vec4 ym = 0.5 * (Y[k] + Y[k + 1]);
            const Mat4 Jm = rhs.jacobian(ym);
            const Mat4 Ak = -Mat4::Identity() - 0.5 * h * Jm;
            const Mat4 Bk = Mat4::Identity() - 0.5 * h * Jm;
            for (int r = 0; r < 4; ++r)
                for (int c = 0; c < 4; ++c) {
                    trips.emplace_back(2 + 4 * k + r, 4 * k + c, Ak(r, c));
                    trips.emplace_back(2 + 4 * k + r, 4 * (k + 1) + c, Bk(r, c));
                }
        }
        trips.emplace_back(n - 2, 4 * N + 0, Complex(1.0));
        trips.emplace_back(n - 1, 4 * N + 2, Complex(1.0));

        Eigen::SparseMatrix<Complex> J(n, n);
        J.setFromTriplets(trips.begin(), trips.end());
        Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu(J);
        if (lu.info() != Eigen::Success)
            throw StiffnessError("collocation: singular Jacobian", R.norm());
        const Eigen::VectorXcd dY = lu.solve(R);

        const double r2 = R.norm();
        double lam = 1.0;
        bool accepted = false;
        Eigen::VectorXcd Rtrial(n);
        std::vector<Vec4> Ytrial(npts);
        for (int ls = 0; ls < 12 && !accepted; ++ls) {
            for (std::size_t j = 0; j < npts; ++j) Ytrial[j] = Y[j] - lam * dY.segment<4>(4 * j);
            residual(Ytrial, Rtrial);
            if (Rtrial.allFinite() && Rtrial.norm() <= (1.0 - 0.25 * lam) * r2) {
                Y = Ytrial;
                accepted = true;
            } else {
                lam *= 0.5;
            }
        }
        if (!accepted) throw StiffnessError("collocation Newton stagnated", r2);
    }
    throw StiffnessError("collocation: iteration limit", R.norm());
}

}  // namespace detail

// S_eff by composite Simpson quadrature of the effective Lagrangian along
// the trajectory samples. Exactly zero when xd vanishes identically.
inline Complex action_along(const ModelParams& p, const SaddleSolution& sol) {
    if (sol.times.size() < 3) throw DomainError("action_along: too few samples");
    std::vector<Complex> f(sol.times.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = effective_lagrangian(p, sol.at(i));
    const double h = sol.times[1] - sol.times[0];
    return composite_simpson(f, h);
}

// hbar t / Im S_eff. Reported, not clamped, when Im S_eff <= 0.
inline double effective_decoherence_time(const SaddleSolution& sol, double t, double hbar) {
    const double im = sol.S_eff.imag();
    if (!(im > 0.0))
        throw DomainError("effective_decoherence_time: Im S_eff must be > 0 (got " +
                          std::to_string(im) + ")");
    return hbar * t / im;
}

namespace detail {

// Assemble the full sampled solution from converged segment starts.
inline SaddleSolution assemble(const SaddleRhs& rhs, const SaddleProblem& prob,
                               const ShootingGrid& grid, const ShootingResult& shot_result) {
    SaddleSolution sol;
    const std::size_t total = grid.total_nodes();
    sol.times.resize(total + 1);
    sol.x.resize(total + 1); sol.xd.resize(total + 1);
    sol.vx.resize(total + 1); sol.vxd.resize(total + 1);
    const double node_h = grid.T / double(total);

    std::size_t idx = 0;
    for (std::size_t j = 0; j < grid.segments; ++j) {
        Vec4 y = shot_result.seg_starts[j];
        for (std::size_t kk = 0; kk < grid.nodes_per_segment; ++kk) {
            sol.times[idx] = prob.boundary.t_i + node_h * double(idx);
            sol.x[idx] = y[0]; sol.vx[idx] = y[1]; sol.xd[idx] = y[2]; sol.vxd[idx] = y[3];
            ++idx;
            y = integrate(rhs, y, node_h, grid.substeps, nullptr);
        }
        if (j + 1 == grid.segments) {
            sol.times[idx] = prob.boundary.t_f;
            sol.x[idx] = y[0]; sol.vx[idx] = y[1]; sol.xd[idx] = y[2]; sol.vxd[idx] = y[3];
        }
    }

    // ode residual: re-integration defect with a refined step
    double defect = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
        Vec4 y;
        y << sol.x[i], sol.vx[i], sol.xd[i], sol.vxd[i];
        y = integrate(rhs, y, node_h, 2 * grid.substeps, nullptr);
        Vec4 ynext;
        ynext << sol.x[i + 1], sol.vx[i + 1], sol.xd[i + 1], sol.vxd[i + 1];
        const double scale = 1.0 + ynext.lpNorm<Eigen::Infinity>();
        defect = std::max(defect, (y - ynext).lpNorm<Eigen::Infinity>() / (node_h * scale));
    }
    sol.ode_residual = defect;
    sol.boundary_residual = shot_result.boundary_residual;
    sol.converged = true;
    sol.S_eff = action_along(rhs.p, sol);
    return sol;
}

}  // namespace detail

namespace detail {

// Continuation bookkeeping shared by solve_saddle and sweep_g.
struct Homotopy {
    const SaddleProblem& prob;
    ShootingGrid grid;
    SaddleRhs rhs;
    ShootingResult res;
    double g_now = 0.0;
    std::vector<double> path;
    bool used_collocation = false;

    explicit Homotopy(const SaddleProblem& p)
        : prob(p), grid(make_grid(p)), rhs{p.model} {
        rhs.p.g = 0.0;
        const HarmonicModes modes(rhs.p, p.boundary, kDefaultPoleTol);
        std::vector<Vec4> Y(grid.segments);
        for (std::size_t j = 0; j < grid.segments; ++j) {
            const PhasePoint s = modes.eval(grid.segment_span() * double(j));
            Y[j] << s.x, s.vx, s.xd, s.vxd;
        }
        res = shoot(rhs, p.boundary, grid, Y, p.boundary_tol, p.max_newton_iter);
        path.push_back(0.0);
    }

    // one attempted step, with collocation rescue; returns whether g moved
    bool try_step(double g_next) {
        rhs.p.g = g_next;
        try {
            res = shoot(rhs, prob.boundary, grid, res.seg_starts, prob.boundary_tol,
                        prob.max_newton_iter);
        } catch (const StiffnessError&) {
            std::vector<Vec4> nodes(grid.total_nodes() + 1);
            {
                SaddleRhs cur_rhs = rhs;
                cur_rhs.p.g = g_now;
                const SaddleSolution cur = assemble(cur_rhs, prob, grid, res);
                for (std::size_t i = 0; i < nodes.size(); ++i)
                    nodes[i] << cur.x[i], cur.vx[i], cur.xd[i], cur.vxd[i];
            }
            try {
                const auto fixed = collocate(rhs, prob.boundary, nodes, grid.T, 1e-8,
                                             prob.max_newton_iter);
                std::vector<Vec4> seeds(grid.segments);
                for (std::size_t j = 0; j < grid.segments; ++j)
                    seeds[j] = fixed[j * grid.nodes_per_segment];
                res = shoot(rhs, prob.boundary, grid, seeds, prob.boundary_tol,
                            prob.max_newton_iter);
                used_collocation = true;
            } catch (const StiffnessError&) {
                rhs.p.g = g_now;
                return false;
            }
        }
        g_now = g_next;
        path.push_back(g_now);
        return true;
    }

    // adaptive continuation from g_now to g_target
    void advance_to(double g_target) {
        if (g_target == g_now) return;
        double step = (g_target - g_now) / 2.0;
        const double min_step = std::abs(g_target - g_now) / 4096.0;
        while (g_now != g_target) {
            const double remaining = g_target - g_now;
            const double g_next =
                std::abs(step) >= std::abs(remaining) ? g_target : g_now + step;
            if (try_step(g_next)) {
                step *= 1.5;
            } else {
                step *= 0.5;
                if (std::abs(step) < min_step)
                    throw NonConvergenceError(
                        "saddle continuation exhausted at g = " + std::to_string(g_now) +
                        " (target " + std::to_string(g_target) + ")");
            }
        }
    }

    SaddleSolution emit() {
        SaddleSolution sol = assemble(rhs, prob, grid, res);
        sol.continuation_path = path;
        sol.collocation_fallback_used = used_collocation;
        if (sol.ode_residual > prob.residual_tol) sol.note = "ode_residual above tolerance";
        return sol;
    }
};

}  // namespace detail

// Solve the saddle-point boundary-value problem with the model's quartic
// coupling reached by homotopy continuation from the closed-form harmonic
// solution. Falls back to global collocation when shooting stagnates.
inline SaddleSolution solve_saddle(const SaddleProblem& prob) {
    prob.validate();
    detail::Homotopy h(prob);
    h.advance_to(prob.model.g);
    return h.emit();
}

// Continuation-driven family of solutions over ascending g values, each
// seeded from the previous member. Failures are recorded per item without
// aborting the sweep.
inline std::vector<SaddleSolution> sweep_g(const SaddleProblem& prob,
                                           const std::vector<double>& g_values) {
    prob.validate();
    if (!std::is_sorted(g_values.begin(), g_values.end()))
        throw ValidationError("sweep_g: g_values must be sorted ascending");
    std::vector<SaddleSolution> out;
    out.reserve(g_values.size());
    detail::Homotopy h(prob);
    for (double g : g_values) {
        try {
            h.advance_to(g);
            out.push_back(h.emit());
        } catch (const Error& e) {
            SaddleSolution failed;
            failed.converged = false;
            failed.note = e.what();
            failed.continuation_path = {g};
            out.push_back(std::move(failed));
        }
    }
    return out;
}

}  // namespace decolab
