// bath.hpp -- environment spectral densities, the CTP self-energy components
// and the Drude-model map from bath parameters to the effective Lagrangian
// constants. The thermal CTP propagator matrix itself carries delta
// functions and is never evaluated pointwise; its physical content enters
// only through the spectral integrals Sigma^n, Sigma^f, Sigma^i below and
// the temperature dependence of d0, d2.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "decolab/model.hpp"
#include "decolab/quadrature.hpp"

namespace decolab {

struct SpectralModel {
    enum class Kind { drude, tabulated };
    Kind kind = Kind::drude;
    double lambda = 1.0;  // coupling amplitude
    double OmegaD = 1.0;  // Drude cutoff
    double m_B = 1.0;     // bare mass
    double T = 0.0;       // k_B T in energy units; needed for d0, d2 only
    double hbar = 1.0;
    std::vector<std::pair<double, double>> table;  // (Omega, rho), Omega >= 0 ascending

    void validate() const {
        if (!(m_B > 0.0)) throw ValidationError("SpectralModel: m_B must be > 0");
        if (!(hbar > 0.0)) throw ValidationError("SpectralModel: hbar must be > 0");
        if (kind == Kind::drude) {
            if (!(OmegaD > 0.0)) throw ValidationError("SpectralModel: OmegaD must be > 0");
        } else {
            if (table.size() < 2) throw ValidationError("SpectralModel: table needs >= 2 rows");
            for (std::size_t i = 0; i < table.size(); ++i) {
                if (table[i].first < 0.0)
                    throw ValidationError("SpectralModel: table frequencies must be >= 0");
                if (i > 0 && table[i].first <= table[i - 1].first)
                    throw ValidationError("SpectralModel: table frequencies must be ascending");
            }
        }
    }

    static SpectralModel drude(double lambda, double OmegaD, double m_B, double T = 0.0,
                               double hbar = 1.0) {
        SpectralModel s;
        s.kind = Kind::drude;
        s.lambda = lambda; s.OmegaD = OmegaD; s.m_B = m_B; s.T = T; s.hbar = hbar;
        s.validate();
        return s;
    }

    static SpectralModel tabulated(std::vector<std::pair<double, double>> rows, double m_B = 1.0,
                                   double hbar = 1.0) {
        SpectralModel s;
        s.kind = Kind::tabulated;
        s.table = std::move(rows); s.m_B = m_B; s.hbar = hbar;
        s.validate();
        return s;
    }

    // two-column CSV with header "omega,rho"
    static SpectralModel tabulated_from_csv(const std::string& path, double m_B = 1.0,
                                            double hbar = 1.0) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open spectral table: " + path);
        std::string line;
        if (!std::getline(in, line)) throw ParseError("empty spectral table: " + path);
        if (line.size() && line.back() == '\r') line.pop_back();
        if (line != "omega,rho")
            throw ParseError("spectral table must start with header 'omega,rho', got '" + line + "'");
        std::vector<std::pair<double, double>> rows;
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.size() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            std::istringstream ss(line);
            double w, r;
            char comma;
            if (!(ss >> w >> comma >> r) || comma != ',')
                throw ParseError("bad row " + std::to_string(lineno) + " in " + path);
            rows.emplace_back(w, r);
        }
        return tabulated(std::move(rows), m_B, hbar);
    }
};

// rho(Omega), odd in Omega. Drude: (lambda^2/m_B OmegaD) Omega/(OmegaD^2+Omega^2),
// maximal at Omega = OmegaD. Tabulated: linear interpolation with odd extension.
inline double spectral_density(const SpectralModel& s, double Omega) {
    if (s.kind == SpectralModel::Kind::drude) {
        return s.lambda * s.lambda / (s.m_B * s.OmegaD) * Omega /
               (s.OmegaD * s.OmegaD + Omega * Omega);
    }
    const double a = std::abs(Omega);
    if (a > s.table.back().first)
        throw ExtrapolationError("spectral_density: |Omega| = " + std::to_string(a) +
                                 " outside the table range");
    const double sign = Omega < 0.0 ? -1.0 : 1.0;
    if (a <= s.table.front().first) {
        // odd extension through the origin
        const double w0 = s.table.front().first;
        if (w0 == 0.0) return sign * s.table.front().second;
        return sign * s.table.front().second * a / w0;
    }
    auto it = std::lower_bound(s.table.begin(), s.table.end(), a,
                               [](const auto& row, double v) { return row.first < v; });
    const auto hi = *it, lo = *(it - 1);
    const double f = (a - lo.first) / (hi.first - lo.first);
    return sign * (lo.second + f * (hi.second - lo.second));
}

struct SelfEnergy {
    double Sigma_n;    // 2 P int_0^inf dOmega Omega rho/(omega^2 - Omega^2), real even
    Complex Sigma_f;   // -i pi rho(omega), pure imaginary odd
    double Sigma_i;    // -pi rho(|omega|), real even
};

namespace detail {

// P integral over [0, upper] with symmetric excision of width eps around the
// pole at a = |omega|, each piece by adaptive Simpson.
template <typename F>
double pv_excised(const F& f, double a, double eps, double upper, double tol) {
    double total = 0.0;
    if (a - eps > 0.0) total += adaptive_simpson(f, 0.0, a - eps, tol);
    if (a + eps < upper) total += adaptive_simpson(f, a + eps, upper, tol);
    return total;
}

}  // namespace detail

// Principal-value quadrature of Sigma^n for either kind: symmetric excision
// around the pole with two-level Richardson extrapolation in the excision
// width, plus the analytic 1/Omega tail for the Drude spectrum.
inline double sigma_n_pv(const SpectralModel& s, double omega, double tol = 1e-8) {
    s.validate();
    const double a = std::abs(omega);
    const double upper = s.kind == SpectralModel::Kind::drude ? 1e3 * s.OmegaD
                                                              : s.table.back().first;
    if (s.kind == SpectralModel::Kind::tabulated && a >= upper)
        throw ExtrapolationError("sigma_n_pv: |omega| outside the tabulated range");
    const auto f = [&](double W) {
        return 2.0 * W * spectral_density(s, W) / ((a - W) * (a + W));
    };
    double value;
    if (a == 0.0) {
        // integrand reduces to -2 rho(W)/W, finite at the origin since rho is odd
        const auto f0 = [&](double W) {
            if (W < 1e-8) W = 1e-8;
            return -2.0 * spectral_density(s, W) / W;
        };
        value = adaptive_simpson(f0, 0.0, upper, tol * 0.1);
    } else {
        const double eps = std::min({0.05 * a, 0.05 * (upper - a), 1e-2});
        if (!(eps > 0.0)) throw QuadratureError("sigma_n_pv: no room to excise the pole");
        const double I1 = detail::pv_excised(f, a, eps, upper, tol * 0.05);
        const double I2 = detail::pv_excised(f, a, 0.5 * eps, upper, tol * 0.05);
        value = 2.0 * I2 - I1;  // excision error is linear in eps
        if (!std::isfinite(value)) throw QuadratureError("sigma_n_pv: quadrature diverged");
    }
    if (s.kind == SpectralModel::Kind::drude) {
        // integrand tail: -2 c [1/W^2 + (omega^2 - OmegaD^2)/W^4 + ...],
        // c = lambda^2/(m_B OmegaD)
        const double c = s.lambda * s.lambda / (s.m_B * s.OmegaD);
        value += -2.0 * c * (1.0 / upper + (a * a - s.OmegaD * s.OmegaD) / (3.0 * upper * upper * upper));
    }
    return value;
}

inline SelfEnergy self_energy(const SpectralModel& s, double omega, double tol = 1e-8) {
    s.validate();
    SelfEnergy se;
    if (s.kind == SpectralModel::Kind::drude) {
        // closed form of the principal-value integral for the Drude spectrum
        se.Sigma_n = -M_PI * s.lambda * s.lambda / (s.m_B * (s.OmegaD * s.OmegaD + omega * omega));
    } else {
        se.Sigma_n = sigma_n_pv(s, omega, tol);
    }
    se.Sigma_f = Complex(0.0, -M_PI * spectral_density(s, omega));
    se.Sigma_i = -M_PI * spectral_density(s, std::abs(omega));
    return se;
}

// Effective Lagrangian constants from the Drude parameters and temperature.
struct DrudeEffectiveParams {
    double delta_m;      // mass renormalization
    double delta_omega2; // potential renormalization of omega^2 (times m_B/2 x^2)
    double k;            // friction constant
    double d0;
    double d2;           // can be negative for k_B T large against hbar OmegaD
};

inline DrudeEffectiveParams drude_effective_params(const SpectralModel& s) {
    s.validate();
    if (s.kind != SpectralModel::Kind::drude)
        throw DomainError("drude_effective_params: drude kind required");
    const double l2 = s.lambda * s.lambda;
    DrudeEffectiveParams e;
    e.delta_m = M_PI * l2 / (s.m_B * std::pow(s.OmegaD, 4));
    e.delta_omega2 = M_PI * l2 / (s.m_B * s.m_B * s.OmegaD * s.OmegaD);
    e.k = M_PI * l2 / (s.m_B * std::pow(s.OmegaD, 3));
    if (s.lambda == 0.0) {
        e.d0 = e.d2 = 0.0;
        return e;
    }
    if (!(s.T > 0.0))
        throw DomainError("drude_effective_params: T > 0 required for d0, d2");
    e.d0 = 2.0 * s.T / (s.hbar * s.OmegaD);
    e.d2 = s.hbar / (6.0 * s.T * s.OmegaD) - 2.0 * s.T / (s.hbar * s.OmegaD * s.OmegaD);
    return e;
}

// Convenience converter to ModelParams: m = m_B + delta_m, the potential
// shifted by m_B delta_omega^2 x^2/2, nu = k/m. Refuses to build params with
// d2 < 0 (ModelParams requires d2 >= 0) and reports the raw value instead.
struct DrudeConversion {
    bool ok = false;
    ModelParams params;
    DrudeEffectiveParams effective;
    std::string note;
};

inline DrudeConversion drude_to_model(const SpectralModel& s, double omega0_bare = 0.0) {
    DrudeConversion c;
    c.effective = drude_effective_params(s);
    const double m = s.m_B + c.effective.delta_m;
    const double omega2 = (s.m_B * (omega0_bare * omega0_bare + c.effective.delta_omega2)) / m;
    if (c.effective.d2 < 0.0) {
        c.ok = false;
        c.note = "d2 = " + std::to_string(c.effective.d2) +
                 " < 0 (k_B T too large against hbar OmegaD); not clamped";
        return c;
    }
    c.params.m = m;
    c.params.omega = std::sqrt(omega2);
    c.params.nu = c.effective.k / m;
    c.params.d0 = c.effective.d0;
    c.params.d2 = c.effective.d2;
    c.params.hbar = s.hbar;
    c.params.validate();
    c.ok = true;
    return c;
}

}  // namespace decolab
