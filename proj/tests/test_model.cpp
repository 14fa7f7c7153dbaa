#include <catch2/catch_amalgamated.hpp>

#include <decolab/model.hpp>

#include "oracles.hpp"

using namespace decolab;
using Catch::Approx;

namespace {
ModelParams harmonic_model(double omega = 1.0, double nu = 0.0, double d0 = 0.0, double d2 = 0.0,
                           double g = 0.0) {
    ModelParams p;
    p.m = 1.0; p.omega = omega; p.nu = nu; p.d0 = d0; p.d2 = d2; p.g = g;
    return p;
}
}  // namespace

TEST_CASE("ModelParams validation and positivity flag") {
    ModelParams p = harmonic_model(1.0, 1.0, 1.0, 1.0);
    REQUIRE_NOTHROW(p.validate());
    CHECK(p.positivity_ok());  // 1 <= 2 d0 d2 / m^2 = 2

    p.d2 = 0.0;
    CHECK_FALSE(p.positivity_ok());
    REQUIRE_NOTHROW(p.validate());  // violating sets are accepted, only flagged

    ModelParams bad = p;
    bad.m = -1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = p;
    bad.d0 = -0.1;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = p;
    bad.hbar = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("BoundaryData validation") {
    BoundaryData b;
    b.t_i = 1.0; b.t_f = 0.5;
    CHECK_THROWS_AS(b.validate(), ValidationError);
    b.t_f = 2.0;
    REQUIRE_NOTHROW(b.validate());
    CHECK(b.duration() == Approx(1.0));
}

TEST_CASE("potential_force examples") {
    CHECK(potential_force(harmonic_model(), Complex(0.0)).real() == Approx(0.0).margin(0.0));
    CHECK(potential_force(harmonic_model(), Complex(2.0)).real() == Approx(2.0));
    CHECK(potential_force(harmonic_model(1.0, 0.0, 0.0, 0.0, 0.6), Complex(1.0)).real() ==
          Approx(1.1));
}

TEST_CASE("effective_lagrangian pinned values") {
    // only V(xd) survives
    ModelParams p = harmonic_model(0.0, 0.0, 1.0, 0.0);
    const Complex L1 = effective_lagrangian(p, {Complex(0), Complex(1), Complex(0), Complex(0)});
    CHECK(L1.real() == Approx(0.0).margin(1e-15));
    CHECK(L1.imag() == Approx(0.5));

    // quadratic potential difference -U(1.1)+U(0.9) = -0.2
    p = harmonic_model(1.0);
    const Complex L2 =
        effective_lagrangian(p, {Complex(1.0), Complex(0.2), Complex(0.0), Complex(0.0)});
    CHECK(L2.real() == Approx(-0.2));
    CHECK(L2.imag() == Approx(0.0).margin(1e-15));
}

TEST_CASE("effective_lagrangian vanishes on diagonal trajectories") {
    const double vals[] = {-2.0, -0.31, 0.0, 0.77, 1.9};
    std::size_t count = 0;
    for (double m : {0.5, 2.0})
        for (double om : {0.0, 1.3})
            for (double x : vals)
                for (double vx : vals) {
                    ModelParams p = harmonic_model(om, 0.8, 1.0, 0.5, 0.3);
                    p.m = m;
                    const Complex L =
                        effective_lagrangian(p, {Complex(x), Complex(0), Complex(vx), Complex(0)});
                    REQUIRE(std::abs(L) == 0.0);
                    ++count;
                }
    CHECK(count == 100);
}

TEST_CASE("effective_lagrangian conjugation symmetry") {
    // L(x, -xd, vx, -vxd) = -conj(L(x, xd, vx, vxd)) for real inputs
    ModelParams p = harmonic_model(0.7, 0.4, 1.2, 0.6, 0.5);
    p.g_d = 0.2;
    for (double x : {-1.0, 0.3, 2.0})
        for (double xd : {-0.8, 0.5})
            for (double vx : {-0.4, 1.1})
                for (double vxd : {-1.5, 0.2}) {
                    const Complex a =
                        effective_lagrangian(p, {Complex(x), Complex(xd), Complex(vx), Complex(vxd)});
                    const Complex b = effective_lagrangian(
                        p, {Complex(x), Complex(-xd), Complex(vx), Complex(-vxd)});
                    CHECK(std::abs(b + std::conj(a)) < 1e-14 * (1.0 + std::abs(a)));
                }
}

TEST_CASE("stationary_propagator pinned values") {
    ModelParams p = harmonic_model(1.0, 0.0, 1.0, 0.0);
    const auto w0 = stationary_propagator(p, 0.7, 0.0, 2.0);
    CHECK(w0.exponent.real() == Approx(0.0).margin(0.0));
    CHECK(std::isinf(w0.tau_sd));

    ModelParams p2 = harmonic_model(0.0, 0.0, 2.0, 0.0);
    const auto w1 = stationary_propagator(p2, 0.33, 1.0, 3.0);
    CHECK(w1.exponent.real() == Approx(-3.0));
    CHECK(w1.exponent.imag() == Approx(0.0).margin(1e-15));
    CHECK(w1.tau_sd == Approx(1.0));

    ModelParams p3 = harmonic_model(0.0, 0.0, 0.5, 0.0);
    CHECK(stationary_propagator(p3, 0.0, 0.0, 4.0).ell_sd_sq == Approx(1.0));

    CHECK_THROWS_AS(stationary_propagator(p, 0.0, 0.0, 0.0), DomainError);
}

TEST_CASE("tau_sd strictly decreasing in |xd|") {
    ModelParams p = harmonic_model(0.5, 0.0, 0.8, 0.0);
    p.g_d = 1.3;
    double prev = stationary_propagator(p, 0.0, 1e-3, 1.0).tau_sd;
    for (double xd : {0.01, 0.1, 0.5, 1.0, 2.5, 7.0}) {
        const double cur = stationary_propagator(p, 0.0, xd, 1.0).tau_sd;
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("stationary_points: linear oscillator has only the origin") {
    ModelParams p = harmonic_model(1.0, 0.0, 1.0, 0.0);
    const auto set = stationary_points(p, {}, 64);
    REQUIRE(set.points.size() == 1);
    CHECK_FALSE(set.degenerate_line);
    CHECK(std::abs(set.points[0].x) < 1e-12);
    CHECK(std::abs(set.points[0].xd) < 1e-12);
}

TEST_CASE("stationary_points: omega = g = 0 reports the degenerate line") {
    ModelParams p = harmonic_model(0.0, 0.0, 1.0, 0.0);
    const auto set = stationary_points(p, {}, 32);
    CHECK(set.degenerate_line);
    REQUIRE(set.points.size() == 1);
    CHECK(std::abs(set.points[0].xd) < 1e-12);
}

TEST_CASE("stationary_points: quartic model roots verified independently") {
    ModelParams p = harmonic_model(1.0, 0.0, 1.0, 0.0, 1.0);
    ComplexRegion box{Complex(-4.0, -4.0), Complex(4.0, 4.0)};
    const auto set = stationary_points(p, box, 4096);
    CHECK_FALSE(set.degenerate_line);
    REQUIRE(set.points.size() >= 3);  // origin plus the x^2 = -6 pair at least

    bool has_origin = false, has_pure_imag = false, has_xd = false;
    for (const auto& r : set.points) {
        // re-evaluate both equalities of the stationary condition directly
        const Complex up = potential_force(p, r.x + 0.5 * r.xd);
        const Complex um = potential_force(p, r.x - 0.5 * r.xd);
        const Complex f1 = Complex(0, 1) * decoherence_force(p, r.xd) - up;
        const Complex f2 = up - um;
        REQUIRE(std::sqrt(std::norm(f1) + std::norm(f2)) <= 1e-10);

        if (std::abs(r.x) < 1e-9 && std::abs(r.xd) < 1e-9) has_origin = true;
        if (std::abs(r.xd) < 1e-9 && std::abs(r.x.real()) < 1e-9 &&
            std::abs(std::abs(r.x.imag()) - std::sqrt(6.0)) < 1e-8)
            has_pure_imag = true;
        if (std::abs(r.xd) > 1e-6) {
            has_xd = true;
            // the xd != 0 family satisfies 3 x^2 + xd^2/4 = -6 m omega^2 / g
            const Complex lhs = 3.0 * r.x * r.x + 0.25 * r.xd * r.xd;
            CHECK(std::abs(lhs - Complex(-6.0, 0.0)) < 1e-8);
        }
    }
    CHECK(has_origin);
    CHECK(has_pure_imag);
    CHECK(has_xd);

    // every coarse-scan hit, refined by the test's own finite-difference
    // Newton, lands on some returned root
    const auto hits = oracles::stationary_scan(p, box, 21, 0.35);
    REQUIRE_FALSE(hits.empty());
    std::size_t refined_total = 0;
    for (const auto& [hx, hxd] : hits) {
        const auto refined = oracles::refine_stationary(p, hx, hxd);
        if (!refined) continue;  // shallow valley, no root
        ++refined_total;
        double best = 1e9;
        for (const auto& r : set.points)
            best = std::min(best, std::abs(refined->first - r.x) + std::abs(refined->second - r.xd));
        CHECK(best < 1e-6);
    }
    CHECK(refined_total > 0);
}

TEST_CASE("stationary_points dedup keeps distinct roots apart") {
    ModelParams p = harmonic_model(1.0, 0.0, 1.0, 0.0, 1.0);
    const auto set = stationary_points(p, {Complex(-4, -4), Complex(4, 4)}, 2048);
    for (std::size_t i = 0; i < set.points.size(); ++i)
        for (std::size_t j = i + 1; j < set.points.size(); ++j)
            CHECK(std::abs(set.points[i].x - set.points[j].x) +
                      std::abs(set.points[i].xd - set.points[j].xd) >=
                  1e-8);
}
