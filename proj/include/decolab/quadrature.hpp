// quadrature.hpp -- Simpson rules used by the action integrals and bath module

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "decolab/errors.hpp"

namespace decolab {

// Composite Simpson over uniformly spaced samples. Requires an even number
// of intervals (odd sample count >= 3).
template <typename T>
T composite_simpson(const std::vector<T>& f, double h) {
    const std::size_t n = f.size();
    if (n < 3 || n % 2 == 0) throw DomainError("composite_simpson: need an odd sample count >= 3");
    T odd{}, even{};
    for (std::size_t i = 1; i + 1 < n; i += 2) odd += f[i];
    for (std::size_t i = 2; i + 1 < n; i += 2) even += f[i];
    return (f.front() + f.back() + 4.0 * odd + 2.0 * even) * (h / 3.0);
}

namespace detail {

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0) throw QuadratureError("adaptive_simpson: max recursion depth reached");
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson on [a, b], absolute tolerance tol.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 48) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace decolab
