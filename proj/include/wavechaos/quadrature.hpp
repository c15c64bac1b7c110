#pragma once

#include <array>
#include <cmath>
#include <limits>

#include "wavechaos/error.hpp"

namespace wavechaos::quad {

struct Estimate {
    double value;
    double error;
};

namespace detail {

// 15-point Kronrod nodes on [-1, 1] (nonnegative half) with the embedded
// 7-point Gauss weights on the odd-indexed nodes.
inline constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780, 0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <class F>
Estimate gauss_kronrod_15(F&& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kKronrod[7];
    double gauss = fc * kGauss[3];
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kNodes[static_cast<std::size_t>(i)];
        const double sum = f(center - dx) + f(center + dx);
        kronrod += kKronrod[static_cast<std::size_t>(i)] * sum;
        if (i % 2 == 1) gauss += kGauss[static_cast<std::size_t>(i / 2)] * sum;
    }
    return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

template <class F>
Estimate adaptive(F& f, double a, double b, double abs_tol, Estimate whole, int depth) {
    if (whole.error <= abs_tol || depth <= 0 || !(std::abs(b - a) > 4.0 * std::numeric_limits<double>::epsilon() * std::abs(a))) {
        return whole;
    }
    const double m = 0.5 * (a + b);
    const Estimate left = gauss_kronrod_15(f, a, m);
    const Estimate right = gauss_kronrod_15(f, m, b);
    const Estimate l = adaptive(f, a, m, 0.5 * abs_tol, left, depth - 1);
    const Estimate r = adaptive(f, m, b, 0.5 * abs_tol, right, depth - 1);
    return {l.value + r.value, l.error + r.error};
}

}  // namespace detail

/// Adaptive 7/15-point Gauss-Kronrod on a finite interval.
template <class F>
Estimate integrate(F&& f, double a, double b, double abs_tol = 1e-10, int max_depth = 40) {
    if (a == b) return {0.0, 0.0};
    const Estimate whole = detail::gauss_kronrod_15(f, a, b);
    return detail::adaptive(f, a, b, abs_tol, whole, max_depth);
}

/// Splits [a, b] into `pieces` equal panels before adapting; for integrands
/// with many oscillations.
template <class F>
Estimate integrate_panels(F&& f, double a, double b, std::size_t pieces, double abs_tol = 1e-10) {
    if (pieces == 0) pieces = 1;
    Estimate total{0.0, 0.0};
    const double h = (b - a) / static_cast<double>(pieces);
    for (std::size_t i = 0; i < pieces; ++i) {
        const double lo = a + h * static_cast<double>(i);
        const double hi = i + 1 == pieces ? b : lo + h;
        const Estimate e = integrate(f, lo, hi, abs_tol / static_cast<double>(pieces));
        total.value += e.value;
        total.error += e.error;
    }
    return total;
}

/// Integral over [a, inf) via the substitution x = a + t / (1 - t).
template <class F>
Estimate integrate_to_infinity(F&& f, double a, double abs_tol = 1e-10) {
    auto g = [&](double t) {
        if (t >= 1.0) return 0.0;
        const double one_minus = 1.0 - t;
        const double x = a + t / one_minus;
        const double v = f(x);
        return std::isfinite(v) ? v / (one_minus * one_minus) : 0.0;
    };
    return integrate(g, 0.0, 1.0, abs_tol, 60);
}

}  // namespace wavechaos::quad
