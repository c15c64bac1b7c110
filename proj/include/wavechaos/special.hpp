#pragma once

#include <cmath>
#include <numbers>

#include "wavechaos/error.hpp"

namespace wavechaos::special {

/// Modified Bessel function K_0(x), x > 0. Power series for small x, the
/// integral K_0(x) = int_0^inf exp(-x cosh t) dt (trapezoid rule, which
/// converges geometrically here) in the middle range, asymptotic series for
/// large x. Relative accuracy better than 1e-12 throughout.
inline double bessel_k0(double x) {
    if (!(x > 0.0)) throw InvalidArgument("bessel_k0: argument must be > 0");
    if (x <= 2.0) {
        const double q = 0.25 * x * x;
        double term = 1.0;  // (x^2/4)^k / (k!)^2
        double harmonic = 0.0;
        double i0 = 1.0;
        double rest = 0.0;
        for (int k = 1; k < 60; ++k) {
            term *= q / (static_cast<double>(k) * static_cast<double>(k));
            harmonic += 1.0 / static_cast<double>(k);
            i0 += term;
            rest += term * harmonic;
            if (term < 1e-18 * i0) break;
        }
        return -(std::log(0.5 * x) + std::numbers::egamma) * i0 + rest;
    }
    if (x < 30.0) {
        // exp(-x cosh t) < 1e-18 exp(-x) once x (cosh t - 1) > 41.5
        const double t_max = std::acosh(1.0 + 41.5 / x);
        const double h = 0.1;
        double sum = 0.5;  // half weight of the t = 0 node
        for (int k = 1;; ++k) {
            const double t = h * k;
            if (t > t_max) break;
            sum += std::exp(-x * (std::cosh(t) - 1.0));
        }
        return h * sum * std::exp(-x);
    }
    // a_k = prod_{j=1..k} (2j-1)^2 / (k! 8^k), alternating
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 40; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = -term * odd * odd / (8.0 * k * x);
        if (std::abs(next) >= std::abs(term)) break;
        term = next;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) * sum;
}

/// Porter-Thomas density of v with unit mean.
inline double porter_thomas(double v) {
    if (v <= 0.0) return 0.0;
    return std::exp(-0.5 * v) / std::sqrt(2.0 * std::numbers::pi * v);
}

/// Porter-Thomas density for z = log10(v).
inline double porter_thomas_log10(double z) {
    const double v = std::pow(10.0, z);
    return std::numbers::ln10 * v * porter_thomas(v);
}

/// Density of z = log10(y) for y the product of two independent
/// unit-mean chi-square(1) variables.
inline double strength_log10_density(double z) {
    const double r = std::pow(10.0, 0.5 * z);
    if (r > 700.0) return 0.0;
    return std::numbers::ln10 / std::numbers::pi * r * bessel_k0(r);
}

}  // namespace wavechaos::special
