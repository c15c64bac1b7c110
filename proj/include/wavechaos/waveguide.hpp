#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include "wavechaos/error.hpp"
#include "wavechaos/types.hpp"

namespace wavechaos::waveguide {

/// Rectangular waveguide cross-section plus total central-line length.
struct Geometry {
    double width;         // w, m
    double height;        // h, m
    double total_length;  // m

    void validate() const {
        if (!(height > 0.0) || !(width > height)) throw InvalidArgument("waveguide geometry requires 0 < h < w");
        if (!(total_length > 0.0)) throw InvalidArgument("waveguide geometry requires total length > 0");
    }

    /// Cutoff of transverse mode TM_n0, Hz.
    double cutoff(int n) const { return n * kSpeedOfLight / (2.0 * width); }
    double f_tm10() const { return cutoff(1); }
    double f_tm20() const { return cutoff(2); }
    double f_tm01() const { return kSpeedOfLight / (2.0 * height); }

    /// w = 22.86 mm, h = 10.16 mm, L = 5.814 m
    static Geometry reference() { return {22.86e-3, 10.16e-3, 5.814}; }
};

enum class Regime { SingleMode, TwoMode };

inline std::string to_string(Regime r) { return r == Regime::SingleMode ? "single-mode" : "two-mode"; }

inline Regime regime_from_string(const std::string& s) {
    if (s == "single-mode" || s == "single") return Regime::SingleMode;
    if (s == "two-mode" || s == "two") return Regime::TwoMode;
    throw InvalidArgument("unknown regime '" + s + "'");
}

inline double wavenumber(double frequency) { return 2.0 * kPi * frequency / kSpeedOfLight; }
inline double frequency_from_wavenumber(double k) { return k * kSpeedOfLight / (2.0 * kPi); }

/// Longitudinal wavenumber of mode n at frequency f.
inline double ky_from_frequency(double f, int mode, const Geometry& g) {
    if (mode < 1) throw InvalidArgument("ky_from_frequency: mode must be >= 1");
    const double kc = mode * kPi / g.width;
    const double k = wavenumber(f);
    if (k < kc) {
        // relative slack for frequencies given at the cutoff with rounding
        if (k >= kc * (1.0 - 1e-12)) return 0.0;
        std::ostringstream os;
        os.precision(10);
        os << "ky_from_frequency: f=" << f << " Hz below the TM" << mode << "0 cutoff " << g.cutoff(mode) << " Hz";
        throw InvalidArgument(os.str());
    }
    return std::sqrt(k * k - kc * kc);
}

/// Free-space wavenumber at which the regime starts.
inline double regime_threshold(const Geometry& g, Regime r) {
    return (r == Regime::SingleMode ? 1.0 : 2.0) * kPi / g.width;
}

/// Smooth part of the integrated spectral density at free-space wavenumber k.
inline double smooth_count(double k, const Geometry& g, Regime r) {
    const double k1 = kPi / g.width;
    const double k2 = 2.0 * kPi / g.width;
    const double threshold = regime_threshold(g, r);
    if (k < threshold * (1.0 - 1e-12)) {
        std::ostringstream os;
        os.precision(10);
        os << "smooth_count: k=" << k << " rad/m below the " << to_string(r) << " threshold " << threshold;
        throw InvalidArgument(os.str());
    }
    auto root = [](double a, double b) { return std::sqrt(std::max(0.0, a * a - b * b)); };
    const double pref = g.total_length / kPi;
    if (r == Regime::SingleMode) return pref * root(k, k1);
    return pref * (root(k, k2) + root(k, k1));
}

/// Derivative of smooth_count with respect to k.
inline double smooth_density(double k, const Geometry& g, Regime r) {
    const double k1 = kPi / g.width;
    const double k2 = 2.0 * kPi / g.width;
    const double pref = g.total_length / kPi;
    auto d = [&](double kc) { return k > kc ? k / std::sqrt(k * k - kc * kc) : 0.0; };
    return r == Regime::SingleMode ? pref * d(k1) : pref * (d(k2) + d(k1));
}

/// Inverse of smooth_count: the free-space wavenumber with count x.
inline double wavenumber_from_count(double x, const Geometry& g, Regime r) {
    if (x < 0) throw InvalidArgument("wavenumber_from_count: count must be >= 0");
    const double k1 = kPi / g.width;
    if (r == Regime::SingleMode) {
        const double ky = kPi * x / g.total_length;
        return std::sqrt(ky * ky + k1 * k1);
    }
    // monotone in k; bracket and bisect
    double lo = regime_threshold(g, r);
    const double start = smooth_count(lo, g, r);
    if (x < start * (1.0 - 1e-12)) {
        throw InvalidArgument("wavenumber_from_count: two-mode count starts at " + std::to_string(start));
    }
    double hi = lo + kPi * x / g.total_length + 1.0;
    while (smooth_count(hi, g, r) < x) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (smooth_count(mid, g, r) < x ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Frequency window [lo, hi] in which the regime's count formula applies,
/// shrunk by `guard_spacings` mean spacings (in smooth-count units) at each
/// cutoff.
struct Window {
    double lo;
    double hi;
};

inline Window regime_window(const Geometry& g, Regime r, double guard_spacings = 0.0) {
    const double lo_f = r == Regime::SingleMode ? g.f_tm10() : g.f_tm20();
    const double hi_f = r == Regime::SingleMode ? g.f_tm20() : g.f_tm01();
    if (guard_spacings <= 0.0) return {lo_f, hi_f};
    const double count_lo = smooth_count(regime_threshold(g, r), g, r) + guard_spacings;
    const double count_hi = smooth_count(wavenumber(hi_f), g, r) - guard_spacings;
    if (!(count_hi > count_lo)) throw InvalidArgument("regime_window: guard bands cover the whole regime");
    return {frequency_from_wavenumber(wavenumber_from_count(count_lo, g, r)),
            frequency_from_wavenumber(wavenumber_from_count(count_hi, g, r))};
}

}  // namespace wavechaos::waveguide
