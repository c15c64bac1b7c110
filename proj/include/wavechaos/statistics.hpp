#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "wavechaos/error.hpp"
#include "wavechaos/spectrum.hpp"

namespace wavechaos::stats {

struct NnsdResult {
    Histogram pdf;      // P(s)
    StatCurve cdf;      // I(s), cumulative over all spacings
    std::vector<double> spacings;
};

/// Nearest-neighbor spacing distribution; default 40 bins on [0, 4].
inline NnsdResult nnsd(const UnfoldedSpectrum& u, std::size_t bins = 40, double s_max = 4.0) {
    if (u.size() < 2) throw InvalidArgument("nnsd: need at least 2 levels");
    NnsdResult r;
    r.spacings = u.spacings();
    r.pdf = make_histogram(r.spacings, 0.0, s_max, bins, CurveKind::NNSD);
    std::vector<double> grid(r.pdf.edges.begin() + 1, r.pdf.edges.end());
    const double largest = *std::max_element(r.spacings.begin(), r.spacings.end());
    if (largest > grid.back()) grid.push_back(largest);
    r.cdf = empirical_cdf(r.spacings, grid, CurveKind::CNNSD);
    return r;
}

namespace detail {

inline void check_window_grid(const UnfoldedSpectrum& u, const std::vector<double>& L_grid, const char* what) {
    if (u.size() < 2) throw InvalidArgument(std::string(what) + ": need at least 2 levels");
    const double span = u.values.back() - u.values.front();
    for (double L : L_grid) {
        if (!(L > 0.0)) throw InvalidArgument(std::string(what) + ": window lengths must be > 0");
        if (L > span / 10.0) {
            throw InvalidArgument(std::string(what) + ": window length " + std::to_string(L) +
                                  " exceeds span/10 = " + std::to_string(span / 10.0));
        }
    }
}

/// Window starts stepped by step_fraction * L across the spectrum.
inline std::vector<double> window_starts(const std::vector<double>& x, double L, double step_fraction) {
    std::vector<double> starts;
    const double step = step_fraction * L;
    for (double x0 = x.front(); x0 + L <= x.back(); x0 += step) starts.push_back(x0);
    return starts;
}

/// min_{a,b} (1/L) int_0^L (n(y) - a y - b)^2 dy for the staircase n(y)
/// counting the sorted offsets y_i in [0, L).
inline double staircase_rigidity(const std::vector<double>& y, double L) {
    // moments of the staircase
    double i0 = 0, i1 = 0, i2 = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double rest = L - y[i];
        i0 += rest;
        i1 += 0.5 * (L * L - y[i] * y[i]);
        i2 += static_cast<double>(2 * i + 1) * rest;
    }
    // normal equations for (a, b) against int x^2 = L^3/3, int x = L^2/2, int 1 = L
    const double m2 = L * L * L / 3.0, m1 = L * L / 2.0, m0 = L;
    const double det = m2 * m0 - m1 * m1;
    const double a = (i1 * m0 - i0 * m1) / det;
    const double b = (m2 * i0 - m1 * i1) / det;
    return std::max(0.0, (i2 - a * i1 - b * i0) / L);
}

}  // namespace detail

/// Sigma^2(L) = <(n(L) - L)^2> over windows stepped by 0.25 L.
inline StatCurve number_variance(const UnfoldedSpectrum& u, const std::vector<double>& L_grid,
                                 double step_fraction = 0.25) {
    detail::check_window_grid(u, L_grid, "number_variance");
    const auto& x = u.values;
    StatCurve c;
    c.kind = CurveKind::NumberVariance;
    for (double L : L_grid) {
        const auto starts = detail::window_starts(x, L, step_fraction);
        double acc = 0;
        for (double x0 : starts) {
            const auto lo = std::lower_bound(x.begin(), x.end(), x0);
            const auto hi = std::lower_bound(x.begin(), x.end(), x0 + L);
            const double n = static_cast<double>(hi - lo);
            acc += (n - L) * (n - L);
        }
        c.x.push_back(L);
        c.y.push_back(starts.empty() ? 0.0 : acc / static_cast<double>(starts.size()));
    }
    return c;
}

/// Dyson-Mehta Delta_3(L), averaged over windows stepped by 0.25 L.
inline StatCurve spectral_rigidity(const UnfoldedSpectrum& u, const std::vector<double>& L_grid,
                                   double step_fraction = 0.25) {
    detail::check_window_grid(u, L_grid, "spectral_rigidity");
    const auto& x = u.values;
    StatCurve c;
    c.kind = CurveKind::Rigidity;
    std::vector<double> y;
    for (double L : L_grid) {
        const auto starts = detail::window_starts(x, L, step_fraction);
        double acc = 0;
        for (double x0 : starts) {
            const auto lo = std::lower_bound(x.begin(), x.end(), x0);
            const auto hi = std::lower_bound(x.begin(), x.end(), x0 + L);
            y.clear();
            for (auto it = lo; it != hi; ++it) y.push_back(*it - x0);
            acc += detail::staircase_rigidity(y, L);
        }
        c.x.push_back(L);
        c.y.push_back(starts.empty() ? 0.0 : acc / static_cast<double>(starts.size()));
    }
    return c;
}

struct RatioResult {
    Histogram pdf;              // default 25 bins on [0, 1]
    StatCurve cdf;
    double mean = 0;            // <r~>
    std::vector<double> ratios; // r~_m in [0, 1]
    std::size_t skipped = 0;    // pairs dropped for a zero spacing
};

/// Ratio statistics r~ = min(r, 1/r) of consecutive raw spacings.
inline RatioResult ratio_statistics(const std::vector<double>& raw, std::size_t bins = 25) {
    if (raw.size() < 3) throw InvalidArgument("ratio_statistics: need at least 3 levels");
    RatioResult r;
    for (std::size_t i = 0; i + 2 < raw.size(); ++i) {
        const double s0 = raw[i + 1] - raw[i];
        const double s1 = raw[i + 2] - raw[i + 1];
        if (s0 <= 0.0 || s1 <= 0.0) {
            ++r.skipped;
            continue;
        }
        r.ratios.push_back(s0 < s1 ? s0 / s1 : s1 / s0);
    }
    if (r.ratios.empty()) throw UndefinedStatistic("ratio_statistics: every spacing pair contains a zero spacing");
    double sum = 0;
    for (double v : r.ratios) sum += v;
    r.mean = sum / static_cast<double>(r.ratios.size());
    // r~ = 1 lands in the last bin
    std::vector<double> clipped = r.ratios;
    for (auto& v : clipped) v = std::min(v, std::nextafter(1.0, 0.0));
    r.pdf = make_histogram(clipped, 0.0, 1.0, bins, CurveKind::RatioPdf);
    std::vector<double> grid(r.pdf.edges.begin() + 1, r.pdf.edges.end());
    r.cdf = empirical_cdf(r.ratios, grid, CurveKind::RatioCdf);
    return r;
}

inline RatioResult ratio_statistics(const SpectrumSeries& s, std::size_t bins = 25) {
    return ratio_statistics(s.values(), bins);
}

}  // namespace wavechaos::stats
