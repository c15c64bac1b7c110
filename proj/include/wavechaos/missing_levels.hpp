#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "wavechaos/error.hpp"
#include "wavechaos/spectrum.hpp"

namespace wavechaos::stats {

struct MissingLevelOptions {
    double window = 5.0;     // moving-average half window, mean spacings
    double threshold = 0.5;  // |jump| that gets flagged
    std::size_t min_levels = 50;
};

struct LevelJump {
    std::size_t index = 0;  // level at which the jump peaks
    double position = 0;    // raw value of that level
    double unfolded = 0;    // its smooth count
    double jump = 0;        // right minus left plateau of N_fluc; -1 per missing level
};

/// Fluctuating staircase at the levels, N(x_m) - N_smooth(x_m) with
/// N(x_m) = m - 1/2 (midpoint of the step).
inline std::vector<double> fluctuating_staircase(const std::vector<double>& unfolded) {
    std::vector<double> fl(unfolded.size());
    for (std::size_t m = 0; m < unfolded.size(); ++m) fl[m] = static_cast<double>(m) + 0.5 - unfolded[m];
    return fl;
}

/// Local plateau difference of N_fluc across each level (windows of
/// `window` spacings on either side), flagged where it reaches the threshold.
/// Each contiguous flagged run reports its largest jump.
inline std::vector<LevelJump> missing_level_scan(const SpectrumSeries& raw, const std::function<double(double)>& smooth,
                                                 const MissingLevelOptions& opt = {}) {
    if (raw.size() < opt.min_levels) {
        throw InvalidArgument("missing_level_scan: need at least " + std::to_string(opt.min_levels) + " levels, have " +
                              std::to_string(raw.size()));
    }
    const auto& v = raw.values();
    const std::size_t n = v.size();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = smooth(v[i]);
    const auto fl = fluctuating_staircase(x);
    std::vector<double> jump(n, 0.0);
    // two-pointer sweep over the ascending smooth counts
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (lo < i && x[lo] < x[i] - opt.window) ++lo;
        while (hi + 1 < n && x[hi + 1] <= x[i] + opt.window) ++hi;
        const std::size_t nl = i - lo;
        const std::size_t nr = hi > i ? hi - i : 0;
        if (nl < 2 || nr < 2) continue;
        double left = 0, right = 0;
        for (std::size_t j = lo; j < i; ++j) left += fl[j];
        for (std::size_t j = i + 1; j <= hi; ++j) right += fl[j];
        jump[i] = right / static_cast<double>(nr) - left / static_cast<double>(nl);
    }
    std::vector<LevelJump> flags;
    std::size_t i = 0;
    while (i < n) {
        if (std::abs(jump[i]) < opt.threshold) {
            ++i;
            continue;
        }
        std::size_t j = i, best = i;
        while (j < n && std::abs(jump[j]) >= opt.threshold && std::signbit(jump[j]) == std::signbit(jump[i])) {
            if (std::abs(jump[j]) > std::abs(jump[best])) best = j;
            ++j;
        }
        flags.push_back({best, v[best], x[best], jump[best]});
        i = j;
    }
    return flags;
}

}  // namespace wavechaos::stats
