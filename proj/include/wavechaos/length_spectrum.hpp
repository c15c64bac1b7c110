#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "wavechaos/error.hpp"
#include "wavechaos/parallel.hpp"
#include "wavechaos/quadrature.hpp"
#include "wavechaos/spectrum.hpp"
#include "wavechaos/types.hpp"

namespace wavechaos::stats {

enum class Taper { Hann, Rectangular };

struct LengthSpectrumOptions {
    Taper taper = Taper::Hann;
    /// k-window; when lo >= hi it is set half a mean spacing beyond the outer levels
    double k_lo = 0;
    double k_hi = 0;
};

/// |sum_m w(k_m) e^{i k_m l} - int w(k) rho_smooth(k) e^{i k l} dk| on the length grid.
inline StatCurve length_spectrum(const SpectrumSeries& k, const std::function<double(double)>& rho_smooth,
                                 const std::vector<double>& lengths, const LengthSpectrumOptions& opt = {}) {
    if (k.empty()) throw InvalidArgument("length_spectrum: empty spectrum");
    if (k.unit() != SpectrumUnit::RadPerMeter) throw InvalidArgument("length_spectrum: spectrum must be in rad/m");
    for (double l : lengths)
        if (!(l > 0.0)) throw InvalidArgument("length_spectrum: lengths must be > 0");
    const auto& km = k.values();
    double a = opt.k_lo, b = opt.k_hi;
    if (!(b > a)) {
        const double s = km.size() > 1 ? (km.back() - km.front()) / static_cast<double>(km.size() - 1) : 1.0;
        a = km.front() - 0.5 * s;
        b = km.back() + 0.5 * s;
    }
    const double span = b - a;
    auto w = [&](double x) {
        if (x < a || x > b) return 0.0;
        if (opt.taper == Taper::Rectangular) return 1.0;
        const double s = std::sin(kPi * (x - a) / span);
        return s * s;
    };
    StatCurve c;
    c.kind = CurveKind::LengthSpectrum;
    c.x = lengths;
    c.y.assign(lengths.size(), 0.0);
    parallel_for(lengths.size(), [&](std::size_t i) {
        const double l = lengths[i];
        Complex sum = 0;
        for (double x : km) sum += w(x) * std::polar(1.0, x * l);
        const auto pieces = static_cast<std::size_t>(std::ceil(span * l / kPi)) + 1;
        const double re = quad::integrate_panels([&](double x) { return w(x) * rho_smooth(x) * std::cos(x * l); }, a, b,
                                                 pieces, 1e-9)
                              .value;
        const double im = quad::integrate_panels([&](double x) { return w(x) * rho_smooth(x) * std::sin(x * l); }, a, b,
                                                 pieces, 1e-9)
                              .value;
        c.y[i] = std::abs(sum - Complex(re, im));
    });
    return c;
}

struct Peak {
    double position = 0;
    double height = 0;
};

/// Local maxima sorted by height, strongest first.
inline std::vector<Peak> find_peaks(const StatCurve& c, std::size_t count) {
    std::vector<Peak> peaks;
    for (std::size_t i = 1; i + 1 < c.y.size(); ++i)
        if (c.y[i] > c.y[i - 1] && c.y[i] >= c.y[i + 1]) peaks.push_back({c.x[i], c.y[i]});
    std::sort(peaks.begin(), peaks.end(), [](const Peak& p, const Peak& q) { return p.height > q.height; });
    if (peaks.size() > count) peaks.resize(count);
    return peaks;
}

}  // namespace wavechaos::stats
