#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "wavechaos/error.hpp"

namespace wavechaos {

enum class SpectrumUnit { Hertz, RadPerMeter, Dimensionless };
enum class Provenance { Simulated, Ingested };

inline std::string to_string(SpectrumUnit u) {
    switch (u) {
        case SpectrumUnit::Hertz: return "Hz";
        case SpectrumUnit::RadPerMeter: return "rad/m";
        case SpectrumUnit::Dimensionless: return "dimensionless";
    }
    return "?";
}

inline SpectrumUnit spectrum_unit_from_string(const std::string& s) {
    if (s == "Hz" || s == "hz") return SpectrumUnit::Hertz;
    if (s == "rad/m") return SpectrumUnit::RadPerMeter;
    if (s == "dimensionless" || s == "1") return SpectrumUnit::Dimensionless;
    throw InvalidArgument("unknown spectrum unit '" + s + "'");
}

/// Ordered level sequence with its unit.
class SpectrumSeries {
public:
    SpectrumSeries() = default;
    SpectrumSeries(std::vector<double> values, SpectrumUnit unit, Provenance provenance = Provenance::Simulated)
        : values_(std::move(values)), unit_(unit), provenance_(provenance) {
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i])) throw InvalidArgument("spectrum value " + std::to_string(i) + " is not finite");
            if (i > 0 && values_[i] < values_[i - 1]) {
                throw InvalidArgument("spectrum not ascending at index " + std::to_string(i));
            }
        }
    }

    const std::vector<double>& values() const { return values_; }
    SpectrumUnit unit() const { return unit_; }
    Provenance provenance() const { return provenance_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

private:
    std::vector<double> values_;
    SpectrumUnit unit_ = SpectrumUnit::Dimensionless;
    Provenance provenance_ = Provenance::Simulated;
};

/// Levels mapped to unit mean spacing.
struct UnfoldedSpectrum {
    std::vector<double> values;
    std::string source;

    std::size_t size() const { return values.size(); }

    double mean_spacing() const {
        if (values.size() < 2) throw InvalidArgument("mean spacing needs at least 2 levels");
        return (values.back() - values.front()) / static_cast<double>(values.size() - 1);
    }

    std::vector<double> spacings() const {
        std::vector<double> s;
        for (std::size_t i = 1; i < values.size(); ++i) s.push_back(values[i] - values[i - 1]);
        return s;
    }
};

enum class CurveKind { NNSD, CNNSD, NumberVariance, Rigidity, RatioPdf, RatioCdf, Y2, LengthSpectrum, Density, Correlation };

inline std::string to_string(CurveKind k) {
    switch (k) {
        case CurveKind::NNSD: return "nnsd";
        case CurveKind::CNNSD: return "cnnsd";
        case CurveKind::NumberVariance: return "sigma2";
        case CurveKind::Rigidity: return "delta3";
        case CurveKind::RatioPdf: return "ratio-pdf";
        case CurveKind::RatioCdf: return "ratio-cdf";
        case CurveKind::Y2: return "y2";
        case CurveKind::LengthSpectrum: return "length-spectrum";
        case CurveKind::Density: return "density";
        case CurveKind::Correlation: return "correlation";
    }
    return "?";
}

struct StatCurve {
    CurveKind kind = CurveKind::NNSD;
    std::vector<double> x;
    std::vector<double> y;

    /// Trapezoid integral of y over x.
    double trapezoid() const {
        double s = 0;
        for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
        return s;
    }
};

/// Histogram on [lo, hi) normalized to unit area over the in-range samples.
struct Histogram {
    StatCurve curve;             // bin centers and densities
    std::vector<double> edges;
    std::size_t in_range = 0;
    std::size_t out_of_range = 0;

    /// Sum of density * width; 1 whenever any sample falls in range.
    double area() const {
        double a = 0;
        for (std::size_t i = 0; i < curve.y.size(); ++i) a += curve.y[i] * (edges[i + 1] - edges[i]);
        return a;
    }
};

inline Histogram make_histogram(const std::vector<double>& samples, double lo, double hi, std::size_t bins,
                                CurveKind kind) {
    if (bins == 0 || !(hi > lo)) throw InvalidArgument("histogram needs bins > 0 and hi > lo");
    Histogram h;
    h.curve.kind = kind;
    const double width = (hi - lo) / static_cast<double>(bins);
    std::vector<double> counts(bins, 0.0);
    for (double s : samples) {
        if (!(s >= lo && s < hi)) {
            ++h.out_of_range;
            continue;
        }
        auto b = static_cast<std::size_t>(std::floor((s - lo) / width));
        if (b >= bins) b = bins - 1;
        counts[b] += 1.0;
        ++h.in_range;
    }
    for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(lo + width * static_cast<double>(i));
    for (std::size_t i = 0; i < bins; ++i) {
        h.curve.x.push_back(lo + width * (static_cast<double>(i) + 0.5));
        h.curve.y.push_back(h.in_range ? counts[i] / (static_cast<double>(h.in_range) * width) : 0.0);
    }
    return h;
}

/// Empirical CDF of `samples` evaluated on `grid`.
inline StatCurve empirical_cdf(std::vector<double> samples, const std::vector<double>& grid, CurveKind kind) {
    std::sort(samples.begin(), samples.end());
    StatCurve c;
    c.kind = kind;
    for (double g : grid) {
        const auto n = std::upper_bound(samples.begin(), samples.end(), g) - samples.begin();
        c.x.push_back(g);
        c.y.push_back(samples.empty() ? 0.0 : static_cast<double>(n) / static_cast<double>(samples.size()));
    }
    return c;
}

/// Two-sided Kolmogorov-Smirnov distance between samples and a CDF.
template <class Cdf>
double ks_distance(std::vector<double> samples, Cdf&& cdf) {
    if (samples.empty()) throw InvalidArgument("ks_distance: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

/// Two-sample Kolmogorov-Smirnov distance.
inline double ks_distance_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw InvalidArgument("ks_distance_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

}  // namespace wavechaos
