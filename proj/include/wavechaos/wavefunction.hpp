#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "wavechaos/error.hpp"
#include "wavechaos/special.hpp"
#include "wavechaos/spectrum.hpp"
#include "wavechaos/types.hpp"

namespace wavechaos::wavefun {

struct PathSegment {
    int bond = 0;
    double length = 0;  // L_j, m
};

struct IntensitySample {
    int bond = 0;
    double arc = 0;        // position along the scan path, m
    double intensity = 0;  // proportional to E_z^2
};

/// Intensity scan along an ordered path of bonds; a bond may be visited more
/// than once.
struct IntensityMap {
    std::vector<PathSegment> path;
    std::vector<IntensitySample> samples;  // ordered by arc position

    double path_length() const {
        double s = 0;
        for (const auto& p : path) s += p.length;
        return s;
    }

    void validate() const {
        if (samples.empty()) throw InvalidArgument("intensity map: no samples");
        for (const auto& p : path)
            if (!(p.length > 0.0) || !std::isfinite(p.length))
                throw InvalidArgument("intensity map: bond " + std::to_string(p.bond) + " has nonpositive length");
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (!(samples[i].intensity >= 0.0) || !std::isfinite(samples[i].intensity))
                throw InvalidArgument("intensity map: sample " + std::to_string(i) + " has negative intensity");
            if (i > 0 && samples[i].arc < samples[i - 1].arc)
                throw InvalidArgument("intensity map: positions not ascending at sample " + std::to_string(i));
        }
    }

    /// Path segment index of every sample, matched by arc range and bond id.
    std::vector<std::size_t> segment_of_samples() const {
        std::vector<double> start{0.0};
        for (const auto& p : path) start.push_back(start.back() + p.length);
        std::vector<std::size_t> seg(samples.size());
        const double eps = 1e-12 * std::max(1.0, start.back());
        std::size_t j = 0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto& s = samples[i];
            // a sample on a shared endpoint belongs to whichever bond it names
            while (j < path.size() &&
                   (s.arc > start[j + 1] + eps ||
                    (s.arc >= start[j + 1] - eps && path[j].bond != s.bond && j + 1 < path.size()))) {
                ++j;
            }
            if (j == path.size()) {
                throw InvalidArgument("intensity map: sample " + std::to_string(i) + " at arc " + std::to_string(s.arc) +
                                      " lies beyond the path");
            }
            if (path[j].bond != s.bond) {
                throw InvalidArgument("intensity map: sample " + std::to_string(i) + " labelled bond " +
                                      std::to_string(s.bond) + " lies on the segment of bond " +
                                      std::to_string(path[j].bond));
            }
            seg[i] = j;
        }
        return seg;
    }
};

struct NormalizedIntensity {
    std::vector<double> arc;
    std::vector<double> v;  // |E_z|^2 / path average
    double norm = 0;        // the path average
};

/// v = I / <I>, with <I> the trapezoid path average over the sampled arc.
inline NormalizedIntensity normalize_intensity(const IntensityMap& map) {
    map.validate();
    const auto& s = map.samples;
    double avg;
    if (s.size() == 1 || s.back().arc == s.front().arc) {
        double sum = 0;
        for (const auto& x : s) sum += x.intensity;
        avg = sum / static_cast<double>(s.size());
    } else {
        double integral = 0;
        for (std::size_t i = 1; i < s.size(); ++i)
            integral += 0.5 * (s[i].intensity + s[i - 1].intensity) * (s[i].arc - s[i - 1].arc);
        avg = integral / (s.back().arc - s.front().arc);
    }
    if (!(avg > 0.0)) throw InvalidArgument("normalize_intensity: map is identically zero");
    NormalizedIntensity out;
    out.norm = avg;
    for (const auto& x : s) {
        out.arc.push_back(x.arc);
        out.v.push_back(x.intensity / avg);
    }
    return out;
}

struct LogIntensityDistribution {
    Histogram histogram;  // in z = log10 v
    StatCurve reference;  // Porter-Thomas in z at the bin centers
    std::vector<double> z;
    std::size_t excluded = 0;  // zero samples
};

inline LogIntensityDistribution log_intensity_distribution(const std::vector<double>& v, std::size_t bins = 40,
                                                           double z_lo = -5.0, double z_hi = 2.0) {
    LogIntensityDistribution out;
    for (double x : v) {
        if (x < 0.0 || !std::isfinite(x)) throw InvalidArgument("log_intensity_distribution: intensities must be >= 0");
        if (x == 0.0)
            ++out.excluded;
        else
            out.z.push_back(std::log10(x));
    }
    out.histogram = make_histogram(out.z, z_lo, z_hi, bins, CurveKind::Density);
    out.reference.kind = CurveKind::Density;
    for (double c : out.histogram.curve.x) {
        out.reference.x.push_back(c);
        out.reference.y.push_back(special::porter_thomas_log10(c));
    }
    return out;
}

enum class AmplitudeNormalization { None, PathWeighted, MeanUnity };

struct BondAmplitudeSet {
    std::vector<int> bonds;
    std::vector<double> lengths;     // L_j
    std::vector<double> magnitudes;  // |a_j|
    AmplitudeNormalization mode = AmplitudeNormalization::None;
    std::vector<int> coarse;         // bonds whose envelope estimate is coarse
    std::vector<int> excluded;       // undersampled bonds left out

    std::size_t size() const { return bonds.size(); }
    double total_length() const {
        double s = 0;
        for (double l : lengths) s += l;
        return s;
    }
    /// sum_j (L_j / L_1) |a_j|^2
    double weighted_norm() const {
        const double L1 = total_length();
        double s = 0;
        for (std::size_t j = 0; j < size(); ++j) s += lengths[j] / L1 * magnitudes[j] * magnitudes[j];
        return s;
    }
};

struct AmplitudeOptions {
    std::size_t min_samples = 3;    // fewer: bond excluded
    std::size_t coarse_below = 10;  // fewer: estimate flagged coarse
    double wavenumber = 0.0;        // if > 0, also coarse when spacing exceeds a quarter wavelength
};

/// |a_j|^2 = largest sample on the bond; repeated visits are averaged.
inline BondAmplitudeSet extract_bond_amplitudes(const IntensityMap& map, const AmplitudeOptions& opt = {}) {
    map.validate();
    const auto seg = map.segment_of_samples();
    struct Visit {
        std::size_t count = 0;
        double max = 0;
        double max_gap = 0;
        double last_arc = 0;
    };
    std::vector<Visit> visits(map.path.size());
    for (std::size_t i = 0; i < map.samples.size(); ++i) {
        auto& v = visits[seg[i]];
        const auto& s = map.samples[i];
        if (v.count > 0) v.max_gap = std::max(v.max_gap, s.arc - v.last_arc);
        v.max = v.count == 0 ? s.intensity : std::max(v.max, s.intensity);
        v.last_arc = s.arc;
        ++v.count;
    }
    struct Acc {
        double sum = 0;
        int n = 0;
        double length = 0;
        bool coarse = false;
        bool undersampled = false;
    };
    std::map<int, Acc> per_bond;
    std::vector<int> order;
    for (std::size_t j = 0; j < map.path.size(); ++j) {
        const int b = map.path[j].bond;
        if (!per_bond.count(b)) order.push_back(b);
        auto& acc = per_bond[b];
        acc.length = map.path[j].length;
        const auto& v = visits[j];
        if (v.count < opt.min_samples) {
            acc.undersampled = true;
            continue;
        }
        if (v.count < opt.coarse_below) acc.coarse = true;
        if (opt.wavenumber > 0.0 && v.max_gap > kPi / (2.0 * opt.wavenumber)) acc.coarse = true;
        acc.sum += v.max;
        ++acc.n;
    }
    BondAmplitudeSet out;
    for (int b : order) {
        const auto& acc = per_bond[b];
        if (acc.n == 0) {
            out.excluded.push_back(b);
            continue;
        }
        out.bonds.push_back(b);
        out.lengths.push_back(acc.length);
        out.magnitudes.push_back(std::sqrt(acc.sum / acc.n));
        if (acc.coarse) out.coarse.push_back(b);
    }
    return out;
}

/// Rescales so that sum_j (L_j / L_1) |a_j|^2 = 1.
inline BondAmplitudeSet normalize_amplitudes(BondAmplitudeSet set) {
    if (set.size() == 0) throw InvalidArgument("normalize_amplitudes: empty set");
    const double w = set.weighted_norm();
    if (!(w > 0.0)) throw InvalidArgument("normalize_amplitudes: all amplitudes are zero");
    const double f = 1.0 / std::sqrt(w);
    for (auto& a : set.magnitudes) a *= f;
    set.mode = AmplitudeNormalization::PathWeighted;
    return set;
}

/// Mean of |a_j|^4 over a path-weighted set; length-weighted unless `weighted` is false.
inline double ipr_mean_form(const BondAmplitudeSet& set, bool weighted = true) {
    if (set.mode != AmplitudeNormalization::PathWeighted || std::abs(set.weighted_norm() - 1.0) > 1e-10) {
        throw InvalidState("ipr_mean_form: amplitudes are not path-weight normalized");
    }
    const double L1 = set.total_length();
    double s = 0;
    for (std::size_t j = 0; j < set.size(); ++j) {
        const double a4 = std::pow(set.magnitudes[j], 4);
        s += weighted ? set.lengths[j] / L1 * a4 : a4 / static_cast<double>(set.size());
    }
    return s;
}

/// sum |a_j|^4 / (sum |a_j|^2)^2
inline double ipr_ratio_form(const BondAmplitudeSet& set) {
    double s2 = 0, s4 = 0;
    for (double a : set.magnitudes) {
        s2 += a * a;
        s4 += a * a * a * a;
    }
    if (!(s2 > 0.0)) throw InvalidArgument("ipr_ratio_form: all amplitudes are zero");
    return s4 / (s2 * s2);
}

}  // namespace wavechaos::wavefun
