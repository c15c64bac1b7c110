#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "wavechaos/parallel.hpp"
#include "wavechaos/resonance.hpp"
#include "wavechaos/rmt.hpp"
#include "wavechaos/spectrum.hpp"
#include "wavechaos/statistics.hpp"

namespace testfix {

using namespace wavechaos;

/// Cumulative sums of iid unit-mean exponential spacings.
inline std::vector<double> poisson_levels(std::size_t n, std::uint64_t seed) {
    auto rng = rmt::stream(seed, 0);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> v;
    double x = 0;
    for (std::size_t i = 0; i < n; ++i) {
        x += e(rng);
        v.push_back(x);
    }
    return v;
}

inline UnfoldedSpectrum as_unfolded(std::vector<double> v) {
    UnfoldedSpectrum u;
    u.values = std::move(v);
    return u;
}

/// Raw central-bulk eigenvalues of the interpolating ensemble, one entry per realization.
inline std::vector<SpectrumSeries> interpolating_bulks(int realizations, int N, double xi, std::uint64_t seed,
                                                       double fraction = 0.5) {
    rmt::EnsembleConfig cfg;
    cfg.N = N;
    cfg.xi = xi;
    cfg.realizations = realizations;
    cfg.seed = seed;
    std::vector<SpectrumSeries> out(static_cast<std::size_t>(realizations));
    parallel_for(out.size(), [&](std::size_t r) {
        out[r] = rmt::bulk_spectrum(rmt::sample_interpolating(cfg, r, false), fraction);
    });
    return out;
}

inline std::vector<SpectrumSeries> gue_bulks(int realizations, int N, std::uint64_t seed, double fraction = 0.5) {
    std::vector<SpectrumSeries> out(static_cast<std::size_t>(realizations));
    parallel_for(out.size(), [&](std::size_t r) {
        out[r] = rmt::bulk_spectrum(rmt::sample_gue(N, seed, r, false), fraction);
    });
    return out;
}

/// Semicircle unfolding with the off-diagonal variance of the interpolating ensemble.
inline std::vector<UnfoldedSpectrum> unfold_all(const std::vector<SpectrumSeries>& bulks, int N, double sigma2) {
    std::vector<UnfoldedSpectrum> out;
    for (const auto& b : bulks) out.push_back(rmt::unfold_semicircle(b, N, sigma2));
    return out;
}

inline std::vector<double> all_spacings(const std::vector<UnfoldedSpectrum>& us) {
    std::vector<double> s;
    for (const auto& u : us) {
        const auto t = u.spacings();
        s.insert(s.end(), t.begin(), t.end());
    }
    return s;
}

/// Realization average of Sigma^2 or Delta_3 on a common L grid.
template <class Stat>
std::vector<double> ensemble_curve(const std::vector<UnfoldedSpectrum>& us, const std::vector<double>& L, Stat&& stat) {
    std::vector<double> acc(L.size(), 0.0);
    for (const auto& u : us) {
        const auto c = stat(u, L);
        for (std::size_t i = 0; i < L.size(); ++i) acc[i] += c.y[i];
    }
    for (auto& a : acc) a /= static_cast<double>(us.size());
    return acc;
}

inline std::vector<double> ensemble_sigma2(const std::vector<UnfoldedSpectrum>& us, const std::vector<double>& L) {
    return ensemble_curve(us, L, [](const UnfoldedSpectrum& u, const std::vector<double>& g) {
        return stats::number_variance(u, g);
    });
}

inline std::vector<double> ensemble_delta3(const std::vector<UnfoldedSpectrum>& us, const std::vector<double>& L) {
    return ensemble_curve(us, L, [](const UnfoldedSpectrum& u, const std::vector<double>& g) {
        return stats::spectral_rigidity(u, g);
    });
}

struct SyntheticTrace {
    std::vector<double> f;
    std::vector<Complex> s;
};

/// Breit-Wigner trace on a uniform grid with complex Gaussian noise of
/// standard deviation `noise` times the peak modulus, per component.
inline SyntheticTrace synthetic_trace(const std::vector<resonance::Resonance>& truth, Complex background, double lo,
                                      double hi, std::size_t points, bool diagonal, double noise, std::uint64_t seed) {
    SyntheticTrace t;
    double peak = 0;
    for (std::size_t i = 0; i < points; ++i) {
        const double f = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        t.f.push_back(f);
        t.s.push_back(resonance::breit_wigner_eval(truth, background, f, diagonal));
        peak = std::max(peak, std::abs(t.s.back()));
    }
    if (noise > 0) {
        auto rng = rmt::stream(seed, 0);
        std::normal_distribution<double> g(0.0, noise * peak);
        for (auto& v : t.s) v += Complex(g(rng), g(rng));
    }
    return t;
}

/// Three resonances one width apart at 6.5 GHz, widths near 1 MHz.
inline std::vector<resonance::Resonance> overlapping_triplet() {
    return {{6.499e9, 0.9e6, 0.30e6}, {6.500e9, 1.0e6, 0.25e6}, {6.501e9, 1.1e6, 0.35e6}};
}

}  // namespace testfix
