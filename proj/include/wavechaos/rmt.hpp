#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "wavechaos/error.hpp"
#include "wavechaos/spectrum.hpp"
#include "wavechaos/types.hpp"

namespace wavechaos::rmt {

struct EnsembleConfig {
    int N = 300;
    double xi = 0.0;
    int realizations = 200;
    std::uint64_t seed = 0;
    double bulk_fraction = 0.5;

    void validate() const {
        if (N < 2) throw InvalidArgument("ensemble: N must be >= 2");
        if (realizations < 1) throw InvalidArgument("ensemble: realizations must be >= 1");
        if (!(xi >= 0.0) || !std::isfinite(xi)) throw InvalidArgument("ensemble: xi must be finite and >= 0");
        if (!(bulk_fraction > 0.0 && bulk_fraction <= 1.0)) throw InvalidArgument("ensemble: bulk_fraction must be in (0, 1]");
    }
};

/// splitmix64 finalizer; gives the subseed of realization i.
inline std::uint64_t subseed(std::uint64_t seed, std::uint64_t i) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (i + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

inline Rng stream(std::uint64_t seed, std::uint64_t i) { return Rng(subseed(seed, i)); }

/// Box-Muller normal; libstdc++'s normal_distribution is not portable across
/// standard libraries, this is.
class Normal {
public:
    double operator()(Rng& rng) {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = std::ldexp(static_cast<double>(rng() >> 11), -53);
        } while (u1 <= 0.0);
        const double u2 = std::ldexp(static_cast<double>(rng() >> 11), -53);
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

private:
    double spare_ = 0;
    bool has_spare_ = false;
};

struct HamiltonianSample {
    CMatrix matrix;
    RVector eigenvalues;   // ascending
    CMatrix eigenvectors;  // columns

    /// Eigenvectors are left empty when `with_vectors` is false.
    explicit HamiltonianSample(CMatrix h, bool with_vectors = true) : matrix(std::move(h)) {
        const int opts = with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
        if (is_real()) {
            // real symmetric solver is several times faster
            Eigen::SelfAdjointEigenSolver<RMatrix> es(matrix.real(), opts);
            if (es.info() != Eigen::Success) throw NumericFailure("symmetric eigensolver did not converge");
            eigenvalues = es.eigenvalues();
            if (with_vectors) eigenvectors = es.eigenvectors().cast<Complex>();
            return;
        }
        Eigen::SelfAdjointEigenSolver<CMatrix> es(matrix, opts);
        if (es.info() != Eigen::Success) throw NumericFailure("hermitian eigensolver did not converge");
        eigenvalues = es.eigenvalues();
        if (with_vectors) eigenvectors = es.eigenvectors();
    }

    int size() const { return static_cast<int>(matrix.rows()); }

    bool is_real() const { return matrix.imag().cwiseAbs().maxCoeff() == 0.0; }
};

/// Real symmetric part: off-diagonal variance 1, diagonal variance 2.
inline RMatrix goe_matrix(int N, Rng& rng, Normal& g) {
    RMatrix a(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) a(i, j) = g(rng);
    return (a + a.transpose()) / std::sqrt(2.0);
}

/// Real antisymmetric, entries of variance 1.
inline RMatrix antisymmetric_matrix(int N, Rng& rng, Normal& g) {
    RMatrix a(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) a(i, j) = g(rng);
    return (a - a.transpose()) / std::sqrt(2.0);
}

/// H = H_S + i (pi xi / sqrt N) H_A for realization i of the config.
inline HamiltonianSample sample_interpolating(const EnsembleConfig& cfg, std::uint64_t i, bool with_vectors = true) {
    cfg.validate();
    auto rng = stream(cfg.seed, i);
    Normal g;
    const RMatrix hs = goe_matrix(cfg.N, rng, g);
    CMatrix h = hs.cast<Complex>();
    if (cfg.xi > 0.0) {
        const RMatrix ha = antisymmetric_matrix(cfg.N, rng, g);
        h += Complex(0.0, kPi * cfg.xi / std::sqrt(static_cast<double>(cfg.N))) * ha.cast<Complex>();
    }
    return HamiltonianSample(std::move(h), with_vectors);
}

inline HamiltonianSample sample_goe(int N, std::uint64_t seed, std::uint64_t i = 0, bool with_vectors = true) {
    if (N < 2) throw InvalidArgument("sample_goe: N must be >= 2");
    auto rng = stream(seed, i);
    Normal g;
    return HamiltonianSample(goe_matrix(N, rng, g).cast<Complex>(), with_vectors);
}

/// Complex off-diagonals of variance 1, real diagonal of variance 1.
inline HamiltonianSample sample_gue(int N, std::uint64_t seed, std::uint64_t i = 0, bool with_vectors = true) {
    if (N < 2) throw InvalidArgument("sample_gue: N must be >= 2");
    auto rng = stream(seed, i);
    Normal g;
    CMatrix a(N, N);
    for (int r = 0; r < N; ++r)
        for (int c = 0; c < N; ++c) {
            const double re = g(rng);
            a(r, c) = Complex(re, g(rng));
        }
    CMatrix h = (a + a.adjoint()) / 2.0;
    for (int r = 0; r < N; ++r) h(r, r) = Complex(h(r, r).real(), 0.0);
    return HamiltonianSample(std::move(h), with_vectors);
}

/// Central ceil(fraction N) eigenvalues.
inline SpectrumSeries bulk_spectrum(const HamiltonianSample& s, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("bulk_spectrum: fraction must be in (0, 1]");
    const int n = s.size();
    const int m = std::min(n, static_cast<int>(std::ceil(fraction * n - 1e-9)));
    const int start = (n - m) / 2;
    std::vector<double> v(s.eigenvalues.data() + start, s.eigenvalues.data() + start + m);
    return SpectrumSeries(std::move(v), SpectrumUnit::Dimensionless);
}

/// Off-diagonal |H_ij|^2 variance of the interpolating ensemble.
inline double offdiag_variance(int N, double xi) { return 1.0 + kPi * kPi * xi * xi / static_cast<double>(N); }

/// Semicircle counting function for N levels with off-diagonal variance sigma2.
inline double semicircle_count(double E, int N, double sigma2) {
    const double R = 2.0 * std::sqrt(sigma2 * N);
    const double x = std::clamp(E / R, -1.0, 1.0);
    return N * (0.5 + (x * std::sqrt(1.0 - x * x) + std::asin(x)) / kPi);
}

/// Mean level spacing at the band center, pi sqrt(sigma2 / N).
inline double band_center_spacing(int N, double sigma2) { return kPi * std::sqrt(sigma2 / static_cast<double>(N)); }

inline UnfoldedSpectrum unfold_semicircle(const SpectrumSeries& s, int N, double sigma2) {
    UnfoldedSpectrum u;
    u.source = "semicircle";
    for (double e : s.values()) u.values.push_back(semicircle_count(e, N, sigma2));
    return u;
}

/// One row per realization, comma separated.
inline void dump_bulk_csv(const std::string& path, const std::vector<SpectrumSeries>& bulks) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
    out.precision(17);
    out << "# realization,eigenvalues...\n";
    for (std::size_t r = 0; r < bulks.size(); ++r) {
        out << r;
        for (double v : bulks[r].values()) out << ',' << v;
        out << '\n';
    }
}

}  // namespace wavechaos::rmt
