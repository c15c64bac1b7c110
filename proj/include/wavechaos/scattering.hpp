#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "wavechaos/error.hpp"
#include "wavechaos/parallel.hpp"
#include "wavechaos/rmt.hpp"
#include "wavechaos/spectrum.hpp"
#include "wavechaos/types.hpp"

namespace wavechaos::scatter {

enum class ChannelRole { Open, Fictitious };

inline std::string to_string(ChannelRole r) { return r == ChannelRole::Open ? "open" : "fictitious"; }

struct ChannelSpec {
    ChannelRole role = ChannelRole::Open;
    double v2 = 0.0;  // v_c^2
};

/// Columns are channels: W(mu, c), with sum_mu W(mu,c) W(mu,c') = N v_c^2 delta_cc'.
struct CouplingMatrix {
    RMatrix W;
    std::vector<ChannelSpec> channels;

    int open_count() const {
        return static_cast<int>(std::count_if(channels.begin(), channels.end(),
                                              [](const ChannelSpec& c) { return c.role == ChannelRole::Open; }));
    }
    /// Indices of open channels, in channel order.
    std::vector<int> open_indices() const {
        std::vector<int> idx;
        for (std::size_t c = 0; c < channels.size(); ++c)
            if (channels[c].role == ChannelRole::Open) idx.push_back(static_cast<int>(c));
        return idx;
    }
};

/// Gaussian channel vectors, Gram-Schmidt orthogonalized, rescaled to N v_c^2.
inline CouplingMatrix build_coupling(int N, const std::vector<ChannelSpec>& channels, std::uint64_t seed,
                                     std::uint64_t stream_index = 0) {
    if (N < 1) throw InvalidArgument("build_coupling: N must be >= 1");
    if (channels.size() > static_cast<std::size_t>(N)) {
        throw InvalidArgument("build_coupling: " + std::to_string(channels.size()) + " channels exceed N = " +
                              std::to_string(N));
    }
    for (const auto& c : channels)
        if (!(c.v2 >= 0.0) || !std::isfinite(c.v2)) throw InvalidArgument("build_coupling: v_c^2 must be finite and >= 0");
    auto rng = rmt::stream(seed ^ 0x5ca77e12ULL, stream_index);
    rmt::Normal g;
    const auto C = static_cast<Eigen::Index>(channels.size());
    RMatrix w(N, C);
    for (Eigen::Index c = 0; c < C; ++c)
        for (Eigen::Index mu = 0; mu < N; ++mu) w(mu, c) = g(rng);
    // modified Gram-Schmidt, twice for orthogonality at round-off level
    for (Eigen::Index c = 0; c < C; ++c) {
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index p = 0; p < c; ++p) w.col(c) -= w.col(p).dot(w.col(c)) * w.col(p);
        const double norm = w.col(c).norm();
        if (!(norm > 0.0)) throw NumericFailure("build_coupling: degenerate channel vector");
        w.col(c) /= norm;
    }
    for (Eigen::Index c = 0; c < C; ++c) w.col(c) *= std::sqrt(N * channels[static_cast<std::size_t>(c)].v2);
    return {std::move(w), channels};
}

struct HeidelbergModel {
    CMatrix H;
    CouplingMatrix coupling;
    double d = 0;  // mean spacing at band center

    void validate() const {
        if (!(d > 0.0)) throw InvalidArgument("heidelberg model: mean spacing d must be > 0");
        if (H.rows() != coupling.W.rows()) throw InvalidArgument("heidelberg model: H and W dimensions disagree");
    }

    /// H_eff = H - i pi W W^T
    CMatrix effective_hamiltonian() const {
        const RMatrix wwt = coupling.W * coupling.W.transpose();
        return H - Complex(0.0, kPi) * wwt.cast<Complex>();
    }
};

/// S(f) = 1 - 2 pi i W^T (f - H + i pi W W^T)^{-1} W, all channels.
inline CMatrix smatrix(const HeidelbergModel& m, double f) {
    m.validate();
    const auto N = m.H.rows();
    const CMatrix a = CMatrix::Identity(N, N) * f - m.effective_hamiltonian();
    Eigen::PartialPivLU<CMatrix> lu(a);
    const double rc = lu.rcond();
    if (!(rc > 1e-14)) throw NumericFailure("smatrix: resolvent singular at f = " + std::to_string(f));
    const CMatrix wc = m.coupling.W.cast<Complex>();
    const CMatrix x = lu.solve(wc);
    const auto C = m.coupling.W.cols();
    return CMatrix::Identity(C, C) - Complex(0.0, 2.0 * kPi) * (wc.transpose() * x);
}

/// S on the open channels through the reactance matrix. With H = V E V^+ and
/// Wt = V^+ W, K(f) = pi Wt^+ (f - E)^{-1} Wt is C x C Hermitian and
/// S = (1 - iK)(1 + iK)^{-1} = 2 (1 + iK)^{-1} - 1, identical to the
/// resolvent form. One Hermitian eigendecomposition per matrix, then a C x C
/// solve per frequency.
class KMatrixSolver {
public:
    explicit KMatrixSolver(const HeidelbergModel& m) {
        m.validate();
        open_ = m.coupling.open_indices();
        symmetric_ = m.H == m.H.transpose();
        const CMatrix w = m.coupling.W.cast<Complex>();
        if (symmetric_) {
            // real symmetric H: real eigenvectors keep K real symmetric
            Eigen::SelfAdjointEigenSolver<RMatrix> es(m.H.real());
            if (es.info() != Eigen::Success) throw NumericFailure("k-matrix: eigensolver did not converge");
            energies_ = es.eigenvalues();
            wr_ = es.eigenvectors().transpose() * m.coupling.W;
            wt_ = wr_.cast<Complex>();
        } else {
            Eigen::SelfAdjointEigenSolver<CMatrix> es(m.H);
            if (es.info() != Eigen::Success) throw NumericFailure("k-matrix: eigensolver did not converge");
            energies_ = es.eigenvalues();
            wt_ = es.eigenvectors().adjoint() * w;
        }
    }

    int open_count() const { return static_cast<int>(open_.size()); }

    /// Open-channel block of S at f. For real symmetric H the block is
    /// symmetric to the last bit.
    CMatrix operator()(double f) const {
        const auto C = wt_.cols();
        const auto M = static_cast<Eigen::Index>(open_.size());
        // A level very close to f is split off as a rank-one term and restored with
        // Sherman-Morrison, which has a finite limit when f sits on the level.
        Eigen::Index near = 0;
        const double gap = (f - energies_.array()).abs().minCoeff(&near);
        const double scale = std::max(1.0, energies_.cwiseAbs().maxCoeff());
        const bool split = gap < 1e-8 * scale;
        RVector g(energies_.size());
        for (Eigen::Index n = 0; n < g.size(); ++n) g(n) = split && n == near ? 0.0 : kPi / (f - energies_(n));
        CMatrix k;
        if (symmetric_) {
            RMatrix kr = wr_.transpose() * g.asDiagonal() * wr_;
            k = (0.5 * (kr + kr.transpose())).cast<Complex>();
        } else {
            k = wt_.adjoint() * g.asDiagonal() * wt_;
            k = (0.5 * (k + k.adjoint())).eval();
        }
        const CMatrix a = CMatrix::Identity(C, C) + Complex(0.0, 1.0) * k;
        CMatrix rhs = CMatrix::Zero(C, M);
        for (Eigen::Index j = 0; j < M; ++j) rhs(open_[static_cast<std::size_t>(j)], j) = 1.0;
        const auto lu = a.partialPivLu();
        CMatrix x = lu.solve(rhs);
        if (split && wt_.row(near).squaredNorm() > 0.0) {
            const CVector u = wt_.row(near).adjoint();
            const CVector au = lu.solve(u);
            const Complex uau = u.dot(au);
            // c = i pi / (f - E); the update is x -= au (c u^H x) / (1 + c u^H au)
            const Eigen::Matrix<Complex, 1, Eigen::Dynamic> ux = u.adjoint() * x;
            if (gap == 0.0) {
                x -= au * ux / uau;
            } else {
                const Complex c(0.0, kPi / (f - energies_(near)));
                x -= au * (c * ux) / (1.0 + c * uau);
            }
        }
        CMatrix s(M, M);
        for (Eigen::Index i = 0; i < M; ++i)
            for (Eigen::Index j = 0; j < M; ++j) s(i, j) = 2.0 * x(open_[static_cast<std::size_t>(i)], j);
        if (symmetric_) s = (0.5 * (s + s.transpose())).eval();
        s -= CMatrix::Identity(M, M);
        if (!s.allFinite()) throw NumericFailure("k-matrix: non-finite S at f = " + std::to_string(f));
        return s;
    }

private:
    std::vector<int> open_;
    RVector energies_;
    CMatrix wt_;  // N x C
    RMatrix wr_;  // real copy when H is real symmetric
    bool symmetric_ = false;
};

/// Complex eigenvalues of H_eff, the resonance poles f_n - i Gamma_n / 2.
inline CVector resonance_poles(const HeidelbergModel& m) {
    m.validate();
    Eigen::ComplexEigenSolver<CMatrix> es(m.effective_hamiltonian(), false);
    if (es.info() != Eigen::Success) throw NumericFailure("resonance_poles: eigensolver did not converge");
    return es.eigenvalues();
}

// Coupling relations ---------------------------------------------------------

/// T = 4x / (1 + x)^2 with x = pi^2 v^2 / d.
inline double transmission_from_coupling(double v2, double d) {
    const double x = kPi * kPi * v2 / d;
    return 4.0 * x / ((1.0 + x) * (1.0 + x));
}

/// Sub-critical inverse of transmission_from_coupling.
inline double v2_from_transmission(double T, double d) {
    if (!(T >= 0.0 && T <= 1.0)) throw InvalidArgument("v2_from_transmission: T must be in [0, 1]");
    if (!(d > 0.0)) throw InvalidArgument("v2_from_transmission: d must be > 0");
    if (T == 0.0) return 0.0;
    const double x = (2.0 / T) * (1.0 - std::sqrt(1.0 - T)) - 1.0;
    return x * d / (kPi * kPi);
}

/// T_c = 1 - |<S_cc>|^2
inline double transmission_from_average(Complex mean_scc) { return 1.0 - std::norm(mean_scc); }

inline double transmission_from_average(const std::vector<std::vector<Complex>>& members) {
    Complex sum = 0;
    std::size_t n = 0;
    for (const auto& m : members)
        for (const auto& s : m) {
            sum += s;
            ++n;
        }
    if (n == 0) throw InvalidArgument("transmission_from_average: empty trace");
    return transmission_from_average(sum / static_cast<double>(n));
}

struct WeisskopfResult {
    double tau_abs = 0;
    bool clamped = false;  // the raw estimate was negative
};

/// tau_abs = 2 pi Gamma/d - T1 - T2, clamped at 0.
inline WeisskopfResult weisskopf_absorption(double gamma_over_d, double t1, double t2) {
    if (!(gamma_over_d > 0.0)) throw InvalidArgument("weisskopf_absorption: Gamma/d must be > 0");
    const double raw = 2.0 * kPi * gamma_over_d - t1 - t2;
    return raw < 0.0 ? WeisskopfResult{0.0, true} : WeisskopfResult{raw, false};
}

// Correlations ---------------------------------------------------------------

using Members = std::vector<std::vector<Complex>>;

struct CorrelationResult {
    std::vector<double> eps;
    std::vector<Complex> c;
    double c0 = 0;          // C(0) before normalization
    bool normalized = false;
};

inline Complex ensemble_mean(const Members& m) {
    Complex sum = 0;
    std::size_t n = 0;
    for (const auto& t : m)
        for (const auto& s : t) {
            sum += s;
            ++n;
        }
    if (n == 0) throw InvalidArgument("empty trace set");
    return sum / static_cast<double>(n);
}

/// C(eps) = < S_fl(f) conj(S_fl(f + eps)) > over f and members; eps must be
/// multiples of the grid step.
inline CorrelationResult autocorrelation(const Members& members, double step, const std::vector<double>& eps,
                                         bool normalize = false) {
    if (!(step > 0.0)) throw InvalidArgument("autocorrelation: grid step must be > 0");
    std::size_t shortest = SIZE_MAX;
    for (const auto& t : members) shortest = std::min(shortest, t.size());
    if (members.empty() || shortest == 0) throw InvalidArgument("autocorrelation: empty trace");
    const Complex mean = ensemble_mean(members);
    CorrelationResult r;
    r.eps = eps;
    for (double e : eps) {
        const double lag_real = e / step;
        const auto lag = static_cast<std::size_t>(std::llround(std::abs(lag_real)));
        if (std::abs(std::abs(lag_real) - static_cast<double>(lag)) > 1e-6 * std::max(1.0, std::abs(lag_real))) {
            throw InvalidArgument("autocorrelation: eps " + std::to_string(e) + " is not a multiple of the grid step");
        }
        if (2 * lag >= shortest) {
            throw InvalidArgument("autocorrelation: trace span too short for eps " + std::to_string(e));
        }
        Complex acc = 0;
        std::size_t n = 0;
        for (const auto& t : members)
            for (std::size_t i = 0; i + lag < t.size(); ++i) {
                acc += (t[i] - mean) * std::conj(t[i + lag] - mean);
                ++n;
            }
        Complex c = acc / static_cast<double>(n);
        if (e < 0) c = std::conj(c);
        r.c.push_back(c);
    }
    // C(0) from the zero lag itself
    double c0 = 0;
    std::size_t n0 = 0;
    for (const auto& t : members)
        for (const auto& s : t) {
            c0 += std::norm(s - mean);
            ++n0;
        }
    r.c0 = c0 / static_cast<double>(n0);
    if (normalize && r.c0 > 0.0) {
        for (auto& c : r.c) c /= r.c0;
        r.normalized = true;
    }
    return r;
}

/// Re<S12_fl conj(S21_fl)> / sqrt(<|S12_fl|^2><|S21_fl|^2>)
inline double cross_correlation(const Members& s12, const Members& s21) {
    if (s12.size() != s21.size()) throw InvalidArgument("cross_correlation: member counts differ");
    for (std::size_t i = 0; i < s12.size(); ++i)
        if (s12[i].size() != s21[i].size()) throw InvalidArgument("cross_correlation: traces on different grids");
    const Complex ma = ensemble_mean(s12), mb = ensemble_mean(s21);
    double num = 0, va = 0, vb = 0;
    for (std::size_t i = 0; i < s12.size(); ++i)
        for (std::size_t j = 0; j < s12[i].size(); ++j) {
            const Complex a = s12[i][j] - ma, b = s21[i][j] - mb;
            num += (a * std::conj(b)).real();
            va += std::norm(a);
            vb += std::norm(b);
        }
    if (!(va > 0.0) || !(vb > 0.0)) throw UndefinedStatistic("cross_correlation: a trace has zero variance");
    return num / std::sqrt(va * vb);
}

// Ensemble simulation --------------------------------------------------------

struct ScatterConfig {
    rmt::EnsembleConfig ensemble;
    std::vector<ChannelSpec> channels;
    double band_fraction = 0.5;      // central share of the eigenvalues swept
    double step_fraction = 0.1;      // frequency step in units of d
    std::size_t max_points = 50'000'000;  // realizations x grid points cap
    bool direct_solve = false;       // N x N solve per frequency instead of the k-matrix route
    bool record_widths = false;      // resonance widths from the poles of H_eff (costly)
};

/// Standard channel list: M open channels of transmission T, Lambda
/// fictitious channels of transmission T_f.
inline std::vector<ChannelSpec> channels_from_transmissions(int M, double T, int Lambda, double Tf, double d) {
    std::vector<ChannelSpec> ch;
    for (int i = 0; i < M; ++i) ch.push_back({ChannelRole::Open, v2_from_transmission(T, d)});
    for (int i = 0; i < Lambda; ++i) ch.push_back({ChannelRole::Fictitious, v2_from_transmission(Tf, d)});
    return ch;
}

struct EnsembleResult {
    double d = 0;
    int open = 0;
    double step = 0;  // grid step in units of d
    /// traces[a * open + b][realization][i] = S_ab on the realization's grid
    std::vector<Members> traces;
    std::vector<std::vector<double>> grids;  // f/d per realization
    std::vector<double> widths;              // -2 Im(pole) of in-band poles, units of d, if recorded
    std::vector<Histogram> modulus_histograms;
    std::vector<Histogram> phase_histograms;

    const Members& element(int a, int b) const { return traces[static_cast<std::size_t>(a * open + b)]; }

    double transmission(int c) const { return transmission_from_average(element(c, c)); }

    double mean_width() const {
        if (widths.empty()) throw UndefinedStatistic("no resonance widths recorded");
        double s = 0;
        for (double w : widths) s += w;
        return s / static_cast<double>(widths.size());
    }

    double cross() const {
        if (open < 2) throw InvalidArgument("cross correlation needs at least 2 open channels");
        return cross_correlation(element(0, 1), element(1, 0));
    }
};

inline EnsembleResult simulate_ensemble(const ScatterConfig& cfg) {
    cfg.ensemble.validate();
    if (!(cfg.band_fraction > 0.0 && cfg.band_fraction <= 1.0)) throw InvalidArgument("band_fraction must be in (0, 1]");
    if (!(cfg.step_fraction > 0.0)) throw InvalidArgument("step_fraction must be > 0");
    const int N = cfg.ensemble.N;
    if (cfg.channels.size() > static_cast<std::size_t>(N)) {
        throw InvalidArgument("simulate_ensemble: M + Lambda = " + std::to_string(cfg.channels.size()) + " exceeds N = " +
                              std::to_string(N));
    }
    const double d = rmt::band_center_spacing(N, rmt::offdiag_variance(N, cfg.ensemble.xi));
    const auto levels = static_cast<std::size_t>(std::ceil(cfg.band_fraction * N));
    const auto per_realization = static_cast<std::size_t>(std::ceil(static_cast<double>(levels) * 1.5 / cfg.step_fraction));
    const auto budget = per_realization * static_cast<std::size_t>(cfg.ensemble.realizations);
    if (budget > cfg.max_points) {
        throw ResourceLimit("simulate_ensemble: about " + std::to_string(budget) +
                            " frequency points exceed the cap max_points = " + std::to_string(cfg.max_points));
    }

    EnsembleResult out;
    out.d = d;
    out.step = cfg.step_fraction;
    const CouplingMatrix probe{RMatrix(0, 0), cfg.channels};
    out.open = probe.open_count();
    const int M = out.open;
    const auto R = static_cast<std::size_t>(cfg.ensemble.realizations);
    out.traces.assign(static_cast<std::size_t>(M * M), Members(R));
    out.grids.resize(R);
    std::vector<std::vector<double>> widths(R);

    parallel_for(R, [&](std::size_t r) {
        const auto sample = rmt::sample_interpolating(cfg.ensemble, r, false);
        HeidelbergModel model{sample.matrix, build_coupling(N, cfg.channels, cfg.ensemble.seed, r), d};
        const auto bulk = rmt::bulk_spectrum(sample, cfg.band_fraction);
        const double lo = bulk.values().front(), hi = bulk.values().back();
        std::vector<double>& grid = out.grids[r];
        for (std::size_t i = 0;; ++i) {
            const double f = lo + static_cast<double>(i) * cfg.step_fraction * d;
            if (f > hi) break;
            grid.push_back(f / d);
        }
        for (int e = 0; e < M * M; ++e) out.traces[static_cast<std::size_t>(e)][r].resize(grid.size());
        const auto open = model.coupling.open_indices();
        auto store = [&](std::size_t i, const CMatrix& s) {
            for (int a = 0; a < M; ++a)
                for (int b = 0; b < M; ++b) out.traces[static_cast<std::size_t>(a * M + b)][r][i] = s(a, b);
        };
        if (cfg.direct_solve) {
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const CMatrix full = smatrix(model, grid[i] * d);
                CMatrix s(M, M);
                for (int a = 0; a < M; ++a)
                    for (int b = 0; b < M; ++b) s(a, b) = full(open[static_cast<std::size_t>(a)], open[static_cast<std::size_t>(b)]);
                store(i, s);
            }
        } else {
            const KMatrixSolver solver(model);
            for (std::size_t i = 0; i < grid.size(); ++i) store(i, solver(grid[i] * d));
        }
        if (cfg.record_widths) {
            const CVector poles = resonance_poles(model);
            for (Eigen::Index k = 0; k < poles.size(); ++k)
                if (poles(k).real() >= lo && poles(k).real() <= hi) widths[r].push_back(-2.0 * poles(k).imag() / d);
        }
    });

    for (const auto& w : widths) out.widths.insert(out.widths.end(), w.begin(), w.end());
    for (int e = 0; e < M * M; ++e) {
        std::vector<double> mod, ph;
        for (const auto& t : out.traces[static_cast<std::size_t>(e)])
            for (const auto& s : t) {
                mod.push_back(std::abs(s));
                ph.push_back(std::arg(s));
            }
        out.modulus_histograms.push_back(make_histogram(mod, 0.0, 1.0 + 1e-12, 50, CurveKind::Density));
        out.phase_histograms.push_back(make_histogram(ph, -kPi, kPi + 1e-12, 50, CurveKind::Density));
    }
    return out;
}

}  // namespace wavechaos::scatter
