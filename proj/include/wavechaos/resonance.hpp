#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "wavechaos/error.hpp"
#include "wavechaos/levmar.hpp"
#include "wavechaos/parallel.hpp"
#include "wavechaos/special.hpp"
#include "wavechaos/spectrum.hpp"
#include "wavechaos/types.hpp"

namespace wavechaos::resonance {

struct Resonance {
    double f = 0;          // f_m, Hz
    double gamma = 0;      // Gamma_m, Hz
    double amplitude = 0;  // signed sqrt of the strength
    double strength() const { return amplitude * amplitude; }  // y = gamma_ma gamma_mb
};

/// S(f) = (1 + bg) [delta_ba - i sum_m a_m / (f - f_m + i Gamma_m / 2)]
/// With bg = 0 and one term this is the complex Breit-Wigner form.
inline Complex breit_wigner_eval(const std::vector<Resonance>& params, Complex background, double f, bool diagonal) {
    Complex sum = 0;
    for (const auto& r : params) {
        if (!(r.gamma > 0.0)) throw InvalidArgument("breit_wigner_eval: widths must be > 0");
        sum += r.amplitude / Complex(f - r.f, 0.5 * r.gamma);
    }
    const Complex base = (diagonal ? 1.0 : 0.0) - Complex(0.0, 1.0) * sum;
    return (1.0 + background) * base;
}

inline std::vector<double> quality_factors(const std::vector<Resonance>& params) {
    std::vector<double> q;
    for (const auto& r : params) {
        if (!(r.gamma > 0.0)) throw InvalidArgument("quality_factors: widths must be > 0");
        q.push_back(r.f / r.gamma);
    }
    return q;
}

namespace detail {

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    double m = *mid;
    if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
    return m;
}

}  // namespace detail

struct PeakPickOptions {
    double mad_factor = 3.0;   // floor = median + factor * MAD
    int min_run = 3;           // grid points above the floor
    double min_prominence = 0.1;  // relative to the peak height above floor
};

/// Initial guesses from local maxima of |S - median(S)|.
inline std::vector<Resonance> peak_pick(const std::vector<double>& f, const std::vector<Complex>& s,
                                        const PeakPickOptions& opt = {}) {
    if (f.size() != s.size()) throw InvalidArgument("peak_pick: grid and trace lengths differ");
    const std::size_t n = f.size();
    std::vector<Resonance> out;
    if (n < 3) return out;
    std::vector<double> re(n), im(n);
    for (std::size_t i = 0; i < n; ++i) {
        re[i] = s[i].real();
        im[i] = s[i].imag();
    }
    const Complex base(detail::median(re), detail::median(im));
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) dev[i] = std::abs(s[i] - base);
    const double med = detail::median(dev);
    std::vector<double> absdev(n);
    for (std::size_t i = 0; i < n; ++i) absdev[i] = std::abs(dev[i] - med);
    const double mad = detail::median(absdev);
    const double floor = med + opt.mad_factor * mad;
    // noise from first differences; the smooth resonance shape barely enters
    std::vector<double> diff(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) diff[i] = std::abs(dev[i + 1] - dev[i]);
    const double noise = detail::median(diff) / (0.6745 * std::numbers::sqrt2);

    std::size_t i = 0;
    while (i < n) {
        if (dev[i] <= floor) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && dev[j] > floor) ++j;
        if (static_cast<int>(j - i) >= opt.min_run) {
            // local maxima in the run, kept if prominent against the deepest
            // dip separating them from a higher neighbor
            std::vector<std::size_t> maxima;
            for (std::size_t k = i; k < j; ++k) {
                const bool left = k == i || dev[k] >= dev[k - 1];
                const bool right = k + 1 == j || dev[k] > dev[k + 1];
                if (left && right) maxima.push_back(k);
            }
            for (std::size_t k : maxima) {
                const double h = dev[k] - floor;
                double dip_left = dev[k], dip_right = dev[k];
                bool higher_left = false, higher_right = false;
                for (std::size_t q = k; q-- > i;) {
                    dip_left = std::min(dip_left, dev[q]);
                    if (dev[q] > dev[k]) {
                        higher_left = true;
                        break;
                    }
                }
                for (std::size_t q = k + 1; q < j; ++q) {
                    dip_right = std::min(dip_right, dev[q]);
                    if (dev[q] > dev[k]) {
                        higher_right = true;
                        break;
                    }
                }
                double prom = h;
                if (higher_left) prom = std::min(prom, dev[k] - dip_left);
                if (higher_right) prom = std::min(prom, dev[k] - dip_right);
                if (prom < opt.min_prominence * h || prom < opt.mad_factor * noise) continue;
                // |S| falls to 1/sqrt(2) of its peak where the Lorentzian |S|^2 halves
                const double half = dev[k] / std::sqrt(2.0);
                std::size_t a = k, b = k;
                while (a > 0 && dev[a] > half) --a;
                while (b + 1 < n && dev[b] > half) ++b;
                const double width = std::max(f[b] - f[a], f[std::min(k + 1, n - 1)] - f[k > 0 ? k - 1 : 0]);
                Resonance r;
                r.f = f[k];
                r.gamma = width;
                r.amplitude = 0.5 * dev[k] * width;  // |S| = 2 a / Gamma on resonance
                out.push_back(r);
            }
        }
        i = j;
    }
    return out;
}

enum class FitTarget { Complex, SquaredModulus };

struct FitOptions {
    FitTarget target = FitTarget::Complex;
    bool diagonal = false;  // reflection S_aa (delta = 1) vs transmission
    lm::Options lm;
};

struct FitReport {
    double lo = 0, hi = 0;   // window bounds
    double residual_norm = 0;
    int iterations = 0;
    bool converged = false;
    bool ill_conditioned = false;  // a width collapsed below 2 grid steps
    std::vector<Resonance> params;
    Complex background = 0;
    RMatrix covariance;  // over (f_m, Gamma_m, a_m)..., then background parameters
};

/// Complex Breit-Wigner least squares on the samples inside [lo, hi].
///
/// Internal parameters per resonance: t_m = (f_m - center)/scale,
/// log(Gamma_m/scale), a_m/scale. The background is a phase, plus a log
/// magnitude for diagonal elements (for transmission the magnitude is
/// degenerate with the strengths and stays fixed at 1).
inline FitReport fit_window(const std::vector<double>& f, const std::vector<Complex>& s, double lo, double hi,
                            std::vector<Resonance> guesses, const FitOptions& opt = {}) {
    if (f.size() != s.size()) throw InvalidArgument("fit_window: grid and trace lengths differ");
    if (!(hi > lo)) throw InvalidArgument("fit_window: empty window");
    if (guesses.empty()) throw InvalidArgument("fit_window: no initial guesses");
    std::vector<double> x;
    std::vector<Complex> y;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (f[i] >= lo && f[i] <= hi) {
            x.push_back(f[i]);
            y.push_back(s[i]);
        }
    for (const auto& g : guesses) {
        if (g.f < lo || g.f > hi) throw InvalidArgument("fit_window: guess at " + std::to_string(g.f) + " outside the window");
        if (!(g.gamma > 0.0)) throw InvalidArgument("fit_window: guessed widths must be > 0");
    }
    const bool squared = opt.target == FitTarget::SquaredModulus;
    const int K = static_cast<int>(guesses.size());
    const int nbg = squared ? (opt.diagonal ? 1 : 0) : (opt.diagonal ? 2 : 1);
    const int np = 3 * K + nbg;
    const std::size_t per_point = squared ? 1 : 2;
    if (x.size() * per_point < static_cast<std::size_t>(5 * np)) {
        throw InvalidArgument("fit_window: " + std::to_string(x.size()) + " samples for " + std::to_string(np) +
                              " parameters; need 5 data points per parameter");
    }
    const double center = 0.5 * (lo + hi);
    const double scale = 0.5 * (hi - lo);
    std::vector<double> t(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) t[i] = (x[i] - center) / scale;

    RVector p(np);
    for (int k = 0; k < K; ++k) {
        p(3 * k) = (guesses[k].f - center) / scale;
        p(3 * k + 1) = std::log(guesses[k].gamma / scale);
        p(3 * k + 2) = guesses[k].amplitude / scale;
    }
    // background phase from the data where the initial model is largest
    if (!squared) {
        Complex num = 0;
        std::vector<Resonance> g0 = guesses;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const Complex m = breit_wigner_eval(g0, 0.0, x[i], opt.diagonal);
            num += y[i] * std::conj(m);
        }
        p(3 * K) = std::abs(num) > 0 ? std::arg(num) : 0.0;
        if (opt.diagonal) p(3 * K + 1) = 0.0;
    } else if (opt.diagonal) {
        p(3 * K) = 0.0;
    }

    const Complex I(0.0, 1.0);
    auto model = [&](const RVector& q, RVector& r, RMatrix* J) {
        const std::size_t m = t.size();
        r.resize(static_cast<Eigen::Index>(m * per_point));
        if (J) J->setZero(static_cast<Eigen::Index>(m * per_point), np);
        double phase = 0.0, logmag = 0.0;
        if (!squared) {
            phase = q(3 * K);
            if (opt.diagonal) logmag = q(3 * K + 1);
        } else if (opt.diagonal) {
            logmag = q(3 * K);
        }
        const Complex B = std::exp(Complex(logmag, phase));
        std::vector<Complex> dbase(static_cast<std::size_t>(3 * K));
        for (std::size_t i = 0; i < m; ++i) {
            Complex sum = 0;
            for (int k = 0; k < K; ++k) {
                const double g = std::exp(q(3 * k + 1));
                const Complex z(t[i] - q(3 * k), 0.5 * g);
                const double a = q(3 * k + 2);
                sum += a / z;
                // derivatives of base = delta - i sum
                dbase[3 * k] = -I * a / (z * z);
                dbase[3 * k + 1] = -0.5 * a * g / (z * z);
                dbase[3 * k + 2] = -I / z;
            }
            const Complex base = (opt.diagonal ? 1.0 : 0.0) - I * sum;
            const Complex S = B * base;
            if (!squared) {
                const Complex res = S - y[i];
                r(static_cast<Eigen::Index>(2 * i)) = res.real();
                r(static_cast<Eigen::Index>(2 * i + 1)) = res.imag();
                if (J) {
                    for (int c = 0; c < 3 * K; ++c) {
                        const Complex d = B * dbase[static_cast<std::size_t>(c)];
                        (*J)(static_cast<Eigen::Index>(2 * i), c) = d.real();
                        (*J)(static_cast<Eigen::Index>(2 * i + 1), c) = d.imag();
                    }
                    const Complex dphase = I * S;
                    (*J)(static_cast<Eigen::Index>(2 * i), 3 * K) = dphase.real();
                    (*J)(static_cast<Eigen::Index>(2 * i + 1), 3 * K) = dphase.imag();
                    if (opt.diagonal) {
                        (*J)(static_cast<Eigen::Index>(2 * i), 3 * K + 1) = S.real();
                        (*J)(static_cast<Eigen::Index>(2 * i + 1), 3 * K + 1) = S.imag();
                    }
                }
            } else {
                r(static_cast<Eigen::Index>(i)) = std::norm(S) - std::norm(y[i]);
                if (J) {
                    for (int c = 0; c < 3 * K; ++c)
                        (*J)(static_cast<Eigen::Index>(i), c) =
                            2.0 * (std::conj(S) * B * dbase[static_cast<std::size_t>(c)]).real();
                    if (opt.diagonal) (*J)(static_cast<Eigen::Index>(i), 3 * K) = 2.0 * std::norm(S);
                }
            }
        }
    };

    const auto res = lm::levenberg_marquardt(model, p, opt.lm);
    FitReport rep;
    rep.lo = lo;
    rep.hi = hi;
    rep.residual_norm = res.residual_norm;
    rep.iterations = res.iterations;
    rep.converged = res.converged;
    const double grid_step = x.size() > 1 ? (x.back() - x.front()) / static_cast<double>(x.size() - 1) : scale;
    for (int k = 0; k < K; ++k) {
        Resonance r;
        r.f = center + scale * res.params(3 * k);
        r.gamma = scale * std::exp(res.params(3 * k + 1));
        r.amplitude = scale * res.params(3 * k + 2);
        if (r.f < lo || r.f > hi) rep.converged = false;
        if (r.gamma < 2.0 * grid_step) rep.ill_conditioned = true;
        rep.params.push_back(r);
    }
    double phase = 0.0, logmag = 0.0;
    if (!squared) {
        phase = res.params(3 * K);
        if (opt.diagonal) logmag = res.params(3 * K + 1);
    } else if (opt.diagonal) {
        logmag = res.params(3 * K);
    }
    rep.background = std::exp(Complex(logmag, phase)) - 1.0;
    // covariance in physical units: d f = scale dt, d Gamma = Gamma d log, d a = scale d a'
    RVector jac = RVector::Ones(np);
    for (int k = 0; k < K; ++k) {
        jac(3 * k) = scale;
        jac(3 * k + 1) = rep.params[static_cast<std::size_t>(k)].gamma;
        jac(3 * k + 2) = scale;
    }
    rep.covariance = jac.asDiagonal() * res.covariance * jac.asDiagonal();
    return rep;
}

/// Clusters guesses closer than 10 Gamma and fits each cluster in its own
/// window extending 5 Gamma past the outermost members.
inline std::vector<FitReport> fit_trace(const std::vector<double>& f, const std::vector<Complex>& s,
                                        std::vector<Resonance> guesses, const FitOptions& opt = {}) {
    std::sort(guesses.begin(), guesses.end(), [](const auto& a, const auto& b) { return a.f < b.f; });
    std::vector<std::vector<Resonance>> clusters;
    for (const auto& g : guesses) {
        if (!clusters.empty()) {
            const auto& last = clusters.back().back();
            if (g.f - last.f < 10.0 * std::max(g.gamma, last.gamma)) {
                clusters.back().push_back(g);
                continue;
            }
        }
        clusters.push_back({g});
    }
    std::vector<FitReport> out(clusters.size());
    parallel_for(clusters.size(), [&](std::size_t c) {
        const auto& cl = clusters[c];
        double wmax = 0;
        for (const auto& g : cl) wmax = std::max(wmax, g.gamma);
        const double lo = std::max(f.front(), cl.front().f - 5.0 * wmax);
        const double hi = std::min(f.back(), cl.back().f + 5.0 * wmax);
        try {
            out[c] = fit_window(f, s, lo, hi, cl, opt);
        } catch (const InvalidArgument&) {
            FitReport rep;  // too few samples: reported, not silently dropped
            rep.lo = lo;
            rep.hi = hi;
            rep.params = cl;
            out[c] = rep;
        }
    });
    return out;
}

struct StrengthDistribution {
    Histogram histogram;          // of z = log10(y / <y>)
    std::vector<double> z;
    std::size_t excluded = 0;     // nonpositive strengths
};

/// Strengths rescaled to unit mean, histogram in z = log10(y).
inline StrengthDistribution strength_log_distribution(const std::vector<double>& strengths, std::size_t bins = 40,
                                                      double z_lo = -5.0, double z_hi = 2.0) {
    StrengthDistribution out;
    std::vector<double> pos;
    for (double y : strengths) {
        if (y > 0.0 && std::isfinite(y))
            pos.push_back(y);
        else
            ++out.excluded;
    }
    if (pos.empty()) throw InvalidArgument("strength_log_distribution: no positive strengths");
    const double mean = std::accumulate(pos.begin(), pos.end(), 0.0) / static_cast<double>(pos.size());
    for (double y : pos) out.z.push_back(std::log10(y / mean));
    out.histogram = make_histogram(out.z, z_lo, z_hi, bins, CurveKind::Density);
    return out;
}

/// Reference p(z) sampled on a grid.
inline StatCurve strength_reference(const std::vector<double>& z) {
    StatCurve c;
    c.kind = CurveKind::Density;
    for (double v : z) {
        c.x.push_back(v);
        c.y.push_back(special::strength_log10_density(v));
    }
    return c;
}

}  // namespace wavechaos::resonance
