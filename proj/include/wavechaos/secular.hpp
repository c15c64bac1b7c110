#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "wavechaos/error.hpp"
#include "wavechaos/graph.hpp"
#include "wavechaos/parallel.hpp"
#include "wavechaos/types.hpp"

namespace wavechaos::graph {

struct SecularValue {
    double magnitude = 0;             // |det(I - U(k))|
    std::vector<double> eigenphases;  // arguments of the eigenvalues of U(k), in (-pi, pi]
};

struct RootOptions {
    double scan_step_fraction = 0.1;  // scan step in units of the Weyl mean spacing pi/L
    double root_tol = 1e-10;          // |crossing eigenphase| at an accepted root, rad
    double degeneracy_tol = 1e-8;     // relative: roots closer than degeneracy_tol * k merge
    int max_iterations = 200;
};

struct EigenvalueList {
    std::vector<double> values;             // ascending, rad/m
    std::vector<int> multiplicities;
    std::vector<double> residuals;          // |crossing eigenphase| at each root
    double count_deviation = 0;             // total count minus Weyl estimate over [k_min, k_max]

    std::size_t total_count() const {
        std::size_t n = 0;
        for (int m : multiplicities) n += static_cast<std::size_t>(m);
        return n;
    }

    /// Values repeated according to multiplicity.
    std::vector<double> expanded() const {
        std::vector<double> out;
        for (std::size_t i = 0; i < values.size(); ++i) out.insert(out.end(), static_cast<std::size_t>(multiplicities[i]), values[i]);
        return out;
    }
};

/// (total metric length) k / pi
inline double weyl_estimate(const MetricGraph& g, double k) {
    if (k < 0) throw InvalidArgument("weyl_estimate: k must be >= 0");
    return g.total_length() * k / kPi;
}

namespace detail {

inline double wrap_to_pi(double x) {
    x = std::remainder(x, 2.0 * kPi);
    return x <= -kPi ? x + 2.0 * kPi : x;
}

/// Phase bookkeeping at one wavenumber: sum of eigenphases taken in [0, 2pi)
/// and the argument of det S_B(k).
struct PhaseState {
    double k = 0;
    double phase_sum = 0;
    double det_phase = 0;
    double min_abs_phase = 0;
};

}  // namespace detail

/// Evaluates U(k) and its eigenphases; caches S_B for k-independent graphs.
class SecularEvaluator {
public:
    explicit SecularEvaluator(const MetricGraph& g) : graph_(g) {
        g.validate();
        directed_total_ = 2.0 * g.total_length();
        for (std::size_t d = 0; d < g.directed_count(); ++d) max_length_ = std::max(max_length_, g.directed_length(d));
        if (!g.has_k_dependent_vertices()) {
            fixed_bond_matrix_ = assemble_bond_matrix(g, 1.0);
            fixed_det_phase_ = std::arg(fixed_bond_matrix_->determinant());
        }
    }

    const MetricGraph& graph() const { return graph_; }
    double max_bond_length() const { return max_length_; }

    CMatrix bond_matrix(double k) const {
        return fixed_bond_matrix_ ? *fixed_bond_matrix_ : assemble_bond_matrix(graph_, k);
    }

    CMatrix evolution(double k) const { return propagation_phases(graph_, k).asDiagonal() * bond_matrix(k); }

    CVector eigenvalues(double k) const {
        Eigen::ComplexEigenSolver<CMatrix> solver(evolution(k), false);
        if (solver.info() != Eigen::Success) {
            throw NumericFailure("eigenvalue solve of U(k) failed at k=" + std::to_string(k));
        }
        return solver.eigenvalues();
    }

    SecularValue secular(double k) const {
        if (!(k > 0.0)) throw InvalidArgument("secular_indicator: k must be > 0");
        const CMatrix u = evolution(k);
        const auto n = u.rows();
        SecularValue out;
        out.magnitude = std::abs((CMatrix::Identity(n, n) - u).determinant());
        Eigen::ComplexEigenSolver<CMatrix> solver(u, false);
        for (Eigen::Index i = 0; i < n; ++i) out.eigenphases.push_back(std::arg(solver.eigenvalues()(i)));
        std::sort(out.eigenphases.begin(), out.eigenphases.end());
        return out;
    }

    detail::PhaseState state(double k) const {
        detail::PhaseState s;
        s.k = k;
        const CVector ev = eigenvalues(k);
        s.min_abs_phase = kPi;
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            double th = std::arg(ev(i));
            s.min_abs_phase = std::min(s.min_abs_phase, std::abs(th));
            if (th < 0) th += 2.0 * kPi;
            s.phase_sum += th;
        }
        s.det_phase = fixed_bond_matrix_ ? fixed_det_phase_ : std::arg(assemble_bond_matrix(graph_, k).determinant());
        return s;
    }

    /// Net number of eigenphases that crossed zero counterclockwise between
    /// two states. arg det U(k) = 2 L k + arg det S_B(k) is continuous, so the
    /// drop of the [0, 2pi) phase sum relative to it counts the wraps.
    int crossings(const detail::PhaseState& a, const detail::PhaseState& b) const {
        const double det_shift = directed_total_ * (b.k - a.k) + detail::wrap_to_pi(b.det_phase - a.det_phase);
        const double wraps = (det_shift - (b.phase_sum - a.phase_sum)) / (2.0 * kPi);
        const double rounded = std::round(wraps);
        if (std::abs(wraps - rounded) > 0.25) {
            std::ostringstream os;
            os << "phase winding ambiguous on [" << a.k << ", " << b.k << "] (" << wraps
               << "); reduce scan_step_fraction";
            throw NumericFailure(os.str());
        }
        return static_cast<int>(rounded);
    }

private:
    const MetricGraph& graph_;
    double directed_total_ = 0;
    double max_length_ = 0;
    std::optional<CMatrix> fixed_bond_matrix_;
    double fixed_det_phase_ = 0;
};

inline SecularValue secular_indicator(const MetricGraph& g, double k) { return SecularEvaluator(g).secular(k); }

/// Constant c in N(k) ~ L k / pi + c for graphs with k-independent vertex
/// conditions, counting roots with k > 0 only.
inline double weyl_offset(const MetricGraph& g) {
    if (g.has_k_dependent_vertices()) throw InvalidArgument("weyl_offset: requires k-independent vertex conditions");
    g.validate();
    Eigen::ComplexEigenSolver<CMatrix> solver(assemble_bond_matrix(g, 1.0), false);
    double sum = 0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        double th = std::arg(solver.eigenvalues()(i));
        if (std::abs(th) < 1e-9) th = 0;
        if (th < 0) th += 2.0 * kPi;
        sum += th;
    }
    return sum / (2.0 * kPi) - static_cast<double>(g.bond_count());
}

namespace detail {

struct RawRoot {
    double k;
    double residual;
};

inline std::vector<RawRoot> roots_in_interval(const SecularEvaluator& ev, const PhaseState& lo_state,
                                              const PhaseState& hi_state, int count, const RootOptions& opts) {
    std::vector<RawRoot> out;
    for (int m = 1; m <= count; ++m) {
        double lo = lo_state.k;
        double hi = hi_state.k;
        PhaseState mid_state;
        double residual = kPi;
        int it = 0;
        for (;; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (it >= opts.max_iterations) {
                std::ostringstream os;
                os.precision(17);
                os << "root bisection did not converge in bracket [" << lo << ", " << hi << "]";
                throw NumericFailure(os.str());
            }
            mid_state = ev.state(mid);
            residual = mid_state.min_abs_phase;
            const bool width_ok = (hi - lo) * ev.max_bond_length() < opts.root_tol;
            if ((width_ok && residual < opts.root_tol) || mid <= lo || mid >= hi) {
                if (residual >= opts.root_tol) {
                    std::ostringstream os;
                    os.precision(17);
                    os << "root bisection stalled with |phase|=" << residual << " in bracket [" << lo << ", " << hi
                       << "]";
                    throw NumericFailure(os.str());
                }
                out.push_back({mid, residual});
                break;
            }
            if (ev.crossings(lo_state, mid_state) >= m) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    return out;
}

}  // namespace detail

/// All eigenwavenumbers in [k_min, k_max]: scans U(k) on a grid finer than
/// the Weyl mean spacing, counts eigenphase crossings of zero, and bisects
/// each crossing.
inline EigenvalueList find_eigenwavenumbers(const MetricGraph& g, double k_min, double k_max,
                                            const RootOptions& opts = {}) {
    if (!(k_min > 0.0)) throw InvalidArgument("find_eigenwavenumbers: k_min must be > 0");
    if (!(k_max > k_min)) throw InvalidArgument("find_eigenwavenumbers: k_max must exceed k_min");
    if (!(opts.scan_step_fraction > 0.0)) throw InvalidArgument("find_eigenwavenumbers: scan_step_fraction must be > 0");
    const SecularEvaluator ev(g);
    const double spacing = kPi / g.total_length();
    const double step = opts.scan_step_fraction * spacing;
    const auto steps = static_cast<std::size_t>(std::ceil((k_max - k_min) / step));
    if (steps > 100'000'000) throw ResourceLimit("find_eigenwavenumbers: scan exceeds 1e8 grid points");

    auto grid_k = [&](std::size_t i) { return i == steps ? k_max : k_min + static_cast<double>(i) * step; };

    // Independent chunks of the scan, merged serially afterwards.
    const std::size_t chunk = 512;
    const std::size_t chunks = (steps + chunk - 1) / chunk;
    std::vector<std::vector<detail::RawRoot>> found(chunks);
    parallel_for(chunks, [&](std::size_t c) {
        const std::size_t first = c * chunk;
        const std::size_t last = std::min(steps, first + chunk);
        detail::PhaseState prev = ev.state(grid_k(first));
        for (std::size_t i = first + 1; i <= last; ++i) {
            const detail::PhaseState cur = ev.state(grid_k(i));
            const int n = ev.crossings(prev, cur);
            if (n < 0) {
                std::ostringstream os;
                os << "eigenphase moved clockwise through zero on [" << prev.k << ", " << cur.k << "]";
                throw NumericFailure(os.str());
            }
            if (n > 0) {
                auto roots = detail::roots_in_interval(ev, prev, cur, n, opts);
                found[c].insert(found[c].end(), roots.begin(), roots.end());
            }
            prev = cur;
        }
    });

    std::vector<detail::RawRoot> all;
    for (auto& f : found) all.insert(all.end(), f.begin(), f.end());
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.k < b.k; });

    EigenvalueList out;
    for (const auto& r : all) {
        if (!out.values.empty() && r.k - out.values.back() <= opts.degeneracy_tol * r.k) {
            ++out.multiplicities.back();
            out.residuals.back() = std::max(out.residuals.back(), r.residual);
            continue;
        }
        out.values.push_back(r.k);
        out.multiplicities.push_back(1);
        out.residuals.push_back(r.residual);
    }
    out.count_deviation =
        static_cast<double>(out.total_count()) - (weyl_estimate(g, k_max) - weyl_estimate(g, k_min));
    return out;
}

}  // namespace wavechaos::graph
