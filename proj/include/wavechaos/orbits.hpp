#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "wavechaos/error.hpp"
#include "wavechaos/graph.hpp"

namespace wavechaos::graph {

struct PeriodicOrbit {
    std::vector<std::size_t> directed_bonds;  // cyclic itinerary, minimal rotation
    std::vector<std::size_t> vertices;        // vertex at the start of each directed bond
    double length = 0;                        // meters
    bool primitive = true;
    std::size_t repetitions = 1;
};

struct OrbitOptions {
    std::size_t max_orbits = 1'000'000;
    /// Drop transitions whose (k-independent) vertex amplitude vanishes,
    /// e.g. backscattering at a Neumann vertex of valency 2.
    bool skip_zero_amplitude = true;
};

namespace detail {

/// Allowed successor directed bonds for every directed bond.
inline std::vector<std::vector<std::size_t>> transition_table(const MetricGraph& g, bool skip_zero) {
    std::vector<std::vector<std::size_t>> next(g.directed_count());
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        const auto ends = g.ends(v);
        const auto& cond = g.vertices()[v].condition;
        const bool check = skip_zero && !is_k_dependent(cond);
        const CMatrix sigma = check ? vertex_matrix_at(cond, ends.size(), 1.0) : CMatrix();
        for (std::size_t in = 0; in < ends.size(); ++in) {
            for (std::size_t out = 0; out < ends.size(); ++out) {
                if (check && std::abs(sigma(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in))) < 1e-12) {
                    continue;
                }
                next[ends[in].incoming()].push_back(ends[out].outgoing());
            }
        }
    }
    for (auto& n : next) std::sort(n.begin(), n.end());
    return next;
}

/// True when `seq` is its own lexicographically smallest rotation.
inline bool is_minimal_rotation(const std::vector<std::size_t>& seq) {
    const std::size_t n = seq.size();
    for (std::size_t r = 1; r < n; ++r) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t a = seq[i];
            const std::size_t b = seq[(i + r) % n];
            if (b < a) return false;
            if (b > a) break;
        }
    }
    return true;
}

/// Smallest period p dividing n with seq[i] == seq[i + p].
inline std::size_t smallest_period(const std::vector<std::size_t>& seq) {
    const std::size_t n = seq.size();
    for (std::size_t p = 1; p <= n; ++p) {
        if (n % p != 0) continue;
        bool ok = true;
        for (std::size_t i = p; i < n && ok; ++i) ok = seq[i] == seq[i - p];
        if (ok) return p;
    }
    return n;
}

}  // namespace detail

/// Closed directed-bond itineraries with metric length <= max_length, one per
/// cyclic-shift class. Time-reversed partners are separate entries.
inline std::vector<PeriodicOrbit> enumerate_periodic_orbits(const MetricGraph& g, double max_length,
                                                            const OrbitOptions& opts = {}) {
    if (!(max_length > 0.0) || !std::isfinite(max_length)) {
        throw InvalidArgument("enumerate_periodic_orbits: max_metric_length must be positive and finite");
    }
    g.validate();
    const auto next = detail::transition_table(g, opts.skip_zero_amplitude);
    std::vector<PeriodicOrbit> catalog;
    std::vector<std::size_t> path;

    // Depth-first search rooted at the smallest directed bond of each cycle:
    // only bonds >= start may appear, and a closed walk is kept when it is its
    // own minimal rotation.
    auto emit = [&](double length) {
        if (!detail::is_minimal_rotation(path)) return;
        if (catalog.size() >= opts.max_orbits) {
            throw ResourceLimit("enumerate_periodic_orbits: catalog cap of " + std::to_string(opts.max_orbits) +
                                " orbits exceeded");
        }
        PeriodicOrbit orbit;
        orbit.directed_bonds = path;
        for (std::size_t d : path) orbit.vertices.push_back(g.tail(d));
        orbit.length = length;
        const std::size_t p = detail::smallest_period(path);
        orbit.repetitions = path.size() / p;
        orbit.primitive = orbit.repetitions == 1;
        catalog.push_back(std::move(orbit));
    };

    const double slack = 1e-12 * max_length;
    auto dfs = [&](auto&& self, std::size_t start, std::size_t current, double length) -> void {
        const auto& succ = next[current];
        if (std::binary_search(succ.begin(), succ.end(), start)) emit(length);
        for (std::size_t d : succ) {
            if (d < start) continue;
            const double extended = length + g.directed_length(d);
            if (extended > max_length + slack) continue;
            path.push_back(d);
            self(self, start, d, extended);
            path.pop_back();
        }
    };

    for (std::size_t start = 0; start < g.directed_count(); ++start) {
        const double l0 = g.directed_length(start);
        if (l0 > max_length + slack) continue;
        path.assign(1, start);
        dfs(dfs, start, start, l0);
    }
    std::sort(catalog.begin(), catalog.end(), [](const PeriodicOrbit& a, const PeriodicOrbit& b) {
        return a.length != b.length ? a.length < b.length : a.directed_bonds < b.directed_bonds;
    });
    return catalog;
}

}  // namespace wavechaos::graph
