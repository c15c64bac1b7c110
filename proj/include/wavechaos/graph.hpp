#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/SVD>

#include "wavechaos/error.hpp"
#include "wavechaos/types.hpp"

namespace wavechaos::graph {

inline constexpr double kUnitarityTolerance = 1e-10;

struct Neumann {};
struct Dirichlet {};

/// Fixed vertex scattering matrix, rows/columns indexed by the vertex's
/// bond-end slots (see MetricGraph::ends).
struct CustomUnitary {
    CMatrix matrix;
};

/// k-dependent vertex scattering matrix sampled on an ascending wavenumber grid.
struct TabulatedK {
    std::vector<double> k_grid;
    std::vector<CMatrix> matrices;
};

using VertexCondition = std::variant<Neumann, Dirichlet, CustomUnitary, TabulatedK>;

inline bool is_k_dependent(const VertexCondition& c) {
    return std::holds_alternative<TabulatedK>(c);
}

inline std::string condition_name(const VertexCondition& c) {
    struct Visitor {
        std::string operator()(const Neumann&) const { return "neumann"; }
        std::string operator()(const Dirichlet&) const { return "dirichlet"; }
        std::string operator()(const CustomUnitary&) const { return "unitary"; }
        std::string operator()(const TabulatedK&) const { return "tabulated"; }
    };
    return std::visit(Visitor{}, c);
}

/// sigma_ab = 2/v - delta_ab
inline CMatrix neumann_vertex_matrix(std::size_t valency) {
    if (valency == 0) throw InvalidArgument("neumann_vertex_matrix: valency must be >= 1");
    const auto v = static_cast<Eigen::Index>(valency);
    CMatrix m = CMatrix::Constant(v, v, Complex(2.0 / static_cast<double>(valency), 0.0));
    m.diagonal().array() -= 1.0;
    return m;
}

inline CMatrix dirichlet_vertex_matrix(std::size_t valency) {
    if (valency == 0) throw InvalidArgument("dirichlet_vertex_matrix: valency must be >= 1");
    const auto v = static_cast<Eigen::Index>(valency);
    return -CMatrix::Identity(v, v);
}

/// Nearest unitary matrix in Frobenius norm (U V^dagger of the SVD).
inline CMatrix polar_unitary(const CMatrix& a) {
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

inline void validate_condition(const VertexCondition& c, std::size_t valency, const std::string& where) {
    const auto v = static_cast<Eigen::Index>(valency);
    auto check_matrix = [&](const CMatrix& m, const std::string& label) {
        if (m.rows() != v || m.cols() != v) {
            throw InvalidArgument(where + ": " + label + " has dimension " + std::to_string(m.rows()) + "x" +
                                  std::to_string(m.cols()) + ", valency is " + std::to_string(valency));
        }
        if (unitarity_defect(m) > kUnitarityTolerance) {
            throw InvalidArgument(where + ": " + label + " is not unitary to 1e-10");
        }
    };
    if (const auto* u = std::get_if<CustomUnitary>(&c)) {
        check_matrix(u->matrix, "custom matrix");
    } else if (const auto* t = std::get_if<TabulatedK>(&c)) {
        if (t->k_grid.size() < 2) throw InvalidArgument(where + ": tabulated grid needs at least 2 points");
        if (t->k_grid.size() != t->matrices.size()) {
            throw InvalidArgument(where + ": tabulated grid and matrix counts differ");
        }
        for (std::size_t i = 1; i < t->k_grid.size(); ++i) {
            if (!(t->k_grid[i] > t->k_grid[i - 1])) {
                throw InvalidArgument(where + ": tabulated grid not strictly ascending at index " + std::to_string(i));
            }
        }
        for (std::size_t i = 0; i < t->matrices.size(); ++i) {
            check_matrix(t->matrices[i], "tabulated matrix " + std::to_string(i));
        }
    }
}

/// Vertex scattering matrix at wavenumber k. Tabulated conditions are
/// interpolated entrywise and re-unitarized; no extrapolation.
inline CMatrix vertex_matrix_at(const VertexCondition& c, std::size_t valency, double k) {
    struct Visitor {
        std::size_t valency;
        double k;
        CMatrix operator()(const Neumann&) const { return neumann_vertex_matrix(valency); }
        CMatrix operator()(const Dirichlet&) const { return dirichlet_vertex_matrix(valency); }
        CMatrix operator()(const CustomUnitary& u) const { return u.matrix; }
        CMatrix operator()(const TabulatedK& t) const {
            const auto& g = t.k_grid;
            if (g.size() < 2 || t.matrices.size() != g.size()) {
                throw InvalidArgument("vertex_matrix_at: malformed tabulated condition");
            }
            if (!(k >= g.front() && k <= g.back())) {
                throw OutOfRange("vertex_matrix_at: k=" + std::to_string(k) + " outside tabulated range [" +
                                 std::to_string(g.front()) + ", " + std::to_string(g.back()) + "]");
            }
            auto hi = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), k) - g.begin());
            hi = std::clamp<std::size_t>(hi, 1, g.size() - 1);
            const std::size_t lo = hi - 1;
            const double w = (k - g[lo]) / (g[hi] - g[lo]);
            const CMatrix m = (1.0 - w) * t.matrices[lo] + w * t.matrices[hi];
            return polar_unitary(m);
        }
    };
    return std::visit(Visitor{valency, k}, c);
}

struct Vertex {
    std::string id;
    VertexCondition condition;
};

struct Bond {
    std::string id;
    std::size_t a = 0;  // vertex index of end A
    std::size_t b = 0;  // vertex index of end B
    double length = 0;  // meters
};

enum class BondSide { A, B };

/// One bond end attached to a vertex; `slot` order is the order in which
/// these ends appear in MetricGraph::ends(v).
struct BondEnd {
    std::size_t bond;
    BondSide side;

    /// Directed bond leaving the vertex through this end.
    std::size_t outgoing() const { return 2 * bond + (side == BondSide::A ? 0 : 1); }
    /// Directed bond arriving at the vertex through this end.
    std::size_t incoming() const { return 2 * bond + (side == BondSide::A ? 1 : 0); }
};

/// Vertices joined by bonds. Bond b yields directed bonds 2b (A->B) and 2b+1 (B->A).
class MetricGraph {
public:
    std::size_t add_vertex(std::string id, VertexCondition condition = Neumann{}) {
        vertices_.push_back({std::move(id), std::move(condition)});
        return vertices_.size() - 1;
    }

    std::size_t add_bond(std::string id, std::size_t a, std::size_t b, double length) {
        bonds_.push_back({std::move(id), a, b, length});
        return bonds_.size() - 1;
    }

    void set_condition(std::size_t v, VertexCondition condition) { vertices_.at(v).condition = std::move(condition); }

    /// Disconnected graphs are rejected by validate() unless allowed here.
    void allow_disconnected(bool allow) { allow_disconnected_ = allow; }

    const std::vector<Vertex>& vertices() const { return vertices_; }
    const std::vector<Bond>& bonds() const { return bonds_; }
    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t bond_count() const { return bonds_.size(); }
    std::size_t directed_count() const { return 2 * bonds_.size(); }

    std::size_t find_vertex(const std::string& id) const {
        for (std::size_t i = 0; i < vertices_.size(); ++i) {
            if (vertices_[i].id == id) return i;
        }
        throw InvalidArgument("unknown vertex id '" + id + "'");
    }

    /// Bond ends at vertex v, in bond order; a loop contributes end A then end B.
    std::vector<BondEnd> ends(std::size_t v) const {
        std::vector<BondEnd> out;
        for (std::size_t b = 0; b < bonds_.size(); ++b) {
            if (bonds_[b].a == v) out.push_back({b, BondSide::A});
            if (bonds_[b].b == v) out.push_back({b, BondSide::B});
        }
        return out;
    }

    std::size_t valency(std::size_t v) const { return ends(v).size(); }

    double total_length() const {
        return std::accumulate(bonds_.begin(), bonds_.end(), 0.0,
                               [](double acc, const Bond& b) { return acc + b.length; });
    }

    double directed_length(std::size_t d) const { return bonds_[d / 2].length; }

    /// Vertex a directed bond starts from / points to.
    std::size_t tail(std::size_t d) const { return d % 2 == 0 ? bonds_[d / 2].a : bonds_[d / 2].b; }
    std::size_t head(std::size_t d) const { return d % 2 == 0 ? bonds_[d / 2].b : bonds_[d / 2].a; }

    bool has_k_dependent_vertices() const {
        return std::any_of(vertices_.begin(), vertices_.end(),
                           [](const Vertex& v) { return is_k_dependent(v.condition); });
    }

    bool is_connected() const {
        if (vertices_.empty()) return true;
        std::vector<std::size_t> parent(vertices_.size());
        std::iota(parent.begin(), parent.end(), std::size_t{0});
        auto find = [&](std::size_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (const auto& b : bonds_) parent[find(b.a)] = find(b.b);
        const std::size_t root = find(0);
        for (std::size_t i = 1; i < vertices_.size(); ++i) {
            if (find(i) != root) return false;
        }
        return true;
    }

    void validate() const {
        if (bonds_.empty()) throw InvalidArgument("graph has no bonds");
        for (const auto& b : bonds_) {
            if (b.a >= vertices_.size() || b.b >= vertices_.size()) {
                throw InvalidArgument("bond '" + b.id + "' references a missing vertex");
            }
            if (!(b.length > 0.0) || !std::isfinite(b.length)) {
                throw InvalidArgument("bond '" + b.id + "' has non-positive or non-finite length");
            }
        }
        for (std::size_t v = 0; v < vertices_.size(); ++v) {
            const std::size_t val = valency(v);
            if (val == 0) throw InvalidArgument("vertex '" + vertices_[v].id + "' has no bonds");
            validate_condition(vertices_[v].condition, val, "vertex '" + vertices_[v].id + "'");
        }
        if (!allow_disconnected_ && !is_connected()) throw InvalidArgument("graph is not connected");
    }

private:
    std::vector<Vertex> vertices_;
    std::vector<Bond> bonds_;
    bool allow_disconnected_ = false;
};

/// Directed-bond evolution operator U(k) = D(k) S_B(k).
struct BondScatteringOperator {
    double k = 0;
    CVector phases;       // diagonal of D(k): exp(i k l_d)
    CMatrix bond_matrix;  // S_B(k), entry (out, in)

    CMatrix matrix() const { return phases.asDiagonal() * bond_matrix; }
};

/// Vertex-assembled S_B(k): entry (d', d) is the (out-slot, in-slot) element of
/// the scattering matrix of the vertex where d ends and d' starts.
inline CMatrix assemble_bond_matrix(const MetricGraph& g, double k) {
    const auto n = static_cast<Eigen::Index>(g.directed_count());
    CMatrix sb = CMatrix::Zero(n, n);
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        const auto ends = g.ends(v);
        const CMatrix sigma = vertex_matrix_at(g.vertices()[v].condition, ends.size(), k);
        for (std::size_t in = 0; in < ends.size(); ++in) {
            for (std::size_t out = 0; out < ends.size(); ++out) {
                sb(static_cast<Eigen::Index>(ends[out].outgoing()), static_cast<Eigen::Index>(ends[in].incoming())) =
                    sigma(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
            }
        }
    }
    return sb;
}

inline CVector propagation_phases(const MetricGraph& g, double k) {
    const auto n = static_cast<Eigen::Index>(g.directed_count());
    CVector ph(n);
    for (Eigen::Index d = 0; d < n; ++d) {
        ph(d) = std::polar(1.0, k * g.directed_length(static_cast<std::size_t>(d)));
    }
    return ph;
}

inline BondScatteringOperator bond_scattering_matrix(const MetricGraph& g, double k) {
    if (!(k > 0.0)) throw InvalidArgument("bond_scattering_matrix: k must be > 0");
    return {k, propagation_phases(g, k), assemble_bond_matrix(g, k)};
}

}  // namespace wavechaos::graph
