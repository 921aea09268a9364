#pragma once

// Discrete exterior calculus operators on tetrahedral meshes: incidence
// (exterior derivative) matrices, diagonal and Galerkin Hodge stars, the
// distributional material-gradient mass matrices, and the boundary-complement
// operator that closes Stokes' theorem on meshes with boundary.

#include <algorithm>
#include <array>
#include <stdexcept>
#include <vector>

#include <Eigen/Sparse>

#include "geometry.hpp"
#include "mesh.hpp"

namespace decsie {

using sparse_mat = Eigen::SparseMatrix<double>;

// D0: edges x nodes. Row for edge (a,b) with a<b has -1 at a, +1 at b.
inline sparse_mat d0(const tet_mesh& m) {
    sparse_mat d(static_cast<long>(m.edges.size()), static_cast<long>(m.nodes.size()));
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * m.edges.size());
    for (std::size_t e = 0; e < m.edges.size(); ++e) {
        trip.emplace_back(static_cast<long>(e), m.edges[e][0], -1.0);
        trip.emplace_back(static_cast<long>(e), m.edges[e][1], 1.0);
    }
    d.setFromTriplets(trip.begin(), trip.end());
    return d;
}

// D1: triangles x edges. For triangle (a,b,c) with a<b<c,
// boundary = [b,c] - [a,c] + [a,b].
inline sparse_mat d1(const tet_mesh& m) {
    sparse_mat d(static_cast<long>(m.tris.size()), static_cast<long>(m.edges.size()));
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * m.tris.size());
    for (std::size_t f = 0; f < m.tris.size(); ++f) {
        const auto& t = m.tris[f];
        trip.emplace_back(static_cast<long>(f), static_cast<long>(m.edge_index(t[1], t[2])), 1.0);
        trip.emplace_back(static_cast<long>(f), static_cast<long>(m.edge_index(t[0], t[2])), -1.0);
        trip.emplace_back(static_cast<long>(f), static_cast<long>(m.edge_index(t[0], t[1])), 1.0);
    }
    d.setFromTriplets(trip.begin(), trip.end());
    return d;
}

// D2: tets x triangles. For a tet with stored vertex order (v0,v1,v2,v3),
// boundary = sum_i (-1)^i [.. v_{i-1}, v_{i+1} ..]; each face triple is then
// mapped to its sorted representative, picking up the permutation parity.
inline sparse_mat d2(const tet_mesh& m) {
    sparse_mat d(static_cast<long>(m.tets.size()), static_cast<long>(m.tris.size()));
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(4 * m.tets.size());
    for (std::size_t t = 0; t < m.tets.size(); ++t) {
        const auto& v = m.tets[t];
        for (int i = 0; i < 4; ++i) {
            std::array<int, 3> f;
            int p = 0;
            for (int j = 0; j < 4; ++j)
                if (j != i) f[p++] = v[j];
            double sign = (i % 2 == 0) ? 1.0 : -1.0;
            // sort the triple with a 3-element network, tracking parity
            if (f[0] > f[1]) { std::swap(f[0], f[1]); sign = -sign; }
            if (f[1] > f[2]) { std::swap(f[1], f[2]); sign = -sign; }
            if (f[0] > f[1]) { std::swap(f[0], f[1]); sign = -sign; }
            trip.emplace_back(static_cast<long>(t),
                              static_cast<long>(m.tri_index(f[0], f[1], f[2])), sign);
        }
    }
    d.setFromTriplets(trip.begin(), trip.end());
    return d;
}

// Boundary-surface analogue of D0 in local boundary-node indexing.
inline sparse_mat d0_boundary(const boundary_surface& b) {
    sparse_mat d(static_cast<long>(b.edges.size()), static_cast<long>(b.nodes.size()));
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * b.edges.size());
    for (std::size_t e = 0; e < b.edges.size(); ++e) {
        trip.emplace_back(static_cast<long>(e), b.edges[e][0], -1.0);
        trip.emplace_back(static_cast<long>(e), b.edges[e][1], 1.0);
    }
    d.setFromTriplets(trip.begin(), trip.end());
    return d;
}

// Boundary-surface analogue of D1: surface triangles x surface edges, using
// the sorted-triple convention on local indices.
inline sparse_mat d1_boundary(const boundary_surface& b) {
    auto edge_idx = [&b](int i, int j) -> long {
        std::array<int, 2> key{std::min(i, j), std::max(i, j)};
        auto it = std::lower_bound(b.edges.begin(), b.edges.end(), key);
        if (it == b.edges.end() || *it != key) throw mesh_error("boundary edge lookup failed");
        return static_cast<long>(it - b.edges.begin());
    };
    sparse_mat d(static_cast<long>(b.tris.size()), static_cast<long>(b.edges.size()));
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * b.tris.size());
    for (std::size_t f = 0; f < b.tris.size(); ++f) {
        std::array<int, 3> t = b.tris[f];
        double sign = 1.0;
        if (t[0] > t[1]) { std::swap(t[0], t[1]); sign = -sign; }
        if (t[1] > t[2]) { std::swap(t[1], t[2]); sign = -sign; }
        if (t[0] > t[1]) { std::swap(t[0], t[1]); sign = -sign; }
        trip.emplace_back(static_cast<long>(f), edge_idx(t[1], t[2]), sign);
        trip.emplace_back(static_cast<long>(f), edge_idx(t[0], t[2]), -sign);
        trip.emplace_back(static_cast<long>(f), edge_idx(t[0], t[1]), sign);
    }
    d.setFromTriplets(trip.begin(), trip.end());
    return d;
}

// Diagonal 0-form Hodge: [H0]_ii = (1/4) sum over tets touching node i of
// xi_tet * |tet|. xi is one value per tet (e.g. permittivity).
inline Eigen::VectorXd hodge0_diag(const tet_mesh& m, const Eigen::VectorXd& xi) {
    if (xi.size() != static_cast<long>(m.tets.size()))
        throw std::invalid_argument("hodge0_diag: xi must have one entry per tet");
    Eigen::VectorXd h = Eigen::VectorXd::Zero(static_cast<long>(m.nodes.size()));
    for (std::size_t t = 0; t < m.tets.size(); ++t) {
        const double w = 0.25 * xi[static_cast<long>(t)] * m.volume[t];
        for (int v : m.tets[t]) h[v] += w;
    }
    return h;
}

// Diagonal 3-form Hodge: [H3]_ii = xi_i / |tet_i|.
inline Eigen::VectorXd hodge3_diag(const tet_mesh& m, const Eigen::VectorXd& xi) {
    if (xi.size() != static_cast<long>(m.tets.size()))
        throw std::invalid_argument("hodge3_diag: xi must have one entry per tet");
    Eigen::VectorXd h(static_cast<long>(m.tets.size()));
    for (std::size_t t = 0; t < m.tets.size(); ++t)
        h[static_cast<long>(t)] = xi[static_cast<long>(t)] / m.volume[t];
    return h;
}

namespace detail {

// integral over a tet of lambda_p * lambda_q: V/10 on the diagonal, V/20 off.
inline double bary_pair_integral(int p, int q, double vol) {
    return (p == q) ? vol / 10.0 : vol / 20.0;
}

// Local edge endpoints of a tet in (lo, hi) global order, with the positions
// being local vertex indices 0..3.
struct local_edge {
    int la, lb;  // local indices of the globally smaller / larger endpoint
    long global; // global edge index
};

inline std::array<local_edge, 6> tet_local_edges(const tet_mesh& m, std::size_t t) {
    static constexpr int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    std::array<local_edge, 6> out;
    const auto& v = m.tets[t];
    for (int k = 0; k < 6; ++k) {
        int p = pairs[k][0], q = pairs[k][1];
        int la = p, lb = q;
        if (v[p] > v[q]) std::swap(la, lb);
        out[k] = {la, lb, static_cast<long>(m.edge_index(v[la], v[lb]))};
    }
    return out;
}

struct local_tri {
    int la, lb, lc; // local indices sorted by global node id
    long global;    // global triangle index
};

inline std::array<local_tri, 4> tet_local_tris(const tet_mesh& m, std::size_t t) {
    static constexpr int triples[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
    std::array<local_tri, 4> out;
    const auto& v = m.tets[t];
    for (int k = 0; k < 4; ++k) {
        std::array<int, 3> loc{triples[k][0], triples[k][1], triples[k][2]};
        std::sort(loc.begin(), loc.end(), [&v](int a, int b) { return v[a] < v[b]; });
        out[k] = {loc[0], loc[1], loc[2],
                  static_cast<long>(m.tri_index(v[loc[0]], v[loc[1]], v[loc[2]]))};
    }
    return out;
}

} // namespace detail

// Galerkin 1-form Hodge via Whitney edge elements, W_(a,b) = la*grad(lb) -
// lb*grad(la) with a<b in global indices. Entries are assembled per tet from
// the exact barycentric product integrals.
inline sparse_mat hodge1(const tet_mesh& m, const Eigen::VectorXd& xi) {
    if (xi.size() != static_cast<long>(m.tets.size()))
        throw std::invalid_argument("hodge1: xi must have one entry per tet");
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(36 * m.tets.size());
    for (std::size_t t = 0; t < m.tets.size(); ++t) {
        const auto& v = m.tets[t];
        const auto g = tet_barycentric_gradients(m.nodes[v[0]], m.nodes[v[1]], m.nodes[v[2]],
                                                 m.nodes[v[3]]);
        const double vol = m.volume[t];
        const double w = xi[static_cast<long>(t)];
        const auto le = detail::tet_local_edges(m, t);
        for (int i = 0; i < 6; ++i) {
            for (int j = 0; j < 6; ++j) {
                const auto& a = le[i];
                const auto& b = le[j];
                double val = g[a.lb].dot(g[b.lb]) * detail::bary_pair_integral(a.la, b.la, vol)
                           - g[a.lb].dot(g[b.la]) * detail::bary_pair_integral(a.la, b.lb, vol)
                           - g[a.la].dot(g[b.lb]) * detail::bary_pair_integral(a.lb, b.la, vol)
                           + g[a.la].dot(g[b.la]) * detail::bary_pair_integral(a.lb, b.lb, vol);
                trip.emplace_back(a.global, b.global, w * val);
            }
        }
    }
    sparse_mat h(static_cast<long>(m.edges.size()), static_cast<long>(m.edges.size()));
    h.setFromTriplets(trip.begin(), trip.end());
    return h;
}

// Galerkin 2-form Hodge via Whitney face elements,
// W_(a,b,c) = 2*(la gb x gc + lb gc x ga + lc ga x gb) with a<b<c globally.
inline sparse_mat hodge2(const tet_mesh& m, const Eigen::VectorXd& xi) {
    if (xi.size() != static_cast<long>(m.tets.size()))
        throw std::invalid_argument("hodge2: xi must have one entry per tet");
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(16 * m.tets.size());
    for (std::size_t t = 0; t < m.tets.size(); ++t) {
        const auto& v = m.tets[t];
        const auto g = tet_barycentric_gradients(m.nodes[v[0]], m.nodes[v[1]], m.nodes[v[2]],
                                                 m.nodes[v[3]]);
        const double vol = m.volume[t];
        const double w = xi[static_cast<long>(t)];
        const auto lt = detail::tet_local_tris(m, t);
        for (int i = 0; i < 4; ++i) {
            const auto& a = lt[i];
            const std::array<int, 3> an{a.la, a.lb, a.lc};
            const std::array<vec3, 3> av{g[a.lb].cross(g[a.lc]), g[a.lc].cross(g[a.la]),
                                         g[a.la].cross(g[a.lb])};
            for (int j = 0; j < 4; ++j) {
                const auto& b = lt[j];
                const std::array<int, 3> bn{b.la, b.lb, b.lc};
                const std::array<vec3, 3> bv{g[b.lb].cross(g[b.lc]), g[b.lc].cross(g[b.la]),
                                             g[b.la].cross(g[b.lb])};
                double val = 0.0;
                for (int p = 0; p < 3; ++p)
                    for (int q = 0; q < 3; ++q)
                        val += av[p].dot(bv[q]) * detail::bary_pair_integral(an[p], bn[q], vol);
                trip.emplace_back(a.global, b.global, 4.0 * w * val);
            }
        }
    }
    sparse_mat h(static_cast<long>(m.tris.size()), static_cast<long>(m.tris.size()));
    h.setFromTriplets(trip.begin(), trip.end());
    return h;
}

// Distributional gradient of a piecewise-constant coefficient, tested against
// products of nodal hats. For each interior face shared by tets (lo, hi) in
// tet-index order, with unit normal n pointing from lo into hi and jump
// deps = xi_hi - xi_lo, the face contributes deps * n_tau * S/6 on node
// diagonals and deps * n_tau * S/12 on distinct node pairs of the face.
// Returns the three Cartesian-component matrices (x, y, z), each symmetric.
inline std::array<sparse_mat, 3> hodge0_material_gradient(const tet_mesh& m,
                                                          const Eigen::VectorXd& xi) {
    if (xi.size() != static_cast<long>(m.tets.size()))
        throw std::invalid_argument("hodge0_material_gradient: xi must have one entry per tet");
    std::array<std::vector<Eigen::Triplet<double>>, 3> trip;
    for (std::size_t f = 0; f < m.tris.size(); ++f) {
        const auto [t_lo, t_hi] = m.tri_tets[f];
        if (t_hi < 0) continue; // boundary face: no jump inside the mesh
        const double deps = xi[t_hi] - xi[t_lo];
        if (deps == 0.0) continue;
        const auto& tr = m.tris[f];
        const vec3& a = m.nodes[tr[0]];
        const vec3& b = m.nodes[tr[1]];
        const vec3& c = m.nodes[tr[2]];
        vec3 n = tri_unit_normal(a, b, c);
        if (n.dot(m.tet_centroid(static_cast<std::size_t>(t_hi)) -
                  m.tet_centroid(static_cast<std::size_t>(t_lo))) < 0.0)
            n = -n;
        const double s = tri_area(a, b, c);
        for (int tau = 0; tau < 3; ++tau) {
            const double base = deps * n[tau] * s;
            if (base == 0.0) continue;
            for (int i = 0; i < 3; ++i) {
                trip[tau].emplace_back(tr[i], tr[i], base / 6.0);
                for (int j = 0; j < 3; ++j)
                    if (j != i) trip[tau].emplace_back(tr[i], tr[j], base / 12.0);
            }
        }
    }
    std::array<sparse_mat, 3> out;
    for (int tau = 0; tau < 3; ++tau) {
        out[tau].resize(static_cast<long>(m.nodes.size()), static_cast<long>(m.nodes.size()));
        out[tau].setFromTriplets(trip[tau].begin(), trip[tau].end());
    }
    return out;
}

// P0: boundary nodes x all nodes, selecting boundary-node values.
inline sparse_mat selection_p0(const tet_mesh& m, const boundary_surface& b) {
    sparse_mat p(static_cast<long>(b.nodes.size()), static_cast<long>(m.nodes.size()));
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(b.nodes.size());
    for (std::size_t i = 0; i < b.nodes.size(); ++i)
        trip.emplace_back(static_cast<long>(i), b.nodes[i], 1.0);
    p.setFromTriplets(trip.begin(), trip.end());
    return p;
}

// P2: boundary triangles x all triangles, selecting boundary faces.
inline sparse_mat selection_p2(const tet_mesh& m, const boundary_surface& b) {
    sparse_mat p(static_cast<long>(b.tris.size()), static_cast<long>(m.tris.size()));
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(b.tris.size());
    for (std::size_t f = 0; f < b.tris.size(); ++f)
        trip.emplace_back(static_cast<long>(f), static_cast<long>(b.tri_global[f]), 1.0);
    p.setFromTriplets(trip.begin(), trip.end());
    return p;
}

// Q = (1/6) |D1_boundary| |D0_boundary|: surface triangles x surface nodes.
// Each row carries 1/3 at the triangle's three vertices, so Q * 1 = 1.
inline sparse_mat boundary_q(const boundary_surface& b) {
    sparse_mat q(static_cast<long>(b.tris.size()), static_cast<long>(b.nodes.size()));
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * b.tris.size());
    for (std::size_t f = 0; f < b.tris.size(); ++f)
        for (int v : b.tris[f]) trip.emplace_back(static_cast<long>(f), v, 1.0 / 3.0);
    q.setFromTriplets(trip.begin(), trip.end());
    return q;
}

// Complement operator closing the summation-by-parts defect of the nodal
// Laplacian on a mesh with boundary:
//   D2c = (1/6) |D0^T| |D1^T| P2^T * diag(areas) * Q,
// an (all nodes) x (boundary nodes) map. The construction verifies that
// (1/2) |D0^T| |D1^T| P2^T has only 0/1 entries, i.e. every boundary face
// contributes each of its vertices exactly once.
inline sparse_mat complement_d2c(const tet_mesh& m, const boundary_surface& b) {
    // (1/2)|D0^T||D1^T|P2^T restricted to boundary faces: entry (node, face)
    // counts half the face's edges containing the node, which is 1 for the
    // face's own vertices and 0 otherwise.
    std::vector<Eigen::Triplet<double>> half_trip;
    half_trip.reserve(3 * b.tris.size());
    for (std::size_t f = 0; f < b.tris.size(); ++f) {
        const auto& tg = m.tris[b.tri_global[f]];
        std::array<double, 3> count{0.0, 0.0, 0.0};
        static constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
        for (const auto& pr : pairs) {
            // each edge of the face contributes to both endpoints
            for (int end = 0; end < 2; ++end) {
                const int node = tg[pr[end]];
                for (int k = 0; k < 3; ++k)
                    if (tg[k] == node) count[static_cast<std::size_t>(k)] += 0.5;
            }
        }
        for (int k = 0; k < 3; ++k) {
            if (std::abs(count[static_cast<std::size_t>(k)] - 1.0) > 1e-14)
                throw std::logic_error("complement_d2c: 0/1 structure check failed");
            half_trip.emplace_back(tg[k], static_cast<long>(f), count[static_cast<std::size_t>(k)]);
        }
    }
    sparse_mat half(static_cast<long>(m.nodes.size()), static_cast<long>(b.tris.size()));
    half.setFromTriplets(half_trip.begin(), half_trip.end());

    Eigen::VectorXd areas(static_cast<long>(b.tris.size()));
    for (std::size_t f = 0; f < b.tris.size(); ++f) areas[static_cast<long>(f)] = b.area[f];

    sparse_mat q = boundary_q(b);
    sparse_mat d2c = (1.0 / 3.0) * (half * (areas.asDiagonal() * q));
    d2c.makeCompressed();
    return d2c;
}

} // namespace decsie
