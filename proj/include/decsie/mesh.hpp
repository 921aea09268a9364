#pragma once

// tetrahedral mesh container with canonical simplex orientation, the derived
// edge/triangle skeleton, and the oriented boundary surface.
//
// conventions:
//   - tets are stored with node ids sorted ascending, then the last two nodes
//     are swapped if needed so the signed volume is positive
//   - edges (i<j) and triangles (i<j<k) are keyed by sorted node ids and
//     listed in lexicographic order, which makes the skeleton independent of
//     the input tet ordering
//   - boundary triangles are stored with outward-pointing orientation

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "geometry.hpp"

namespace decsie {

struct mesh_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct tet_mesh {
    std::vector<vec3> nodes;
    std::vector<std::array<int, 4>> tets;      // canonical orientation, positive volume
    std::vector<int> region;                   // physical tag per tet
    std::vector<std::array<int, 2>> edges;     // i<j, lexicographic
    std::vector<std::array<int, 3>> tris;      // i<j<k, lexicographic
    std::vector<std::array<int, 2>> tri_tets;  // adjacent tets, ascending; {t,-1} on boundary
    std::vector<double> volume;                // per tet, positive
    double bbox_diag = 0.0;

    int n0() const { return static_cast<int>(nodes.size()); }
    int n1() const { return static_cast<int>(edges.size()); }
    int n2() const { return static_cast<int>(tris.size()); }
    int n3() const { return static_cast<int>(tets.size()); }

    int edge_index(int a, int b) const
    {
        if (a > b) std::swap(a, b);
        const std::array<int, 2> key{a, b};
        auto it = std::lower_bound(edges.begin(), edges.end(), key);
        if (it == edges.end() || *it != key) throw mesh_error("edge not in skeleton");
        return static_cast<int>(it - edges.begin());
    }

    int tri_index(int a, int b, int c) const
    {
        std::array<int, 3> key{a, b, c};
        std::sort(key.begin(), key.end());
        auto it = std::lower_bound(tris.begin(), tris.end(), key);
        if (it == tris.end() || *it != key) throw mesh_error("triangle not in skeleton");
        return static_cast<int>(it - tris.begin());
    }

    vec3 tet_centroid(int t) const
    {
        const auto& k = tets[t];
        return 0.25 * (nodes[k[0]] + nodes[k[1]] + nodes[k[2]] + nodes[k[3]]);
    }
};

// canonicalizes tets, builds the skeleton and face adjacency, checks for
// degenerate or non-manifold input
inline tet_mesh build_tet_mesh(std::vector<vec3> nodes, std::vector<std::array<int, 4>> tets,
                               std::vector<int> region)
{
    tet_mesh m;
    m.nodes = std::move(nodes);
    m.tets = std::move(tets);
    m.region = std::move(region);
    if (m.region.empty()) m.region.assign(m.tets.size(), 0);
    if (m.region.size() != m.tets.size()) throw mesh_error("region tag count does not match tets");

    vec3 lo = vec3::Constant(std::numeric_limits<double>::max());
    vec3 hi = -lo;
    for (const auto& p : m.nodes) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    m.bbox_diag = m.nodes.empty() ? 0.0 : (hi - lo).norm();
    const double vol_floor = 1e-14 * m.bbox_diag * m.bbox_diag * m.bbox_diag;

    m.volume.resize(m.tets.size());
    for (size_t t = 0; t < m.tets.size(); ++t) {
        auto& k = m.tets[t];
        for (int i : k)
            if (i < 0 || i >= m.n0()) throw mesh_error("tet node index out of range");
        std::sort(k.begin(), k.end());
        if (k[0] == k[1] || k[1] == k[2] || k[2] == k[3])
            throw mesh_error("tet with repeated node");
        double v = tet_volume_signed(m.nodes[k[0]], m.nodes[k[1]], m.nodes[k[2]], m.nodes[k[3]]);
        if (v < 0) {
            std::swap(k[2], k[3]);
            v = -v;
        }
        if (v <= vol_floor) throw mesh_error("degenerate tet (volume below threshold)");
        m.volume[t] = v;
    }

    m.edges.reserve(m.tets.size() * 6);
    m.tris.reserve(m.tets.size() * 4);
    for (const auto& k : m.tets) {
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                m.edges.push_back({std::min(k[i], k[j]), std::max(k[i], k[j])});
        for (int f = 0; f < 4; ++f) {
            std::array<int, 3> tr;
            int p = 0;
            for (int i = 0; i < 4; ++i)
                if (i != f) tr[p++] = k[i];
            std::sort(tr.begin(), tr.end());
            m.tris.push_back(tr);
        }
    }
    std::sort(m.edges.begin(), m.edges.end());
    m.edges.erase(std::unique(m.edges.begin(), m.edges.end()), m.edges.end());
    std::sort(m.tris.begin(), m.tris.end());
    m.tris.erase(std::unique(m.tris.begin(), m.tris.end()), m.tris.end());

    m.tri_tets.assign(m.tris.size(), {-1, -1});
    for (size_t t = 0; t < m.tets.size(); ++t) {
        const auto& k = m.tets[t];
        for (int f = 0; f < 4; ++f) {
            std::array<int, 3> tr;
            int p = 0;
            for (int i = 0; i < 4; ++i)
                if (i != f) tr[p++] = k[i];
            const int ti = m.tri_index(tr[0], tr[1], tr[2]);
            auto& adj = m.tri_tets[ti];
            if (adj[0] == -1)
                adj[0] = static_cast<int>(t);
            else if (adj[1] == -1)
                adj[1] = static_cast<int>(t);
            else
                throw mesh_error("non-manifold face (more than two adjacent tets)");
        }
    }
    for (auto& adj : m.tri_tets)
        if (adj[1] != -1 && adj[0] > adj[1]) std::swap(adj[0], adj[1]);
    return m;
}

// boundary of the volume mesh: faces with a single adjacent tet, oriented so
// triangle normals point out of the meshed domain
struct boundary_surface {
    std::vector<int> nodes;                  // global node ids, ascending
    std::vector<int> node_local;             // global -> local index, -1 off boundary
    std::vector<std::array<int, 3>> tris;    // local node ids, outward orientation
    std::vector<int> tri_global;             // global triangle index per boundary triangle
    std::vector<std::array<int, 2>> edges;   // local node ids, i<j, lexicographic
    std::vector<double> area;                // per boundary triangle
    std::vector<vec3> normal;                // outward unit normal per boundary triangle

    int n0() const { return static_cast<int>(nodes.size()); }
    int n1() const { return static_cast<int>(edges.size()); }
    int n2() const { return static_cast<int>(tris.size()); }
};

inline boundary_surface extract_boundary(const tet_mesh& m)
{
    boundary_surface b;
    b.node_local.assign(m.n0(), -1);

    for (int ti = 0; ti < m.n2(); ++ti)
        if (m.tri_tets[ti][1] == -1) {
            if (m.tri_tets[ti][0] == -1) throw mesh_error("orphan triangle in skeleton");
            b.tri_global.push_back(ti);
            for (int v : m.tris[ti])
                if (b.node_local[v] == -1) {
                    b.node_local[v] = 0;  // mark, renumber below
                    b.nodes.push_back(v);
                }
        }
    std::sort(b.nodes.begin(), b.nodes.end());
    for (size_t i = 0; i < b.nodes.size(); ++i) b.node_local[b.nodes[i]] = static_cast<int>(i);

    b.tris.reserve(b.tri_global.size());
    b.area.reserve(b.tri_global.size());
    b.normal.reserve(b.tri_global.size());
    for (int ti : b.tri_global) {
        std::array<int, 3> g = m.tris[ti];
        const int t = m.tri_tets[ti][0];
        const vec3 &pa = m.nodes[g[0]], &pb = m.nodes[g[1]], &pc = m.nodes[g[2]];
        vec3 n = (pb - pa).cross(pc - pa);
        const vec3 ctri = (pa + pb + pc) / 3.0;
        if (n.dot(ctri - m.tet_centroid(t)) < 0) {
            std::swap(g[1], g[2]);
            n = -n;
        }
        b.tris.push_back({b.node_local[g[0]], b.node_local[g[1]], b.node_local[g[2]]});
        b.area.push_back(0.5 * n.norm());
        b.normal.push_back(n.normalized());
    }

    // closed-surface check: each boundary edge must be shared by exactly two
    // boundary triangles
    std::vector<std::array<int, 2>> all;
    all.reserve(b.tris.size() * 3);
    for (const auto& t : b.tris)
        for (int e = 0; e < 3; ++e) {
            int u = t[e], v = t[(e + 1) % 3];
            if (u > v) std::swap(u, v);
            all.push_back({u, v});
        }
    std::sort(all.begin(), all.end());
    for (size_t i = 0; i < all.size();) {
        size_t j = i;
        while (j < all.size() && all[j] == all[i]) ++j;
        if (j - i != 2) throw mesh_error("boundary surface is not closed");
        b.edges.push_back(all[i]);
        i = j;
    }
    return b;
}

// minimal Gmsh ASCII v2.2 reader: $Nodes and $Elements with element types
// 2 (triangle, ignored) and 4 (tet); other sections are skipped, other
// element types rejected; non-contiguous node ids are compacted by ascending id
inline tet_mesh load_gmsh(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw mesh_error("cannot open mesh file: " + path);

    std::vector<std::pair<long long, vec3>> raw_nodes;
    std::vector<std::array<long long, 4>> raw_tets;
    std::vector<int> raw_region;
    bool saw_format = false, saw_nodes = false, saw_elements = false;

    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] != '$') continue;
        const std::string section = line.substr(1);
        if (section == "MeshFormat") {
            double version = 0;
            int file_type = -1, data_size = 0;
            in >> version >> file_type >> data_size;
            if (std::abs(version - 2.2) > 1e-9 || file_type != 0)
                throw mesh_error("unsupported mesh format (expected Gmsh ASCII v2.2)");
            saw_format = true;
            std::getline(in, line);
            std::getline(in, line);  // $EndMeshFormat
        } else if (section == "Nodes") {
            size_t count = 0;
            in >> count;
            raw_nodes.reserve(count);
            for (size_t i = 0; i < count; ++i) {
                long long id;
                double x, y, z;
                if (!(in >> id >> x >> y >> z)) throw mesh_error("truncated $Nodes section");
                raw_nodes.emplace_back(id, vec3(x, y, z));
            }
            saw_nodes = true;
            std::getline(in, line);
            std::getline(in, line);  // $EndNodes
        } else if (section == "Elements") {
            size_t count = 0;
            in >> count;
            for (size_t i = 0; i < count; ++i) {
                long long id;
                int type, ntags;
                if (!(in >> id >> type >> ntags)) throw mesh_error("truncated $Elements section");
                int phys = 0;
                for (int t = 0; t < ntags; ++t) {
                    long long tag;
                    in >> tag;
                    if (t == 0) phys = static_cast<int>(tag);
                }
                if (type == 4) {
                    std::array<long long, 4> k;
                    in >> k[0] >> k[1] >> k[2] >> k[3];
                    raw_tets.push_back(k);
                    raw_region.push_back(phys);
                } else if (type == 2) {
                    long long a, b, c;
                    in >> a >> b >> c;  // surface elements carry no extra information here
                } else {
                    throw mesh_error("unsupported element type " + std::to_string(type));
                }
            }
            saw_elements = true;
            std::getline(in, line);
            std::getline(in, line);  // $EndElements
        } else {
            const std::string end = "$End" + section;
            while (std::getline(in, line))
                if (line.rfind(end, 0) == 0) break;
        }
    }
    if (!saw_format || !saw_nodes || !saw_elements)
        throw mesh_error("mesh file missing $MeshFormat, $Nodes or $Elements");
    if (raw_tets.empty()) throw mesh_error("mesh contains no tets");

    std::sort(raw_nodes.begin(), raw_nodes.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::map<long long, int> id_map;
    std::vector<vec3> nodes;
    nodes.reserve(raw_nodes.size());
    for (const auto& [id, p] : raw_nodes) {
        if (!id_map.emplace(id, static_cast<int>(nodes.size())).second)
            throw mesh_error("duplicate node id in mesh file");
        nodes.push_back(p);
    }

    std::vector<std::array<int, 4>> tets;
    tets.reserve(raw_tets.size());
    for (const auto& k : raw_tets) {
        std::array<int, 4> c;
        for (int i = 0; i < 4; ++i) {
            auto it = id_map.find(k[i]);
            if (it == id_map.end()) throw mesh_error("tet references unknown node id");
            c[i] = it->second;
        }
        tets.push_back(c);
    }
    return build_tet_mesh(std::move(nodes), std::move(tets), std::move(raw_region));
}

// piecewise-constant permittivity per tet, keyed by region tag
inline std::vector<cplx> material_from_regions(const tet_mesh& m,
                                               const std::map<int, cplx>& eps_by_region)
{
    std::vector<cplx> eps(m.n3());
    for (int t = 0; t < m.n3(); ++t) {
        auto it = eps_by_region.find(m.region[t]);
        if (it == eps_by_region.end())
            throw mesh_error("no permittivity given for region tag " +
                             std::to_string(m.region[t]));
        eps[t] = it->second;
    }
    return eps;
}

// the boundary must sit in free space: every tet touching it carries eps = 1
inline void check_boundary_in_vacuum(const tet_mesh& m, const boundary_surface& b,
                                     const std::vector<cplx>& eps)
{
    for (int ti : b.tri_global) {
        const int t = m.tri_tets[ti][0];
        if (std::abs(eps[t] - cplx(1.0, 0.0)) > 1e-12)
            throw mesh_error("tet adjacent to the outer boundary has eps != 1");
    }
}

}  // namespace decsie
