#pragma once

// structured tet mesh generators for the benchmark geometries.
//
// the ball meshes come from a Freudenthal-split cube grid mapped radially so
// that max-norm lattice shells land exactly on prescribed sphere radii; the
// material interfaces are then unions of element faces and every region is a
// conforming spherical shell.  box meshes keep the grid as-is and classify
// tets by centroid.

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "mesh.hpp"

namespace decsie {

struct gen_mesh {
    std::vector<vec3> nodes;
    std::vector<std::array<int, 4>> tets;
    std::vector<int> region;
};

namespace detail {

// Freudenthal/Kuhn split: six tets per hex, conforming across neighbors
inline void split_hex(const std::array<int, 8>& c, std::vector<std::array<int, 4>>& tets)
{
    // corner order: bit 0 -> x, bit 1 -> y, bit 2 -> z
    static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                    {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& p : perms) {
        int a = 0;
        int b = a | (1 << p[0]);
        int d = b | (1 << p[1]);
        int e = d | (1 << p[2]);
        tets.push_back({c[a], c[b], c[d], c[e]});
    }
}

}  // namespace detail

// structured box grid with arbitrary axis partitions; region(centroid) assigns tags
inline gen_mesh gen_box(const std::vector<double>& xg, const std::vector<double>& yg,
                        const std::vector<double>& zg,
                        const std::function<int(const vec3&)>& region_of)
{
    const int nx = static_cast<int>(xg.size()) - 1;
    const int ny = static_cast<int>(yg.size()) - 1;
    const int nz = static_cast<int>(zg.size()) - 1;
    if (nx < 1 || ny < 1 || nz < 1) throw std::invalid_argument("gen_box: empty grid");

    gen_mesh g;
    g.nodes.reserve((nx + 1) * (ny + 1) * (nz + 1));
    auto id = [&](int i, int j, int k) { return (i * (ny + 1) + j) * (nz + 1) + k; };
    for (int i = 0; i <= nx; ++i)
        for (int j = 0; j <= ny; ++j)
            for (int k = 0; k <= nz; ++k) g.nodes.emplace_back(xg[i], yg[j], zg[k]);

    g.tets.reserve(6 * nx * ny * nz);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k < nz; ++k) {
                std::array<int, 8> c;
                for (int b = 0; b < 8; ++b)
                    c[b] = id(i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1));
                detail::split_hex(c, g.tets);
            }

    g.region.reserve(g.tets.size());
    for (const auto& t : g.tets) {
        const vec3 cen = 0.25 * (g.nodes[t[0]] + g.nodes[t[1]] + g.nodes[t[2]] + g.nodes[t[3]]);
        g.region.push_back(region_of(cen));
    }
    return g;
}

// ball of radius radii.back() made of concentric conforming shells.
// shells[i] is a lattice index in (0, n]; the max-norm shell shells[i]/n maps
// to radius radii[i].  shells.back() must equal n.  regions are numbered from
// 1 (innermost) outward.
inline gen_mesh gen_cubed_ball(int n, const std::vector<int>& shells,
                               const std::vector<double>& radii)
{
    if (shells.size() != radii.size() || shells.empty())
        throw std::invalid_argument("gen_cubed_ball: shells/radii mismatch");
    if (shells.back() != n) throw std::invalid_argument("gen_cubed_ball: last shell must be n");
    for (size_t i = 0; i < shells.size(); ++i) {
        if (shells[i] <= (i ? shells[i - 1] : 0) || radii[i] <= (i ? radii[i - 1] : 0.0))
            throw std::invalid_argument("gen_cubed_ball: shells/radii must increase");
    }

    // piecewise-linear radial profile through (0,0) and (shells[i]/n, radii[i])
    auto profile = [&](double s) {
        double t0 = 0.0, r0 = 0.0;
        for (size_t i = 0; i < shells.size(); ++i) {
            const double t1 = static_cast<double>(shells[i]) / n;
            if (s <= t1 || i + 1 == shells.size())
                return r0 + (radii[i] - r0) * (s - t0) / (t1 - t0);
            t0 = t1;
            r0 = radii[i];
        }
        return radii.back();
    };

    const int m = 2 * n;  // cells per axis over [-1,1], grid planes at j/n
    std::vector<double> grid(m + 1);
    for (int i = 0; i <= m; ++i) grid[i] = static_cast<double>(i - n) / n;

    gen_mesh g = gen_box(grid, grid, grid, [&](const vec3& cen) {
        const double s = cen.cwiseAbs().maxCoeff();
        int region = 1;
        for (size_t i = 0; i + 1 < shells.size(); ++i)
            if (s > static_cast<double>(shells[i]) / n) region = static_cast<int>(i) + 2;
        return region;
    });

    for (auto& p : g.nodes) {
        const double s = p.cwiseAbs().maxCoeff();
        if (s < 1e-15) {
            p.setZero();
            continue;
        }
        p *= profile(s) / p.norm();
    }
    return g;
}

// homogeneous ball benchmark: scatterer of radius a (region 1) inside a
// free-space shell (region 2) bounded by the sphere of radius r_gamma
inline gen_mesh gen_ball_scatterer(int n, int k_interface, double a, double r_gamma)
{
    return gen_cubed_ball(n, {k_interface, n}, {a, r_gamma});
}

// two-layer ball benchmark: core r1 (region 1), coating r2 (region 2),
// free-space shell out to r_gamma (region 3)
inline gen_mesh gen_layered_ball(int n, int k1, int k2, double r1, double r2, double r_gamma)
{
    return gen_cubed_ball(n, {k1, k2, n}, {r1, r2, r_gamma});
}

// four elliptical posts on a slab inside a free-space box.  posts: semi-axes
// (ax, by), height t1 above the slab, centers at (+-cx, +-cy); slab: square of
// side w, thickness t2.  posts are region 1, slab region 2, air region 3;
// material interfaces follow the structured grid (grid planes are placed on
// the horizontal interfaces, the elliptical sides are resolved by centroid
// classification).
inline gen_mesh gen_slab_posts(int nx, double ax = 0.2, double by = 0.1, double t1 = 0.1,
                               double cx = 0.25, double cy = 0.25, double w = 1.0,
                               double t2 = 0.07, double pad = 0.1)
{
    auto linspace = [](double a, double b, int k) {
        std::vector<double> v(k + 1);
        for (int i = 0; i <= k; ++i) v[i] = a + (b - a) * i / k;
        return v;
    };
    const double half = 0.5 * w + pad;
    const std::vector<double> xy = linspace(-half, half, nx);
    const double dx = 2.0 * half / nx;

    // z grid hits the slab bottom, slab top and post top exactly
    std::vector<double> zg{-t2 - pad};
    auto append = [&](double a, double b) {
        const int k = std::max(1, static_cast<int>(std::lround((b - a) / dx)));
        for (int i = 1; i <= k; ++i) zg.push_back(a + (b - a) * i / k);
    };
    append(-t2 - pad, -t2);
    append(-t2, 0.0);
    append(0.0, t1);
    append(t1, t1 + pad);

    return gen_box(xy, xy, zg, [&](const vec3& c) {
        if (c.z() > 0.0 && c.z() < t1) {
            for (int sx : {-1, 1})
                for (int sy : {-1, 1}) {
                    const double u = (c.x() - sx * cx) / ax;
                    const double v = (c.y() - sy * cy) / by;
                    if (u * u + v * v <= 1.0) return 1;
                }
        }
        if (c.z() < 0.0 && c.z() > -t2 && std::abs(c.x()) < 0.5 * w &&
            std::abs(c.y()) < 0.5 * w)
            return 2;
        return 3;
    });
}

inline gen_mesh gen_cube(int n, double side = 1.0)
{
    std::vector<double> grid(n + 1);
    for (int i = 0; i <= n; ++i) grid[i] = side * i / n;
    return gen_box(grid, grid, grid, [](const vec3&) { return 1; });
}

inline void write_gmsh22(const std::string& path, const gen_mesh& g)
{
    std::ofstream out(path);
    if (!out) throw mesh_error("cannot write mesh file: " + path);
    out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
    out << "$Nodes\n" << g.nodes.size() << "\n";
    char buf[128];
    for (size_t i = 0; i < g.nodes.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu %.17g %.17g %.17g\n", i + 1, g.nodes[i].x(),
                      g.nodes[i].y(), g.nodes[i].z());
        out << buf;
    }
    out << "$EndNodes\n$Elements\n" << g.tets.size() << "\n";
    for (size_t t = 0; t < g.tets.size(); ++t) {
        out << (t + 1) << " 4 2 " << g.region[t] << ' ' << g.region[t];
        for (int v : g.tets[t]) out << ' ' << (v + 1);
        out << '\n';
    }
    out << "$EndElements\n";
}

inline tet_mesh build_mesh(const gen_mesh& g)
{
    return build_tet_mesh(g.nodes, g.tets, g.region);
}

}  // namespace decsie
