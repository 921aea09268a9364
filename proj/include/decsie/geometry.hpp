#pragma once

// small geometry helpers shared by the mesh, DEC and boundary-integral layers

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>

namespace decsie {

using vec3 = Eigen::Vector3d;
using cplx = std::complex<double>;

inline double tet_volume_signed(const vec3& a, const vec3& b, const vec3& c, const vec3& d)
{
    return (b - a).cross(c - a).dot(d - a) / 6.0;
}

inline double tri_area(const vec3& a, const vec3& b, const vec3& c)
{
    return 0.5 * (b - a).cross(c - a).norm();
}

// unit normal of the triangle (a,b,c), orientation by right-hand rule
inline vec3 tri_unit_normal(const vec3& a, const vec3& b, const vec3& c)
{
    return (b - a).cross(c - a).normalized();
}

inline double tri_diameter(const vec3& a, const vec3& b, const vec3& c)
{
    return std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
}

// gradients of the four barycentric coordinates of a tet; constant per tet
inline std::array<vec3, 4> tet_barycentric_gradients(const vec3& p0, const vec3& p1,
                                                     const vec3& p2, const vec3& p3)
{
    const double six_v = 6.0 * tet_volume_signed(p0, p1, p2, p3);
    std::array<vec3, 4> g;
    // grad lambda_i = (opposite face normal, inward) * area / (3 V); written as
    // cross products of the edge vectors emanating from the remaining nodes
    g[0] = (p3 - p1).cross(p2 - p1) / six_v;
    g[1] = (p2 - p0).cross(p3 - p0) / six_v;
    g[2] = (p3 - p0).cross(p1 - p0) / six_v;
    g[3] = (p1 - p0).cross(p2 - p0) / six_v;
    return g;
}

// in-plane gradients of the three barycentric coordinates of a triangle
inline std::array<vec3, 3> tri_barycentric_gradients(const vec3& a, const vec3& b, const vec3& c)
{
    const vec3 n = (b - a).cross(c - a);  // 2A * unit normal
    const double n2 = n.squaredNorm();
    std::array<vec3, 3> g;
    // grad lambda_a is perpendicular to edge (b,c), points toward a, magnitude 1/height
    g[0] = n.cross(c - b) / n2;
    g[1] = n.cross(a - c) / n2;
    g[2] = n.cross(b - a) / n2;
    return g;
}

// barycentric coordinates of the in-plane point p with respect to triangle (a,b,c);
// p is projected onto the triangle plane first, values may lie outside [0,1]
inline std::array<double, 3> tri_barycentric(const vec3& a, const vec3& b, const vec3& c,
                                             const vec3& p)
{
    const vec3 v0 = b - a, v1 = c - a, v2 = p - a;
    const double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
    const double d20 = v2.dot(v0), d21 = v2.dot(v1);
    const double denom = d00 * d11 - d01 * d01;
    const double l1 = (d11 * d20 - d01 * d21) / denom;
    const double l2 = (d00 * d21 - d01 * d20) / denom;
    return {1.0 - l1 - l2, l1, l2};
}

}  // namespace decsie
