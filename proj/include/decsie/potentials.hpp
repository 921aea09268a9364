#pragma once

// Off-surface evaluation of the Helmholtz layer potentials for P1 nodal
// densities on the boundary triangulation:
//   S[beta](r)  = integral of G(r,r') beta(r') over the surface
//   D[alpha](r) = integral of dG/dn'(r,r') alpha(r') over the surface
// Observation points within a couple of panel diameters reuse the analytic
// even-power machinery of the boundary operators (exact statics + smooth
// remainder rule); farther panels drop to fixed rules binned by the ratio of
// distance to panel diameter.

#include "sie.hpp"

namespace decsie {

struct potential_quadrature_options {
    double near_ratio = 2.0; // below: analytic even powers + remainder rule
    double far_ratio = 4.0;  // between: mid rule; beyond: far rule
    int rem_order = 5;
    int mid_order = 9;
    int far_order = 5;
};

// exact distance from a point to a filled triangle (closest-point regions)
inline double point_triangle_distance(const vec3& p, const vec3& a, const vec3& b,
                                      const vec3& c) {
    const vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return (p - a).norm();
    const vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return (p - b).norm();
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return (p - (a + (d1 / (d1 - d3)) * ab)).norm();
    const vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return (p - c).norm();
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return (p - (a + (d2 / (d2 - d6)) * ac)).norm();
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0)
        return (p - (b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b))).norm();
    const double denom = 1.0 / (va + vb + vc);
    return (p - (a + (vb * denom) * ab + (vc * denom) * ac)).norm();
}

class layer_potential {
public:
    struct proximity_info {
        double distance; // distance to the closest boundary panel
        double diam;     // diameter of that panel (local length scale)
    };

    layer_potential(const tet_mesh& m, const boundary_surface& b, double k0,
                    const potential_quadrature_options& opt = {})
        : panels_(detail::build_panels(m, b)), k0_(k0), opt_(opt),
          nnodes_(static_cast<long>(b.nodes.size())) {
        tri_rule(opt_.rem_order); // warm the rule caches for threaded callers
        tri_rule(opt_.mid_order);
        tri_rule(opt_.far_order);
    }

    long nodes() const { return nnodes_; }
    double k0() const { return k0_; }

    // nodal coefficient rows at r: S[beta](r) = s_row . beta and
    // D[alpha](r) = d_row . alpha (plain products, no conjugation)
    void rows(const vec3& r, Eigen::VectorXcd& s_row, Eigen::VectorXcd& d_row) const {
        s_row.setZero(nnodes_);
        d_row.setZero(nnodes_);
        const auto& rule_rem = tri_rule(opt_.rem_order);
        const auto& rule_mid = tri_rule(opt_.mid_order);
        const auto& rule_far = tri_rule(opt_.far_order);
        for (const auto& pan : panels_) {
            const double ratio = (r - pan.centroid).norm() / pan.diam;
            if (ratio < opt_.near_ratio) {
                const auto iv = detail::near_inner(pan, r, k0_, rule_rem);
                for (int v = 0; v < 3; ++v) {
                    s_row[pan.node[v]] += iv.s[static_cast<std::size_t>(v)];
                    d_row[pan.node[v]] += iv.d[static_cast<std::size_t>(v)];
                }
            } else {
                const auto& rule = (ratio < opt_.far_ratio) ? rule_mid : rule_far;
                for (const quad_tri& q : rule) {
                    const vec3 y = q.l1 * pan.p[0] + q.l2 * pan.p[1] + q.l3 * pan.p[2];
                    const vec3 dx = r - y;
                    const double R = dx.norm();
                    const double w = q.w * pan.area;
                    const cplx g = w * helm_kernel(k0_, R);
                    const cplx dg = w * helm_double_kernel(k0_, R, pan.normal.dot(dx));
                    const double lam[3] = {q.l1, q.l2, q.l3};
                    for (int v = 0; v < 3; ++v) {
                        s_row[pan.node[v]] += lam[v] * g;
                        d_row[pan.node[v]] += lam[v] * dg;
                    }
                }
            }
        }
    }

    // S[beta](r) and D[alpha](r) for one density pair
    std::pair<cplx, cplx> evaluate(const vec3& r, const Eigen::VectorXcd& alpha,
                                   const Eigen::VectorXcd& beta) const {
        Eigen::VectorXcd s_row(nnodes_), d_row(nnodes_);
        rows(r, s_row, d_row);
        return {s_row.cwiseProduct(beta).sum(), d_row.cwiseProduct(alpha).sum()};
    }

    proximity_info proximity(const vec3& r) const {
        proximity_info best{std::numeric_limits<double>::infinity(), 0.0};
        for (const auto& pan : panels_) {
            if ((r - pan.centroid).norm() - pan.diam > best.distance) continue;
            const double dist = point_triangle_distance(r, pan.p[0], pan.p[1], pan.p[2]);
            if (dist < best.distance) best = {dist, pan.diam};
        }
        return best;
    }

    const std::vector<detail::panel_geom>& panels() const { return panels_; }

private:
    std::vector<detail::panel_geom> panels_;
    double k0_;
    potential_quadrature_options opt_;
    long nnodes_;
};

} // namespace decsie
