#pragma once

// Galerkin assembly of the boundary single- and double-layer operators with
// nodal hat functions on the triangulated surface. Near pairs subtract the
// static kernel (handled in closed form per outer point) and integrate only
// the smooth remainder numerically. The outer integral of a pair that shares
// a node uses a graded tensor Gauss rule whose Jacobian vanishes at the shared
// feature, where the inner integral has edge-log derivatives; detached near
// pairs are refined adaptively against a fixed per-pair error floor.

#include <algorithm>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "mesh.hpp"
#include "panel.hpp"
#include "quadrature.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace decsie {

struct surface_quadrature_options {
    // pair classification by centroid distance / max panel diameter
    double adaptive_ratio = 1.0; // below: adaptively refined outer integral
    double near_ratio = 2.0;     // below: high-order tensor rule
    double far_ratio = 4.0;      // below: medium tensor rule, low-order beyond
    int near_order = 15;         // 81-point collapsed rule per panel
    int mid_order = 9;           // 36-point
    int far_order = 5;           // 7-point
    int graded_order = 28;       // Gauss points per direction for touching pairs
    int rem_order = 5;           // smooth-remainder rule backing the analytic inner integral
    int near_base_order = 6;     // base rule of the adaptive outer integral
    double near_tol = 1e-9;      // refinement target relative to the pair magnitude
    int near_max_depth = 6;
};

struct surface_operators {
    Eigen::MatrixXcd single_layer; // Galerkin S
    Eigen::MatrixXcd double_layer; // jump term plus principal value: M/2 - Dtilde
    Eigen::SparseMatrix<double> mass;
    double k0 = 0.0;
};

namespace detail {

struct panel_geom {
    std::array<vec3, 3> p;    // vertex positions in outward orientation
    std::array<int, 3> node;  // local boundary node ids matching p
    std::array<vec3, 3> grad; // in-plane gradients of the vertex hats
    vec3 normal;
    vec3 centroid;
    double area = 0.0;
    double diam = 0.0;
};

inline std::vector<panel_geom> build_panels(const tet_mesh& m, const boundary_surface& b) {
    std::vector<panel_geom> panels(b.tris.size());
    for (std::size_t f = 0; f < b.tris.size(); ++f) {
        panel_geom& pg = panels[f];
        for (int v = 0; v < 3; ++v) {
            pg.node[v] = b.tris[f][v];
            pg.p[v] = m.nodes[b.nodes[pg.node[v]]];
        }
        pg.grad = tri_barycentric_gradients(pg.p[0], pg.p[1], pg.p[2]);
        pg.normal = b.normal[f];
        pg.centroid = (pg.p[0] + pg.p[1] + pg.p[2]) / 3.0;
        pg.area = b.area[f];
        pg.diam = tri_diameter(pg.p[0], pg.p[1], pg.p[2]);
    }
    return panels;
}

// Greedy coloring so that panels of equal color share no node; parallel
// assembly over one color writes disjoint matrix rows, which keeps the
// accumulation order, and therefore the result, independent of thread count.
inline std::vector<std::vector<int>> color_panels(const boundary_surface& b) {
    std::vector<std::vector<int>> node_tris(b.nodes.size());
    for (std::size_t f = 0; f < b.tris.size(); ++f)
        for (int v : b.tris[f]) node_tris[static_cast<std::size_t>(v)].push_back(static_cast<int>(f));

    std::vector<int> color(b.tris.size(), -1);
    int ncolors = 0;
    std::vector<char> used;
    for (std::size_t f = 0; f < b.tris.size(); ++f) {
        used.assign(static_cast<std::size_t>(ncolors) + 1, 0);
        for (int v : b.tris[f])
            for (int g : node_tris[static_cast<std::size_t>(v)])
                if (color[static_cast<std::size_t>(g)] >= 0)
                    used[static_cast<std::size_t>(color[static_cast<std::size_t>(g)])] = 1;
        int c = 0;
        while (used[static_cast<std::size_t>(c)]) ++c;
        color[f] = c;
        ncolors = std::max(ncolors, c + 1);
    }
    std::vector<std::vector<int>> groups(static_cast<std::size_t>(ncolors));
    for (std::size_t f = 0; f < b.tris.size(); ++f)
        groups[static_cast<std::size_t>(color[f])].push_back(static_cast<int>(f));
    return groups;
}

struct pair_block {
    Eigen::Matrix3cd s = Eigen::Matrix3cd::Zero();
    Eigen::Matrix3cd d = Eigen::Matrix3cd::Zero();
};

// Inner integral over a source panel for one observation point. The even
// powers of kR in each kernel (1/R, R, R^3 for the single layer; the solid
// angle, d/R, d R for the normal derivative) integrate in closed form
// against the affine hats; the remaining smooth part -- constants, rule-exact
// odd polynomials, and an O((kR)^6) tail -- goes to the panel rule. Returns
// the single- and double-layer integrals against each of the three source
// hats.
struct inner_values {
    std::array<cplx, 3> s{}, d{};
};

inline inner_values near_inner(const panel_geom& src, const vec3& x, double k,
                               const std::vector<quad_tri>& rem_rule) {
    inner_values out;
    const tri_statics st = analytic_statics(x, src.p[0], src.p[1], src.p[2]);
    const auto lam_rho = tri_barycentric(src.p[0], src.p[1], src.p[2], st.rho);
    const double kk = k * k;
    const double k4 = kk * kk;
    for (int v = 0; v < 3; ++v) {
        const auto vz = static_cast<std::size_t>(v);
        const double s1 = (lam_rho[vz] * st.i1 + src.grad[vz].dot(st.iv)) / four_pi;
        const double sr = (lam_rho[vz] * st.i3 + src.grad[vz].dot(st.iv3)) / four_pi;
        const double sr3 = (lam_rho[vz] * st.i5 + src.grad[vz].dot(st.iv5)) / four_pi;
        out.s[vz] = s1 - 0.5 * kk * sr + k4 / 24.0 * sr3;
        out.d[vz] = (lam_rho[vz] * st.omega - src.grad[vz].dot(st.duf2)) / four_pi +
                    0.5 * kk * st.d * s1 - 0.125 * k4 * st.d * sr;
    }
    for (const quad_tri& q : rem_rule) {
        const vec3 y = q.l1 * src.p[0] + q.l2 * src.p[1] + q.l3 * src.p[2];
        const double R = (x - y).norm();
        const double w = q.w * src.area;
        const cplx srem = w * helm_single_smooth(k, R);
        const cplx drem = w * helm_double_smooth(k, R, src.normal.dot(x - y));
        const double lam[3] = {q.l1, q.l2, q.l3};
        for (int v = 0; v < 3; ++v) {
            out.s[static_cast<std::size_t>(v)] += lam[v] * srem;
            out.d[static_cast<std::size_t>(v)] += lam[v] * drem;
        }
    }
    return out;
}

struct outer_point {
    vec3 lam; // barycentric coordinates in the test panel
    double w; // weight including all area/Jacobian factors
};

// quintic smoothstep: value s(sig) plus derivative; both end derivatives and
// curvatures vanish, so endpoint terms of the form rho*log(rho) in the mapped
// integrand turn into (1-sig)^5 log terms that Gauss handles at high order
inline void smooth5(double sig, double& s, double& ds) {
    s = sig * sig * sig * (10.0 + sig * (-15.0 + 6.0 * sig));
    ds = 30.0 * sig * sig * (1.0 - sig) * (1.0 - sig);
}

// Map [0,1]^2 onto the (sub)triangle with barycentric corners la, lb, lc such
// that the edge la-lb is approached cubically: lam_c = t^3 and the area
// element 2*A*(1-t^3)*3t^2 vanishes there. The inner integral has a
// rho*log(rho) expansion off that edge, which the grading converts to
// t^5 log t; the coordinate along the edge gets a smoothstep so corner terms
// (where further singular edges of the source meet the test panel) keep the
// tensor Gauss rule converging fast.
inline void graded_edge_points(const vec3& la, const vec3& lb, const vec3& lc, double area,
                               const gl_rule_01& gl, std::vector<outer_point>& out) {
    const std::size_t n = gl.x.size();
    for (std::size_t i = 0; i < n; ++i) {
        double s, ds;
        smooth5(gl.x[i], s, ds);
        for (std::size_t j = 0; j < n; ++j) {
            const double t = gl.x[j];
            const double g = t * t * t;
            out.push_back({(1.0 - g) * (s * la + (1.0 - s) * lb) + g * lc,
                           gl.w[i] * gl.w[j] * ds * area * 2.0 * (1.0 - g) * 3.0 * t * t});
        }
    }
}

// Same idea towards a single corner lv: |x - v| ~ t^2, area element 4*A*t^3.
inline void graded_vertex_points(const vec3& lv, const vec3& lp, const vec3& lq, double area,
                                 const gl_rule_01& gl, std::vector<outer_point>& out) {
    const std::size_t n = gl.x.size();
    for (std::size_t i = 0; i < n; ++i) {
        double s, ds;
        smooth5(gl.x[i], s, ds);
        for (std::size_t j = 0; j < n; ++j) {
            const double t = gl.x[j];
            const double t2 = t * t;
            out.push_back({(1.0 - t2) * lv + t2 * (s * lp + (1.0 - s) * lq),
                           gl.w[i] * gl.w[j] * ds * 4.0 * area * t2 * t});
        }
    }
}

// Pairs sharing at least one node: fixed graded outer rule against the exact
// inner integral. The self pair splits at the centroid so that each piece is
// graded towards the panel edge it owns; an edge-adjacent pair grades towards
// the shared edge, a vertex-adjacent pair towards the shared vertex.
inline pair_block graded_pair(const panel_geom& test, const panel_geom& src, double k,
                              const surface_quadrature_options& opt,
                              const std::vector<quad_tri>& rem_rule) {
    bool shared[3] = {false, false, false};
    int nshared = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (test.node[i] == src.node[j]) {
                shared[i] = true;
                ++nshared;
                break;
            }

    const std::array<vec3, 3> corner = {vec3(1, 0, 0), vec3(0, 1, 0), vec3(0, 0, 1)};
    std::vector<outer_point> pts;
    if (nshared == 3) {
        const gl_rule_01& gl = gl_rule(opt.graded_order);
        pts.reserve(3 * gl.x.size() * gl.x.size());
        const vec3 g(1.0 / 3, 1.0 / 3, 1.0 / 3);
        for (int e = 0; e < 3; ++e)
            graded_edge_points(corner[static_cast<std::size_t>(e)],
                               corner[static_cast<std::size_t>((e + 1) % 3)], g, test.area / 3.0,
                               gl, pts);
    } else if (nshared == 2) {
        const gl_rule_01& gl = gl_rule(opt.graded_order);
        pts.reserve(gl.x.size() * gl.x.size());
        int a = -1, b = -1, c = -1;
        for (int i = 0; i < 3; ++i) {
            if (shared[i]) (a < 0 ? a : b) = i;
            else c = i;
        }
        graded_edge_points(corner[static_cast<std::size_t>(a)], corner[static_cast<std::size_t>(b)],
                           corner[static_cast<std::size_t>(c)], test.area, gl, pts);
    } else {
        // the point singularity is far weaker, a lighter rule already beats
        // the edge-graded accuracy by orders of magnitude
        const gl_rule_01& gl = gl_rule(std::max(8, opt.graded_order - 8));
        pts.reserve(gl.x.size() * gl.x.size());
        int v = 0;
        for (int i = 0; i < 3; ++i)
            if (shared[i]) v = i;
        graded_vertex_points(corner[static_cast<std::size_t>(v)],
                             corner[static_cast<std::size_t>((v + 1) % 3)],
                             corner[static_cast<std::size_t>((v + 2) % 3)], test.area, gl, pts);
    }

    pair_block blk;
    for (const outer_point& op : pts) {
        const vec3 x = op.lam[0] * test.p[0] + op.lam[1] * test.p[1] + op.lam[2] * test.p[2];
        const inner_values inner = near_inner(src, x, k, rem_rule);
        for (int a = 0; a < 3; ++a) {
            const cplx wa = op.w * op.lam[a];
            for (int c = 0; c < 3; ++c) {
                blk.s(a, c) += wa * inner.s[static_cast<std::size_t>(c)];
                blk.d(a, c) += wa * inner.d[static_cast<std::size_t>(c)];
            }
        }
    }
    return blk;
}

class near_pair_integrator {
  public:
    near_pair_integrator(const panel_geom& test, const panel_geom& src, double k,
                         const surface_quadrature_options& opt)
        : test_(test), src_(src), k_(k), opt_(opt), outer_rule_(tri_rule(opt.near_base_order)),
          rem_rule_(tri_rule(opt.rem_order)) {}

    pair_block integrate() const {
        // refinement stops once a cell's estimated error is irrelevant at the
        // scale of the whole pair: a purely local relative criterion would
        // chase the edge singularities of the integrand to arbitrary depth
        const double dc = (test_.centroid - src_.centroid).norm();
        const double sep = std::max(dc, 0.25 * (test_.diam + src_.diam));
        floor_ = opt_.near_tol * test_.area * src_.area / (four_pi * sep);
        const std::array<vec3, 3> corners = {vec3(1, 0, 0), vec3(0, 1, 0), vec3(0, 0, 1)};
        return refine(corners, test_.area, 0, eval(corners, test_.area));
    }

  private:
    // corners hold barycentric coordinates of the sub-triangle w.r.t. the
    // full test panel, so hat values interpolate affinely
    pair_block eval(const std::array<vec3, 3>& corners, double area) const {
        pair_block blk;
        for (const quad_tri& q : outer_rule_) {
            const vec3 lam = q.l1 * corners[0] + q.l2 * corners[1] + q.l3 * corners[2];
            const vec3 x = lam[0] * test_.p[0] + lam[1] * test_.p[1] + lam[2] * test_.p[2];
            const inner_values inner = near_inner(src_, x, k_, rem_rule_);
            const double w = q.w * area;
            for (int a = 0; a < 3; ++a) {
                const cplx wa = w * lam[a];
                for (int c = 0; c < 3; ++c) {
                    blk.s(a, c) += wa * inner.s[static_cast<std::size_t>(c)];
                    blk.d(a, c) += wa * inner.d[static_cast<std::size_t>(c)];
                }
            }
        }
        return blk;
    }

    pair_block refine(const std::array<vec3, 3>& corners, double area, int depth,
                      const pair_block& coarse) const {
        const vec3 m01 = 0.5 * (corners[0] + corners[1]);
        const vec3 m12 = 0.5 * (corners[1] + corners[2]);
        const vec3 m02 = 0.5 * (corners[0] + corners[2]);
        const std::array<std::array<vec3, 3>, 4> kids = {{{corners[0], m01, m02},
                                                          {m01, corners[1], m12},
                                                          {m02, m12, corners[2]},
                                                          {m01, m12, m02}}};
        std::array<pair_block, 4> kid_vals;
        pair_block sum;
        for (int c = 0; c < 4; ++c) {
            kid_vals[static_cast<std::size_t>(c)] = eval(kids[static_cast<std::size_t>(c)], 0.25 * area);
            sum.s += kid_vals[static_cast<std::size_t>(c)].s;
            sum.d += kid_vals[static_cast<std::size_t>(c)].d;
        }
        // the kids-vs-coarse gap estimates the error of the COARSE value; the
        // returned composite sum is two halvings better for these nonsingular
        // integrands, so acceptance can run well ahead of the target floor
        const double err = (sum.s - coarse.s).norm() + (sum.d - coarse.d).norm();
        if (depth >= opt_.near_max_depth || err <= 16.0 * floor_) return sum;
        pair_block out;
        for (int c = 0; c < 4; ++c) {
            pair_block part = refine(kids[static_cast<std::size_t>(c)], 0.25 * area, depth + 1,
                                     kid_vals[static_cast<std::size_t>(c)]);
            out.s += part.s;
            out.d += part.d;
        }
        return out;
    }

    const panel_geom& test_;
    const panel_geom& src_;
    double k_;
    const surface_quadrature_options& opt_;
    const std::vector<quad_tri>& outer_rule_;
    const std::vector<quad_tri>& rem_rule_;
    mutable double floor_ = 0.0;
};

inline pair_block smooth_pair(const panel_geom& test, const panel_geom& src, double k,
                              const std::vector<quad_tri>& rule_out,
                              const std::vector<quad_tri>& rule_in) {
    // precompute the source-side points once; they are shared by every
    // observation point of the (possibly much larger) outer rule
    struct src_pt {
        vec3 y;
        double wl[3];
    };
    static thread_local std::vector<src_pt> srcs;
    srcs.clear();
    srcs.reserve(rule_in.size());
    for (const quad_tri& qi : rule_in) {
        src_pt sp;
        sp.y = qi.l1 * src.p[0] + qi.l2 * src.p[1] + qi.l3 * src.p[2];
        const double w = qi.w * src.area;
        sp.wl[0] = w * qi.l1;
        sp.wl[1] = w * qi.l2;
        sp.wl[2] = w * qi.l3;
        srcs.push_back(sp);
    }

    pair_block blk;
    for (const quad_tri& qo : rule_out) {
        const vec3 x = qo.l1 * test.p[0] + qo.l2 * test.p[1] + qo.l3 * test.p[2];
        cplx gs[3] = {}, gd[3] = {};
        for (const src_pt& sp : srcs) {
            const vec3 dxy = x - sp.y;
            const double R = dxy.norm();
            const cplx g = helm_kernel(k, R);
            const cplx dk = helm_double_kernel(k, R, src.normal.dot(dxy));
            for (int c = 0; c < 3; ++c) {
                gs[c] += sp.wl[c] * g;
                gd[c] += sp.wl[c] * dk;
            }
        }
        const double lam_o[3] = {qo.l1, qo.l2, qo.l3};
        const double wo = qo.w * test.area;
        for (int a = 0; a < 3; ++a)
            for (int c = 0; c < 3; ++c) {
                blk.s(a, c) += wo * lam_o[a] * gs[c];
                blk.d(a, c) += wo * lam_o[a] * gd[c];
            }
    }
    return blk;
}

inline bool share_node(const panel_geom& a, const panel_geom& c) {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (a.node[i] == c.node[j]) return true;
    return false;
}

} // namespace detail

// P1 mass matrix of the boundary triangulation.
inline Eigen::SparseMatrix<double> boundary_mass(const boundary_surface& b) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * b.tris.size());
    for (std::size_t f = 0; f < b.tris.size(); ++f) {
        const auto& t = b.tris[f];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trip.emplace_back(t[i], t[j], b.area[f] * (i == j ? 1.0 / 6.0 : 1.0 / 12.0));
    }
    Eigen::SparseMatrix<double> mass(static_cast<long>(b.nodes.size()),
                                     static_cast<long>(b.nodes.size()));
    mass.setFromTriplets(trip.begin(), trip.end());
    return mass;
}

inline surface_operators assemble_surface_operators(const tet_mesh& m, const boundary_surface& b,
                                                    double k0,
                                                    const surface_quadrature_options& opt = {}) {
    const auto panels = detail::build_panels(m, b);
    const auto colors = detail::color_panels(b);
    const long n = static_cast<long>(b.nodes.size());
    const int npanels = static_cast<int>(panels.size());

    surface_operators ops;
    ops.k0 = k0;
    ops.single_layer = Eigen::MatrixXcd::Zero(n, n);
    Eigen::MatrixXcd dtilde = Eigen::MatrixXcd::Zero(n, n);

    const auto& rule_near = tri_rule(opt.near_order);
    const auto& rule_mid = tri_rule(opt.mid_order);
    const auto& rule_far = tri_rule(opt.far_order);
    const auto& rule_rem = tri_rule(opt.rem_order);
    tri_rule(opt.near_base_order); // warm the rule caches outside the parallel region
    gl_rule(opt.graded_order);
    gl_rule(std::max(8, opt.graded_order - 8));

    for (const auto& group : colors) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
        for (std::size_t gi = 0; gi < group.size(); ++gi) {
            const int i = group[gi];
            const detail::panel_geom& test = panels[static_cast<std::size_t>(i)];
            for (int j = 0; j < npanels; ++j) {
                const detail::panel_geom& src = panels[static_cast<std::size_t>(j)];
                const double ratio = (test.centroid - src.centroid).norm() /
                                     std::max(test.diam, src.diam);
                detail::pair_block blk;
                if (detail::share_node(test, src)) {
                    blk = detail::graded_pair(test, src, k0, opt, rule_rem);
                } else if (ratio < opt.adaptive_ratio) {
                    blk = detail::near_pair_integrator(test, src, k0, opt).integrate();
                } else if (ratio < opt.near_ratio) {
                    blk = detail::smooth_pair(test, src, k0, rule_near, rule_near);
                } else if (ratio < opt.far_ratio) {
                    blk = detail::smooth_pair(test, src, k0, rule_mid, rule_mid);
                } else {
                    blk = detail::smooth_pair(test, src, k0, rule_far, rule_far);
                }
                for (int a = 0; a < 3; ++a)
                    for (int c = 0; c < 3; ++c) {
                        ops.single_layer(test.node[a], src.node[c]) += blk.s(a, c);
                        dtilde(test.node[a], src.node[c]) += blk.d(a, c);
                    }
            }
        }
    }

    // the Galerkin single layer is complex-symmetric identically; averaging
    // removes the (tiny) asymmetry left by evaluating (i, j) and (j, i) with
    // roles swapped. The double layer has no such symmetry.
    ops.single_layer = (0.5 * (ops.single_layer + ops.single_layer.transpose())).eval();

    ops.mass = boundary_mass(b);
    ops.double_layer = -dtilde;
    ops.double_layer += 0.5 * Eigen::MatrixXcd(ops.mass.cast<cplx>());
    return ops;
}

// Galerkin load vector: f[i] = integral over the surface of hat_i times func.
template <class F>
Eigen::VectorXcd project_boundary(const tet_mesh& m, const boundary_surface& b, F&& func) {
    Eigen::VectorXcd f = Eigen::VectorXcd::Zero(static_cast<long>(b.nodes.size()));
    const auto& rule = tri_rule(7);
    for (std::size_t t = 0; t < b.tris.size(); ++t) {
        const vec3& p0 = m.nodes[b.nodes[b.tris[t][0]]];
        const vec3& p1 = m.nodes[b.nodes[b.tris[t][1]]];
        const vec3& p2 = m.nodes[b.nodes[b.tris[t][2]]];
        for (const quad_tri& q : rule) {
            const vec3 x = q.l1 * p0 + q.l2 * p1 + q.l3 * p2;
            const cplx v = q.w * b.area[t] * func(x);
            f[b.tris[t][0]] += q.l1 * v;
            f[b.tris[t][1]] += q.l2 * v;
            f[b.tris[t][2]] += q.l3 * v;
        }
    }
    return f;
}

} // namespace decsie
