#pragma once

// Shared test helpers: a ball-scatterer mesh fixture and L2 projection of
// smooth functions onto the boundary hat space (projection keeps the trace
// error L2-orthogonal to the hats, which vertex sampling does not).

#include <decsie/meshgen.hpp>
#include <decsie/sie.hpp>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

namespace decsie::testing {

struct surface_fixture {
    tet_mesh mesh;
    boundary_surface bnd;
    explicit surface_fixture(int n, double r_gamma = 1.0)
        : mesh(build_mesh(gen_ball_scatterer(n, n - 1, 0.8 * r_gamma, r_gamma))),
          bnd(extract_boundary(mesh)) {}
};

// L2 projection onto the boundary hat space of a function of the surface
// point and the flat-panel normal
template <typename F>
Eigen::VectorXcd project_trace(const tet_mesh& m, const boundary_surface& b,
                               const Eigen::SparseMatrix<double>& mass, F&& func) {
    Eigen::VectorXcd f = Eigen::VectorXcd::Zero(static_cast<long>(b.nodes.size()));
    const auto& rule = tri_rule(7);
    for (std::size_t t = 0; t < b.tris.size(); ++t) {
        const vec3& p0 = m.nodes[b.nodes[b.tris[t][0]]];
        const vec3& p1 = m.nodes[b.nodes[b.tris[t][1]]];
        const vec3& p2 = m.nodes[b.nodes[b.tris[t][2]]];
        for (const quad_tri& q : rule) {
            const vec3 x = q.l1 * p0 + q.l2 * p1 + q.l3 * p2;
            const cplx v = q.w * b.area[t] * func(x, b.normal[t]);
            f[b.tris[t][0]] += q.l1 * v;
            f[b.tris[t][1]] += q.l2 * v;
            f[b.tris[t][2]] += q.l3 * v;
        }
    }
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(mass);
    Eigen::VectorXcd out(f.size());
    out.real() = ldlt.solve(Eigen::VectorXd(f.real()));
    out.imag() = ldlt.solve(Eigen::VectorXd(f.imag()));
    return out;
}

} // namespace decsie::testing
