#pragma once
// Electric-field reconstruction from nodal potentials and the discrete L2
// norms used to compare against reference fields.  E = i*A - grad(Phi_s)/k0^2
// is sampled per tet: the gradient of the linear interpolant of Phi_s is
// constant on each tet, and A is averaged over the four vertices (the value
// of the linear interpolant at the centroid).

#include <Eigen/Dense>

#include <stdexcept>

#include "mesh.hpp"

namespace decsie {

// one complex 3-vector per tet, row j belongs to tet j (centroid sample)
using cell_field = Eigen::MatrixXcd;

// constant per-tet gradient of the linear nodal interpolant
inline cell_field cell_gradient(const tet_mesh& m, const Eigen::VectorXcd& u) {
    if (u.size() != static_cast<long>(m.nodes.size()))
        throw std::runtime_error("cell_gradient: nodal vector size mismatch");
    cell_field g(static_cast<long>(m.tets.size()), 3);
    for (std::size_t t = 0; t < m.tets.size(); ++t) {
        const auto& tet = m.tets[t];
        const vec3 p0 = m.nodes[static_cast<std::size_t>(tet[0])];
        Eigen::Matrix3d jac;
        for (int v = 0; v < 3; ++v)
            jac.col(v) = m.nodes[static_cast<std::size_t>(tet[v + 1])] - p0;
        const Eigen::Matrix3d jinv = jac.inverse();
        // rows of jinv are the gradients of the barycentric coordinates 1..3
        Eigen::Vector3cd acc = Eigen::Vector3cd::Zero();
        const cplx u0 = u[tet[0]];
        for (int v = 0; v < 3; ++v)
            acc += (u[tet[v + 1]] - u0) * jinv.row(v).transpose().cast<cplx>();
        g.row(static_cast<long>(t)) = acc.transpose();
    }
    return g;
}

// linear-interpolant value at the centroid = plain vertex average
inline Eigen::VectorXcd cell_average(const tet_mesh& m, const Eigen::VectorXcd& u) {
    if (u.size() != static_cast<long>(m.nodes.size()))
        throw std::runtime_error("cell_average: nodal vector size mismatch");
    Eigen::VectorXcd a(static_cast<long>(m.tets.size()));
    for (std::size_t t = 0; t < m.tets.size(); ++t) {
        const auto& tet = m.tets[t];
        a[static_cast<long>(t)] = 0.25 * (u[tet[0]] + u[tet[1]] + u[tet[2]] + u[tet[3]]);
    }
    return a;
}

inline cell_field reconstruct_e(const tet_mesh& m, const Eigen::VectorXcd& a_x,
                                const Eigen::VectorXcd& a_y, const Eigen::VectorXcd& a_z,
                                const Eigen::VectorXcd& phi_s, double k0) {
    if (!(k0 > 0.0))
        throw std::runtime_error(
            "reconstruct_e: k0 must be positive (at zero frequency report potentials only)");
    const cell_field gphi = cell_gradient(m, phi_s);
    cell_field e(static_cast<long>(m.tets.size()), 3);
    const cplx iu(0.0, 1.0);
    const Eigen::VectorXcd ax = cell_average(m, a_x);
    const Eigen::VectorXcd ay = cell_average(m, a_y);
    const Eigen::VectorXcd az = cell_average(m, a_z);
    const double inv_k2 = 1.0 / (k0 * k0);
    for (long t = 0; t < e.rows(); ++t) {
        e(t, 0) = iu * ax[t] - inv_k2 * gphi(t, 0);
        e(t, 1) = iu * ay[t] - inv_k2 * gphi(t, 1);
        e(t, 2) = iu * az[t] - inv_k2 * gphi(t, 2);
    }
    return e;
}

// ||u|| = (sum_j |u(r_j)|^2 |sigma3_j|)^(1/2) for a per-tet scalar sample
inline double l2_norm(const tet_mesh& m, const Eigen::VectorXcd& u) {
    if (u.size() != static_cast<long>(m.tets.size()))
        throw std::runtime_error("l2_norm: per-tet vector size mismatch");
    double s = 0.0;
    for (std::size_t t = 0; t < m.tets.size(); ++t)
        s += std::norm(u[static_cast<long>(t)]) * m.volume[t];
    return std::sqrt(s);
}

// same norm with all three components summed
inline double l2_norm(const tet_mesh& m, const cell_field& f) {
    if (f.rows() != static_cast<long>(m.tets.size()) || f.cols() != 3)
        throw std::runtime_error("l2_norm: cell field size mismatch");
    double s = 0.0;
    for (std::size_t t = 0; t < m.tets.size(); ++t)
        s += f.row(static_cast<long>(t)).squaredNorm() * m.volume[t];
    return std::sqrt(s);
}

inline double relative_error(const tet_mesh& m, const cell_field& num, const cell_field& ref) {
    const double r = l2_norm(m, ref);
    if (r == 0.0) throw std::runtime_error("relative_error: zero reference norm");
    return l2_norm(m, cell_field(num - ref)) / r;
}

}  // namespace decsie
