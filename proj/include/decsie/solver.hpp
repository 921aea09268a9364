#pragma once
// Coupled volume-surface system for time-harmonic scattering in the
// Lorenz-gauged A-Phi potentials.  The interior Helmholtz equations for the
// three Cartesian components of the scaled vector potential and the scaled
// scalar potential are discretized with nodal 0-cochains; the surface
// single/double-layer equation on the truncation sphere eliminates the
// outgoing normal derivatives, leaving a 4*N0 x 4*N0 system in
// [a_x; a_y; a_z; phi_s] (each block in mesh node order).
//
// Per-component operators:
//   V = -D0^T H1(1)   D0 + k0^2 H0(eps)   - D2c S^-1 D P0   (vector blocks)
//   L = -D0^T H1(eps) D0 + k0^2 H0(eps^2) - D2c S^-1 D P0   (scalar block)
// and a material-gradient coupling between them: each vector row couples to
// phi_s through -i*H0(d_tau eps), the scalar row couples back through
// -i*k0^2*H0(d_tau eps).  The right-hand side drives each row with its own
// incident trace load, -D2c S^-1 f, where f is the Galerkin load of the
// incident potential component on the boundary (the third row takes the
// z-component load, completing the per-Cartesian-component pattern of the
// first two rows).

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dec.hpp"
#include "incident.hpp"
#include "sie.hpp"

namespace decsie {

using sparse_cmat = Eigen::SparseMatrix<cplx>;

struct solver_settings {
    double tolerance = 1e-13;   // relative residual target
    long max_iterations = 0;    // 0 -> 10 * system size
    int restart = 250;          // Krylov restart length
    long direct_threshold = 20000;  // dense-direct fallback allowed up to this size
    bool jacobi = false;            // optional diagonal right preconditioner
    bool force_direct = false;      // skip the Krylov loop, factorize densely
    bool estimate_condition = false;  // power/inverse-power estimate on the iterative path
};

struct solution_fields {
    Eigen::VectorXcd a_x, a_y, a_z, phi_s;  // nodal potentials, length N0
    // boundary normal derivatives, length N0^d (local boundary-node order)
    Eigen::VectorXcd dn_a_x, dn_a_y, dn_a_z, dn_phi_s;
    long iterations = 0;
    bool converged = false;
    bool used_direct = false;
    double residual = 0.0;            // true relative residual of the returned iterate
    double condition_estimate = 0.0;  // 0 when not requested
};

struct krylov_stats {
    long iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

// Restarted GMRES with modified Gram-Schmidt and Givens updates.  Optional
// right diagonal preconditioning (pass the inverse diagonal) keeps the
// reported residual the true one.  Returns the best iterate seen.
template <class MatVec>
Eigen::VectorXcd gmres_solve(const MatVec& apply_op, const Eigen::VectorXcd& b, double tol,
                             long max_iter, int restart, krylov_stats& st,
                             const Eigen::VectorXcd* inv_diag = nullptr) {
    const long n = b.size();
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n);
    const double bnorm = b.norm();
    st = krylov_stats{};
    if (bnorm == 0.0) {
        st.converged = true;
        return x;
    }
    const int m = std::max(1, restart);
    std::vector<Eigen::VectorXcd> v(static_cast<std::size_t>(m) + 1);
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m + 1, m);
    Eigen::VectorXcd g(m + 1), cs(m), sn(m);
    const auto precond = [&](const Eigen::VectorXcd& y) {
        return inv_diag ? Eigen::VectorXcd(inv_diag->cwiseProduct(y)) : y;
    };

    Eigen::VectorXcd best_x = x;
    double best_res = std::numeric_limits<double>::infinity();
    while (st.iterations < max_iter) {
        Eigen::VectorXcd r = b - apply_op(x);
        double beta = r.norm();
        if (beta / bnorm <= tol) break;
        v[0] = r / beta;
        g.setZero();
        g[0] = beta;
        int j = 0;
        for (; j < m && st.iterations < max_iter; ++j) {
            Eigen::VectorXcd w = apply_op(precond(v[static_cast<std::size_t>(j)]));
            for (int i = 0; i <= j; ++i) {
                h(i, j) = v[static_cast<std::size_t>(i)].dot(w);
                w -= h(i, j) * v[static_cast<std::size_t>(i)];
            }
            h(j + 1, j) = w.norm();
            if (std::abs(h(j + 1, j)) > 0.0) v[static_cast<std::size_t>(j) + 1] = w / h(j + 1, j);
            // apply accumulated rotations, then zero the new subdiagonal
            for (int i = 0; i < j; ++i) {
                const cplx t = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
                h(i + 1, j) = -std::conj(sn[i]) * h(i, j) + std::conj(cs[i]) * h(i + 1, j);
                h(i, j) = t;
            }
            const double denom = std::hypot(std::abs(h(j, j)), std::abs(h(j + 1, j)));
            if (denom == 0.0) {
                cs[j] = 1.0;
                sn[j] = 0.0;
            } else {
                cs[j] = std::conj(h(j, j)) / denom;
                sn[j] = std::conj(h(j + 1, j)) / denom;
            }
            h(j, j) = cs[j] * h(j, j) + sn[j] * h(j + 1, j);
            h(j + 1, j) = 0.0;
            const cplx gt = cs[j] * g[j];
            g[j + 1] = -std::conj(sn[j]) * g[j];
            g[j] = gt;
            ++st.iterations;
            if (std::abs(g[j + 1]) / bnorm <= tol) {
                ++j;
                break;
            }
        }
        if (j > 0) {
            const Eigen::VectorXcd y =
                h.topLeftCorner(j, j).template triangularView<Eigen::Upper>().solve(g.head(j));
            Eigen::VectorXcd dx = Eigen::VectorXcd::Zero(n);
            for (int i = 0; i < j; ++i) dx += y[i] * v[static_cast<std::size_t>(i)];
            x += precond(dx);
        }
        const double res = (b - apply_op(x)).norm() / bnorm;
        if (res < best_res) {
            best_res = res;
            best_x = x;
        }
        if (res <= tol || j == 0) break;
    }
    const double final_res = (b - apply_op(x)).norm() / bnorm;
    if (final_res < best_res) {
        best_res = final_res;
        best_x = x;
    }
    st.residual = best_res;
    st.converged = best_res <= tol;
    return best_x;
}

// Permittivity per tet from 1-based region tags.
inline Eigen::VectorXd eps_from_regions(const tet_mesh& m, const std::vector<double>& by_region) {
    Eigen::VectorXd eps(static_cast<long>(m.tets.size()));
    for (std::size_t t = 0; t < m.tets.size(); ++t) {
        const int r = m.region[t];
        if (r < 1 || static_cast<std::size_t>(r) > by_region.size())
            throw std::runtime_error("eps_from_regions: region tag out of range");
        eps[static_cast<long>(t)] = by_region[static_cast<std::size_t>(r) - 1];
    }
    return eps;
}

class hybrid_system {
public:
    hybrid_system(const tet_mesh& m, const boundary_surface& b, const Eigen::VectorXd& eps,
                  const plane_wave& wave, const surface_quadrature_options& sopt = {})
        : n0_(static_cast<long>(m.nodes.size())),
          nb_(static_cast<long>(b.nodes.size())),
          k0_(wave.k0) {
        set_material(m, b, eps);

        ops_ = assemble_surface_operators(m, b, k0_, sopt);
        slu_.compute(ops_.single_layer);
        const double rc = slu_.rcond();
        if (!(rc > 0.0) || rc < 1e-14)
            throw std::runtime_error(
                "hybrid_system: surface single-layer operator is numerically singular "
                "(1-norm condition estimate ~ " +
                std::to_string(rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity()) +
                ")");
        k_ = slu_.solve(ops_.double_layer);

        p0_ = selection_p0(m, b).cast<cplx>();
        const sparse_mat d2c = complement_d2c(m, b);
        d2cc_ = d2c.cast<cplx>();
        p0t_ = sparse_cmat(p0_.transpose());
        cb_ = d2cc_ * k_;  // materialized D2c S^-1 D, N0 x N0^d

        f_[0] = project_boundary(m, b, [&](const vec3& x) { return pw_a(wave, x)[0]; });
        f_[1] = project_boundary(m, b, [&](const vec3& x) { return pw_a(wave, x)[1]; });
        f_[2] = project_boundary(m, b, [&](const vec3& x) { return pw_a(wave, x)[2]; });
        f_[3] = project_boundary(m, b, [&](const vec3& x) { return pw_phi_s(wave, x); });
        rhs_.resize(4 * n0_);
        for (int c = 0; c < 4; ++c) {
            sf_[c] = slu_.solve(f_[c]);
            rhs_.segment(c * n0_, n0_) = -(d2cc_ * sf_[c]);
        }
    }

    // swap the permittivity while keeping the wavenumber-bound surface
    // operators and their factorization; pass the mesh the system was built on
    void set_material(const tet_mesh& m, const boundary_surface& b, const Eigen::VectorXd& eps) {
        if (static_cast<long>(m.nodes.size()) != n0_ || static_cast<long>(b.nodes.size()) != nb_)
            throw std::runtime_error("set_material: mesh does not match this system");
        if (eps.size() != static_cast<long>(m.tets.size()))
            throw std::runtime_error("hybrid_system: eps must have one value per tet");
        // the boundary layer-potential closure assumes vacuum at the
        // truncation surface: every tet touching a boundary face must carry
        // eps = 1
        for (std::size_t f = 0; f < b.tris.size(); ++f) {
            const auto& owners = m.tri_tets[b.tri_global[f]];
            const std::size_t t = owners[0] >= 0 ? static_cast<std::size_t>(owners[0])
                                                 : static_cast<std::size_t>(owners[1]);
            if (std::abs(eps[static_cast<long>(t)] - 1.0) > 1e-12)
                throw std::runtime_error(
                    "hybrid_system: truncation boundary must sit in free space (eps = 1)");
        }

        const sparse_mat d0m = d0(m);
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(eps.size());
        const Eigen::VectorXd eps2 = eps.cwiseProduct(eps);
        sparse_mat av = -(sparse_mat(d0m.transpose()) * sparse_mat(hodge1(m, ones) * d0m));
        sparse_mat al = -(sparse_mat(d0m.transpose()) * sparse_mat(hodge1(m, eps) * d0m));
        {
            const Eigen::VectorXd h0e = k0_ * k0_ * hodge0_diag(m, eps);
            const Eigen::VectorXd h0e2 = k0_ * k0_ * hodge0_diag(m, eps2);
            std::vector<Eigen::Triplet<double>> td;
            td.reserve(static_cast<std::size_t>(n0_));
            for (long i = 0; i < n0_; ++i) td.emplace_back(i, i, h0e[i]);
            sparse_mat dg(n0_, n0_);
            dg.setFromTriplets(td.begin(), td.end());
            av += dg;
            td.clear();
            for (long i = 0; i < n0_; ++i) td.emplace_back(i, i, h0e2[i]);
            dg.setZero();
            dg.setFromTriplets(td.begin(), td.end());
            al += dg;
        }
        av_ = av.cast<cplx>();
        al_ = al.cast<cplx>();

        const auto grad = hodge0_material_gradient(m, eps);
        has_grad_ = false;
        for (int t = 0; t < 3; ++t) {
            grad_[t] = grad[static_cast<std::size_t>(t)].cast<cplx>();
            if (grad_[t].nonZeros() > 0) has_grad_ = true;
        }
    }

    long size() const { return 4 * n0_; }
    long n_nodes() const { return n0_; }
    long n_boundary_nodes() const { return nb_; }
    double k0() const { return k0_; }
    const Eigen::VectorXcd& rhs() const { return rhs_; }
    const surface_operators& surface_ops() const { return ops_; }
    const Eigen::VectorXcd& trace_load(int c) const { return f_[c]; }

    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const {
        Eigen::VectorXcd y(4 * n0_);
        for (int c = 0; c < 4; ++c) {
            const auto xc = x.segment(c * n0_, n0_);
            const Eigen::VectorXcd tb = p0_ * xc;
            y.segment(c * n0_, n0_) = (c < 3 ? av_ : al_) * xc - cb_ * tb;
        }
        if (has_grad_) {
            const cplx mi(0.0, -1.0);
            const auto phi = x.segment(3 * n0_, n0_);
            for (int t = 0; t < 3; ++t) {
                y.segment(t * n0_, n0_) += mi * (grad_[t] * phi);
                y.segment(3 * n0_, n0_) += (mi * k0_ * k0_) * (grad_[t] * x.segment(t * n0_, n0_));
            }
        }
        return y;
    }

    Eigen::VectorXcd apply_adjoint(const Eigen::VectorXcd& x) const {
        Eigen::VectorXcd y(4 * n0_);
        for (int c = 0; c < 4; ++c) {
            const auto xc = x.segment(c * n0_, n0_);
            // interior blocks are real symmetric; only the coupling needs its adjoint
            const Eigen::VectorXcd tb = cb_.adjoint() * xc;
            y.segment(c * n0_, n0_) = (c < 3 ? av_ : al_) * xc - p0t_ * tb;
        }
        if (has_grad_) {
            const cplx pi_(0.0, 1.0);
            const auto phi = x.segment(3 * n0_, n0_);
            for (int t = 0; t < 3; ++t) {
                y.segment(t * n0_, n0_) += (pi_ * k0_ * k0_) * (grad_[t] * phi);
                y.segment(3 * n0_, n0_) += pi_ * (grad_[t] * x.segment(t * n0_, n0_));
            }
        }
        return y;
    }

    // Full dense system (direct path and operator dumps); memory grows as
    // 16*(4*N0)^2 bytes, so keep to meshes within the direct threshold.
    Eigen::MatrixXcd dense_matrix() const {
        Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(4 * n0_, 4 * n0_);
        const auto scatter = [&](const sparse_cmat& a, long r0, long c0, cplx w) {
            for (int k = 0; k < a.outerSize(); ++k)
                for (sparse_cmat::InnerIterator it(a, k); it; ++it)
                    z(r0 + it.row(), c0 + it.col()) += w * it.value();
        };
        for (int c = 0; c < 4; ++c) scatter(c < 3 ? av_ : al_, c * n0_, c * n0_, 1.0);
        if (has_grad_) {
            for (int t = 0; t < 3; ++t) {
                scatter(grad_[t], t * n0_, 3 * n0_, cplx(0.0, -1.0));
                scatter(grad_[t], 3 * n0_, t * n0_, cplx(0.0, -k0_ * k0_));
            }
        }
        // coupling columns land on boundary nodes only
        for (int k = 0; k < p0_.outerSize(); ++k)
            for (sparse_cmat::InnerIterator it(p0_, k); it; ++it)
                for (int c = 0; c < 4; ++c)
                    z.block(c * n0_, c * n0_, n0_, n0_).col(it.col()) -= cb_.col(it.row());
        return z;
    }

    solution_fields solve(const solver_settings& st = {}) const {
        const long n = size();
        const long maxit = st.max_iterations > 0 ? st.max_iterations : 10 * n;
        solution_fields out;
        Eigen::VectorXcd x;
        if (st.force_direct && n > st.direct_threshold)
            throw std::runtime_error("hybrid_system: direct solve requested above direct_threshold");
        bool direct = st.force_direct;
        if (!direct) {
            Eigen::VectorXcd idiag;
            const Eigen::VectorXcd* pd = nullptr;
            if (st.jacobi) {
                idiag = inverse_diagonal();
                pd = &idiag;
            }
            krylov_stats ks;
            x = gmres_solve([&](const Eigen::VectorXcd& v) { return apply(v); }, rhs_,
                            st.tolerance, maxit, st.restart, ks, pd);
            out.iterations = ks.iterations;
            out.converged = ks.converged;
            out.residual = ks.residual;
            if (!ks.converged && n <= st.direct_threshold) direct = true;
        }
        if (direct) {
            Eigen::PartialPivLU<Eigen::MatrixXcd> lu(dense_matrix());
            x = lu.solve(rhs_);
            const double bn = rhs_.norm();
            out.residual = bn > 0.0 ? (rhs_ - apply(x)).norm() / bn : 0.0;
            out.converged = true;
            out.used_direct = true;
            const double rc = lu.rcond();
            out.condition_estimate = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
        } else if (st.estimate_condition) {
            out.condition_estimate = estimate_condition(st);
        }
        out.a_x = x.segment(0, n0_);
        out.a_y = x.segment(n0_, n0_);
        out.a_z = x.segment(2 * n0_, n0_);
        out.phi_s = x.segment(3 * n0_, n0_);
        recover_normal_derivatives(out);
        return out;
    }

    // dn = S^-1 (f - D P0 u), reusing the stored factorization through
    // sf = S^-1 f and k = S^-1 D.
    void recover_normal_derivatives(solution_fields& s) const {
        const auto recover = [&](const Eigen::VectorXcd& sf, const Eigen::VectorXcd& u) {
            const Eigen::VectorXcd tr = p0_ * u;
            return Eigen::VectorXcd(sf - k_ * tr);
        };
        s.dn_a_x = recover(sf_[0], s.a_x);
        s.dn_a_y = recover(sf_[1], s.a_y);
        s.dn_a_z = recover(sf_[2], s.a_z);
        s.dn_phi_s = recover(sf_[3], s.phi_s);
    }

    // Residual of the surface equation D*alpha + S*beta - f per component,
    // relative to ||f||; returns the worst component.
    double surface_residual(const solution_fields& s) const {
        const Eigen::VectorXcd* a[4] = {&s.a_x, &s.a_y, &s.a_z, &s.phi_s};
        const Eigen::VectorXcd* dn[4] = {&s.dn_a_x, &s.dn_a_y, &s.dn_a_z, &s.dn_phi_s};
        double worst = 0.0;
        for (int c = 0; c < 4; ++c) {
            const Eigen::VectorXcd tr = p0_ * (*a[c]);
            const Eigen::VectorXcd r =
                ops_.double_layer * tr + ops_.single_layer * (*dn[c]) - f_[c];
            const double fn = f_[c].norm();
            worst = std::max(worst, fn > 0.0 ? r.norm() / fn : r.norm());
        }
        return worst;
    }

    // sigma_max via power iteration on A^H A, sigma_min via inverse power
    // iteration (each step two Krylov solves at relaxed tolerance); an
    // order-of-magnitude estimate for diagnostics and sweeps.
    double estimate_condition(const solver_settings& st) const {
        const long n = size();
        std::mt19937_64 rng(0x5eed);
        std::normal_distribution<double> nd;
        Eigen::VectorXcd v(n);
        for (long i = 0; i < n; ++i) v[i] = cplx(nd(rng), nd(rng));
        v.normalize();
        double smax = 0.0;
        for (int it = 0; it < 24; ++it) {
            const Eigen::VectorXcd w = apply(v);
            smax = w.norm();
            v = apply_adjoint(w);
            const double nv = v.norm();
            if (nv == 0.0) return std::numeric_limits<double>::infinity();
            v /= nv;
        }
        solver_settings aux = st;
        aux.tolerance = 1e-8;
        aux.estimate_condition = false;
        for (long i = 0; i < n; ++i) v[i] = cplx(nd(rng), nd(rng));
        v.normalize();
        double smin = 0.0;
        const long maxit = st.max_iterations > 0 ? st.max_iterations : 10 * n;
        for (int it = 0; it < 3; ++it) {
            krylov_stats ks;
            const Eigen::VectorXcd z = gmres_solve(
                [&](const Eigen::VectorXcd& u) { return apply_adjoint(u); }, v, aux.tolerance,
                maxit, aux.restart, ks);
            const Eigen::VectorXcd y =
                gmres_solve([&](const Eigen::VectorXcd& u) { return apply(u); }, z, aux.tolerance,
                            maxit, aux.restart, ks);
            const double ny = y.norm();
            if (ny == 0.0) return std::numeric_limits<double>::infinity();
            smin = 1.0 / std::sqrt(ny);
            v = y / ny;
        }
        return smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    }

private:
    // diagonal of the full system for the optional Jacobi preconditioner
    Eigen::VectorXcd inverse_diagonal() const {
        Eigen::VectorXcd d = Eigen::VectorXcd::Zero(4 * n0_);
        const auto diag_of = [&](const sparse_cmat& a, long off) {
            for (int k = 0; k < a.outerSize(); ++k)
                for (sparse_cmat::InnerIterator it(a, k); it; ++it)
                    if (it.row() == it.col()) d[off + it.row()] += it.value();
        };
        for (int c = 0; c < 4; ++c) diag_of(c < 3 ? av_ : al_, c * n0_);
        for (int k = 0; k < p0_.outerSize(); ++k)
            for (sparse_cmat::InnerIterator it(p0_, k); it; ++it) {
                const cplx cd = cb_(it.col(), it.row());
                for (int c = 0; c < 4; ++c) d[c * n0_ + it.col()] -= cd;
            }
        for (long i = 0; i < d.size(); ++i)
            d[i] = std::abs(d[i]) > 0.0 ? 1.0 / d[i] : cplx(1.0, 0.0);
        return d;
    }

    long n0_, nb_;
    double k0_;
    sparse_cmat av_, al_;      // interior Helmholtz blocks (diagonal of the 4x4 layout)
    sparse_cmat grad_[3];      // H0(d_tau eps), real symmetric, cast complex
    bool has_grad_ = false;
    surface_operators ops_;
    Eigen::PartialPivLU<Eigen::MatrixXcd> slu_;  // factorization of the single layer
    Eigen::MatrixXcd k_;                         // S^-1 D
    Eigen::MatrixXcd cb_;                        // D2c S^-1 D
    sparse_cmat p0_, p0t_, d2cc_;
    Eigen::VectorXcd f_[4], sf_[4];  // trace loads and S^-1 f per component
    Eigen::VectorXcd rhs_;
};

}  // namespace decsie
