#pragma once
// Physics-level validation: extinction-theorem residuals of the four scalar
// potentials, error reports against the analytic sphere series, and the
// permittivity / frequency sweep drivers.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "fields.hpp"
#include "incident.hpp"
#include "mie.hpp"
#include "potentials.hpp"
#include "solver.hpp"

namespace decsie {

// ---------------------------------------------------------------------------
// extinction residual: with the true surface data, the layer-potential
// representation must reproduce the incident potential at every interior
// point, e_u(r) = u_inc(r) - S[dn u](r) + D[u](r) -> 0.  The residual is
// evaluated at tet centroids; centroids almost touching the surface are
// excluded (they would probe the representation inside its quadrature
// resolution, not the physics).
// ---------------------------------------------------------------------------

struct extinction_options {
    potential_quadrature_options quadrature;  // near panels use the analytic tier
    double exclusion_ratio = 1e-3;            // drop centroids closer than this x panel diameter
};

struct extinction_report {
    Eigen::MatrixXcd residual;    // n3 x ncomp, zero rows at excluded centroids
    std::vector<double> delta;    // ||e_u|| / ||u_inc||, NaN when both vanish
    std::vector<bool> undefined;  // set when the reference norm is zero
    std::vector<long> excluded;   // centroid (tet) indices dropped by the proximity guard
};

inline extinction_report extinction_core(
    const tet_mesh& m, const layer_potential& pot,
    const std::vector<std::function<cplx(const vec3&)>>& incident, const Eigen::MatrixXcd& alpha,
    const Eigen::MatrixXcd& beta, double exclusion_ratio = 1e-3) {
    const long ncomp = static_cast<long>(incident.size());
    if (alpha.rows() != pot.nodes() || beta.rows() != pot.nodes() || alpha.cols() != ncomp ||
        beta.cols() != ncomp)
        throw std::runtime_error("extinction_core: trace matrix shape mismatch");

    const long n3 = static_cast<long>(m.tets.size());
    extinction_report rep;
    rep.residual = Eigen::MatrixXcd::Zero(n3, ncomp);
    std::vector<double> err2(static_cast<std::size_t>(ncomp), 0.0);
    std::vector<double> ref2(static_cast<std::size_t>(ncomp), 0.0);

#pragma omp parallel
    {
        Eigen::VectorXcd s_row(pot.nodes()), d_row(pot.nodes());
        std::vector<double> my_err2(static_cast<std::size_t>(ncomp), 0.0);
        std::vector<double> my_ref2(static_cast<std::size_t>(ncomp), 0.0);
        std::vector<long> my_excluded;
#pragma omp for schedule(dynamic, 16)
        for (long t = 0; t < n3; ++t) {
            const vec3 r = m.tet_centroid(static_cast<int>(t));
            const auto prox = pot.proximity(r);
            if (prox.distance < exclusion_ratio * prox.diam) {
                my_excluded.push_back(t);
                continue;
            }
            pot.rows(r, s_row, d_row);
            const double w = m.volume[static_cast<std::size_t>(t)];
            for (long c = 0; c < ncomp; ++c) {
                const cplx uinc = incident[static_cast<std::size_t>(c)](r);
                const cplx e = uinc - s_row.cwiseProduct(beta.col(c)).sum() +
                               d_row.cwiseProduct(alpha.col(c)).sum();
                rep.residual(t, c) = e;
                my_err2[static_cast<std::size_t>(c)] += std::norm(e) * w;
                my_ref2[static_cast<std::size_t>(c)] += std::norm(uinc) * w;
            }
        }
#pragma omp critical
        {
            for (long c = 0; c < ncomp; ++c) {
                err2[static_cast<std::size_t>(c)] += my_err2[static_cast<std::size_t>(c)];
                ref2[static_cast<std::size_t>(c)] += my_ref2[static_cast<std::size_t>(c)];
            }
            rep.excluded.insert(rep.excluded.end(), my_excluded.begin(), my_excluded.end());
        }
    }
    std::sort(rep.excluded.begin(), rep.excluded.end());

    rep.delta.resize(static_cast<std::size_t>(ncomp));
    rep.undefined.assign(static_cast<std::size_t>(ncomp), false);
    for (std::size_t c = 0; c < static_cast<std::size_t>(ncomp); ++c) {
        if (ref2[c] == 0.0) {
            rep.undefined[c] = true;
            rep.delta[c] = err2[c] == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                          : std::numeric_limits<double>::infinity();
        } else {
            rep.delta[c] = std::sqrt(err2[c] / ref2[c]);
        }
    }
    return rep;
}

// residual of a solved scattering problem: components ordered A_x, A_y, A_z,
// Phi_s, with traces read off the solution and the recovered normal
// derivatives used as the Neumann data
inline extinction_report extinction_residual(const tet_mesh& m, const boundary_surface& b,
                                             const plane_wave& wave, const solution_fields& sol,
                                             const extinction_options& opt = {}) {
    const long nb = static_cast<long>(b.nodes.size());
    Eigen::MatrixXcd alpha(nb, 4), beta(nb, 4);
    const Eigen::VectorXcd* vols[4] = {&sol.a_x, &sol.a_y, &sol.a_z, &sol.phi_s};
    const Eigen::VectorXcd* ders[4] = {&sol.dn_a_x, &sol.dn_a_y, &sol.dn_a_z, &sol.dn_phi_s};
    for (int c = 0; c < 4; ++c) {
        if (ders[c]->size() != nb)
            throw std::runtime_error("extinction_residual: solution lacks recovered derivatives");
        for (long i = 0; i < nb; ++i)
            alpha(i, c) = (*vols[c])[b.nodes[static_cast<std::size_t>(i)]];
        beta.col(c) = *ders[c];
    }
    std::vector<std::function<cplx(const vec3&)>> inc;
    for (int c = 0; c < 3; ++c)
        inc.emplace_back([wave, c](const vec3& r) { return pw_a(wave, r)[c]; });
    inc.emplace_back([wave](const vec3& r) { return pw_phi_s(wave, r); });

    const layer_potential pot(m, b, wave.k0, opt.quadrature);
    return extinction_core(m, pot, inc, alpha, beta, opt.exclusion_ratio);
}

// ---------------------------------------------------------------------------
// error report against the analytic series reference for sphere benchmarks
// ---------------------------------------------------------------------------

struct field_error_report {
    std::array<double, 3> component_error{};  // L2 norm of each error component
    std::array<double, 3> component_norm{};   // L2 norm of each reference component
    double error = 0.0;                       // total L2 error
    double norm = 0.0;                        // total reference norm
    double relative = 0.0;
};

inline field_error_report field_errors(const tet_mesh& m, const cell_field& num,
                                       const cell_field& ref) {
    if (num.rows() != ref.rows() || num.cols() != 3 || ref.cols() != 3)
        throw std::runtime_error("field_errors: cell field shape mismatch");
    field_error_report rep;
    for (int c = 0; c < 3; ++c) {
        rep.component_error[static_cast<std::size_t>(c)] =
            l2_norm(m, Eigen::VectorXcd(num.col(c) - ref.col(c)));
        rep.component_norm[static_cast<std::size_t>(c)] = l2_norm(m, Eigen::VectorXcd(ref.col(c)));
    }
    rep.error = l2_norm(m, cell_field(num - ref));
    rep.norm = l2_norm(m, ref);
    if (rep.norm == 0.0) throw std::runtime_error("field_errors: zero reference norm");
    rep.relative = rep.error / rep.norm;
    return rep;
}

inline cell_field mie_reference(const tet_mesh& m, const layered_sphere& geom,
                                const plane_wave& wave) {
    const mie_series series(geom, wave);
    cell_field ref(static_cast<long>(m.tets.size()), 3);
#pragma omp parallel for schedule(static)
    for (long t = 0; t < ref.rows(); ++t)
        ref.row(t) = series.e_field(m.tet_centroid(static_cast<int>(t))).transpose();
    return ref;
}

inline field_error_report mie_errors(const tet_mesh& m, const layered_sphere& geom,
                                     const plane_wave& wave, const cell_field& e_num) {
    return field_errors(m, e_num, mie_reference(m, geom, wave));
}

inline cell_field reconstruct_e(const tet_mesh& m, const solution_fields& sol, double k0) {
    return reconstruct_e(m, sol.a_x, sol.a_y, sol.a_z, sol.phi_s, k0);
}

// ---------------------------------------------------------------------------
// sweep drivers.  Each record is one solve; failures are recorded, not thrown,
// so a sweep survives individual non-converged points.
// ---------------------------------------------------------------------------

struct sweep_record {
    double eps_s = 0.0;
    double k0 = 0.0;
    double k0a = 0.0;
    long n_tets = 0;
    double rel_error = 0.0;
    long iterations = 0;
    bool converged = false;
    double condition = 0.0;
};

// homogeneous ball scatterer (region 1) of the given radius inside a vacuum
// shell (region 2): one record per (mesh, eps) pair.  The direct fallback is
// disabled so a non-converged iteration shows up in the record instead of
// being silently replaced.
inline std::vector<sweep_record> sweep_permittivity(
    const std::vector<std::pair<const tet_mesh*, const boundary_surface*>>& ladder, double radius,
    const std::vector<double>& eps_values, double k0, solver_settings settings = {}) {
    settings.force_direct = false;
    settings.direct_threshold = 0;
    std::vector<sweep_record> out;
    plane_wave wave;
    wave.k0 = k0;
    for (const auto& [mp, bp] : ladder) {
        const tet_mesh& m = *mp;
        const boundary_surface& b = *bp;
        hybrid_system sys(m, b, eps_from_regions(m, {eps_values.at(0), 1.0}), wave);
        for (const double es : eps_values) {
            sys.set_material(m, b, eps_from_regions(m, {es, 1.0}));
            const solution_fields sol = sys.solve(settings);
            sweep_record rec;
            rec.eps_s = es;
            rec.k0 = k0;
            rec.k0a = k0 * radius;
            rec.n_tets = m.n3();
            rec.iterations = sol.iterations;
            rec.converged = sol.converged;
            rec.condition = sol.condition_estimate;
            const layered_sphere geom{{radius}, {cplx(es, 0.0)}};
            rec.rel_error =
                mie_errors(m, geom, wave, reconstruct_e(m, sol, k0)).relative;
            out.push_back(rec);
        }
    }
    return out;
}

// fixed homogeneous-ball mesh, swept over normalized frequency k0a; every
// record carries a condition estimate (free on the direct path, power/inverse
// iteration otherwise)
inline std::vector<sweep_record> sweep_frequency(const tet_mesh& m, const boundary_surface& b,
                                                 double radius, double eps_s,
                                                 const std::vector<double>& k0a_values,
                                                 solver_settings settings = {}) {
    if (!settings.force_direct) settings.estimate_condition = true;
    std::vector<sweep_record> out;
    const Eigen::VectorXd eps = eps_from_regions(m, {eps_s, 1.0});
    for (const double k0a : k0a_values) {
        plane_wave wave;
        wave.k0 = k0a / radius;
        hybrid_system sys(m, b, eps, wave);
        const solution_fields sol = sys.solve(settings);
        sweep_record rec;
        rec.eps_s = eps_s;
        rec.k0 = wave.k0;
        rec.k0a = k0a;
        rec.n_tets = m.n3();
        rec.iterations = sol.iterations;
        rec.converged = sol.converged;
        rec.condition = sol.condition_estimate;
        const layered_sphere geom{{radius}, {cplx(eps_s, 0.0)}};
        rec.rel_error = mie_errors(m, geom, wave, reconstruct_e(m, sol, wave.k0)).relative;
        out.push_back(rec);
    }
    return out;
}

}  // namespace decsie
