#include <catch2/catch_amalgamated.hpp>

#include <decsie/mie.hpp>

#include <cmath>

using namespace decsie;

namespace {

// Riccati-Bessel values from the standard library, for cross-checks
struct riccati_ref {
    double psi, dpsi;
    cplx xi, dxi;
};

riccati_ref riccati_std(int n, double x) {
    const double jn = std::sph_bessel(static_cast<unsigned>(n), x);
    const double jm = std::sph_bessel(static_cast<unsigned>(n - 1), x);
    const double yn = std::sph_neumann(static_cast<unsigned>(n), x);
    const double ym = std::sph_neumann(static_cast<unsigned>(n - 1), x);
    riccati_ref r;
    r.psi = x * jn;
    r.dpsi = x * jm - n * jn;
    const double chi = -x * yn, chim = -x * ym;
    r.xi = cplx(r.psi, -chi);
    r.dxi = cplx(r.dpsi, -(chim - n / x * chi));
    return r;
}

double rel_vec_err(const cvec3& got, const cvec3& want) {
    return (got - want).norm() / want.norm();
}

} // namespace

TEST_CASE("spherical Bessel recurrences match the standard library") {
    std::vector<cplx> j, y;
    for (const double x : {1e-4, 0.3, 1.0, 3.0, 7.5}) {
        detail::sph_j_array(20, cplx(x, 0.0), j);
        detail::sph_y_array(20, cplx(x, 0.0), y);
        for (int n = 0; n <= 20; ++n) {
            const double jr = std::sph_bessel(static_cast<unsigned>(n), x);
            const double yr = std::sph_neumann(static_cast<unsigned>(n), x);
            if (std::abs(jr) > 1e-250)
                REQUIRE(std::abs(j[static_cast<std::size_t>(n)] - jr) < 1e-12 * std::abs(jr));
            REQUIRE(std::abs(y[static_cast<std::size_t>(n)] - yr) < 1e-12 * std::abs(yr));
        }
    }
}

TEST_CASE("Riccati-Bessel Wronskian") {
    // psi_n chi'_n - chi_n psi'_n = -1 for every n and argument
    for (const cplx z : {cplx(0.7, 0.0), cplx(3.3, 0.0), cplx(1.3, 0.4), cplx(0.02, 0.001)}) {
        const auto t = detail::riccati(12, z, true);
        for (int n = 0; n <= 12; ++n) {
            const auto nz = static_cast<std::size_t>(n);
            const cplx w = t.psi[nz] * t.dchi[nz] - t.chi[nz] * t.dpsi[nz];
            REQUIRE(std::abs(w + 1.0) < 1e-12);
        }
    }
}

TEST_CASE("homogeneous sphere matches the closed-form coefficients") {
    const double x = 0.8, eps = 2.25, m = std::sqrt(eps);
    layered_sphere geom{{1.0}, {cplx(eps, 0.0)}};
    plane_wave pw;
    pw.k0 = x;
    mie_series mie(geom, pw);

    for (int n = 1; n <= 5; ++n) {
        const riccati_ref fx = riccati_std(n, x);
        const riccati_ref fm = riccati_std(n, m * x);
        const cplx a = (m * fm.psi * fx.dpsi - fx.psi * fm.dpsi) /
                       (m * fm.psi * fx.dxi - fx.xi * fm.dpsi);
        const cplx b = (fm.psi * fx.dpsi - m * fx.psi * fm.dpsi) /
                       (fm.psi * fx.dxi - m * fx.xi * fm.dpsi);
        REQUIRE(std::abs(mie.scattering_tm(n) + a) < 1e-12 * std::abs(a));
        REQUIRE(std::abs(mie.scattering_te(n) + b) < 1e-12 * std::abs(b));
    }
}

TEST_CASE("vacuum sphere reproduces the incident wave") {
    layered_sphere geom{{1.0}, {cplx(1.0, 0.0)}};
    plane_wave pw;
    pw.k0 = 1.1;
    mie_series mie(geom, pw);

    const std::vector<vec3> pts = {vec3(0, 0, 0),           vec3(0.2, -0.1, 0.4),
                                   vec3(0, 0, 0.999),       vec3(0.7, 0.0, 0.0),
                                   vec3(-0.3, 0.6, -0.55),  vec3(1.4, -0.2, 0.3),
                                   vec3(0.0, 2.5, 0.0)};
    for (const vec3& r : pts) {
        REQUIRE(rel_vec_err(mie.e_field(r), pw_e_field(pw, r)) < 1e-12);
        REQUIRE(mie.e_scattered(r).norm() < 1e-12);
    }
}

TEST_CASE("degenerate layers match the homogeneous sphere") {
    const cplx eps(2.25, 0.0);
    plane_wave pw;
    pw.k0 = 0.9;
    mie_series one(layered_sphere{{1.0}, {eps}}, pw);
    mie_series two(layered_sphere{{0.6, 1.0}, {eps, eps}}, pw);

    const std::vector<vec3> pts = {vec3(0, 0, 0),          vec3(0.3, 0.2, -0.4),
                                   vec3(0.0, 0.61, 0.0),   vec3(0.59, 0.0, 0.0),
                                   vec3(-0.5, 0.5, 0.5),   vec3(1.3, -0.8, 0.2)};
    for (const vec3& r : pts)
        REQUIRE(rel_vec_err(two.e_field(r), one.e_field(r)) < 1e-12);
}

TEST_CASE("quasi-static interior field") {
    // in the small-sphere limit the interior field is uniform with the
    // electrostatic depolarization value 3/(eps + 2) along the polarization
    const double eps = 2.25;
    layered_sphere geom{{1.0}, {cplx(eps, 0.0)}};
    plane_wave pw;
    pw.k0 = 1e-3;
    mie_series mie(geom, pw);

    const cvec3 want = (3.0 / (eps + 2.0)) * cvec3(1.0, 0.0, 0.0);
    for (const vec3& r : {vec3(0, 0, 0), vec3(0.4, 0.0, 0.0), vec3(0.0, 0.3, -0.5)})
        REQUIRE((mie.e_field(r) - want).norm() < 1e-3 * want.norm());
}

TEST_CASE("field continuity across interfaces") {
    // benchmark two-layer geometry: tangential E and normal eps*E match
    // across both interfaces
    layered_sphere geom{{0.1, 0.14}, {cplx(2.5, 0.0), cplx(2.25, 0.0)}};
    plane_wave pw;
    pw.k0 = 2.0 * std::numbers::pi / 5.0;
    pw.e_p = vec3(1.0, 0.0, 0.0);
    pw.u = vec3(0.0, 0.0, -1.0);
    mie_series mie(geom, pw);

    const std::vector<cplx> eps_of_region = {geom.eps[0], geom.eps[1], cplx(1.0, 0.0)};
    for (int iface = 0; iface < 2; ++iface) {
        const double R = geom.radius[static_cast<std::size_t>(iface)];
        for (int kth = 1; kth <= 3; ++kth)
            for (int kph = 0; kph < 4; ++kph) {
                const double th = 0.7 * kth, ph = 0.3 + 1.5 * kph;
                const vec3 rhat(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                                std::cos(th));
                const cvec3 ein = mie.e_field((R * (1.0 - 1e-9)) * rhat);
                const cvec3 eout = mie.e_field((R * (1.0 + 1e-9)) * rhat);
                // rhat.dot(e) is linear in e (conjugation lands on the real
                // argument), giving the plain projection e . rhat
                const cplx rn_in = rhat.cast<cplx>().dot(ein);
                const cplx rn_out = rhat.cast<cplx>().dot(eout);
                const cvec3 tin = ein - rn_in * rhat.cast<cplx>();
                const cvec3 tout = eout - rn_out * rhat.cast<cplx>();
                const double scale = std::max(ein.norm(), eout.norm());
                REQUIRE((tin - tout).norm() < 1e-8 * scale);
                const cplx dn_in = eps_of_region[static_cast<std::size_t>(iface)] * rn_in;
                const cplx dn_out = eps_of_region[static_cast<std::size_t>(iface) + 1] * rn_out;
                REQUIRE(std::abs(dn_in - dn_out) < 1e-8 * scale);
            }
    }
}

TEST_CASE("rotational consistency") {
    layered_sphere geom{{0.6, 1.0}, {cplx(3.0, 0.0), cplx(1.8, 0.0)}};
    plane_wave base; // canonical: x-polarized, +z propagation
    base.k0 = 1.2;
    base.u = vec3(0.0, 0.0, 1.0);
    plane_wave rot;
    rot.k0 = 1.2;
    rot.u = vec3(1.0, 2.0, 2.0) / 3.0;
    rot.e_p = vec3(2.0, 1.0, -2.0) / 3.0;
    mie_series mie_base(geom, base);
    mie_series mie_rot(geom, rot);

    // R maps the canonical triad onto the rotated one
    Eigen::Matrix3d rotm;
    rotm.col(0) = rot.e_p;
    rotm.col(2) = rot.u;
    rotm.col(1) = rot.u.cross(rot.e_p);

    for (const vec3& r : {vec3(0.2, 0.1, -0.3), vec3(0.0, 0.8, 0.0), vec3(1.5, 0.4, 0.2)}) {
        const cvec3 want = (rotm * mie_base.e_field(r)).eval();
        const cvec3 got = mie_rot.e_field(rotm * r);
        REQUIRE((got - want).norm() < 1e-10 * want.norm());
    }
}

TEST_CASE("bookkeeping and input validation") {
    plane_wave pw;
    pw.k0 = 1.5;
    layered_sphere geom{{1.0}, {cplx(2.25, 0.0)}};
    mie_series mie(geom, pw);

    // order formula plus the tail check
    const double x = pw.k0;
    REQUIRE(mie.n_terms() >= static_cast<int>(std::ceil(x + 4.0 * std::cbrt(x) + 2.0)));

    // on-interface and origin evaluations stay finite
    REQUIRE(std::isfinite(mie.e_field(vec3(1.0, 0.0, 0.0)).norm()));
    REQUIRE(std::isfinite(mie.e_field(vec3(0.0, 0.0, 0.0)).norm()));

    // amplitude scales linearly
    plane_wave amp = pw;
    amp.e_p = vec3(2.5, 0.0, 0.0);
    mie_series mie_amp(geom, amp);
    const vec3 probe(0.3, -0.2, 0.5);
    REQUIRE((mie_amp.e_field(probe) - 2.5 * mie.e_field(probe)).norm() < 1e-13);

    REQUIRE_THROWS_AS(mie_series(layered_sphere{{1.0, 0.5}, {cplx(2.0, 0.0), cplx(2.0, 0.0)}}, pw),
                      mie_error);
    REQUIRE_THROWS_AS(mie_series(layered_sphere{{1.0}, {}}, pw), mie_error);
    plane_wave bad = pw;
    bad.k0 = 0.0;
    REQUIRE_THROWS_AS(mie_series(geom, bad), mie_error);
}
