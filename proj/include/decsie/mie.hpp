#pragma once

// Semi-analytic reference solution for scattering of a linearly polarized
// plane wave by a concentric layered dielectric sphere: vector multipole
// expansion with per-mode interface matching. The exterior field is split
// into the closed-form incident wave plus the scattered multipole series, so
// the truncation order is set by the largest interface argument and never by
// the evaluation radius. Arbitrary polarization/direction pairs are handled
// by rotating into the canonical frame (propagation +z, polarization +x).

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "incident.hpp"

namespace decsie {

struct mie_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct layered_sphere {
    std::vector<double> radius; // interface radii, strictly increasing
    std::vector<cplx> eps;      // permittivity per layer, innermost first; background is 1

    void check() const {
        if (radius.empty() || radius.size() != eps.size())
            throw mie_error("layered_sphere: need one permittivity per interface radius");
        double prev = 0.0;
        for (double r : radius) {
            if (!(r > prev))
                throw mie_error("layered_sphere: radii must be positive, strictly increasing");
            prev = r;
        }
    }
};

namespace detail {

// spherical Bessel j_n for n = 0..nmax by downward recurrence, normalized
// against j_0 (or j_1 near a zero of sin z); stable for all arguments and
// valid for complex z. Entries that underflow the rescaling flush to zero.
inline void sph_j_array(int nmax, cplx z, std::vector<cplx>& j) {
    j.assign(static_cast<std::size_t>(nmax) + 1, cplx(0.0, 0.0));
    if (std::abs(z) == 0.0) {
        j[0] = 1.0;
        return;
    }
    const int mstart = nmax + 20 + static_cast<int>(std::abs(z));
    std::vector<cplx> f(static_cast<std::size_t>(mstart) + 2, cplx(0.0, 0.0));
    f[static_cast<std::size_t>(mstart) + 1] = 0.0;
    f[static_cast<std::size_t>(mstart)] = 1e-30;
    const cplx inv_z = 1.0 / z;
    for (int n = mstart; n >= 1; --n) {
        const auto nz = static_cast<std::size_t>(n);
        f[nz - 1] = static_cast<double>(2 * n + 1) * inv_z * f[nz] - f[nz + 1];
        if (std::abs(f[nz - 1]) > 1e250) {
            for (std::size_t k = nz - 1; k < f.size(); ++k) f[k] *= 1e-250;
        }
    }
    const cplx j0 = std::sin(z) / z;
    const cplx j1 = std::sin(z) / (z * z) - std::cos(z) / z;
    const cplx scale = (std::abs(f[0]) >= std::abs(f[1])) ? j0 / f[0] : j1 / f[1];
    for (int n = 0; n <= nmax; ++n) j[static_cast<std::size_t>(n)] = scale * f[static_cast<std::size_t>(n)];
}

// spherical Bessel y_n by upward recurrence (the stable direction)
inline void sph_y_array(int nmax, cplx z, std::vector<cplx>& y) {
    y.assign(static_cast<std::size_t>(nmax) + 1, cplx(0.0, 0.0));
    y[0] = -std::cos(z) / z;
    if (nmax >= 1) y[1] = -std::cos(z) / (z * z) - std::sin(z) / z;
    for (int n = 1; n < nmax; ++n) {
        const auto nz = static_cast<std::size_t>(n);
        y[nz + 1] = static_cast<double>(2 * n + 1) / z * y[nz] - y[nz - 1];
    }
}

// Riccati-Bessel psi_n = z j_n and chi_n = -z y_n with derivatives; both
// families satisfy f'_n = f_{n-1} - (n/z) f_n.
struct riccati_table {
    std::vector<cplx> psi, dpsi, chi, dchi;
};

inline riccati_table riccati(int nmax, cplx z, bool with_chi) {
    riccati_table t;
    std::vector<cplx> j;
    sph_j_array(nmax, z, j);
    const auto sz = static_cast<std::size_t>(nmax) + 1;
    t.psi.resize(sz);
    t.dpsi.resize(sz);
    for (int n = 0; n <= nmax; ++n) t.psi[static_cast<std::size_t>(n)] = z * j[static_cast<std::size_t>(n)];
    t.dpsi[0] = std::cos(z);
    for (int n = 1; n <= nmax; ++n) {
        const auto nz = static_cast<std::size_t>(n);
        t.dpsi[nz] = t.psi[nz - 1] - static_cast<double>(n) / z * t.psi[nz];
    }
    if (with_chi) {
        std::vector<cplx> y;
        sph_y_array(nmax, z, y);
        t.chi.resize(sz);
        t.dchi.resize(sz);
        for (int n = 0; n <= nmax; ++n) t.chi[static_cast<std::size_t>(n)] = -z * y[static_cast<std::size_t>(n)];
        t.dchi[0] = -std::sin(z);
        for (int n = 1; n <= nmax; ++n) {
            const auto nz = static_cast<std::size_t>(n);
            t.dchi[nz] = t.chi[nz - 1] - static_cast<double>(n) / z * t.chi[nz];
        }
    }
    return t;
}

} // namespace detail

class mie_series {
public:
    mie_series(const layered_sphere& geom, const plane_wave& exc) {
        geom.check();
        exc.check();
        if (!(exc.k0 > 0.0)) throw mie_error("mie_series: wavenumber must be positive");
        k0_ = exc.k0;
        radius_ = geom.radius;
        m_.reserve(geom.eps.size());
        for (const cplx& e : geom.eps) m_.push_back(std::sqrt(e)); // principal branch: passive media
        amp_ = exc.e_p.norm();
        e1_ = exc.e_p / amp_;
        e3_ = exc.u;
        e2_ = e3_.cross(e1_);
        choose_order();
        solve_modes();
    }

    int n_terms() const { return nmax_; }

    // exterior scattered-series coefficients of xi_n, n = 1..n_terms()
    cplx scattering_te(int n) const { return s_te_[n - 1]; }
    cplx scattering_tm(int n) const { return s_tm_[n - 1]; }

    // total field: incident + scattered outside, layer field inside
    cvec3 e_field(const vec3& r) const { return evaluate(r, true); }

    // scattered field = total - incident, in every region
    cvec3 e_scattered(const vec3& r) const { return evaluate(r, false); }

private:
    double k0_ = 0.0;
    double amp_ = 1.0;
    vec3 e1_, e2_, e3_; // canonical frame axes expressed in lab coordinates
    std::vector<double> radius_;
    std::vector<cplx> m_; // refractive index per layer
    int nmax_ = 0;
    // radial function in layer l: a psi(k_l r) + b chi(k_l r); exterior total
    // adds s xi(k0 r) to the incident psi(k0 r)
    Eigen::MatrixXcd a_te_, b_te_, a_tm_, b_tm_; // (nmax, L)
    Eigen::VectorXcd s_te_, s_tm_;               // (nmax)

    void choose_order() {
        const double x0 = k0_ * radius_.back();
        double xmax = x0;
        for (std::size_t l = 0; l < m_.size(); ++l)
            xmax = std::max(xmax, std::abs(m_[l]) * k0_ * radius_[l]);
        int n = static_cast<int>(std::ceil(x0 + 4.0 * std::cbrt(x0) + 2.0));
        // the truncated mode must be negligible at the largest interface
        // argument; raise the order once if the initial guess falls short
        for (int attempt = 0;; ++attempt) {
            std::vector<cplx> j;
            detail::sph_j_array(n, cplx(xmax, 0.0), j);
            double tmax = 0.0;
            for (int k = 1; k <= n; ++k)
                tmax = std::max(tmax, (2.0 * k + 1.0) * std::abs(j[static_cast<std::size_t>(k)]));
            const double tail = (2.0 * n + 1.0) * std::abs(j[static_cast<std::size_t>(n)]);
            if (tail < 1e-12 * tmax) break;
            if (attempt == 1) throw mie_error("mie_series: multipole series failed to converge");
            n += 8;
        }
        nmax_ = n;
    }

    void solve_modes() {
        const int L = static_cast<int>(radius_.size());
        const int dim = 2 * L;
        a_te_.setZero(nmax_, L);
        b_te_.setZero(nmax_, L);
        a_tm_.setZero(nmax_, L);
        b_tm_.setZero(nmax_, L);
        s_te_.setZero(nmax_);
        s_tm_.setZero(nmax_);

        // Riccati tables at every (layer wavenumber, interface radius) pair
        // that appears in the matching conditions
        std::vector<detail::riccati_table> inner(static_cast<std::size_t>(L)); // layer l at its outer radius
        std::vector<detail::riccati_table> outer(static_cast<std::size_t>(L)); // layer l at its inner radius
        for (int l = 0; l < L; ++l) {
            const auto lz = static_cast<std::size_t>(l);
            inner[lz] = detail::riccati(nmax_, m_[lz] * k0_ * radius_[lz], l > 0);
            if (l > 0) outer[lz] = detail::riccati(nmax_, m_[lz] * k0_ * radius_[lz - 1], true);
        }
        const detail::riccati_table ext = detail::riccati(nmax_, cplx(k0_ * radius_.back(), 0.0), true);

        const auto col_a = [&](int l) { return l == 0 ? 0 : 2 * l - 1; };
        const auto col_b = [&](int l) { return 2 * l; };
        const int col_s = dim - 1;

        for (int n = 1; n <= nmax_; ++n) {
            const auto nz = static_cast<std::size_t>(n);
            // one polarization at a time. The tangential fields carry the
            // radial factors F/(m r) (TE electric, TM magnetic) and F'/r,
            // F'/(m r) (TE magnetic, TM electric), so at fixed r the match
            // is TE: [F/m], [F'] and TM: [F], [F'/m].
            for (int pol = 0; pol < 2; ++pol) {
                const bool te = pol == 0;
                Eigen::MatrixXcd mat = Eigen::MatrixXcd::Zero(dim, dim);
                Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(dim);
                for (int l = 0; l < L; ++l) {
                    const auto lz = static_cast<std::size_t>(l);
                    const cplx m_in = m_[lz];
                    const cplx wv_in = te ? 1.0 / m_in : cplx(1.0, 0.0); // value-row weight
                    const cplx wd_in = te ? cplx(1.0, 0.0) : 1.0 / m_in; // derivative-row weight
                    const int rv = 2 * l, rd = 2 * l + 1;
                    mat(rv, col_a(l)) = wv_in * inner[lz].psi[nz];
                    mat(rd, col_a(l)) = wd_in * inner[lz].dpsi[nz];
                    if (l > 0) {
                        mat(rv, col_b(l)) = wv_in * inner[lz].chi[nz];
                        mat(rd, col_b(l)) = wd_in * inner[lz].dchi[nz];
                    }
                    if (l + 1 < L) {
                        const auto oz = static_cast<std::size_t>(l + 1);
                        const cplx m_out = m_[oz];
                        const cplx wv_out = te ? 1.0 / m_out : cplx(1.0, 0.0);
                        const cplx wd_out = te ? cplx(1.0, 0.0) : 1.0 / m_out;
                        mat(rv, col_a(l + 1)) = -wv_out * outer[oz].psi[nz];
                        mat(rv, col_b(l + 1)) = -wv_out * outer[oz].chi[nz];
                        mat(rd, col_a(l + 1)) = -wd_out * outer[oz].dpsi[nz];
                        mat(rd, col_b(l + 1)) = -wd_out * outer[oz].dchi[nz];
                    } else {
                        const cplx xi = ext.psi[nz] - cplx(0.0, 1.0) * ext.chi[nz];
                        const cplx dxi = ext.dpsi[nz] - cplx(0.0, 1.0) * ext.dchi[nz];
                        mat(rv, col_s) = -xi;
                        mat(rd, col_s) = -dxi;
                        rhs[rv] = ext.psi[nz];
                        rhs[rd] = ext.dpsi[nz];
                    }
                }
                // column equilibration: each column is one radial function,
                // whose magnitude varies over hundreds of orders across modes
                Eigen::VectorXd cs(dim);
                for (int c = 0; c < dim; ++c) {
                    cs[c] = mat.col(c).cwiseAbs().maxCoeff();
                    if (cs[c] == 0.0) cs[c] = 1.0;
                    mat.col(c) /= cs[c];
                }
                Eigen::VectorXcd sol = mat.partialPivLu().solve(rhs);
                sol.array() /= cs.array();
                for (int l = 0; l < L; ++l) {
                    (te ? a_te_ : a_tm_)(n - 1, l) = sol[col_a(l)];
                    if (l > 0) (te ? b_te_ : b_tm_)(n - 1, l) = sol[col_b(l)];
                }
                (te ? s_te_ : s_tm_)[n - 1] = sol[col_s];
            }
        }
    }

    cvec3 evaluate(const vec3& r_lab, bool include_incident) const {
        // canonical coordinates
        vec3 rc(e1_.dot(r_lab), e2_.dot(r_lab), e3_.dot(r_lab));
        double rr = rc.norm();
        for (double R : radius_)
            if (std::abs(rr - R) <= 1e-12 * R) {
                rr = R * (1.0 + 1e-12);
                break;
            }
        const double rfloor = 1e-30 * radius_[0];
        if (rr < rfloor) {
            rc = vec3(0.0, 0.0, rfloor);
            rr = rfloor;
        }

        const int L = static_cast<int>(radius_.size());
        int region = L; // exterior
        for (int l = 0; l < L; ++l)
            if (rr <= radius_[static_cast<std::size_t>(l)]) {
                region = l;
                break;
            }

        const double mu = rc[2] / rr;
        const double sth = std::sqrt(std::max(0.0, 1.0 - mu * mu));
        const double rho_cyl = std::hypot(rc[0], rc[1]);
        const double cph = rho_cyl > 0.0 ? rc[0] / rho_cyl : 1.0;
        const double sph = rho_cyl > 0.0 ? rc[1] / rho_cyl : 0.0;

        const bool exterior = region == L;
        const cplx z = exterior ? cplx(k0_ * rr, 0.0) : m_[static_cast<std::size_t>(region)] * k0_ * rr;
        const detail::riccati_table tab = detail::riccati(nmax_, z, exterior || region > 0);
        const cplx inv_z = 1.0 / z;

        cplx sum_r = 0.0, sum_th = 0.0, sum_ph = 0.0;
        double pi_prev = 0.0, pi_cur = 1.0; // pi_1(mu) = 1
        cplx en(0.0, 1.0);                  // i^n, starting at n = 1
        for (int n = 1; n <= nmax_; ++n) {
            const auto nz = static_cast<std::size_t>(n);
            const double nn = static_cast<double>(n) * (n + 1.0);
            const double tau = n * mu * pi_cur - (n + 1.0) * pi_prev;
            const cplx cn = en * ((2.0 * n + 1.0) / nn);

            cplx T, U, dU;
            if (exterior) {
                const cplx xi = tab.psi[nz] - cplx(0.0, 1.0) * tab.chi[nz];
                const cplx dxi = tab.dpsi[nz] - cplx(0.0, 1.0) * tab.dchi[nz];
                T = s_te_[n - 1] * xi;
                U = s_tm_[n - 1] * xi;
                dU = s_tm_[n - 1] * dxi;
            } else {
                T = a_te_(n - 1, region) * tab.psi[nz];
                U = a_tm_(n - 1, region) * tab.psi[nz];
                dU = a_tm_(n - 1, region) * tab.dpsi[nz];
                if (region > 0) {
                    T += b_te_(n - 1, region) * tab.chi[nz];
                    U += b_tm_(n - 1, region) * tab.chi[nz];
                    dU += b_tm_(n - 1, region) * tab.dchi[nz];
                }
            }

            sum_r += cn * cplx(0.0, -1.0) * nn * (sth * pi_cur) * U * inv_z * inv_z;
            sum_th += cn * (pi_cur * T - cplx(0.0, 1.0) * tau * dU) * inv_z;
            sum_ph += cn * (tau * T - cplx(0.0, 1.0) * pi_cur * dU) * inv_z;

            const double pi_next = ((2.0 * n + 1.0) * mu * pi_cur - (n + 1.0) * pi_prev) / n;
            pi_prev = pi_cur;
            pi_cur = pi_next;
            en *= cplx(0.0, 1.0);
        }

        const cplx er = cph * sum_r;
        const cplx eth = cph * sum_th;
        const cplx eph = -sph * sum_ph;

        const vec3 rhat = rc / rr;
        const vec3 that(mu * cph, mu * sph, -sth);
        const vec3 phat(-sph, cph, 0.0);
        cvec3 ec = er * rhat.cast<cplx>() + eth * that.cast<cplx>() + eph * phat.cast<cplx>();

        // the incident wave enters the interior expansion implicitly; outside
        // it is added in closed form (or omitted for the scattered field)
        if (exterior && include_incident)
            ec[0] += std::polar(1.0, k0_ * rc[2]);
        else if (!exterior && !include_incident)
            ec[0] -= std::polar(1.0, k0_ * rc[2]);

        return amp_ * (ec[0] * e1_.cast<cplx>() + ec[1] * e2_.cast<cplx>() + ec[2] * e3_.cast<cplx>());
    }
};

} // namespace decsie
