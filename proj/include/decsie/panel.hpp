#pragma once

// Closed-form static integrals over flat triangles (single layer, its first
// in-plane moment, and the solid-angle double layer), plus the smooth
// Helmholtz kernel remainders used to regularize near-singular quadrature.
//
// Geometry follows the classical edge decomposition: for an observation point
// r with signed height d above the triangle plane and in-plane projection rho,
// every edge contributes terms built from its endpoint parameters
//   s-+ = lhat . (p-+ - rho),  t0 = uhat . (p - rho),  R0^2 = t0^2 + d^2,
// where lhat runs along the edge (counterclockwise seen from the normal side)
// and uhat = lhat x nhat points away from the triangle.

#include <cmath>
#include <complex>
#include <numbers>

#include "geometry.hpp"

namespace decsie {

inline constexpr double pi = std::numbers::pi;
inline constexpr double four_pi = 4.0 * std::numbers::pi;

// Static panel integrals for one (triangle, observation point) pair. With
// R = |r - r'| and primes running over the triangle:
//   I1   = integral of 1/R
//   Iv   = integral of (rho' - rho)/R          (an in-plane vector)
//   omega = integral of nhat.(r - r')/R^3      (signed solid angle; PV -> 0
//                                               when r lies in the plane)
//   duf2 = d * sum_edges uhat_i f2_i, so that
//          integral of (rho' - rho) nhat.(r - r')/R^3 = -duf2
//   I3   = integral of R
//   Iv3  = integral of (rho' - rho) R
//   I5   = integral of R^3
//   Iv5  = integral of (rho' - rho) R^3
struct tri_statics {
    double i1 = 0.0;
    vec3 iv = vec3::Zero();
    double omega = 0.0;
    vec3 duf2 = vec3::Zero();
    double i3 = 0.0;
    vec3 iv3 = vec3::Zero();
    double i5 = 0.0;
    vec3 iv5 = vec3::Zero();
    vec3 rho = vec3::Zero();
    double d = 0.0;
};

// The triangle's normal is taken from the vertex order (q1,q2,q3); pass the
// outward-oriented order to get outward-normal sign conventions.
inline tri_statics analytic_statics(const vec3& r, const vec3& q1, const vec3& q2,
                                    const vec3& q3) {
    tri_statics out;
    const vec3 nraw = (q2 - q1).cross(q3 - q1);
    const vec3 n = nraw.normalized();
    out.d = n.dot(r - q1);

    const double lmax = std::max({(q2 - q1).norm(), (q3 - q2).norm(), (q1 - q3).norm()});
    // points that are in the triangle plane up to roundoff must take the
    // principal value branch (omega = 0), not a sign picked up from noise
    if (std::abs(out.d) < 1e-12 * lmax) out.d = 0.0;
    out.rho = r - out.d * n;
    const double r0_floor = 1e-26 * lmax * lmax; // squared; guards exact edge hits

    const vec3* v[4] = {&q1, &q2, &q3, &q1};
    double sum_tf2 = 0.0, sum_beta = 0.0, sum_tf3 = 0.0, sum_tg3 = 0.0;
    vec3 sum_uf2 = vec3::Zero(), sum_iv = vec3::Zero(), sum_ug3 = vec3::Zero(),
         sum_ug5 = vec3::Zero();
    for (int e = 0; e < 3; ++e) {
        const vec3& pm = *v[e];
        const vec3& pp = *v[e + 1];
        const vec3 lhat = (pp - pm).normalized();
        const vec3 uhat = lhat.cross(n);
        const double sm = lhat.dot(pm - out.rho);
        const double sp = lhat.dot(pp - out.rho);
        const double t0 = uhat.dot(pm - out.rho);
        const double r02 = t0 * t0 + out.d * out.d;
        const double rm = std::sqrt(sm * sm + r02);
        const double rp = std::sqrt(sp * sp + r02);

        // edge line integrals f_q = integral of R^{q-2} ds along the edge
        double f3 = 0.5 * (sp * rp - sm * rm);
        // the f2-weighted and beta terms all carry a factor that vanishes as
        // the observation point approaches the edge line, so they are dropped
        // below the geometric floor instead of evaluating 0 * log(0)
        if (r02 > r0_floor) {
            // pick the branch whose sums never cancel; when the projection
            // falls inside the edge span (sm < 0 < sp) both r +- s forms lose
            // digits, and (rm + sm)(rm - sm) = r02 gives the stable route
            const double f2 = (sm >= 0.0)  ? std::log((rp + sp) / (rm + sm))
                              : (sp <= 0.0) ? std::log((rm - sm) / (rp - sp))
                                            : std::log((rp + sp) * (rm - sm) / r02);
            const double ad = std::abs(out.d);
            const double beta = std::atan(t0 * sp / (r02 + ad * rp)) -
                                std::atan(t0 * sm / (r02 + ad * rm));
            f3 += 0.5 * r02 * f2;
            sum_tf2 += t0 * f2;
            sum_beta += beta;
            sum_uf2 += uhat * f2;
            sum_iv += uhat * (r02 * f2);
        }
        const double g3 = 0.25 * (sp * rp * rp * rp - sm * rm * rm * rm) + 0.75 * r02 * f3;
        const double g5 = (sp * rp * rp * rp * rp * rp - sm * rm * rm * rm * rm * rm) / 6.0 +
                          r02 * g3 * (5.0 / 6.0);
        sum_tf3 += t0 * f3;
        sum_tg3 += t0 * g3;
        sum_ug3 += uhat * g3;
        sum_ug5 += uhat * g5;
        sum_iv += uhat * (sp * rp - sm * rm);
    }
    out.i1 = sum_tf2 - std::abs(out.d) * sum_beta;
    out.iv = 0.5 * sum_iv;
    const double sgn = (out.d > 0.0) ? 1.0 : (out.d < 0.0 ? -1.0 : 0.0);
    out.omega = sgn * sum_beta;
    out.duf2 = out.d * sum_uf2;
    // both radial moment families satisfy the same divergence-theorem
    // recursion: (q+2) I_{q} = q d^2 I_{q-2} + sum_edges t0 (integral R^q ds)
    out.i3 = (out.d * out.d * out.i1 + sum_tf3) / 3.0;
    out.iv3 = sum_ug3 / 3.0;
    out.i5 = (3.0 * out.d * out.d * out.i3 + sum_tg3) / 5.0;
    out.iv5 = sum_ug5 / 5.0;
    return out;
}

// Static integrals against an affine density h(r') = h0 + g.(rho' - rho),
// where g is the (tangential) gradient of h and h0 its value at rho. The
// 1/(4 pi) of the Green function is NOT included here.
inline double static_single_layer(const tri_statics& st, double h0, const vec3& g) {
    return h0 * st.i1 + g.dot(st.iv);
}

inline double static_double_layer(const tri_statics& st, double h0, const vec3& g) {
    return h0 * st.omega - g.dot(st.duf2);
}

// Full Helmholtz kernel e^{ikR}/(4 pi R).
inline cplx helm_kernel(double k, double R) {
    return std::polar(1.0 / (four_pi * R), k * R);
}

// Normal-derivative kernel nhat'.(r - r') (1 - ikR) e^{ikR}/(4 pi R^3),
// evaluated with d = nhat'.(r - r') passed in by the caller.
inline cplx helm_double_kernel(double k, double R, double d) {
    const cplx phase = std::polar(1.0, k * R);
    return d * (cplx(1.0, 0.0) - cplx(0.0, k * R)) * phase / (four_pi * R * R * R);
}

// Smooth remainder (e^{ikR} - 1)/(4 pi R) of the single-layer kernel after
// subtracting the static part; finite limit ik/(4 pi) at R = 0.
inline cplx helm_single_remainder(double k, double R) {
    if (R == 0.0) return cplx(0.0, k / four_pi);
    const double x = k * R;
    const double s = std::sin(0.5 * x);
    return cplx(-2.0 * s * s, std::sin(x)) / (four_pi * R);
}

// (1 - ikR) e^{ikR} - 1, computed by series for small kR where the direct
// expression loses all significant digits.
inline cplx helm_double_factor(double x) {
    if (std::abs(x) < 0.015) {
        const double x2 = x * x;
        // x^2/2 + i x^3/3 - x^4/8 - i x^5/30 + x^6/144
        return cplx(0.5 * x2 - 0.125 * x2 * x2 + x2 * x2 * x2 / 144.0,
                    x * x2 / 3.0 - x * x2 * x2 / 30.0);
    }
    return (cplx(1.0, 0.0) - cplx(0.0, x)) * std::polar(1.0, x) - 1.0;
}

// Smooth remainder of the double-layer kernel,
//   d ((1 - ikR) e^{ikR} - 1)/(4 pi R^3),
// bounded by ~ k^2/(8 pi) since |d| <= R; zero limit at R = 0.
inline cplx helm_double_remainder(double k, double R, double d) {
    if (R == 0.0) return cplx(0.0, 0.0);
    return d * helm_double_factor(k * R) / (four_pi * R * R * R);
}

// Smooth part of the single-layer kernel once the even powers of kR in
// e^{ikR}/(4 pi R) -- the 1/R, R, and R^3 terms, all with real coefficients
// -- are integrated in closed form against the statics above:
//   (e^{ikR} - 1 + (kR)^2/2 - (kR)^4/24) / (4 pi R).
// What is left is ik/(4 pi) plus odd powers that are polynomials of degree
// <= 4 in the source point (a degree-5 panel rule integrates them exactly)
// plus an O(k^6 R^5) tail. Series for small kR where the direct form cancels.
inline cplx helm_single_smooth(double k, double R) {
    if (R == 0.0) return cplx(0.0, k / four_pi);
    const double x = k * R;
    cplx num;
    if (std::abs(x) < 0.8) {
        cplx p(0.0, x);
        num = p;
        for (int n = 2; n <= 24; ++n) {
            p *= cplx(0.0, x / static_cast<double>(n));
            if (n != 2 && n != 4) num += p;
            if (std::norm(p) < 1e-38 * std::norm(num)) break;
        }
    } else {
        num = std::polar(1.0, x) - cplx(1.0 - 0.5 * x * x + x * x * x * x / 24.0, 0.0);
    }
    return num / (four_pi * R);
}

// Matching smooth part of the normal-derivative kernel. In the expansion
// (1 - ikR) e^{ikR} = sum_n (1 - n) (ikR)^n / n! the n = 0, 2, 4 terms reduce
// to the solid angle and the 1/R and R statics; the rest,
//   d ((1 - ikR) e^{ikR} - 1 - (kR)^2/2 + (kR)^4/8) / (4 pi R^3),
// is the constant i d k^3/(12 pi), a rule-exact degree-2 polynomial, and an
// O(k^6 R^3) tail.
inline cplx helm_double_smooth(double k, double R, double d) {
    if (R == 0.0) return cplx(0.0, 0.0);
    const double x = k * R;
    cplx num;
    if (std::abs(x) < 0.8) {
        const cplx ix(0.0, x);
        cplx p = ix * ix * ix / 6.0;
        num = -2.0 * p;
        for (int n = 4; n <= 24; ++n) {
            p *= cplx(0.0, x / static_cast<double>(n));
            if (n != 4) num += static_cast<double>(1 - n) * p;
            if (std::norm(p) * n * n < 1e-38 * std::norm(num)) break;
        }
    } else {
        num = (cplx(1.0, 0.0) - cplx(0.0, x)) * std::polar(1.0, x) -
              cplx(1.0 + 0.5 * x * x - x * x * x * x / 8.0, 0.0);
    }
    return d * num / (four_pi * R * R * R);
}

} // namespace decsie
