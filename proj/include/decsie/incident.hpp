#pragma once

// Incident plane-wave potentials in the scaled form used throughout: the
// vector potential carries a factor omega and the scalar potential a factor
// k0^2, so for E = E_p e^{i k0 u.r} with u.E_p = 0 and |u| = 1:
//   phi   = -(r.E_p) e^{i k0 u.r}        (unscaled scalar potential)
//   phi_s = k0^2 phi
//   a     = k0 phi u                     (scaled vector potential)
// These satisfy E = i a - grad(phi) and div a = i k0^2 phi identically.

#include <complex>
#include <stdexcept>

#include "geometry.hpp"

namespace decsie {

using cvec3 = Eigen::Matrix<cplx, 3, 1>;

struct plane_wave {
    double k0 = 1.0;
    vec3 e_p = vec3(1.0, 0.0, 0.0);  // polarization (linear)
    vec3 u = vec3(0.0, 0.0, -1.0);   // propagation direction, unit length

    void check() const {
        if (std::abs(u.norm() - 1.0) > 1e-12)
            throw std::invalid_argument("plane_wave: propagation direction must be unit length");
        if (std::abs(u.dot(e_p)) > 1e-12 * e_p.norm())
            throw std::invalid_argument("plane_wave: polarization must be transverse");
    }
};

inline cplx pw_phase(const plane_wave& w, const vec3& r) {
    return std::polar(1.0, w.k0 * w.u.dot(r));
}

inline cplx pw_phi(const plane_wave& w, const vec3& r) {
    return -(r.dot(w.e_p)) * pw_phase(w, r);
}

inline cplx pw_phi_s(const plane_wave& w, const vec3& r) {
    return w.k0 * w.k0 * pw_phi(w, r);
}

inline cvec3 pw_a(const plane_wave& w, const vec3& r) {
    return (w.k0 * pw_phi(w, r)) * w.u.cast<cplx>();
}

inline cvec3 pw_grad_phi(const plane_wave& w, const vec3& r) {
    const cplx ph = pw_phase(w, r);
    return -ph * (w.e_p.cast<cplx>() + cplx(0.0, w.k0 * r.dot(w.e_p)) * w.u.cast<cplx>());
}

inline cvec3 pw_grad_phi_s(const plane_wave& w, const vec3& r) {
    return w.k0 * w.k0 * pw_grad_phi(w, r);
}

// gradient of the tau-th Cartesian component of the scaled vector potential
inline cvec3 pw_grad_a(const plane_wave& w, const vec3& r, int tau) {
    return w.k0 * w.u[tau] * pw_grad_phi(w, r);
}

inline cvec3 pw_e_field(const plane_wave& w, const vec3& r) {
    return pw_phase(w, r) * w.e_p.cast<cplx>();
}

} // namespace decsie
