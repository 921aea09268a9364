#pragma once

// quadrature rules used by the assembly and the test oracles:
//   - Gauss-Legendre points on [0,1]
//   - symmetric triangle rules up to order 5 (hardcoded classical rules)
//   - collapsed tensor-product rules on triangle / tetrahedron for any order
//
// all simplex rules store barycentric coordinates and weights normalized to
// sum to one, so  integral over S of f  ~  measure(S) * sum_i w_i f(lambda_i)

#include <cmath>
#include <stdexcept>
#include <vector>

namespace decsie {

struct quad_tri {
    double l1, l2, l3, w;
};

struct quad_tet {
    double l1, l2, l3, l4, w;
};

// Gauss-Legendre nodes/weights on [0,1], Newton iteration on P_n
inline void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w)
{
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        // map from [-1,1] to [0,1]
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = w[n - 1 - i] = 1.0 / ((1.0 - z * z) * pp * pp);
    }
}

// cached Gauss-Legendre rule on [0,1]; pre-warm before parallel sections
struct gl_rule_01 {
    std::vector<double> x, w;
};

inline const gl_rule_01& gl_rule(int n)
{
    static std::vector<gl_rule_01> cache(64);
    if (n < 1 || n >= 64) throw std::invalid_argument("gl_rule: point count out of range");
    if (cache[n].x.empty()) gauss_legendre_01(n, cache[n].x, cache[n].w);
    return cache[n];
}

// Duffy-collapsed tensor rule on the reference triangle, positive weights,
// exact for total degree <= 2n-2
inline std::vector<quad_tri> tri_rule_collapsed(int n)
{
    std::vector<double> x, w;
    gauss_legendre_01(n, x, w);
    std::vector<quad_tri> r;
    r.reserve(n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double u = x[i], v = x[j];
            // weights carry the Jacobian (1-u); divide by the reference area 1/2
            r.push_back({u, v * (1.0 - u), (1.0 - u) * (1.0 - v), w[i] * w[j] * (1.0 - u) * 2.0});
        }
    return r;
}

// symmetric rules; order = highest total polynomial degree integrated exactly
inline const std::vector<quad_tri>& tri_rule(int order)
{
    static const std::vector<quad_tri> r1 = {{1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0}};
    static const std::vector<quad_tri> r2 = {{2.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3},
                                             {1.0 / 6, 2.0 / 3, 1.0 / 6, 1.0 / 3},
                                             {1.0 / 6, 1.0 / 6, 2.0 / 3, 1.0 / 3}};
    static const std::vector<quad_tri> r3 = {{1.0 / 3, 1.0 / 3, 1.0 / 3, -27.0 / 48},
                                             {0.6, 0.2, 0.2, 25.0 / 48},
                                             {0.2, 0.6, 0.2, 25.0 / 48},
                                             {0.2, 0.2, 0.6, 25.0 / 48}};
    static const std::vector<quad_tri> r4 = [] {
        const double a1 = 0.108103018168070, b1 = 0.445948490915965, w1 = 0.223381589678011;
        const double a2 = 0.816847572980459, b2 = 0.091576213509771, w2 = 0.109951743655322;
        return std::vector<quad_tri>{{a1, b1, b1, w1}, {b1, a1, b1, w1}, {b1, b1, a1, w1},
                                     {a2, b2, b2, w2}, {b2, a2, b2, w2}, {b2, b2, a2, w2}};
    }();
    static const std::vector<quad_tri> r5 = [] {
        const double a1 = 0.059715871789770, b1 = 0.470142064105115, w1 = 0.132394152788506;
        const double a2 = 0.797426985353087, b2 = 0.101286507323456, w2 = 0.125939180544827;
        return std::vector<quad_tri>{{1.0 / 3, 1.0 / 3, 1.0 / 3, 9.0 / 40},
                                     {a1, b1, b1, w1}, {b1, a1, b1, w1}, {b1, b1, a1, w1},
                                     {a2, b2, b2, w2}, {b2, a2, b2, w2}, {b2, b2, a2, w2}};
    }();
    switch (order) {
        case 0:
        case 1: return r1;
        case 2: return r2;
        case 3: return r3;
        case 4: return r4;
        case 5: return r5;
        default: {
            // collapsed rules, cached per order
            static std::vector<std::vector<quad_tri>> cache(64);
            if (order < 0 || order >= 64) throw std::invalid_argument("tri_rule: order out of range");
            if (cache[order].empty()) cache[order] = tri_rule_collapsed(order / 2 + 2);
            return cache[order];
        }
    }
}

// collapsed tensor rule on the reference tetrahedron, exact for degree <= 2n-3
inline std::vector<quad_tet> tet_rule_collapsed(int n)
{
    std::vector<double> x, w;
    gauss_legendre_01(n, x, w);
    std::vector<quad_tet> r;
    r.reserve(n * n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const double u = x[i], v = x[j], t = x[k];
                const double l2 = v * (1.0 - u);
                const double l3 = t * (1.0 - u) * (1.0 - v);
                const double l4 = (1.0 - u) * (1.0 - v) * (1.0 - t);
                const double jac = (1.0 - u) * (1.0 - u) * (1.0 - v);
                r.push_back({u, l2, l3, l4, w[i] * w[j] * w[k] * jac * 6.0});
            }
    return r;
}

inline const std::vector<quad_tet>& tet_rule(int order)
{
    static std::vector<std::vector<quad_tet>> cache(64);
    if (order < 0 || order >= 64) throw std::invalid_argument("tet_rule: order out of range");
    if (cache[order].empty()) cache[order] = tet_rule_collapsed(order / 2 + 2);
    return cache[order];
}

}  // namespace decsie
