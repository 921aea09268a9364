#include <catch2/catch_amalgamated.hpp>

#include <decsie/quadrature.hpp>

using namespace decsie;

namespace {

double factorial(int n)
{
    double r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

// exact monomial integrals of barycentric coordinates, normalized by measure:
// (1/A) int l1^a l2^b l3^c = 2 a! b! c! / (a+b+c+2)!
double tri_monomial(int a, int b, int c)
{
    return 2.0 * factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 2);
}

double tet_monomial(int a, int b, int c, int d)
{
    return 6.0 * factorial(a) * factorial(b) * factorial(c) * factorial(d) /
           factorial(a + b + c + d + 3);
}

}  // namespace

TEST_CASE("gauss-legendre nodes integrate polynomials exactly")
{
    for (int n : {1, 2, 3, 5, 8, 16}) {
        std::vector<double> x, w;
        gauss_legendre_01(n, x, w);
        double wsum = 0;
        for (double wi : w) wsum += wi;
        REQUIRE(wsum == Catch::Approx(1.0).epsilon(1e-14));
        for (int p = 0; p <= 2 * n - 1; ++p) {
            double s = 0;
            for (int i = 0; i < n; ++i) s += w[i] * std::pow(x[i], p);
            REQUIRE(s == Catch::Approx(1.0 / (p + 1)).epsilon(1e-12));
        }
    }
}

TEST_CASE("triangle rules are exact to their stated order")
{
    for (int order : {1, 2, 3, 4, 5, 7, 10}) {
        const auto& rule = tri_rule(order);
        for (int deg = 0; deg <= order; ++deg)
            for (int a = 0; a <= deg; ++a)
                for (int b = 0; a + b <= deg; ++b) {
                    const int c = deg - a - b;
                    double s = 0;
                    for (const auto& q : rule)
                        s += q.w * std::pow(q.l1, a) * std::pow(q.l2, b) * std::pow(q.l3, c);
                    REQUIRE_THAT(s, Catch::Matchers::WithinAbs(tri_monomial(a, b, c), 1e-14));
                }
    }
}

TEST_CASE("tet rules are exact to their stated order")
{
    for (int order : {2, 4, 6}) {
        const auto& rule = tet_rule(order);
        for (int deg = 0; deg <= order; ++deg)
            for (int a = 0; a <= deg; ++a)
                for (int b = 0; a + b <= deg; ++b)
                    for (int c = 0; a + b + c <= deg; ++c) {
                        const int d = deg - a - b - c;
                        double s = 0;
                        for (const auto& q : rule)
                            s += q.w * std::pow(q.l1, a) * std::pow(q.l2, b) *
                                 std::pow(q.l3, c) * std::pow(q.l4, d);
                        REQUIRE_THAT(s, Catch::Matchers::WithinAbs(tet_monomial(a, b, c, d),
                                                                   1e-14));
                    }
    }
}

TEST_CASE("barycentric points of every rule sum to one")
{
    for (int order : {3, 5, 8}) {
        for (const auto& q : tri_rule(order))
            REQUIRE(q.l1 + q.l2 + q.l3 == Catch::Approx(1.0).margin(1e-14));
        for (const auto& q : tet_rule(order))
            REQUIRE(q.l1 + q.l2 + q.l3 + q.l4 == Catch::Approx(1.0).margin(1e-14));
    }
}
