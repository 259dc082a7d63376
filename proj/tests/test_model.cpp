#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spinso4/model.hpp"

using namespace spinso4;

namespace {

// Independent oracle: bisect the full quartic (eps+m)(eps-m)^2 = 2 m w^2 (N+2)^2
// on (m, m + big) without the analytic factorization used by the library.
double quartic_bisect(const OscParams& p, int N) {
    const double rhs = 2.0 * p.m * p.omega * p.omega * (N + 2.0) * (N + 2.0);
    auto g = [&](double e) { return (e + p.m) * (e - p.m) * (e - p.m) - rhs; };
    double lo = p.m, hi = p.m + 1.0;
    while (g(hi) < 0.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

long brute_force_degeneracy(int N) {
    long count = 0;
    for (int n1 = 0; n1 <= N; ++n1)
        for (int n2 = 0; n2 <= N; ++n2)
            for (int n3 = 0; n3 <= N; ++n3)
                for (int n4 = 0; n4 <= N; ++n4)
                    if (n1 + n2 + n3 + n4 == N && n1 + n2 == n3 + n4) ++count;
    return count;
}

}  // namespace

TEST_CASE("closed-form energy satisfies its defining relation") {
    for (double M : {0.5, 1.0, 3.0})
        for (double k : {0.3, 0.8, 1.7})
            for (int n = 1; n <= 6; ++n) {
                const CoulombParams p(M, k);
                const double E = model::energy_closed_form(p, n, Branch::plus);
                // 4n^2 (M - E) = k^2 (M + E)
                CHECK(std::abs(4.0 * n * n * (M - E) - k * k * (M + E)) <
                      1e-12 * M);
                CHECK(E > 0.0);
                CHECK(E < M);
            }
}

TEST_CASE("closed-form pinned values") {
    CHECK(model::energy_closed_form({1.0, 1.0}, 1, Branch::plus) ==
          doctest::Approx(0.6).epsilon(1e-14));
    CHECK(model::energy_closed_form({1.0, 0.8}, 1, Branch::plus) ==
          doctest::Approx(3.36 / 4.64).epsilon(1e-14));
    // the lower branch collapses to -M identically
    for (int n = 1; n <= 8; ++n)
        CHECK(model::energy_closed_form({2.0, 0.7}, n, Branch::minus) ==
              doctest::Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("nonrelativistic limit formula and quartic-in-k defect") {
    const double M = 1.0;
    for (int n = 1; n <= 3; ++n) {
        CHECK(model::nonrel_limit_energy({M, 0.4}, n) ==
              doctest::Approx(M - 0.16 * M / (2.0 * n * n)).epsilon(1e-14));
        auto defect = [&](double k) {
            return std::abs(model::energy_closed_form({M, k}, n, Branch::plus) -
                            model::nonrel_limit_energy({M, k}, n));
        };
        const double ratio = defect(0.2) / defect(0.1);
        CHECK(ratio > 14.0);
        CHECK(ratio < 18.0);
    }
}

TEST_CASE("oscillator energy against an independent quartic bisection") {
    for (double m : {0.5, 1.0, 2.0})
        for (double w : {1.0, std::sqrt(2.0), 3.0})
            for (int N : {0, 2, 4, 8, 20}) {
                const OscParams p(m, w);
                const double e = model::oscillator_energy(p, N);
                CHECK(e > m);
                CHECK(e == doctest::Approx(quartic_bisect(p, N)).epsilon(1e-12));
                CHECK(std::abs(model::oscillator_quartic_residual(p, N, e)) <
                      1e-9 * (e + m) * (e - m) * (e - m));
            }
}

TEST_CASE("oscillator exact instance") {
    CHECK(std::abs(model::oscillator_energy({1.0, std::sqrt(2.0)}, 0) - 3.0) <
          1e-10);
}

TEST_CASE("constrained shell degeneracy by brute force") {
    for (int N = 0; N <= 16; ++N)
        CHECK(model::constrained_degeneracy(N) == brute_force_degeneracy(N));
    for (int N = 1; N <= 15; N += 2) CHECK(model::constrained_degeneracy(N) == 0);
    for (int n = 1; n <= 20; ++n)
        CHECK(model::constrained_degeneracy(2 * n - 2) ==
              static_cast<long>(n) * n);
}

TEST_CASE("coulomb degeneracy") {
    for (int n = 1; n <= 6; ++n)
        CHECK(model::coulomb_degeneracy(n) == 2L * n * n);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS(CoulombParams(0.0, 1.0));
    CHECK_THROWS(CoulombParams(1.0, -0.1));
    CHECK_THROWS(OscParams(1.0, 0.0));
    CHECK_THROWS(model::oscillator_energy({1.0, 1.0}, -1));
    CHECK_THROWS(model::energy_closed_form({1.0, 1.0}, 0, Branch::plus));
}
