#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "spinso4/model.hpp"
#include "spinso4/radial.hpp"

using namespace spinso4;

TEST_CASE("tridiagonal bisection against the discrete Laplacian spectrum") {
    // -d^2/dx^2 on n interior points with Dirichlet ends has eigenvalues
    // (4/h^2) sin^2(j pi / (2(n+1))).
    const int n = 500;
    const double h = 1.0 / (n + 1);
    std::vector<double> d(n, 2.0 / (h * h)), e(n - 1, -1.0 / (h * h));
    // Sturm bisection is accurate to O(eps * ||T||) absolutely, so the lowest
    // eigenvalue (~1e-5 ||T|| here) carries a relative error near 1e-11.
    for (int j = 1; j <= 5; ++j) {
        const double exact = 4.0 / (h * h) *
                             std::pow(std::sin(j * std::numbers::pi / (2.0 * (n + 1))), 2);
        CHECK(radial::tridiag_eigenvalue(d, e, j - 1) ==
              doctest::Approx(exact).epsilon(1e-10));
    }
    CHECK_THROWS(radial::tridiag_eigenvalue(d, e, -1));
    CHECK_THROWS(radial::tridiag_eigenvalue(d, e, n));
}

TEST_CASE("inverse iteration produces a genuine eigenvector") {
    const int n = 300;
    std::vector<double> d(n), e(n - 1, -1.0);
    for (int i = 0; i < n; ++i) d[i] = 2.0 + 0.01 * i;
    const double lambda = radial::tridiag_eigenvalue(d, e, 3);
    const auto v = radial::tridiag_eigenvector(d, e, lambda);
    double res = 0.0, nrm = 0.0;
    for (int i = 0; i < n; ++i) {
        double t = (d[i] - lambda) * v[i];
        if (i > 0) t += e[i - 1] * v[i - 1];
        if (i + 1 < n) t += e[i] * v[i + 1];
        res += t * t;
        nrm += v[i] * v[i];
    }
    CHECK(std::sqrt(res / nrm) <= 1e-8);
}

TEST_CASE("free radial modes match the spherical box spectrum") {
    // coupling = 0: W is the s-wave Dirichlet spectrum (pi (n_r+1) / R)^2.
    radial::RadialProblem prob;
    prob.dimension = 3;
    prob.lambda = 0;
    prob.coupling = 0.0;
    prob.mass = 1.0;
    prob.spacing = 0.01;
    prob.r_max = 10.0;
    for (int nr = 0; nr < 3; ++nr) {
        const double exact = std::pow(std::numbers::pi * (nr + 1) / prob.r_max, 2);
        const double w = radial::linear_radial_eigenvalue(prob, 0.0, nr, false);
        CHECK(w == doctest::Approx(exact).epsilon(1e-7));
    }
}

TEST_CASE("linear eigenvalue matches the hydrogen-like closed form") {
    // with V = -k/rho and energy parameter E the linear problem is hydrogenic
    // with effective charge kappa = (E + mass) k: W = -kappa^2 / (4 n^2).
    radial::RadialProblem prob;
    prob.dimension = 3;
    prob.coupling = 0.8;
    prob.mass = 1.0;
    prob.spacing = 0.02;
    prob.r_max = 160.0;  // the n = 3 tail ~ rho^3 e^{-0.2 rho} needs the room
    const double E = 0.5;
    const double kappa = (E + prob.mass) * prob.coupling;
    for (int l = 0; l <= 1; ++l) {
        prob.lambda = l;
        for (int nr = 0; nr <= 1; ++nr) {
            const int n = nr + l + 1;
            const double exact = -kappa * kappa / (4.0 * n * n);
            const double w = radial::linear_radial_eigenvalue(prob, E, nr);
            CHECK(std::abs(w - exact) <= 1e-6 * std::abs(exact));
        }
    }
}

TEST_CASE("self-consistent Coulomb energy against the closed form") {
    const CoulombParams p(1.0, 0.8);
    radial::RadialProblem prob;
    prob.dimension = 3;
    prob.lambda = 0;
    prob.coupling = p.k;
    prob.mass = p.M;
    const auto res = radial::solve_self_consistent(prob, 0);
    REQUIRE(res.found);
    CHECK(res.trace.converged);
    CHECK(std::abs(res.energy - model::energy_closed_form(p, 1, Branch::plus)) <=
          1e-5 * p.M);
}

TEST_CASE("degeneracy scan: l-independence at fixed n") {
    const CoulombParams p(1.0, 0.8);
    const auto levels = radial::degeneracy_scan(p, 3);
    CHECK(levels.size() == 6);
    for (int n = 1; n <= 3; ++n) {
        double lo = 1e300, hi = -1e300;
        for (const auto& lv : levels)
            if (lv.n == n) {
                lo = std::min(lo, lv.energy);
                hi = std::max(hi, lv.energy);
            }
        CHECK(hi - lo <= 1e-6 * p.M);
        CHECK(std::abs(lo - model::energy_closed_form(p, n, Branch::plus)) <=
              1e-5 * p.M);
    }
}

TEST_CASE("4D oscillator instance and shell independence") {
    radial::RadialProblem prob;
    prob.dimension = 4;
    prob.potential = radial::PotentialKind::oscillator;
    prob.coupling = std::sqrt(2.0);
    prob.mass = 1.0;

    prob.lambda = 0;
    const auto res = radial::solve_self_consistent(prob, 0);
    REQUIRE(res.found);
    CHECK(std::abs(res.energy - 3.0) <= 1e-5);

    // N = 2 via (n_r, lambda) = (1, 0) and (0, 2) must agree
    const auto a = radial::solve_self_consistent(prob, 1);
    prob.lambda = 2;
    const auto b = radial::solve_self_consistent(prob, 0);
    REQUIRE(a.found);
    REQUIRE(b.found);
    CHECK(std::abs(a.energy - b.energy) <= 1e-6 * a.energy);
    CHECK(std::abs(a.energy - model::oscillator_energy({1.0, std::sqrt(2.0)}, 2)) <=
          1e-6 * a.energy);
}

TEST_CASE("zero coupling: no bound state, reported not thrown") {
    radial::RadialProblem prob;
    prob.dimension = 3;
    prob.lambda = 0;
    prob.coupling = 0.0;
    prob.mass = 1.0;
    prob.r_max = 40.0;
    const auto res = radial::solve_self_consistent(prob, 0);
    CHECK(!res.found);
    CHECK(!res.trace.message.empty());
}

TEST_CASE("problem validation") {
    radial::RadialProblem prob;
    prob.dimension = 5;
    CHECK_THROWS(prob.validate());
    prob.dimension = 3;
    prob.mass = 0.0;
    CHECK_THROWS(prob.validate());
}
