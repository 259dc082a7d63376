#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "spinso4/ks.hpp"
#include "spinso4/model.hpp"

using namespace spinso4;
using ks::Vec3;
using ks::Vec4;

namespace {

double dot4(const Vec4& a, const Vec4& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

double norm3(const Vec3& a) {
    return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
}

Vec4 random_vec4(std::mt19937_64& rng, double lo = -2.0, double hi = 2.0) {
    std::uniform_real_distribution<double> uni(lo, hi);
    return {uni(rng), uni(rng), uni(rng), uni(rng)};
}

}  // namespace

TEST_CASE("point map pinned values and norm identity") {
    const Vec3 a = ks::ks_point({1, 0, 0, 0});
    CHECK(a[0] == 0.0);
    CHECK(a[1] == 0.0);
    CHECK(a[2] == 1.0);

    const Vec3 b = ks::ks_point({1, 1, 1, 1});
    CHECK(b[0] == 0.0);
    CHECK(b[1] == 4.0);
    CHECK(b[2] == 0.0);

    std::mt19937_64 rng(7);
    for (int it = 0; it < 100000; ++it) {
        const Vec4 u = random_vec4(rng);
        const double uu = dot4(u, u);
        CHECK(std::abs(norm3(ks::ks_point(u)) - uu) <= 1e-12 * (uu + 1.0));
    }
}

TEST_CASE("constraint value substitution and generated flow") {
    CHECK(ks::constraint_value({{1, 0, 0, 0}, {0, 0, 0, 0}}) == 0.0);
    CHECK(ks::constraint_value({{1, 0, 0, 0}, {0, 0, 0, 1}}) == -1.0);

    // the constraint generates a rotation in (u,P); its own value is conserved
    // along that flow. Integrate with RK4 and check the drift.
    ks::PhasePoint4 pt{{0.3, -1.1, 0.7, 0.2}, {1.0, 0.4, -0.6, 0.9}};
    auto deriv = [](const ks::PhasePoint4& s) {
        // du/dt = dC/dP = (u4,-u3,u2,-u1); dP/dt = -dC/du = (P4,-P3,P2,-P1)
        ks::PhasePoint4 d;
        d.u = {s.u[3], -s.u[2], s.u[1], -s.u[0]};
        d.P = {s.P[3], -s.P[2], s.P[1], -s.P[0]};
        return d;
    };
    const double c0 = ks::constraint_value(pt);
    const double dt = 1e-3;
    for (int step = 0; step < 2000; ++step) {
        auto add = [](const ks::PhasePoint4& a, const ks::PhasePoint4& b, double s) {
            ks::PhasePoint4 r;
            for (int i = 0; i < 4; ++i) {
                r.u[i] = a.u[i] + s * b.u[i];
                r.P[i] = a.P[i] + s * b.P[i];
            }
            return r;
        };
        const auto k1 = deriv(pt);
        const auto k2 = deriv(add(pt, k1, 0.5 * dt));
        const auto k3 = deriv(add(pt, k2, 0.5 * dt));
        const auto k4 = deriv(add(pt, k3, dt));
        for (int i = 0; i < 4; ++i) {
            pt.u[i] += dt / 6.0 * (k1.u[i] + 2 * k2.u[i] + 2 * k3.u[i] + k4.u[i]);
            pt.P[i] += dt / 6.0 * (k1.P[i] + 2 * k2.P[i] + 2 * k3.P[i] + k4.P[i]);
        }
    }
    CHECK(std::abs(ks::constraint_value(pt) - c0) <= 1e-10);
}

TEST_CASE("lift matrix rows: orthogonality and constraint-gradient kernel") {
    std::mt19937_64 rng(11);
    for (int it = 0; it < 1000; ++it) {
        const Vec4 u = random_vec4(rng);
        const double uu = dot4(u, u);
        const auto A = ks::lift_matrix(u);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double expect = (i == j) ? uu : 0.0;
                CHECK(std::abs(dot4(A[i], A[j]) - expect) <= 1e-12 * (uu + 1.0));
            }
        const Vec4 grad = {u[3], -u[2], u[1], -u[0]};  // dC/dP
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(dot4(A[i], grad)) <= 1e-12 * (uu + 1.0));
    }
}

TEST_CASE("lift pinned example and kinetic identity sweep") {
    {
        const auto out = ks::ks_lift({{1, 0, 0, 0}, {0, 1, 0, 0}});
        CHECK(out.p[0] == 0.0);
        CHECK(out.p[1] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(out.p[2] == 0.0);
    }
    {
        const auto out = ks::ks_lift({{0.4, -0.8, 1.3, 0.1}, {0, 0, 0, 0}});
        CHECK(norm3(out.p) == 0.0);
    }

    std::mt19937_64 rng(13);
    for (int it = 0; it < 100000; ++it) {
        ks::PhasePoint4 pt;
        pt.u = random_vec4(rng);
        if (dot4(pt.u, pt.u) < 0.01) continue;
        pt.P = ks::project_momentum(pt.u, random_vec4(rng));
        const auto out = ks::ks_lift(pt);
        const double P2 = dot4(pt.P, pt.P);
        const double r = norm3(out.x);
        const double p2 =
            out.p[0] * out.p[0] + out.p[1] * out.p[1] + out.p[2] * out.p[2];
        CHECK(std::abs(P2 - 4.0 * r * p2) <= 1e-12 * (P2 + 4.0 * r * p2 + 1e-300));
    }
}

TEST_CASE("lift rejects off-constraint points and u = 0") {
    CHECK_THROWS(ks::ks_lift({{1, 0, 0, 0}, {0, 0, 0, 1}}));
    CHECK_THROWS(ks::ks_lift({{0, 0, 0, 0}, {1, 0, 0, 0}}));
}

TEST_CASE("Gamma identities") {
    {
        const auto g = ks::gamma_of({1, 0, 0, 0});
        CHECK(g(0, 0) == std::complex<double>(1.0, 0.0));
        CHECK(g(1, 1) == std::complex<double>(1.0, 0.0));
        CHECK(std::abs(g(0, 1)) == 0.0);
        CHECK(std::abs(g(1, 0)) == 0.0);
    }
    std::mt19937_64 rng(17);
    for (int it = 0; it < 10000; ++it) {
        const Vec4 u = random_vec4(rng);
        const double uu = dot4(u, u);
        const auto g = ks::gamma_of(u);
        const auto gg = g * ks::adjoint(g);
        ks::TwoByTwoC id;
        id(0, 0) = uu;
        id(1, 1) = uu;
        CHECK(ks::frobenius(gg - id) <= 1e-13 * (uu + 1.0));
        // |det| = u.u follows from GG^dag = u^2 I in 2x2
        const auto det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
        CHECK(std::abs(std::abs(det) - uu) <= 1e-12 * (uu + 1.0));
    }
}

TEST_CASE("B factorization on the constraint surface, with negative control") {
    std::mt19937_64 rng(19);
    double worst = 0.0;
    for (int it = 0; it < 100000; ++it) {
        ks::PhasePoint4 pt;
        pt.u = random_vec4(rng);
        if (dot4(pt.u, pt.u) < 0.01) continue;
        pt.P = ks::project_momentum(pt.u, random_vec4(rng));
        worst = std::max(worst, ks::b_identity_residual(pt));
    }
    CHECK(worst <= 1e-12);

    // off-constraint control: same lift arithmetic, unprojected momentum
    double control_min = 1e300;
    int controls = 0;
    while (controls < 200) {
        ks::PhasePoint4 pt;
        pt.u = random_vec4(rng);
        const double uu = dot4(pt.u, pt.u);
        if (uu < 0.5) continue;
        pt.P = random_vec4(rng);
        double pn = std::sqrt(dot4(pt.P, pt.P));
        if (std::abs(ks::constraint_value(pt)) < 0.3 * std::sqrt(uu) * pn) continue;
        const auto A = ks::lift_matrix(pt.u);
        Vec3 p{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 4; ++j) p[i] += A[i][j] * pt.P[j] / (2.0 * uu);
        control_min = std::min(control_min,
                               ks::b_identity_residual(pt.u, pt.P, p));
        ++controls;
    }
    CHECK(control_min >= 1e-6);  // at least six orders above the pass threshold
}

TEST_CASE("oscillator to hydrogen parameter map") {
    const auto mp = ks::map_oscillator_to_hydrogen({1.0, std::sqrt(2.0)}, 0);
    CHECK(mp.epsilon == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(mp.M == doctest::Approx(2.125).epsilon(1e-12));
    CHECK(mp.E == doctest::Approx(1.875).epsilon(1e-12));
    CHECK(mp.k == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mp.n == 1);
    CHECK(ks::spectrum_identity_residual(mp) <= 1e-14);

    CHECK_THROWS(ks::map_oscillator_to_hydrogen({1.0, 1.0}, 3));
    CHECK_THROWS(ks::map_oscillator_to_hydrogen({1.0, 1.0}, -2));
}

TEST_CASE("spectrum bridge for all even N up to 40") {
    for (double omega : {1.0, std::sqrt(2.0)}) {
        for (int N = 0; N <= 40; N += 2) {
            auto mp = ks::map_oscillator_to_hydrogen({1.0, omega}, N);
            CHECK(mp.n == (N + 2) / 2);
            CHECK(std::abs(mp.M + mp.E - (mp.m + mp.epsilon)) <= 1e-12 * mp.M);
            CHECK(std::abs(mp.M - mp.E - mp.m * omega * omega / 8.0) <=
                  1e-12 * mp.M);
            CHECK(ks::spectrum_identity_residual(mp) <= 1e-12);

            // sensitivity control: a perturbed epsilon must be caught
            ks::MappedParams bad = mp;
            bad.epsilon += 1e-3;
            bad.M = 0.5 * (bad.m + bad.epsilon) + bad.m * omega * omega / 16.0;
            bad.E = 0.5 * (bad.m + bad.epsilon) - bad.m * omega * omega / 16.0;
            bad.k = 0.25 * (bad.epsilon - bad.m);
            CHECK(ks::spectrum_identity_residual(bad) > 1e-9);
        }
    }
}
