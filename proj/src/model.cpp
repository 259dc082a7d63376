#include "spinso4/model.hpp"

#include <cmath>

namespace spinso4::model {

namespace {

void require_level(int n) {
    if (n < 1) throw std::invalid_argument("principal quantum number n must be >= 1");
}

}  // namespace

double energy_closed_form(const CoulombParams& p, int n, Branch branch) {
    require_level(n);
    const double n2 = 4.0 * static_cast<double>(n) * n;
    const double k2 = p.k * p.k;
    const double sign = (branch == Branch::plus) ? 1.0 : -1.0;
    return (sign * n2 - k2) / (n2 + k2) * p.M;
}

double nonrel_limit_energy(const CoulombParams& p, int n) {
    require_level(n);
    const double n2 = static_cast<double>(n) * n;
    return p.M - p.k * p.k * p.M / (2.0 * n2);
}

double oscillator_quartic_residual(const OscParams& p, int N, double eps) {
    const double lhs = (eps + p.m) * (eps - p.m) * (eps - p.m);
    const double rhs = 2.0 * p.m * p.omega * p.omega * (N + 2.0) * (N + 2.0);
    return lhs - rhs;
}

double oscillator_energy(const OscParams& p, int N) {
    if (N < 0) throw std::invalid_argument("oscillator level N must be >= 0");

    const double m = p.m;
    const double target = 2.0 * m * p.omega * p.omega * (N + 2.0) * (N + 2.0);
    auto g = [&](double eps) { return (eps + m) * (eps - m) * (eps - m) - target; };

    // g(m) = -target < 0; the upper end overshoots: (2m+2c)(2c)^2 >= 8c^3 = 4*target
    // with c = (2 m omega^2)^(1/3) (N+2)^(2/3).
    double lo = m;
    double hi = m + 2.0 * std::cbrt(2.0 * m * p.omega * p.omega) *
                        std::pow(N + 2.0, 2.0 / 3.0) + 1.0;

    for (int it = 0; it < 200 && (hi - lo) > 1e-6 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }

    // Newton polish; g is strictly increasing on (m, inf).
    double eps = 0.5 * (lo + hi);
    for (int it = 0; it < 60; ++it) {
        const double f = g(eps);
        const double df = (eps - m) * (eps - m) + 2.0 * (eps + m) * (eps - m);
        if (df == 0.0) break;
        const double step = f / df;
        eps -= step;
        if (eps <= lo) eps = 0.5 * (lo + hi);
        if (std::abs(step) <= 1e-15 * eps) break;
    }
    return eps;
}

long constrained_degeneracy(int N) {
    if (N < 0) throw std::invalid_argument("N must be >= 0");
    if (N % 2 != 0) return 0;
    const long q = N / 2;  // each pair (n1,n2) and (n3,n4) sums to q
    return (q + 1) * (q + 1);
}

long coulomb_degeneracy(int n) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    return 2L * n * n;
}

}  // namespace spinso4::model
