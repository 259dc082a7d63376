#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace spinso4 {

// Natural units hbar = c = 1 throughout.

struct CoulombParams {
    double M = 1.0;  // rest mass, > 0
    double k = 0.0;  // Coulomb strength, >= 0

    CoulombParams() = default;
    CoulombParams(double mass, double coupling) : M(mass), k(coupling) {
        if (!(M > 0.0)) throw std::invalid_argument("CoulombParams: M must be > 0");
        if (!(k >= 0.0)) throw std::invalid_argument("CoulombParams: k must be >= 0");
    }
};

struct OscParams {
    double m = 1.0;      // rest mass, > 0
    double omega = 1.0;  // oscillator frequency, > 0

    OscParams() = default;
    OscParams(double mass, double freq) : m(mass), omega(freq) {
        if (!(m > 0.0)) throw std::invalid_argument("OscParams: m must be > 0");
        if (!(omega > 0.0)) throw std::invalid_argument("OscParams: omega must be > 0");
    }
};

enum class Branch { plus, minus };

enum class LevelSource { closed_form, radial, grid, quartic };

struct LevelRecord {
    int n = 1;        // principal quantum number, >= 1
    int l = -1;       // orbital index, -1 when not applicable
    double energy = 0.0;
    Branch branch = Branch::plus;
    LevelSource source = LevelSource::closed_form;
    int degeneracy = 1;
};

namespace model {

// E^{+-} = (+-4n^2 - k^2)/(4n^2 + k^2) * M
double energy_closed_form(const CoulombParams& p, int n, Branch branch);

// Large-M limit: M - k^2 M / (2 n^2)
double nonrel_limit_energy(const CoulombParams& p, int n);

// Unique real root eps > m of (eps+m)(eps-m)^2 = 2 m omega^2 (N+2)^2.
// The quartic has a spurious double root at eps = -m which is factored out
// analytically; the remaining cubic is solved by bracketed bisection with a
// Newton polish to 1e-14 relative.
double oscillator_energy(const OscParams& p, int N);

// Number of quadruples (n1,n2,n3,n4) of nonnegative integers with
// n1+n2 = n3+n4 and n1+n2+n3+n4 = N. Zero for odd N; ((N+2)/2)^2 for even N.
long constrained_degeneracy(int N);

// 2 n^2: orbital n^2 times the conserved-spin doubling.
long coulomb_degeneracy(int n);

// Residual of the cubic at a candidate root, for diagnostics.
double oscillator_quartic_residual(const OscParams& p, int N, double eps);

}  // namespace model
}  // namespace spinso4
