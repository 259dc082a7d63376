#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spinso4/model.hpp"

namespace spinso4::radial {

enum class PotentialKind { coulomb, oscillator };

struct RadialProblem {
    int dimension = 3;           // 3 or 4
    int lambda = 0;              // l for D=3, hyperangular lambda for D=4
    PotentialKind potential = PotentialKind::coulomb;
    double coupling = 0.0;       // k for coulomb, omega for oscillator
    double mass = 1.0;           // M or m
    double spacing = 0.02;       // base grid spacing h (Richardson pairs h with h/2)
    double r_max = 0.0;          // 0 -> choose adaptively

    double potential_at(double rho) const;
    double centrifugal_coefficient() const;  // (lambda + (D-2)/2)^2 - 1/4
    void validate() const;
};

struct ScfStep {
    double energy_guess;
    double linear_eigenvalue;
    double defect;  // W(E) - (E^2 - mass^2)
};

struct SCFTrace {
    std::vector<ScfStep> steps;
    bool converged = false;
    std::string message;
};

struct ScfResult {
    bool found = false;
    double energy = 0.0;
    SCFTrace trace;
};

// Sturm-sequence bisection for the (index+1)-th lowest eigenvalue of a
// symmetric tridiagonal matrix (diag d, off-diagonal e, e.size() = d.size()-1).
double tridiag_eigenvalue(const std::vector<double>& d, const std::vector<double>& e,
                          int index);

// Eigenvector by inverse iteration for an isolated tridiagonal eigenvalue.
std::vector<double> tridiag_eigenvector(const std::vector<double>& d,
                                        const std::vector<double>& e, double lambda);

// (n_r+1)-th lowest eigenvalue W of
//   -chi'' + [(lambda+(D-2)/2)^2 - 1/4]/rho^2 chi + (E + mass) V(rho) chi = W chi
// on the offset uniform grid rho_i = (i+1/2) h with Dirichlet ends, Richardson
// extrapolated over spacings (h, h/2, h/4). With check_tail, throws if the
// eigenfunction tail at r_max is not negligible (disable for box-filling
// modes).
double linear_radial_eigenvalue(const RadialProblem& prob, double energy_parameter,
                                int n_r, bool check_tail = true);

// Root of g(E) = linear_radial_eigenvalue(prob, E, n_r) - (E^2 - mass^2) by
// bracketed bisection/secant; |g| <= 1e-10 at exit. Domain cutoff r_max is
// doubled until the eigenfunction tail is resolved. A missing sign change in
// the bracket is reported as found = false, not as an error.
ScfResult solve_self_consistent(const RadialProblem& prob, int n_r);

// Solves E(n, l) for all n <= n_max, l < n (n_r = n - 1 - l).
std::vector<LevelRecord> degeneracy_scan(const CoulombParams& p, int n_max,
                                         double spacing = 0.02);

}  // namespace spinso4::radial
