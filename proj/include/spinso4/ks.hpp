#pragma once

#include <array>
#include <complex>
#include <cstdint>

#include "spinso4/model.hpp"

namespace spinso4::ks {

using Vec3 = std::array<double, 3>;
using Vec4 = std::array<double, 4>;

struct PhasePoint4 {
    Vec4 u{};
    Vec4 P{};
};

struct PhasePoint3 {
    Vec3 x{};
    Vec3 p{};
};

// 2x2 complex matrix, row major.
struct TwoByTwoC {
    std::array<std::complex<double>, 4> a{};

    std::complex<double>& operator()(int r, int c) { return a[2 * r + c]; }
    const std::complex<double>& operator()(int r, int c) const { return a[2 * r + c]; }
};

TwoByTwoC operator*(const TwoByTwoC& x, const TwoByTwoC& y);
TwoByTwoC operator-(const TwoByTwoC& x, const TwoByTwoC& y);
TwoByTwoC adjoint(const TwoByTwoC& x);
double frobenius(const TwoByTwoC& x);

struct MappedParams {
    // 3D hydrogen side
    double M = 0.0;
    double E = 0.0;
    double k = 0.0;
    // 4D oscillator side
    double m = 0.0;
    double omega = 0.0;
    double epsilon = 0.0;
    int N = 0;
    int n = 1;  // (N+2)/2
};

// Quadratic point map: x1 = 2(u1 u3 - u2 u4), x2 = 2(u1 u4 + u2 u3),
// x3 = u1^2 + u2^2 - u3^2 - u4^2. Satisfies |x| = u.u.
Vec3 ks_point(const Vec4& u);

// u4 P1 - u1 P4 + u2 P3 - u3 P2.
double constraint_value(const PhasePoint4& pt);

// 3x4 lift matrix A(u) with A A^T = (u.u) I3; p = A(u) P / (2 u.u).
std::array<Vec4, 3> lift_matrix(const Vec4& u);

// Cotangent lift on the constraint surface. Rejects points whose constraint
// value exceeds 1e-10 * |u| |P| and points with u = 0.
PhasePoint3 ks_lift(const PhasePoint4& pt);

// Gamma = u1 + i u2 s3 - i u3 s2 + i u4 s1; Gamma Gamma^dag = (u.u) I.
TwoByTwoC gamma_of(const Vec4& u);

// B = sigma^mu P_mu with sigma^{1,2,3} the Pauli matrices and sigma^4 = i.
TwoByTwoC b_of(const Vec4& P);

// Relative Frobenius residual of B - 2 Gamma (sigma.p) with p from ks_lift.
double b_identity_residual(const PhasePoint4& pt);

// Same residual with an externally supplied p (for off-constraint controls).
double b_identity_residual(const Vec4& u, const Vec4& P, const Vec3& p);

// Project P onto the constraint surface at u (exact removal of the component
// along the constraint gradient dC/dP).
Vec4 project_momentum(const Vec4& u, const Vec4& P);

// Parameter map of the oscillator -> hydrogen bridge:
// eps solves the quartic; M = (m+eps)/2 + m w^2/16, E = (m+eps)/2 - m w^2/16,
// k = (eps-m)/4, n = (N+2)/2. Rejects odd N.
MappedParams map_oscillator_to_hydrogen(const OscParams& p, int N);

// |4n^2(M-E) - k^2(M+E)| / (4n^2(M-E) + k^2(M+E)).
double spectrum_identity_residual(const MappedParams& mp);

}  // namespace spinso4::ks
