#include "spinso4/ks.hpp"

#include <cmath>
#include <stdexcept>

namespace spinso4::ks {

namespace {

const std::complex<double> I{0.0, 1.0};

double dot4(const Vec4& a, const Vec4& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

double norm4(const Vec4& a) { return std::sqrt(dot4(a, a)); }

// sigma . p for real p
TwoByTwoC sigma_dot(const Vec3& p) {
    TwoByTwoC s;
    s(0, 0) = p[2];
    s(0, 1) = std::complex<double>(p[0], -p[1]);
    s(1, 0) = std::complex<double>(p[0], p[1]);
    s(1, 1) = -p[2];
    return s;
}

TwoByTwoC scale(const TwoByTwoC& x, double c) {
    TwoByTwoC r;
    for (int i = 0; i < 4; ++i) r.a[i] = c * x.a[i];
    return r;
}

}  // namespace

TwoByTwoC operator*(const TwoByTwoC& x, const TwoByTwoC& y) {
    TwoByTwoC r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            r(i, j) = x(i, 0) * y(0, j) + x(i, 1) * y(1, j);
    return r;
}

TwoByTwoC operator-(const TwoByTwoC& x, const TwoByTwoC& y) {
    TwoByTwoC r;
    for (int i = 0; i < 4; ++i) r.a[i] = x.a[i] - y.a[i];
    return r;
}

TwoByTwoC adjoint(const TwoByTwoC& x) {
    TwoByTwoC r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r(i, j) = std::conj(x(j, i));
    return r;
}

double frobenius(const TwoByTwoC& x) {
    double s = 0.0;
    for (const auto& v : x.a) s += std::norm(v);
    return std::sqrt(s);
}

Vec3 ks_point(const Vec4& u) {
    return {2.0 * (u[0] * u[2] - u[1] * u[3]),
            2.0 * (u[0] * u[3] + u[1] * u[2]),
            u[0] * u[0] + u[1] * u[1] - u[2] * u[2] - u[3] * u[3]};
}

double constraint_value(const PhasePoint4& pt) {
    const Vec4& u = pt.u;
    const Vec4& P = pt.P;
    return u[3] * P[0] - u[0] * P[3] + u[1] * P[2] - u[2] * P[1];
}

std::array<Vec4, 3> lift_matrix(const Vec4& u) {
    return {Vec4{u[0], -u[1], -u[2], u[3]},
            Vec4{u[1], u[0], -u[3], -u[2]},
            Vec4{u[2], u[3], u[0], u[1]}};
}

Vec4 project_momentum(const Vec4& u, const Vec4& P) {
    // dC/dP = (u4, -u3, u2, -u1); |dC/dP|^2 = u.u
    const Vec4 g{u[3], -u[2], u[1], -u[0]};
    const double uu = dot4(u, u);
    if (uu == 0.0) throw std::invalid_argument("project_momentum: u must be nonzero");
    const double c = dot4(g, P) / uu;
    return {P[0] - c * g[0], P[1] - c * g[1], P[2] - c * g[2], P[3] - c * g[3]};
}

PhasePoint3 ks_lift(const PhasePoint4& pt) {
    const double uu = dot4(pt.u, pt.u);
    if (uu == 0.0) throw std::invalid_argument("ks_lift: u must be nonzero");
    const double c = constraint_value(pt);
    const double scale_ref = norm4(pt.u) * norm4(pt.P);
    if (std::abs(c) > 1e-10 * scale_ref)
        throw std::invalid_argument("ks_lift: constraint violated, value = " +
                                    std::to_string(c));
    const auto A = lift_matrix(pt.u);
    PhasePoint3 out;
    out.x = ks_point(pt.u);
    for (int i = 0; i < 3; ++i) out.p[i] = dot4(A[i], pt.P) / (2.0 * uu);
    return out;
}

TwoByTwoC gamma_of(const Vec4& u) {
    TwoByTwoC g;
    g(0, 0) = std::complex<double>(u[0], u[1]);
    g(0, 1) = std::complex<double>(-u[2], u[3]);
    g(1, 0) = std::complex<double>(u[2], u[3]);
    g(1, 1) = std::complex<double>(u[0], -u[1]);
    return g;
}

TwoByTwoC b_of(const Vec4& P) {
    TwoByTwoC b = sigma_dot({P[0], P[1], P[2]});
    b(0, 0) += I * P[3];
    b(1, 1) += I * P[3];
    return b;
}

double b_identity_residual(const Vec4& u, const Vec4& P, const Vec3& p) {
    const TwoByTwoC B = b_of(P);
    const TwoByTwoC rhs = scale(gamma_of(u) * sigma_dot(p), 2.0);
    const double denom = frobenius(B);
    if (denom == 0.0) return frobenius(rhs);
    return frobenius(B - rhs) / denom;
}

double b_identity_residual(const PhasePoint4& pt) {
    const PhasePoint3 lifted = ks_lift(pt);
    return b_identity_residual(pt.u, pt.P, lifted.p);
}

MappedParams map_oscillator_to_hydrogen(const OscParams& p, int N) {
    if (N < 0) throw std::invalid_argument("N must be >= 0");
    if (N % 2 != 0)
        throw std::invalid_argument("odd N violates the n1+n2=n3+n4 constraint sector");
    MappedParams mp;
    mp.m = p.m;
    mp.omega = p.omega;
    mp.N = N;
    mp.n = (N + 2) / 2;
    mp.epsilon = model::oscillator_energy(p, N);
    const double half_sum = 0.5 * (p.m + mp.epsilon);
    const double shift = p.m * p.omega * p.omega / 16.0;
    mp.M = half_sum + shift;
    mp.E = half_sum - shift;
    mp.k = 0.25 * (mp.epsilon - p.m);
    return mp;
}

double spectrum_identity_residual(const MappedParams& mp) {
    const double n2 = 4.0 * static_cast<double>(mp.n) * mp.n;
    const double a = n2 * (mp.M - mp.E);
    const double b = mp.k * mp.k * (mp.M + mp.E);
    return std::abs(a - b) / (a + b);
}

}  // namespace spinso4::ks
