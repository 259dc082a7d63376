#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <random>

#include "spinso4/grid.hpp"

using namespace spinso4;
using grid::cd;
using grid::Field;
using grid::GridSpec;

namespace {

Field random_field(const GridSpec& spec, int ncomp, std::uint64_t seed) {
    Field f(spec, ncomp);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    for (auto& z : f.data) z = cd{gauss(rng), gauss(rng)};
    return f;
}

}  // namespace

TEST_CASE("grid validation") {
    CHECK_NOTHROW(GridSpec{16, 8.0}.validate());
    CHECK_NOTHROW(GridSpec{48, 8.0}.validate());
    CHECK_THROWS(GridSpec{17, 8.0}.validate());   // odd
    CHECK_THROWS(GridSpec{8, 8.0}.validate());    // too small
    CHECK_THROWS(GridSpec{28, 8.0}.validate());   // factor 7
    CHECK_THROWS(GridSpec{16, 0.0}.validate());
}

TEST_CASE("offset coordinates and modes exclude the origin") {
    const GridSpec spec{16, 8.0};
    for (int i = 0; i < 16; ++i) {
        CHECK(std::abs(spec.coord(i)) >= 0.25 * spec.h());
        CHECK(std::abs(spec.mode(i)) >= 0.25 * spec.dp());
    }
    CHECK(grid::min_radius(spec) == doctest::Approx(std::sqrt(3.0) * spec.h() / 2));
    CHECK(grid::min_momentum(spec) ==
          doctest::Approx(std::sqrt(3.0) * spec.dp() / 2));

    GridSpec plain = spec;
    plain.position_offset = false;
    CHECK(grid::min_radius(plain) == 0.0);
}

TEST_CASE("transform is unitary and invertible") {
    const GridSpec spec{16, 5.0};
    Field f = random_field(spec, 2, 42);
    const Field orig = f;
    const double n0 = grid::norm(f);
    grid::transform_to_momentum(f);
    CHECK(grid::norm(f) == doctest::Approx(n0).epsilon(1e-13));
    grid::transform_to_position(f);
    CHECK(grid::norm(grid::subtract(f, orig)) <= 1e-12 * n0);
}

TEST_CASE("transform preserves inner products") {
    const GridSpec spec{20, 5.0};
    Field f = random_field(spec, 1, 1);
    Field g = random_field(spec, 1, 2);
    const cd before = grid::inner(f, g);
    CHECK(std::abs(grid::inner(f, g) - std::conj(grid::inner(g, f))) <= 1e-13);
    CHECK(std::abs(before) <= grid::norm(f) * grid::norm(g) * (1.0 + 1e-13));
    grid::transform_to_momentum(f);
    grid::transform_to_momentum(g);
    CHECK(std::abs(grid::inner(f, g) - before) <=
          1e-12 * grid::norm(f) * grid::norm(g));
}

TEST_CASE("plane wave at an exact offset mode maps to a delta") {
    const GridSpec spec{16, 4.0};
    const int n = spec.points_per_axis;
    const int kx = 5, ky = 9, kz = 3;
    Field f(spec, 1);
    std::size_t idx = 0;
    for (int z = 0; z < n; ++z)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x, ++idx) {
                const double phase = spec.mode(kx) * spec.coord(x) +
                                     spec.mode(ky) * spec.coord(y) +
                                     spec.mode(kz) * spec.coord(z);
                f.data[idx] = std::polar(1.0, phase);
            }
    const double n0 = grid::norm(f);
    grid::transform_to_momentum(f);
    const std::size_t target = (static_cast<std::size_t>(kz) * n + ky) * n + kx;
    CHECK(std::abs(f.data[target]) == doctest::Approx(n0).epsilon(1e-12));
    f.data[target] = 0.0;
    CHECK(grid::norm(f) <= 1e-11 * n0);
}

TEST_CASE("packets are deterministic, normalized, and localized") {
    const GridSpec spec{24, 12.0};
    grid::PacketParams prm;
    prm.center = {0.4, -0.3, 0.2};
    prm.width = 0.6;
    prm.boost = {1.0, 0.0, -0.5};
    prm.seed = 99;

    const auto a = grid::gaussian_packet(spec, prm);
    const auto b = grid::gaussian_packet(spec, prm);
    CHECK(a.data == b.data);
    CHECK(grid::norm(a) == doctest::Approx(1.0).epsilon(1e-12));

    grid::PacketParams other = prm;
    other.seed = 100;
    const auto c = grid::gaussian_packet(spec, other);
    CHECK(grid::norm(grid::subtract(a, c)) > 1e-3);

    // boundary tail guard
    grid::PacketParams wide = prm;
    wide.width = 4.0;
    CHECK_THROWS(grid::gaussian_packet(spec, wide));
    grid::PacketParams shifted = prm;
    shifted.center = {5.9, 0.0, 0.0};
    CHECK_THROWS(grid::gaussian_packet(spec, shifted));
}

TEST_CASE("boosted packet peaks at the boost momentum") {
    const GridSpec spec{32, 16.0};
    grid::PacketParams prm;
    prm.width = 1.0;
    prm.boost = {1.5, -0.8, 0.0};
    prm.seed = 5;
    auto f = grid::gaussian_packet(spec, prm);
    grid::transform_to_momentum(f);
    const int n = spec.points_per_axis;
    double best = -1.0;
    std::array<double, 3> peak{};
    std::size_t idx = 0;
    for (int z = 0; z < n; ++z)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x, ++idx) {
                double mag = 0.0;
                for (int c = 0; c < 4; ++c)
                    mag += std::norm(f.comp(c)[idx]);
                if (mag > best) {
                    best = mag;
                    peak = {spec.mode(x), spec.mode(y), spec.mode(z)};
                }
            }
    for (int a = 0; a < 3; ++a)
        CHECK(std::abs(peak[a] - prm.boost[a]) <= spec.dp());
}

TEST_CASE("field serialization round trip") {
    const GridSpec spec{16, 6.0};
    const Field f = random_field(spec, 4, 7);
    const std::string path = "test_grid_roundtrip.bin";
    grid::write_field(path, f);
    const Field g = grid::read_field(path);
    std::remove(path.c_str());
    CHECK(g.spec == f.spec);
    CHECK(g.ncomp == f.ncomp);
    CHECK(g.data == f.data);
}

TEST_CASE("block embedding and extraction") {
    const GridSpec spec{16, 6.0};
    const Field phi = random_field(spec, 2, 3);
    const auto psi = grid::upper_of(phi);
    CHECK(psi.ncomp == 4);
    CHECK(grid::norm(grid::subtract(grid::upper_block(psi), phi)) == 0.0);
    CHECK(grid::norm(grid::lower_block(psi)) == 0.0);
}
