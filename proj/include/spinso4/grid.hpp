#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace spinso4::grid {

using cd = std::complex<double>;

struct GridSpec {
    int points_per_axis = 32;
    double box_length = 16.0;
    bool position_offset = true;  // half-spacing shift, removes the r = 0 sample
    bool momentum_offset = true;  // half-mode shift, removes the p = 0 mode

    void validate() const;

    double h() const { return box_length / points_per_axis; }
    double dp() const;

    double coord(int i) const {
        return (i - points_per_axis / 2 + (position_offset ? 0.5 : 0.0)) * h();
    }
    double mode(int i) const {
        return (i - points_per_axis / 2 + (momentum_offset ? 0.5 : 0.0)) * dp();
    }

    std::size_t volume() const {
        const std::size_t n = points_per_axis;
        return n * n * n;
    }

    bool operator==(const GridSpec& o) const = default;
};

// Complex lattice field with ncomp spin components, component-major storage.
// Within a component the layout is x-fastest: idx = (z*n + y)*n + x.
struct Field {
    GridSpec spec;
    int ncomp = 0;
    std::vector<cd> data;

    Field() = default;
    Field(const GridSpec& s, int comps)
        : spec(s), ncomp(comps), data(comps * s.volume(), cd{}) {}

    cd* comp(int c) { return data.data() + c * spec.volume(); }
    const cd* comp(int c) const { return data.data() + c * spec.volume(); }
};

// A PauliField holds the 2-spinor blocks; a DiracField stacks upper (0,1)
// and lower (2,3) Pauli components.
using PauliField = Field;
using DiracField = Field;

PauliField make_pauli(const GridSpec& s);
DiracField make_dirac(const GridSpec& s);

DiracField upper_of(const PauliField& f);  // embed as (phi, 0)
PauliField upper_block(const DiracField& f);
PauliField lower_block(const DiracField& f);

// Unitary offset discrete Fourier transforms, in place, all components.
void transform_to_momentum(Field& f);
void transform_to_position(Field& f);

cd inner(const Field& f, const Field& g);
double norm(const Field& f);
void scale(Field& f, cd c);
void axpy(Field& y, cd a, const Field& x);  // y += a x
Field subtract(const Field& f, const Field& g);

struct PacketParams {
    std::array<double, 3> center{0.0, 0.0, 0.0};
    double width = 1.0;
    std::array<double, 3> boost{0.0, 0.0, 0.0};
    std::array<cd, 4> polarization{};  // all-zero -> drawn from the seed
    std::uint64_t seed = 0;
};

// Normalized localized test spinor; rejects packets whose Gaussian tail at
// the box boundary exceeds 1e-12 of the peak. Deterministic given the seed.
DiracField gaussian_packet(const GridSpec& spec, const PacketParams& params);

// 2-component variant (upper-block probes).
PauliField pauli_packet(const GridSpec& spec, const PacketParams& params);

// Smallest |r| over grid points and smallest |p| over modes.
double min_radius(const GridSpec& spec);
double min_momentum(const GridSpec& spec);

// Flat binary container: header (dims, box, offsets, component count) then
// little-endian complex doubles in row-major order.
void write_field(const std::string& path, const Field& f);
Field read_field(const std::string& path);

}  // namespace spinso4::grid
