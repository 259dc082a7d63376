#include "spinso4/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>

namespace spinso4::grid {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

bool five_smooth(int n) {
    for (int p : {2, 3, 5})
        while (n % p == 0) n /= p;
    return n == 1;
}

}  // namespace

void GridSpec::validate() const {
    if (points_per_axis < 16 || points_per_axis % 2 != 0 || !five_smooth(points_per_axis))
        throw std::invalid_argument("points_per_axis must be even, >= 16, with factors in {2,3,5}");
    if (!(box_length > 0.0)) throw std::invalid_argument("box_length must be > 0");
}

double GridSpec::dp() const { return two_pi / box_length; }

namespace {

// Offset unitary DFT realized as phase twiddles around a plain FFT.
// With c = n/2, a = c - s_mom, b = c - s_pos:
//   F_k = n^{-3/2} prod_axis e^{-i 2pi a b / n} e^{+i 2pi b k / n}
//         FFT[ f_j e^{+i 2pi a j / n} ]_k
class SpectralTransform {
  public:
    explicit SpectralTransform(const GridSpec& spec) : n_(spec.points_per_axis) {
        const std::size_t vol = spec.volume();
        buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * vol));
        if (!buf_) throw std::bad_alloc();
        fwd_ = fftw_plan_dft_3d(n_, n_, n_, buf_, buf_, FFTW_FORWARD, FFTW_MEASURE);
        bwd_ = fftw_plan_dft_3d(n_, n_, n_, buf_, buf_, FFTW_BACKWARD, FFTW_MEASURE);
        if (!fwd_ || !bwd_) throw std::runtime_error("fftw planning failed");

        const double a = n_ / 2.0 - (spec.momentum_offset ? 0.5 : 0.0);
        const double b = n_ / 2.0 - (spec.position_offset ? 0.5 : 0.0);
        pre_.resize(n_);
        post_.resize(n_);
        for (int j = 0; j < n_; ++j) {
            pre_[j] = std::polar(1.0, two_pi * a * j / n_);
            post_[j] = std::polar(1.0, two_pi * b * j / n_);
        }
        global_ = std::polar(std::pow(static_cast<double>(n_), -1.5),
                             -3.0 * two_pi * a * b / n_);
    }

    ~SpectralTransform() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }

    SpectralTransform(const SpectralTransform&) = delete;
    SpectralTransform& operator=(const SpectralTransform&) = delete;

    void forward(cd* comp) const {
        std::lock_guard<std::mutex> lock(mtx_);
        apply_phase(comp, pre_, cd{1.0, 0.0});
        fftw_execute(fwd_);
        extract_phase(comp, post_, global_);
    }

    void backward(cd* comp) const {
        std::lock_guard<std::mutex> lock(mtx_);
        apply_phase(comp, conj_of(post_), std::conj(global_));
        fftw_execute(bwd_);
        extract_phase(comp, conj_of(pre_), cd{1.0, 0.0});
    }

  private:
    static std::vector<cd> conj_of(const std::vector<cd>& v) {
        std::vector<cd> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::conj(v[i]);
        return out;
    }

    void apply_phase(const cd* src, const std::vector<cd>& ph, cd g) const {
        std::size_t idx = 0;
        for (int z = 0; z < n_; ++z)
            for (int y = 0; y < n_; ++y) {
                const cd zy = g * ph[z] * ph[y];
                for (int x = 0; x < n_; ++x, ++idx) {
                    const cd v = src[idx] * zy * ph[x];
                    buf_[idx][0] = v.real();
                    buf_[idx][1] = v.imag();
                }
            }
    }

    void extract_phase(cd* dst, const std::vector<cd>& ph, cd g) const {
        std::size_t idx = 0;
        for (int z = 0; z < n_; ++z)
            for (int y = 0; y < n_; ++y) {
                const cd zy = g * ph[z] * ph[y];
                for (int x = 0; x < n_; ++x, ++idx)
                    dst[idx] = cd{buf_[idx][0], buf_[idx][1]} * zy * ph[x];
            }
    }

    int n_;
    fftw_complex* buf_;
    fftw_plan fwd_;
    fftw_plan bwd_;
    std::vector<cd> pre_, post_;
    cd global_;
    mutable std::mutex mtx_;
};

const SpectralTransform& transform_for(const GridSpec& spec) {
    struct Key {
        int n;
        bool po, mo;
        bool operator<(const Key& o) const {
            return std::tie(n, po, mo) < std::tie(o.n, o.po, o.mo);
        }
    };
    static std::map<Key, std::unique_ptr<SpectralTransform>> cache;
    static std::mutex m;
    std::lock_guard<std::mutex> lock(m);
    const Key key{spec.points_per_axis, spec.position_offset, spec.momentum_offset};
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<SpectralTransform>(spec)).first;
    return *it->second;
}

}  // namespace

PauliField make_pauli(const GridSpec& s) { return Field(s, 2); }
DiracField make_dirac(const GridSpec& s) { return Field(s, 4); }

DiracField upper_of(const PauliField& f) {
    if (f.ncomp != 2) throw std::invalid_argument("upper_of: expected 2 components");
    DiracField out(f.spec, 4);
    std::copy(f.data.begin(), f.data.end(), out.data.begin());
    return out;
}

PauliField upper_block(const DiracField& f) {
    if (f.ncomp != 4) throw std::invalid_argument("upper_block: expected 4 components");
    PauliField out(f.spec, 2);
    std::copy(f.data.begin(), f.data.begin() + 2 * f.spec.volume(), out.data.begin());
    return out;
}

PauliField lower_block(const DiracField& f) {
    if (f.ncomp != 4) throw std::invalid_argument("lower_block: expected 4 components");
    PauliField out(f.spec, 2);
    std::copy(f.data.begin() + 2 * f.spec.volume(), f.data.end(), out.data.begin());
    return out;
}

void transform_to_momentum(Field& f) {
    const auto& t = transform_for(f.spec);
    for (int c = 0; c < f.ncomp; ++c) t.forward(f.comp(c));
}

void transform_to_position(Field& f) {
    const auto& t = transform_for(f.spec);
    for (int c = 0; c < f.ncomp; ++c) t.backward(f.comp(c));
}

cd inner(const Field& f, const Field& g) {
    if (f.spec != g.spec || f.ncomp != g.ncomp)
        throw std::invalid_argument("inner: field shapes differ");
    cd s{};
    for (std::size_t i = 0; i < f.data.size(); ++i) s += std::conj(f.data[i]) * g.data[i];
    return s;
}

double norm(const Field& f) {
    double s = 0.0;
    for (const cd& v : f.data) s += std::norm(v);
    return std::sqrt(s);
}

void scale(Field& f, cd c) {
    for (cd& v : f.data) v *= c;
}

void axpy(Field& y, cd a, const Field& x) {
    if (y.spec != x.spec || y.ncomp != x.ncomp)
        throw std::invalid_argument("axpy: field shapes differ");
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += a * x.data[i];
}

Field subtract(const Field& f, const Field& g) {
    Field out = f;
    axpy(out, cd{-1.0, 0.0}, g);
    return out;
}

namespace {

Field packet_impl(const GridSpec& spec, const PacketParams& params, int ncomp) {
    spec.validate();
    const double w = params.width;
    if (!(w > 0.0)) throw std::invalid_argument("packet width must be > 0");

    // Position-space tail at the nearest box face must be < 1e-12 of peak.
    const double tail_ratio = std::sqrt(2.0 * std::log(1e12));  // ~7.434
    for (int axis = 0; axis < 3; ++axis) {
        const double dist = 0.5 * spec.box_length - std::abs(params.center[axis]);
        if (std::abs(params.center[axis]) + 6.0 * w >= 0.5 * spec.box_length ||
            dist < tail_ratio * w)
            throw std::invalid_argument("packet tail violates the boundary bound");
    }

    std::array<cd, 4> pol = params.polarization;
    double pnorm = 0.0;
    for (int c = 0; c < ncomp; ++c) pnorm += std::norm(pol[c]);
    if (pnorm == 0.0) {
        std::mt19937_64 rng(params.seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int c = 0; c < ncomp; ++c) pol[c] = cd{gauss(rng), gauss(rng)};
    }

    Field out(spec, ncomp);
    const int n = spec.points_per_axis;
    std::vector<double> env1d[3];
    std::vector<double> phase_arg[3];
    for (int axis = 0; axis < 3; ++axis) {
        env1d[axis].resize(n);
        phase_arg[axis].resize(n);
        for (int i = 0; i < n; ++i) {
            const double x = spec.coord(i) - params.center[axis];
            env1d[axis][i] = std::exp(-x * x / (2.0 * w * w));
            phase_arg[axis][i] = params.boost[axis] * spec.coord(i);
        }
    }

    std::vector<cd> envelope(spec.volume());
    std::size_t idx = 0;
    for (int z = 0; z < n; ++z)
        for (int y = 0; y < n; ++y) {
            const double e_zy = env1d[2][z] * env1d[1][y];
            const double a_zy = phase_arg[2][z] + phase_arg[1][y];
            for (int x = 0; x < n; ++x, ++idx)
                envelope[idx] = std::polar(e_zy * env1d[0][x], a_zy + phase_arg[0][x]);
        }

    for (int c = 0; c < ncomp; ++c) {
        cd* dst = out.comp(c);
        for (std::size_t i = 0; i < envelope.size(); ++i) dst[i] = pol[c] * envelope[i];
    }

    const double nrm = norm(out);
    if (nrm == 0.0) throw std::runtime_error("degenerate packet");
    scale(out, cd{1.0 / nrm, 0.0});
    return out;
}

}  // namespace

DiracField gaussian_packet(const GridSpec& spec, const PacketParams& params) {
    return packet_impl(spec, params, 4);
}

PauliField pauli_packet(const GridSpec& spec, const PacketParams& params) {
    return packet_impl(spec, params, 2);
}

double min_radius(const GridSpec& spec) {
    double best = std::abs(spec.coord(0));
    for (int i = 0; i < spec.points_per_axis; ++i)
        best = std::min(best, std::abs(spec.coord(i)));
    return best * std::sqrt(3.0);
}

double min_momentum(const GridSpec& spec) {
    double best = std::abs(spec.mode(0));
    for (int i = 0; i < spec.points_per_axis; ++i)
        best = std::min(best, std::abs(spec.mode(i)));
    return best * std::sqrt(3.0);
}

void write_field(const std::string& path, const Field& f) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("cannot open " + path + " for writing");
    const char magic[8] = {'S', 'P', 'I', 'N', 'S', 'O', '4', 'F'};
    std::uint32_t version = 1, ncomp = f.ncomp, n = f.spec.points_per_axis;
    std::uint8_t po = f.spec.position_offset, mo = f.spec.momentum_offset;
    std::fwrite(magic, 1, 8, fp);
    std::fwrite(&version, sizeof version, 1, fp);
    std::fwrite(&ncomp, sizeof ncomp, 1, fp);
    std::fwrite(&n, sizeof n, 1, fp);
    std::fwrite(&f.spec.box_length, sizeof(double), 1, fp);
    std::fwrite(&po, 1, 1, fp);
    std::fwrite(&mo, 1, 1, fp);
    std::fwrite(f.data.data(), sizeof(cd), f.data.size(), fp);
    std::fclose(fp);
}

Field read_field(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw std::runtime_error("cannot open " + path);
    char magic[8];
    std::uint32_t version = 0, ncomp = 0, n = 0;
    double box = 0.0;
    std::uint8_t po = 0, mo = 0;
    bool ok = std::fread(magic, 1, 8, fp) == 8 &&
              std::memcmp(magic, "SPINSO4F", 8) == 0 &&
              std::fread(&version, sizeof version, 1, fp) == 1 && version == 1 &&
              std::fread(&ncomp, sizeof ncomp, 1, fp) == 1 &&
              std::fread(&n, sizeof n, 1, fp) == 1 &&
              std::fread(&box, sizeof box, 1, fp) == 1 &&
              std::fread(&po, 1, 1, fp) == 1 && std::fread(&mo, 1, 1, fp) == 1;
    if (!ok) {
        std::fclose(fp);
        throw std::runtime_error("bad field file header: " + path);
    }
    GridSpec spec{static_cast<int>(n), box, po != 0, mo != 0};
    Field f(spec, static_cast<int>(ncomp));
    ok = std::fread(f.data.data(), sizeof(cd), f.data.size(), fp) == f.data.size();
    std::fclose(fp);
    if (!ok) throw std::runtime_error("truncated field file: " + path);
    return f;
}

}  // namespace spinso4::grid
