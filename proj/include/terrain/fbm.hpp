#pragma once

// Multi-octave fractal synthesis. Octave i runs a cell kernel at frequency
// f0*ratio^i and amplitude h0*p^i over one shared accumulation buffer.
// Pixel centers sample at (j + 0.5)/R map units; when an octave's cell
// count divides the resolution the per-cell lookup-table path is used.
// Path selection depends only on the configuration, never on the requested
// window, so region generation is bit-identical to the full map.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "terrain/errors.hpp"
#include "terrain/kernels2d.hpp"
#include "terrain/lattice.hpp"

namespace terrain::fbm {

enum class Method { zg_paper, zg_separable, generic, perlin3, perlin5 };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::zg_paper: return "zg_paper";
        case Method::zg_separable: return "zg_separable";
        case Method::generic: return "generic";
        case Method::perlin3: return "perlin3";
        case Method::perlin5: return "perlin5";
    }
    return "unknown";
}

inline std::optional<Method> parse_method(std::string_view name) {
    if (name == "zg_paper" || name == "zg") return Method::zg_paper;
    if (name == "zg_separable") return Method::zg_separable;
    if (name == "generic") return Method::generic;
    if (name == "perlin3" || name == "perlin") return Method::perlin3;
    if (name == "perlin5") return Method::perlin5;
    return std::nullopt;
}

struct FbmConfig {
    std::uint64_t seed = 0;
    Method method = Method::zg_paper;
    int octaves = 1;
    int resolution = 256;
    int base_frequency = 2;       // cells across the map at octave 0
    double frequency_ratio = 2.0; // per-octave cell-count multiplier
    double persistence = 0.5;
    double base_amplitude = 1.0;
    std::optional<double> gradient_weight;  // generic kernel only; default h0/100
    bool normalize = false;
    int threads = 1;  // 0 = hardware concurrency

    double gradient_weight_value() const {
        return gradient_weight ? *gradient_weight : base_amplitude / 100.0;
    }

    kernels2d::SmoothstepOrder smoothstep_order() const {
        return method == Method::perlin5 ? kernels2d::SmoothstepOrder::s5
                                         : kernels2d::SmoothstepOrder::s3;
    }

    void validate() const {
        if (octaves < 1 || octaves > 32)
            throw ValidationError("fbm config: octaves must be in [1, 32]");
        if (resolution < 1 || resolution > 16384)
            throw ValidationError("fbm config: resolution must be in [1, 16384]");
        if (base_frequency < 1 || base_frequency > 16384)
            throw ValidationError("fbm config: base_frequency must be in [1, 16384]");
        if (!(frequency_ratio > 1.0) || !std::isfinite(frequency_ratio))
            throw ValidationError("fbm config: frequency_ratio must be > 1");
        if (!(persistence > 0.0 && persistence <= 1.0))
            throw ValidationError("fbm config: persistence must lie in (0, 1]");
        if (!(base_amplitude > 0.0) || !std::isfinite(base_amplitude))
            throw ValidationError("fbm config: base_amplitude must be positive");
        if (gradient_weight && (!(*gradient_weight >= 0.0) || !std::isfinite(*gradient_weight)))
            throw ValidationError("fbm config: gradient_weight must be non-negative");
        if (threads < 0 || threads > 256)
            throw ValidationError("fbm config: threads must be in [0, 256]");
    }
};

struct Heightmap {
    int resolution = 0;  // side length of the stored window
    std::vector<double> data;
    FbmConfig config{};
    std::array<long long, 2> origin{0, 0};  // global pixel offset of data[0]
    std::vector<double> octave_seconds;
    double source_min = 0.0;  // pre-normalization range, when normalized
    double source_max = 0.0;
    bool normalized = false;
    bool constant_source = false;  // normalization was a no-op on a constant map
    std::vector<std::string> warnings;

    double at(int x, int y) const {
        return data[static_cast<std::size_t>(y) * static_cast<std::size_t>(resolution) +
                    static_cast<std::size_t>(x)];
    }
};

// Default corner-data source; tests may substitute (e.g. an all-zero source).
struct LatticeSource {
    static double height(std::uint64_t seed, int octave, long long ix, long long iy) {
        return lattice::corner_height({seed, static_cast<std::uint32_t>(octave), ix, iy});
    }
    static std::array<double, 2> gradient(std::uint64_t seed, int octave, long long ix,
                                          long long iy, double w) {
        return lattice::corner_gradient({seed, static_cast<std::uint32_t>(octave), ix, iy},
                                        lattice::GradientWeight{w});
    }
    static std::array<double, 2> unit_gradient(std::uint64_t seed, int octave, long long ix,
                                               long long iy) {
        return lattice::corner_unit_gradient({seed, static_cast<std::uint32_t>(octave), ix, iy});
    }
};

struct ZeroSource {
    static double height(std::uint64_t, int, long long, long long) { return 0.0; }
    static std::array<double, 2> gradient(std::uint64_t, int, long long, long long, double) {
        return {0.0, 0.0};
    }
    static std::array<double, 2> unit_gradient(std::uint64_t, int, long long, long long) {
        return {0.0, 0.0};
    }
};

namespace detail {

inline long long floor_div(long long a, long long b) {
    long long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

struct OctaveSpec {
    double freq = 0.0;
    double amp = 0.0;
    bool fast = false;   // integer cell count dividing the resolution
    long long cells = 0; // valid when fast
    int ppc = 0;         // pixels per cell, valid when fast
};

inline OctaveSpec octave_spec(const FbmConfig& cfg, int octave) {
    OctaveSpec os;
    os.freq = static_cast<double>(cfg.base_frequency);
    os.amp = cfg.base_amplitude;
    for (int k = 0; k < octave; ++k) {
        os.freq *= cfg.frequency_ratio;
        os.amp *= cfg.persistence;
    }
    const double rounded = std::floor(os.freq);
    if (rounded == os.freq && rounded >= 1.0 &&
        rounded <= static_cast<double>(cfg.resolution) &&
        cfg.resolution % static_cast<long long>(rounded) == 0) {
        os.fast = true;
        os.cells = static_cast<long long>(rounded);
        os.ppc = static_cast<int>(cfg.resolution / os.cells);
    }
    return os;
}

// One cell band of whole cells, all pointers restrict-qualified: the
// accumulator never aliases the lookup tables, but without the qualifier the
// stores force the short column vectors to be reloaded for every cell, which
// at small cells costs as much as the 3-mul/3-add work itself. kPpc pins the
// trip count at compile time for the narrow cells where loop control would
// otherwise dominate; zero means take it from the argument.
template <long long kPpc>
inline void zg_render_band(const kernels2d::ZgCellParams* __restrict__ params,
                           std::size_t cell_begin, std::size_t cell_end,
                           const double* __restrict__ s, const double* __restrict__ cross,
                           long long ppc_arg, std::size_t ry0, int rows_here,
                           double* __restrict__ acc0, std::size_t stride, std::size_t col0) {
    const long long ppc = kPpc > 0 ? kPpc : ppc_arg;
    for (int r = 0; r < rows_here; ++r) {
        const std::size_t row = ry0 + static_cast<std::size_t>(r);
        const double sy = s[row];
        const double* __restrict__ cr = cross + row * static_cast<std::size_t>(ppc);
        double* __restrict__ acc_row = acc0 + static_cast<std::size_t>(r) * stride + col0;
        for (std::size_t c = cell_begin; c < cell_end; ++c) {
            const kernels2d::ZgCellParams& p = params[c];
            double* __restrict__ out =
                acc_row + (c - cell_begin) * static_cast<std::size_t>(ppc);
            for (long long i = 0; i < ppc; ++i)
                out[i] += p.h00 + s[i] * p.dx + sy * p.dy + p.a * cr[i];
        }
    }
}

inline void zg_render_band_dispatch(const kernels2d::ZgCellParams* params,
                                    std::size_t cell_begin, std::size_t cell_end,
                                    const double* s, const double* cross, long long ppc,
                                    std::size_t ry0, int rows_here, double* acc0,
                                    std::size_t stride, std::size_t col0) {
    switch (ppc) {
        case 1:
            zg_render_band<1>(params, cell_begin, cell_end, s, cross, ppc, ry0, rows_here,
                              acc0, stride, col0);
            break;
        case 2:
            zg_render_band<2>(params, cell_begin, cell_end, s, cross, ppc, ry0, rows_here,
                              acc0, stride, col0);
            break;
        case 4:
            zg_render_band<4>(params, cell_begin, cell_end, s, cross, ppc, ry0, rows_here,
                              acc0, stride, col0);
            break;
        case 8:
            zg_render_band<8>(params, cell_begin, cell_end, s, cross, ppc, ry0, rows_here,
                              acc0, stride, col0);
            break;
        default:
            zg_render_band<0>(params, cell_begin, cell_end, s, cross, ppc, ry0, rows_here,
                              acc0, stride, col0);
            break;
    }
}

// Fast path, zero-gradient methods: corner heights prescaled by the octave
// amplitude. Whole cells go through zg_render_band, cells cut by the window
// edge through the span primitive; both evaluate the same row expression, so
// a region window reproduces the corresponding full-image pixels bit for bit.
template <class Source>
void render_zg_fast(const FbmConfig& cfg, int octave, const OctaveSpec& os,
                    std::array<long long, 2> origin, int extent, int row_begin, int row_end,
                    std::span<double> acc, const kernels2d::RowLut& lut) {
    const long long ppc = os.ppc;
    const long long gx0 = origin[0];
    const long long ix_first = floor_div(gx0, ppc);
    const long long ix_last = floor_div(gx0 + extent - 1, ppc);
    const std::size_t ncells = static_cast<std::size_t>(ix_last - ix_first + 1);

    std::vector<double> h_lo(ncells + 1), h_hi(ncells + 1);
    std::vector<kernels2d::ZgCellParams> params(ncells);
    const std::span<const double> s_table(lut.s);

    // A region window may cut the first and last cells short; those take the
    // span primitive, and the run of whole cells in between takes the raw
    // loop below. Column offset of cell i within the window: the head cell
    // starts at zero, later ones at head_len + (i-1)*ppc.
    const std::size_t rx_head = static_cast<std::size_t>(gx0 - ix_first * ppc);
    const std::size_t head_len = static_cast<std::size_t>(
        std::min<long long>(ppc - static_cast<long long>(rx_head), extent));
    const std::size_t tail_len = static_cast<std::size_t>(gx0 + extent - ix_last * ppc);
    const std::size_t full_begin = rx_head == 0 ? 0 : 1;
    const std::size_t full_end =
        tail_len == static_cast<std::size_t>(ppc) ? ncells : ncells - 1;

    int ly = row_begin;
    long long gy = origin[1] + row_begin;
    bool fresh = true;
    while (ly < row_end) {
        const long long iy = floor_div(gy, ppc);
        const long long ry0 = gy - iy * ppc;
        const int rows_here = static_cast<int>(
            std::min<long long>(ppc - ry0, static_cast<long long>(row_end - ly)));

        // Cell rows advance by one, so the previous upper lattice line is
        // this row's lower one; only the new line needs hashing.
        if (fresh)
            for (std::size_t i = 0; i <= ncells; ++i)
                h_lo[i] = os.amp * Source::height(cfg.seed, octave,
                                                  ix_first + static_cast<long long>(i), iy);
        else
            h_lo.swap(h_hi);
        for (std::size_t i = 0; i <= ncells; ++i)
            h_hi[i] = os.amp * Source::height(cfg.seed, octave,
                                              ix_first + static_cast<long long>(i), iy + 1);
        fresh = false;
        for (std::size_t i = 0; i < ncells; ++i)
            params[i] = kernels2d::zg_params(h_lo[i], h_lo[i + 1], h_hi[i], h_hi[i + 1]);

        double* const acc0 = acc.data() + static_cast<std::size_t>(ly) *
                                              static_cast<std::size_t>(extent);
        const std::size_t stride = static_cast<std::size_t>(extent);
        const auto edge_pass = [&](std::size_t cell, std::size_t rx, std::size_t len,
                                   std::size_t col) {
            const kernels2d::ZgCellParams& p = params[cell];
            for (int r = 0; r < rows_here; ++r) {
                const std::size_t row =
                    static_cast<std::size_t>(ry0) + static_cast<std::size_t>(r);
                kernels2d::zg_accumulate_row<double>(
                    s_table.subspan(rx, len), lut.s[row],
                    lut.cross_row(row).subspan(rx, len), p.h00, p.dx, p.dy, p.a,
                    std::span<double>(acc0 + static_cast<std::size_t>(r) * stride + col, len));
            }
        };
        if (ncells == 1) {
            edge_pass(0, rx_head, static_cast<std::size_t>(extent), 0);
        } else {
            if (rx_head != 0) edge_pass(0, rx_head, head_len, 0);
            if (full_end > full_begin)
                zg_render_band_dispatch(params.data(), full_begin, full_end, lut.s.data(),
                                        lut.cross.data(), ppc,
                                        static_cast<std::size_t>(ry0), rows_here, acc0,
                                        stride, full_begin == 0 ? 0 : head_len);
            if (tail_len != static_cast<std::size_t>(ppc))
                edge_pass(ncells - 1, 0, tail_len,
                          head_len + (ncells - 2) * static_cast<std::size_t>(ppc));
        }
        ly += rows_here;
        gy += rows_here;
    }
}

// Fast path, gradient-constrained kernel: per-cell coefficients from
// amplitude-scaled heights and constant-weight gradients. The pixel loop
// walks the whole row and fetches the coefficient block through a running
// cell index, so every sample pays the full 16-term contraction. A
// cell-blocked loop would invite the compiler to hoist the row terms and
// quietly collapse this method's cost to the zero-gradient form, which
// would make the method comparison in the benchmark meaningless.
template <class Source>
void render_generic_fast(const FbmConfig& cfg, int octave, const OctaveSpec& os,
                         std::array<long long, 2> origin, int extent, int row_begin, int row_end,
                         std::span<double> acc, std::span<const double> x_table) {
    const long long ppc = os.ppc;
    const long long gx0 = origin[0];
    const long long ix_first = floor_div(gx0, ppc);
    const long long ix_last = floor_div(gx0 + extent - 1, ppc);
    const std::size_t ncells = static_cast<std::size_t>(ix_last - ix_first + 1);
    const std::size_t rx_start = static_cast<std::size_t>(gx0 - ix_first * ppc);
    const double w = cfg.gradient_weight_value();

    std::vector<kernels2d::Corner2D> lo(ncells + 1), hi(ncells + 1);
    std::vector<kernels2d::GenericCellCoeffs> coeffs(ncells);

    int ly = row_begin;
    long long gy = origin[1] + row_begin;
    bool fresh = true;
    while (ly < row_end) {
        const long long iy = floor_div(gy, ppc);
        const long long ry0 = gy - iy * ppc;
        const int rows_here = static_cast<int>(
            std::min<long long>(ppc - ry0, static_cast<long long>(row_end - ly)));

        if (fresh)
            for (std::size_t i = 0; i <= ncells; ++i) {
                const long long ix = ix_first + static_cast<long long>(i);
                const auto g = Source::gradient(cfg.seed, octave, ix, iy, w);
                lo[i] = {os.amp * Source::height(cfg.seed, octave, ix, iy), g[0], g[1]};
            }
        else
            lo.swap(hi);
        for (std::size_t i = 0; i <= ncells; ++i) {
            const long long ix = ix_first + static_cast<long long>(i);
            const auto g = Source::gradient(cfg.seed, octave, ix, iy + 1, w);
            hi[i] = {os.amp * Source::height(cfg.seed, octave, ix, iy + 1), g[0], g[1]};
        }
        fresh = false;
        for (std::size_t i = 0; i < ncells; ++i)
            coeffs[i] = kernels2d::generic_coeffs({lo[i], lo[i + 1], hi[i], hi[i + 1]});

        for (int r = 0; r < rows_here; ++r) {
            const double y = x_table[static_cast<std::size_t>(ry0) + static_cast<std::size_t>(r)];
            double* acc_row = acc.data() + static_cast<std::size_t>(ly + r) *
                                               static_cast<std::size_t>(extent);
            std::size_t cell = 0;
            std::size_t rx = rx_start;
            for (int lx = 0; lx < extent; ++lx) {
                acc_row[lx] += kernels2d::generic_eval(coeffs[cell], x_table[rx], y);
                if (++rx == static_cast<std::size_t>(ppc)) {
                    rx = 0;
                    ++cell;
                }
            }
        }
        ly += rows_here;
        gy += rows_here;
    }
}

// Fast path, Perlin methods: unit corner gradients prescaled by amplitude,
// space-dependent terms from the shared tables.
template <class Source>
void render_perlin_fast(const FbmConfig& cfg, int octave, const OctaveSpec& os,
                        std::array<long long, 2> origin, int extent, int row_begin, int row_end,
                        std::span<double> acc, std::span<const double> x_table,
                        std::span<const double> s_table) {
    const long long ppc = os.ppc;
    const long long gx0 = origin[0];
    const long long ix_first = floor_div(gx0, ppc);
    const long long ix_last = floor_div(gx0 + extent - 1, ppc);
    const std::size_t ncells = static_cast<std::size_t>(ix_last - ix_first + 1);

    std::vector<double> f_lo(ncells + 1), g_lo(ncells + 1), f_hi(ncells + 1), g_hi(ncells + 1);

    int ly = row_begin;
    long long gy = origin[1] + row_begin;
    bool fresh = true;
    while (ly < row_end) {
        const long long iy = floor_div(gy, ppc);
        const long long ry0 = gy - iy * ppc;
        const int rows_here = static_cast<int>(
            std::min<long long>(ppc - ry0, static_cast<long long>(row_end - ly)));

        if (fresh)
            for (std::size_t i = 0; i <= ncells; ++i) {
                const auto a = Source::unit_gradient(cfg.seed, octave,
                                                     ix_first + static_cast<long long>(i), iy);
                f_lo[i] = os.amp * a[0];
                g_lo[i] = os.amp * a[1];
            }
        else {
            f_lo.swap(f_hi);
            g_lo.swap(g_hi);
        }
        for (std::size_t i = 0; i <= ncells; ++i) {
            const auto b = Source::unit_gradient(cfg.seed, octave,
                                                 ix_first + static_cast<long long>(i), iy + 1);
            f_hi[i] = os.amp * b[0];
            g_hi[i] = os.amp * b[1];
        }
        fresh = false;

        for (int r = 0; r < rows_here; ++r) {
            const std::size_t row = static_cast<std::size_t>(ry0) + static_cast<std::size_t>(r);
            const double y = x_table[row];
            const double sy = s_table[row];
            double* acc_row = acc.data() + static_cast<std::size_t>(ly + r) *
                                               static_cast<std::size_t>(extent);
            for (std::size_t i = 0; i < ncells; ++i) {
                const long long cell_gx = (ix_first + static_cast<long long>(i)) * ppc;
                const long long start = std::max(gx0, cell_gx);
                const long long stop = std::min(gx0 + extent, cell_gx + ppc);
                const std::size_t rx0 = static_cast<std::size_t>(start - cell_gx);
                double* out = acc_row + (start - gx0);
                const double gy_lo = g_lo[i] * y, gy_lo1 = g_lo[i + 1] * y;
                const double gy_hi = g_hi[i] * (y - 1.0), gy_hi1 = g_hi[i + 1] * (y - 1.0);
                for (std::size_t rx = rx0; rx < rx0 + static_cast<std::size_t>(stop - start);
                     ++rx) {
                    const double x = x_table[rx];
                    const double sx = s_table[rx];
                    const double v00 = f_lo[i] * x + gy_lo;
                    const double v10 = f_lo[i + 1] * (x - 1.0) + gy_lo1;
                    const double v01 = f_hi[i] * x + gy_hi;
                    const double v11 = f_hi[i + 1] * (x - 1.0) + gy_hi1;
                    const double h0 = v00 + sx * (v10 - v00);
                    const double h1 = v01 + sx * (v11 - v01);
                    *out++ += h0 + sy * (h1 - h0);
                }
            }
        }
        ly += rows_here;
        gy += rows_here;
    }
}

// General path: per-pixel cell lookup, used whenever the octave's cell
// count is fractional or does not divide the resolution.
template <class Source>
void render_general(const FbmConfig& cfg, int octave, const OctaveSpec& os,
                    std::array<long long, 2> origin, int extent, int row_begin, int row_end,
                    std::span<double> acc) {
    const double R = static_cast<double>(cfg.resolution);
    const auto order = cfg.smoothstep_order();
    const double w = cfg.gradient_weight_value();

    for (int ly = row_begin; ly < row_end; ++ly) {
        const double v = (static_cast<double>(origin[1] + ly) + 0.5) / R * os.freq;
        const long long iy = static_cast<long long>(std::floor(v));
        const double cy = v - static_cast<double>(iy);
        double* acc_row =
            acc.data() + static_cast<std::size_t>(ly) * static_cast<std::size_t>(extent);
        for (int lx = 0; lx < extent; ++lx) {
            const double u = (static_cast<double>(origin[0] + lx) + 0.5) / R * os.freq;
            const long long ix = static_cast<long long>(std::floor(u));
            const double cx = u - static_cast<double>(ix);
            double value = 0.0;
            switch (cfg.method) {
                case Method::zg_paper:
                case Method::zg_separable: {
                    const auto p = kernels2d::zg_params(
                        os.amp * Source::height(cfg.seed, octave, ix, iy),
                        os.amp * Source::height(cfg.seed, octave, ix + 1, iy),
                        os.amp * Source::height(cfg.seed, octave, ix, iy + 1),
                        os.amp * Source::height(cfg.seed, octave, ix + 1, iy + 1));
                    const auto variant = cfg.method == Method::zg_paper
                                             ? kernels2d::ZgVariant::paper
                                             : kernels2d::ZgVariant::separable;
                    value = kernels2d::zg_eval(p, cx, cy, variant, order);
                    break;
                }
                case Method::generic: {
                    const auto c00 = Source::gradient(cfg.seed, octave, ix, iy, w);
                    const auto c10 = Source::gradient(cfg.seed, octave, ix + 1, iy, w);
                    const auto c01 = Source::gradient(cfg.seed, octave, ix, iy + 1, w);
                    const auto c11 = Source::gradient(cfg.seed, octave, ix + 1, iy + 1, w);
                    const auto coeffs = kernels2d::generic_coeffs(
                        {kernels2d::Corner2D{os.amp * Source::height(cfg.seed, octave, ix, iy),
                                             c00[0], c00[1]},
                         kernels2d::Corner2D{os.amp * Source::height(cfg.seed, octave, ix + 1, iy),
                                             c10[0], c10[1]},
                         kernels2d::Corner2D{os.amp * Source::height(cfg.seed, octave, ix, iy + 1),
                                             c01[0], c01[1]},
                         kernels2d::Corner2D{
                             os.amp * Source::height(cfg.seed, octave, ix + 1, iy + 1), c11[0],
                             c11[1]}});
                    value = kernels2d::generic_eval(coeffs, cx, cy);
                    break;
                }
                case Method::perlin3:
                case Method::perlin5: {
                    kernels2d::PerlinCellParams p;
                    p.order = order;
                    const auto a00 = Source::unit_gradient(cfg.seed, octave, ix, iy);
                    const auto a10 = Source::unit_gradient(cfg.seed, octave, ix + 1, iy);
                    const auto a01 = Source::unit_gradient(cfg.seed, octave, ix, iy + 1);
                    const auto a11 = Source::unit_gradient(cfg.seed, octave, ix + 1, iy + 1);
                    p.f = {os.amp * a00[0], os.amp * a10[0], os.amp * a01[0], os.amp * a11[0]};
                    p.g = {os.amp * a00[1], os.amp * a10[1], os.amp * a01[1], os.amp * a11[1]};
                    value = kernels2d::perlin_cell_eval(p, cx, cy);
                    break;
                }
            }
            acc_row[lx] += value;
        }
    }
}

inline int resolve_threads(int requested, int extent) {
    int n = requested == 0 ? static_cast<int>(std::thread::hardware_concurrency()) : requested;
    if (n < 1) n = 1;
    if (n > extent) n = extent;
    return n;
}

}  // namespace detail

// Core generator writing into caller storage (benchmarks reuse buffers).
// Window = [origin, origin+extent)^2 in global pixels; origin must sit on
// an octave-0 cell boundary of the configured map.
template <class Source>
void generate_into_with_source(const FbmConfig& cfg, std::array<long long, 2> origin, int extent,
                               std::span<double> out,
                               std::vector<double>* octave_seconds = nullptr,
                               std::vector<std::string>* warnings = nullptr) {
    cfg.validate();
    if (extent < 1 || extent > 16384)
        throw ValidationError("generate: extent must be in [1, 16384]");
    if (out.size() != static_cast<std::size_t>(extent) * static_cast<std::size_t>(extent))
        throw ValidationError("generate: output buffer size mismatch");
    for (const long long o : origin) {
        if (o < -(1LL << 40) || o > (1LL << 40))
            throw ValidationError("generate: origin out of supported range");
        const long long prod = o * cfg.base_frequency;
        if (((prod % cfg.resolution) + cfg.resolution) % cfg.resolution != 0)
            throw ValidationError(
                "generate: origin must be aligned to octave-0 cell boundaries");
    }

    std::fill(out.begin(), out.end(), 0.0);
    const int nthreads = detail::resolve_threads(cfg.threads, extent);

    for (int octave = 0; octave < cfg.octaves; ++octave) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto os = detail::octave_spec(cfg, octave);
        if (warnings && os.freq > static_cast<double>(cfg.resolution))
            warnings->push_back("octave " + std::to_string(octave) +
                                ": cell size below one pixel (frequency " +
                                std::to_string(os.freq) + " exceeds resolution)");

        const kernels2d::RowLut* lut = nullptr;
        std::vector<double> x_table, s_table;
        if (os.fast) {
            const auto order = cfg.smoothstep_order();
            if (cfg.method == Method::zg_paper || cfg.method == Method::zg_separable) {
                lut = &kernels2d::cached_row_lut(os.ppc, order,
                                                 cfg.method == Method::zg_paper
                                                     ? kernels2d::ZgVariant::paper
                                                     : kernels2d::ZgVariant::separable,
                                                 0.5);
            } else {
                x_table.resize(static_cast<std::size_t>(os.ppc));
                s_table.resize(static_cast<std::size_t>(os.ppc));
                for (int i = 0; i < os.ppc; ++i) {
                    x_table[static_cast<std::size_t>(i)] =
                        (static_cast<double>(i) + 0.5) / static_cast<double>(os.ppc);
                    s_table[static_cast<std::size_t>(i)] =
                        kernels2d::smoothstep(order, x_table[static_cast<std::size_t>(i)]);
                }
            }
        }

        const auto render_band = [&](int row_begin, int row_end) {
            if (!os.fast) {
                detail::render_general<Source>(cfg, octave, os, origin, extent, row_begin, row_end,
                                               out);
            } else if (cfg.method == Method::zg_paper || cfg.method == Method::zg_separable) {
                detail::render_zg_fast<Source>(cfg, octave, os, origin, extent, row_begin, row_end,
                                               out, *lut);
            } else if (cfg.method == Method::generic) {
                detail::render_generic_fast<Source>(cfg, octave, os, origin, extent, row_begin,
                                                    row_end, out, x_table);
            } else {
                detail::render_perlin_fast<Source>(cfg, octave, os, origin, extent, row_begin,
                                                   row_end, out, x_table, s_table);
            }
        };

        if (nthreads == 1) {
            render_band(0, extent);
        } else {
            std::vector<std::thread> workers;
            workers.reserve(static_cast<std::size_t>(nthreads));
            for (int t = 0; t < nthreads; ++t) {
                const int row_begin = static_cast<int>(
                    static_cast<long long>(extent) * t / nthreads);
                const int row_end = static_cast<int>(
                    static_cast<long long>(extent) * (t + 1) / nthreads);
                workers.emplace_back(render_band, row_begin, row_end);
            }
            for (auto& w : workers) w.join();
        }

        if (octave_seconds)
            octave_seconds->push_back(
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
}

inline void generate_into(const FbmConfig& cfg, std::array<long long, 2> origin, int extent,
                          std::span<double> out, std::vector<double>* octave_seconds = nullptr,
                          std::vector<std::string>* warnings = nullptr) {
    generate_into_with_source<LatticeSource>(cfg, origin, extent, out, octave_seconds, warnings);
}

// Affine rescale to [-1, 1]. A constant map is returned unchanged with the
// constant_source flag set; applying the rescale twice is an exact no-op.
inline Heightmap normalize_map(const Heightmap& hm) {
    Heightmap out = hm;
    if (hm.data.empty()) return out;
    double lo = hm.data[0], hi = hm.data[0];
    for (const double v : hm.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    out.source_min = lo;
    out.source_max = hi;
    if (lo == hi) {
        out.constant_source = true;
        return out;
    }
    const double span = hi - lo;
    for (double& v : out.data) v = -1.0 + 2.0 * (v - lo) / span;
    out.normalized = true;
    return out;
}

template <class Source>
Heightmap generate_region_with_source(const FbmConfig& cfg, std::array<long long, 2> origin,
                                      int extent) {
    Heightmap hm;
    hm.config = cfg;
    hm.origin = origin;
    hm.resolution = extent;
    hm.data.resize(static_cast<std::size_t>(extent) * static_cast<std::size_t>(extent));
    generate_into_with_source<Source>(cfg, origin, extent, hm.data, &hm.octave_seconds,
                                      &hm.warnings);
    if (cfg.normalize) return normalize_map(hm);
    return hm;
}

template <class Source>
Heightmap generate_heightmap_with_source(const FbmConfig& cfg) {
    cfg.validate();
    return generate_region_with_source<Source>(cfg, {0, 0}, cfg.resolution);
}

inline Heightmap generate_heightmap(const FbmConfig& cfg) {
    return generate_heightmap_with_source<LatticeSource>(cfg);
}

inline Heightmap generate_region(const FbmConfig& cfg, std::array<long long, 2> origin,
                                 int extent) {
    return generate_region_with_source<LatticeSource>(cfg, origin, extent);
}

}  // namespace terrain::fbm
