// Fractal measurement tools: arc length and box-counting dimension for
// superimposed sinusoid crests, coastline extraction from heightmaps, and the
// log-log regressions used to fit a fractal dimension D.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "terrain/errors.hpp"
#include "terrain/fbm.hpp"

namespace terrain::analysis {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 1.0;
};

// Ordinary least squares y = slope*x + intercept. A constant y series fits
// perfectly, so its r2 is 1 by convention; a constant x series has no defined
// slope and is rejected.
inline LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size())
        throw ValidationError("linear_fit: mismatched series lengths");
    const std::size_t n = xs.size();
    if (n < 2) throw ValidationError("linear_fit: need at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw ValidationError("linear_fit: x values are all equal");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy == 0.0) {
        fit.r2 = 1.0;
        return fit;
    }
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ys[i] - (fit.slope * xs[i] + fit.intercept);
        ssr += r * r;
    }
    fit.r2 = 1.0 - ssr / syy;
    return fit;
}

// H(x) = sum_{i=0}^{N} a^-i sin(f^i x) on [0, 2pi]. The ratio f/a controls how
// much each octave roughens the crest.
struct CrestConfig {
    double a = 2.0;
    double f = 2.0;
    int octaves = 0;  // N; the sum has N + 1 terms
    int panels_per_period = 8;

    void validate() const {
        if (!(a > 1.0) || !std::isfinite(a))
            throw ValidationError("CrestConfig: amplitude base a must be > 1");
        if (!(f > 1.0) || !std::isfinite(f))
            throw ValidationError("CrestConfig: frequency base f must be > 1");
        if (octaves < 0) throw ValidationError("CrestConfig: octaves must be non-negative");
        if (panels_per_period < 8)
            throw ValidationError(
                "CrestConfig: need at least 8 quadrature panels per period of the highest "
                "frequency");
    }
};

inline double crest_height(double x, const CrestConfig& cfg) {
    cfg.validate();
    double sum = 0.0, amp = 1.0, freq = 1.0;
    for (int i = 0; i <= cfg.octaves; ++i) {
        sum += amp * std::sin(freq * x);
        amp /= cfg.a;
        freq *= cfg.f;
    }
    return sum;
}

inline double crest_slope(double x, const CrestConfig& cfg) {
    cfg.validate();
    double sum = 0.0, ratio = 1.0, freq = 1.0;
    for (int i = 0; i <= cfg.octaves; ++i) {
        sum += ratio * std::cos(freq * x);
        ratio *= cfg.f / cfg.a;
        freq *= cfg.f;
    }
    return sum;
}

namespace detail {

// Composite Simpson for integral_0^{2pi} sqrt(1 + H'(x)^2) dx with `panels`
// even subintervals.
inline double crest_length_simpson(const CrestConfig& cfg, long long panels) {
    const double h = 2.0 * std::acos(-1.0) / static_cast<double>(panels);
    const auto integrand = [&](double x) {
        const double s = crest_slope(x, cfg);
        return std::sqrt(1.0 + s * s);
    };
    double sum = integrand(0.0) + integrand(2.0 * std::acos(-1.0));
    for (long long i = 1; i < panels; ++i)
        sum += (i % 2 == 1 ? 4.0 : 2.0) * integrand(static_cast<double>(i) * h);
    return sum * h / 3.0;
}

}  // namespace detail

// Arc length of the crest over one base period, refined by panel doubling to a
// relative target of 1e-6. Simpson error drops 16x per doubling, so failure to
// settle within 1e-4 after two doublings means the integrand is not being
// resolved and the result cannot be trusted.
inline double crest_length(const CrestConfig& cfg) {
    cfg.validate();
    const double highest_periods = std::max(1.0, std::pow(cfg.f, cfg.octaves));
    long long panels =
        static_cast<long long>(std::ceil(static_cast<double>(cfg.panels_per_period) * highest_periods));
    if (panels % 2 != 0) ++panels;
    double prev = detail::crest_length_simpson(cfg, panels);
    double prev_rel = std::numeric_limits<double>::infinity();
    for (int doubling = 1; doubling <= 10; ++doubling) {
        panels *= 2;
        const double cur = detail::crest_length_simpson(cfg, panels);
        const double rel = std::abs(cur - prev) / std::abs(cur);
        if (rel < 1e-6) return cur;
        // A healthy Simpson sequence keeps shrinking; stalling above the
        // coarse 1e-4 level after repeated doublings means divergence.
        if (doubling >= 2 && rel > 1e-4 && rel >= prev_rel)
            throw NumericalError("crest_length: quadrature failed to converge");
        prev = cur;
        prev_rel = rel;
    }
    throw NumericalError("crest_length: quadrature failed to converge");
}

struct CrestDimension {
    double d = 1.0;
    std::vector<std::array<double, 2>> points;  // (epsilon_N = f^-N, L(N))
    double r2 = 1.0;
    bool degenerate = false;
};

// Fits D from lengths measured at shrinking scales epsilon_N = f^-N. The early
// octaves have not yet reached the asymptotic regime, so only the last half of
// the points enters the regression; 1 - slope of log L vs log epsilon gives D.
inline CrestDimension crest_dimension(CrestConfig base, int n_max) {
    base.validate();
    if (n_max < 4) throw ValidationError("crest_dimension: need n_max >= 4");
    CrestDimension out;
    for (int n = 0; n <= n_max; ++n) {
        CrestConfig cfg = base;
        cfg.octaves = n;
        out.points.push_back({std::pow(base.f, -n), crest_length(cfg)});
    }
    double lmin = out.points[0][1], lmax = lmin;
    for (const auto& p : out.points) {
        lmin = std::min(lmin, p[1]);
        lmax = std::max(lmax, p[1]);
    }
    if ((lmax - lmin) / lmax < 1e-12) {
        out.degenerate = true;
        out.d = 1.0;
        return out;
    }
    const int start = (n_max + 1) / 2;
    std::vector<double> xs, ys;
    for (int n = start; n <= n_max; ++n) {
        xs.push_back(std::log(out.points[static_cast<std::size_t>(n)][0]));
        ys.push_back(std::log(out.points[static_cast<std::size_t>(n)][1]));
    }
    const auto fit = linear_fit(xs, ys);
    out.d = 1.0 - fit.slope;
    out.r2 = fit.r2;
    return out;
}

// One-pixel coastline band: land pixels (h >= sea_level) that touch water
// through a 4-neighbourhood.
struct CoastlineMask {
    int resolution = 0;
    std::vector<std::uint8_t> coast;  // row-major, 1 = coastline pixel
    double sea_level = 0.0;
    double land_fraction = 0.0;

    bool at(int x, int y) const {
        return coast[static_cast<std::size_t>(y) * static_cast<std::size_t>(resolution) +
                     static_cast<std::size_t>(x)] != 0;
    }
    long long pixel_count() const {
        long long n = 0;
        for (const auto v : coast) n += v;
        return n;
    }
};

inline CoastlineMask coastline_mask(const fbm::Heightmap& hm, double sea_level) {
    const int R = hm.resolution;
    if (R < 2) throw ValidationError("coastline_mask: resolution must be at least 2");
    if (hm.data.size() != static_cast<std::size_t>(R) * static_cast<std::size_t>(R))
        throw ValidationError("coastline_mask: heightmap data size mismatch");
    const auto land = [&](int x, int y) { return hm.at(x, y) >= sea_level; };
    long long land_count = 0;
    CoastlineMask mask;
    mask.resolution = R;
    mask.sea_level = sea_level;
    mask.coast.assign(hm.data.size(), 0);
    for (int y = 0; y < R; ++y) {
        for (int x = 0; x < R; ++x) {
            if (!land(x, y)) continue;
            ++land_count;
            const bool water_neighbour = (x > 0 && !land(x - 1, y)) || (x + 1 < R && !land(x + 1, y)) ||
                                         (y > 0 && !land(x, y - 1)) || (y + 1 < R && !land(x, y + 1));
            if (water_neighbour)
                mask.coast[static_cast<std::size_t>(y) * static_cast<std::size_t>(R) +
                           static_cast<std::size_t>(x)] = 1;
        }
    }
    const auto total = static_cast<long long>(hm.data.size());
    mask.land_fraction = static_cast<double>(land_count) / static_cast<double>(total);
    if (land_count == 0 || land_count == total)
        throw ValidationError("coastline_mask: map is entirely land or entirely water");
    return mask;
}

// Median sea level guarantees both land and water exist on any non-constant
// map. Upper median for even pixel counts.
inline CoastlineMask coastline_mask(const fbm::Heightmap& hm) {
    if (hm.data.empty()) throw ValidationError("coastline_mask: empty heightmap");
    std::vector<double> sorted = hm.data;
    const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
    std::nth_element(sorted.begin(), mid, sorted.end());
    return coastline_mask(hm, *mid);
}

struct BoxCountReport {
    std::vector<int> sizes;          // epsilon, pixels
    std::vector<long long> counts;   // Nb(epsilon)
    std::vector<double> lengths;     // L(epsilon) = Nb * epsilon
    double d = 0.0;
    double k = 0.0;
    double r2 = 0.0;
};

inline std::vector<int> default_box_sizes() { return {2, 4, 8, 16, 32, 64}; }

// Counts occupied boxes on origin-anchored grids and fits L = k * eps^(1-D).
// The regression runs on (log eps, log Nb), whose slope is -D; the equivalent
// length form log L = log Nb + log eps shares the same residuals and the same
// fitted D and k (its slope is exactly this slope plus one), but its R^2
// degenerates when D is near 1 because log L is then almost constant. The
// count form keeps R^2 meaningful across the whole 1 <= D <= 2 range.
inline BoxCountReport box_count(const CoastlineMask& mask, std::span<const int> sizes) {
    const int R = mask.resolution;
    if (R < 2) throw ValidationError("box_count: invalid mask resolution");
    if (sizes.size() < 3) throw ValidationError("box_count: need at least 3 box sizes to fit");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] < 1 || sizes[i] > R)
            throw ValidationError("box_count: box sizes must lie in [1, resolution]");
        if (i > 0 && sizes[i] <= sizes[i - 1])
            throw ValidationError("box_count: box sizes must be strictly increasing");
    }
    if (mask.pixel_count() == 0) throw ValidationError("box_count: empty coastline mask");

    BoxCountReport report;
    std::vector<double> log_eps, log_counts;
    for (const int eps : sizes) {
        const int boxes_per_axis = (R + eps - 1) / eps;  // partial boxes at the far edge count
        std::vector<std::uint8_t> occupied(
            static_cast<std::size_t>(boxes_per_axis) * static_cast<std::size_t>(boxes_per_axis), 0);
        for (int y = 0; y < R; ++y)
            for (int x = 0; x < R; ++x)
                if (mask.at(x, y))
                    occupied[static_cast<std::size_t>(y / eps) * static_cast<std::size_t>(boxes_per_axis) +
                             static_cast<std::size_t>(x / eps)] = 1;
        long long nb = 0;
        for (const auto v : occupied) nb += v;
        report.sizes.push_back(eps);
        report.counts.push_back(nb);
        report.lengths.push_back(static_cast<double>(nb) * static_cast<double>(eps));
        log_eps.push_back(std::log(static_cast<double>(eps)));
        log_counts.push_back(std::log(static_cast<double>(nb)));
    }
    const auto fit = linear_fit(log_eps, log_counts);
    report.d = -fit.slope;
    report.k = std::exp(fit.intercept);
    report.r2 = fit.r2;
    return report;
}

inline BoxCountReport box_count(const CoastlineMask& mask) {
    const auto sizes = default_box_sizes();
    return box_count(mask, sizes);
}

struct SweepRow {
    int octaves = 0;
    double persistence = 0.0;
    double d = 0.0;
    double r2 = 0.0;
};

// Full pipeline (generate -> median coastline -> box count) per (N, p) pair.
inline std::vector<SweepRow> dimension_vs_octaves(const fbm::FbmConfig& base, int n_min, int n_max,
                                                  std::span<const double> persistences,
                                                  std::span<const int> sizes) {
    if (n_min < 1 || n_max < n_min)
        throw ValidationError("dimension_vs_octaves: need 1 <= n_min <= n_max");
    if (persistences.empty())
        throw ValidationError("dimension_vs_octaves: need at least one persistence value");
    std::vector<SweepRow> rows;
    for (const double p : persistences) {
        for (int n = n_min; n <= n_max; ++n) {
            fbm::FbmConfig cfg = base;
            cfg.octaves = n;
            cfg.persistence = p;
            cfg.validate();
            const auto hm = fbm::generate_heightmap(cfg);
            const auto report = box_count(coastline_mask(hm), sizes);
            rows.push_back({n, p, report.d, report.r2});
        }
    }
    return rows;
}

inline std::vector<SweepRow> dimension_vs_octaves(const fbm::FbmConfig& base, int n_min, int n_max,
                                                  std::span<const double> persistences) {
    const auto sizes = default_box_sizes();
    return dimension_vs_octaves(base, n_min, n_max, persistences, sizes);
}

}  // namespace terrain::analysis
