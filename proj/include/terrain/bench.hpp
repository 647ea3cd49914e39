// Wall-clock benchmark harness for the generators: repeated timed runs into a
// reused buffer (allocation and I/O excluded), speedup ratios against the
// bound-constrained baseline, and a least-squares fit of the cost model
// T = alpha * N * R^2 + beta * 4^N.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "terrain/errors.hpp"
#include "terrain/fbm.hpp"

namespace terrain::bench {

struct BenchRun {
    fbm::Method method = fbm::Method::zg_paper;
    int octaves = 1;
    int resolution = 0;
    int repetitions = 0;
    std::vector<double> seconds;  // one entry per timed repetition, warmup excluded
    double mean = 0.0;
    double median = 0.0;
    double min = 0.0;  // least-noise estimate of the intrinsic cost
    double stddev = 0.0;
};

namespace detail {

inline void summarize(BenchRun& run) {
    const auto n = static_cast<double>(run.seconds.size());
    run.mean = 0.0;
    for (const double t : run.seconds) run.mean += t;
    run.mean /= n;
    std::vector<double> sorted = run.seconds;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    run.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    run.min = sorted.front();
    double ss = 0.0;
    for (const double t : run.seconds) ss += (t - run.mean) * (t - run.mean);
    run.stddev = run.seconds.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
}

}  // namespace detail

// Times `repetitions` full generations of cfg into one reused buffer. The
// first `warmup` generations are discarded so cache and page-fault effects do
// not contaminate the first sample.
inline BenchRun run_bench(const fbm::FbmConfig& cfg, int repetitions, int warmup = 1) {
    static_assert(std::chrono::steady_clock::is_steady,
                  "benchmarking requires a monotonic clock");
    cfg.validate();
    if (repetitions < 3) throw ValidationError("run_bench: need at least 3 repetitions");
    if (warmup < 0) throw ValidationError("run_bench: warmup must be non-negative");

    BenchRun run;
    run.method = cfg.method;
    run.octaves = cfg.octaves;
    run.resolution = cfg.resolution;
    run.repetitions = repetitions;
    std::vector<double> buffer(static_cast<std::size_t>(cfg.resolution) *
                               static_cast<std::size_t>(cfg.resolution));
    for (int i = 0; i < warmup; ++i) fbm::generate_into(cfg, {0, 0}, cfg.resolution, buffer);
    run.seconds.reserve(static_cast<std::size_t>(repetitions));
    for (int i = 0; i < repetitions; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fbm::generate_into(cfg, {0, 0}, cfg.resolution, buffer);
        const auto t1 = std::chrono::steady_clock::now();
        run.seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    detail::summarize(run);
    return run;
}

struct SpeedupRow {
    fbm::Method method = fbm::Method::zg_paper;
    int octaves = 0;
    int resolution = 0;
    double seconds = 0.0;           // median of the method's run
    double baseline_seconds = 0.0;  // median of the baseline at the same (N, R)
    double speedup = 0.0;           // seconds / baseline_seconds
};

struct SpeedupReport {
    fbm::Method baseline = fbm::Method::zg_paper;
    std::vector<SpeedupRow> rows;
};

// Ratio S_m = T_m / T_baseline per (N, R) cell, medians compared. Every
// non-baseline run must have a matching baseline run.
inline SpeedupReport speedups_vs(std::span<const BenchRun> runs,
                                 fbm::Method baseline = fbm::Method::zg_paper) {
    SpeedupReport report;
    report.baseline = baseline;
    for (const auto& run : runs) {
        if (run.method == baseline) continue;
        const BenchRun* base = nullptr;
        for (const auto& candidate : runs)
            if (candidate.method == baseline && candidate.octaves == run.octaves &&
                candidate.resolution == run.resolution)
                base = &candidate;
        if (base == nullptr)
            throw ValidationError("speedups_vs: missing baseline run for " +
                                  std::string(fbm::method_name(run.method)) + " N=" +
                                  std::to_string(run.octaves));
        if (!(run.median > 0.0) || !(base->median > 0.0))
            throw ValidationError("speedups_vs: non-positive timings");
        report.rows.push_back({run.method, run.octaves, run.resolution, run.median, base->median,
                               run.median / base->median});
    }
    return report;
}

struct CostModelFit {
    double alpha = 0.0;  // per-pixel term coefficient (N * R^2)
    double beta = 0.0;   // per-corner term coefficient (4^N)
    double r2 = 0.0;
};

// Least squares for T = alpha * N * R^2 + beta * 4^N over the given runs
// (median times). Two-parameter normal equations; needs at least three runs
// spanning more than one (N, R) shape.
inline CostModelFit fit_cost_model(std::span<const BenchRun> runs) {
    if (runs.size() < 3) throw ValidationError("fit_cost_model: need at least 3 runs");
    double suu = 0.0, suv = 0.0, svv = 0.0, sut = 0.0, svt = 0.0;
    double st = 0.0, stt = 0.0;
    for (const auto& run : runs) {
        const double u = static_cast<double>(run.octaves) * static_cast<double>(run.resolution) *
                         static_cast<double>(run.resolution);
        const double v = std::pow(4.0, run.octaves);
        const double t = run.median;
        suu += u * u;
        suv += u * v;
        svv += v * v;
        sut += u * t;
        svt += v * t;
        st += t;
        stt += t * t;
    }
    const double det = suu * svv - suv * suv;
    if (std::abs(det) < 1e-12 * std::max(suu, svv) * std::max(suu, svv) || det == 0.0)
        throw ValidationError("fit_cost_model: runs do not span distinct (N, R) shapes");
    CostModelFit fit;
    fit.alpha = (svv * sut - suv * svt) / det;
    fit.beta = (suu * svt - suv * sut) / det;
    double ssr = 0.0;
    for (const auto& run : runs) {
        const double u = static_cast<double>(run.octaves) * static_cast<double>(run.resolution) *
                         static_cast<double>(run.resolution);
        const double v = std::pow(4.0, run.octaves);
        const double r = run.median - (fit.alpha * u + fit.beta * v);
        ssr += r * r;
    }
    const double n = static_cast<double>(runs.size());
    const double sst = stt - st * st / n;
    fit.r2 = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
    return fit;
}

inline void write_bench_csv(std::ostream& out, std::span<const BenchRun> runs) {
    out << "method,octaves,resolution,repetitions,mean_seconds,median_seconds,min_seconds,"
           "stddev_seconds\n";
    char buf[160];
    for (const auto& run : runs) {
        std::snprintf(buf, sizeof(buf), "%s,%d,%d,%d,%.9g,%.9g,%.9g,%.9g\n",
                      fbm::method_name(run.method), run.octaves, run.resolution, run.repetitions,
                      run.mean, run.median, run.min, run.stddev);
        out << buf;
    }
}

inline void write_speedup_csv(std::ostream& out, const SpeedupReport& report) {
    out << "method,octaves,resolution,median_seconds,baseline_seconds,speedup\n";
    char buf[160];
    for (const auto& row : report.rows) {
        std::snprintf(buf, sizeof(buf), "%s,%d,%d,%.9g,%.9g,%.6g\n", fbm::method_name(row.method),
                      row.octaves, row.resolution, row.seconds, row.baseline_seconds, row.speedup);
        out << buf;
    }
}

}  // namespace terrain::bench
