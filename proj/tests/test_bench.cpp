#include "terrain/bench.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <sstream>
#include <vector>

using namespace terrain;
using namespace terrain::bench;

namespace {

BenchRun synthetic_run(fbm::Method method, int octaves, int resolution, double median) {
    BenchRun run;
    run.method = method;
    run.octaves = octaves;
    run.resolution = resolution;
    run.repetitions = 3;
    run.seconds = {median, median, median};
    detail::summarize(run);
    return run;
}

}  // namespace

TEST(Clock, SteadyClockIsMonotonic) { EXPECT_TRUE(std::chrono::steady_clock::is_steady); }

TEST(RunBench, CollectsRequestedRepetitions) {
    fbm::FbmConfig cfg;
    cfg.resolution = 32;
    cfg.octaves = 2;
    const auto run = run_bench(cfg, 5);
    EXPECT_EQ(run.repetitions, 5);
    ASSERT_EQ(run.seconds.size(), 5u);
    for (const double t : run.seconds) EXPECT_GT(t, 0.0);
    EXPECT_EQ(run.method, fbm::Method::zg_paper);
    EXPECT_EQ(run.resolution, 32);
}

TEST(RunBench, SummaryMatchesSamples) {
    fbm::FbmConfig cfg;
    cfg.resolution = 16;
    const auto run = run_bench(cfg, 4);
    double mean = 0.0;
    for (const double t : run.seconds) mean += t;
    mean /= 4.0;
    EXPECT_DOUBLE_EQ(run.mean, mean);
    std::vector<double> sorted = run.seconds;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_DOUBLE_EQ(run.median, 0.5 * (sorted[1] + sorted[2]));
    EXPECT_DOUBLE_EQ(run.min, sorted.front());
    double ss = 0.0;
    for (const double t : run.seconds) ss += (t - mean) * (t - mean);
    EXPECT_DOUBLE_EQ(run.stddev, std::sqrt(ss / 3.0));
}

TEST(RunBench, RejectsTooFewRepetitions) {
    fbm::FbmConfig cfg;
    cfg.resolution = 8;
    EXPECT_THROW(run_bench(cfg, 2), ValidationError);
    EXPECT_THROW(run_bench(cfg, 5, -1), ValidationError);
}

TEST(Speedups, RatiosAgainstMatchingBaseline) {
    std::vector<BenchRun> runs;
    runs.push_back(synthetic_run(fbm::Method::zg_paper, 4, 256, 0.010));
    runs.push_back(synthetic_run(fbm::Method::perlin3, 4, 256, 0.013));
    runs.push_back(synthetic_run(fbm::Method::generic, 4, 256, 0.021));
    const auto report = speedups_vs(runs);
    ASSERT_EQ(report.rows.size(), 2u);
    EXPECT_EQ(report.rows[0].method, fbm::Method::perlin3);
    EXPECT_NEAR(report.rows[0].speedup, 1.3, 1e-12);
    EXPECT_NEAR(report.rows[1].speedup, 2.1, 1e-12);
    for (const auto& row : report.rows) EXPECT_GT(row.speedup, 0.0);
}

TEST(Speedups, MissingBaselineThrows) {
    std::vector<BenchRun> runs;
    runs.push_back(synthetic_run(fbm::Method::perlin3, 4, 256, 0.013));
    EXPECT_THROW(speedups_vs(runs), ValidationError);
    runs.push_back(synthetic_run(fbm::Method::zg_paper, 3, 256, 0.010));  // octaves mismatch
    EXPECT_THROW(speedups_vs(runs), ValidationError);
}

TEST(CostModel, RecoversExactSyntheticCoefficients) {
    const double alpha = 3.5e-9, beta = 2.0e-7;
    std::vector<BenchRun> runs;
    for (const int n : {1, 2, 4, 6, 8}) {
        for (const int r : {128, 256, 512}) {
            const double t = alpha * n * static_cast<double>(r) * r + beta * std::pow(4.0, n);
            runs.push_back(synthetic_run(fbm::Method::zg_paper, n, r, t));
        }
    }
    const auto fit = fit_cost_model(runs);
    EXPECT_NEAR(fit.alpha, alpha, 1e-9 * alpha);
    EXPECT_NEAR(fit.beta, beta, 1e-9 * beta);
    EXPECT_GT(fit.r2, 1.0 - 1e-12);
}

TEST(CostModel, RejectsDegenerateInputs) {
    std::vector<BenchRun> two{synthetic_run(fbm::Method::zg_paper, 1, 64, 0.1),
                              synthetic_run(fbm::Method::zg_paper, 2, 64, 0.2)};
    EXPECT_THROW(fit_cost_model(two), ValidationError);
    std::vector<BenchRun> same{synthetic_run(fbm::Method::zg_paper, 2, 64, 0.1),
                               synthetic_run(fbm::Method::zg_paper, 2, 64, 0.1),
                               synthetic_run(fbm::Method::zg_paper, 2, 64, 0.1)};
    EXPECT_THROW(fit_cost_model(same), ValidationError);
}

TEST(Csv, BenchAndSpeedupHeaders) {
    std::vector<BenchRun> runs{synthetic_run(fbm::Method::zg_paper, 2, 64, 0.5),
                               synthetic_run(fbm::Method::perlin3, 2, 64, 0.625)};
    std::ostringstream bench_out;
    write_bench_csv(bench_out, runs);
    EXPECT_EQ(bench_out.str(),
              "method,octaves,resolution,repetitions,mean_seconds,median_seconds,min_seconds,"
              "stddev_seconds\n"
              "zg_paper,2,64,3,0.5,0.5,0.5,0\n"
              "perlin3,2,64,3,0.625,0.625,0.625,0\n");

    std::ostringstream speedup_out;
    write_speedup_csv(speedup_out, speedups_vs(runs));
    EXPECT_EQ(speedup_out.str(),
              "method,octaves,resolution,median_seconds,baseline_seconds,speedup\n"
              "perlin3,2,64,0.625,0.5,1.25\n");
}
