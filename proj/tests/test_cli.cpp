// End-to-end tests driving the installed CLI binary. The test runner provides
// the binary location in TERRAIN_CLI (set by CTest); file outputs go to a
// scratch directory under /tmp.
#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/stat.h>
#include <sys/wait.h>

#include "terrain/io.hpp"

namespace {

std::string cli_path() {
    const char* env = std::getenv("TERRAIN_CLI");
    if (env != nullptr) return env;
    return "./terrain";  // manual runs from the build directory
}

int run_cli(const std::string& args) {
    const std::string cmd = cli_path() + " " + args;
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

struct ScratchDir {
    std::string path;
    ScratchDir() {
        char tmpl[] = "/tmp/terrain_cli_XXXXXX";
        path = mkdtemp(tmpl);
    }
    ~ScratchDir() {
        [[maybe_unused]] const int rc = std::system(("rm -rf " + path).c_str());
    }
    std::string file(const std::string& name) const { return path + "/" + name; }
};

}  // namespace

TEST(Cli, GenerateCsvIsDeterministic) {
    ScratchDir dir;
    const std::string flags = "generate --method zg --size 4 --octaves 1 --seed 7 --format csv";
    ASSERT_EQ(run_cli(flags + " --out " + dir.file("a.csv") + " >/dev/null"), 0);
    ASSERT_EQ(run_cli(flags + " --out " + dir.file("b.csv") + " >/dev/null"), 0);
    const std::string a = slurp(dir.file("a.csv"));
    EXPECT_EQ(a, slurp(dir.file("b.csv")));

    std::istringstream in(a);
    const auto m = terrain::io::read_csv_matrix(in);
    EXPECT_EQ(m.width, 4);
    EXPECT_EQ(m.height, 4);
    EXPECT_EQ(m.values.size(), 16u);
}

TEST(Cli, GradientMapsShareDimensionsWithHeightImage) {
    ScratchDir dir;
    ASSERT_EQ(run_cli("generate --size 16 --octaves 2 --seed 3 --gradient-maps --out " +
                      dir.file("h.pgm") + " >/dev/null"),
              0);
    for (const char* name : {"h.pgm", "h_grad.pgm", "h_hess.pgm"}) {
        std::ifstream in(dir.file(name), std::ios::binary);
        ASSERT_TRUE(in.good()) << name;
        const auto img = terrain::io::read_pgm16(in);
        EXPECT_EQ(img.width, 16) << name;
        EXPECT_EQ(img.height, 16) << name;
    }
}

TEST(Cli, RegionSharesPixelsWithFullMap) {
    ScratchDir dir;
    const std::string common = "generate --method generic --size 64 --octaves 3 --seed 11 --format csv ";
    ASSERT_EQ(run_cli(common + "--out " + dir.file("full.csv") + " >/dev/null"), 0);
    ASSERT_EQ(run_cli(common + "--origin 32,0 --extent 32 --out " + dir.file("region.csv") +
                      " >/dev/null"),
              0);
    std::istringstream full_in(slurp(dir.file("full.csv")));
    std::istringstream region_in(slurp(dir.file("region.csv")));
    const auto full = terrain::io::read_csv_matrix(full_in);
    const auto region = terrain::io::read_csv_matrix(region_in);
    ASSERT_EQ(full.width, 64);
    ASSERT_EQ(region.width, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            EXPECT_EQ(region.values[static_cast<std::size_t>(y) * 32 + x],
                      full.values[static_cast<std::size_t>(y) * 64 + 32 + x])
                << x << "," << y;
}

TEST(Cli, ObjExportHasExpectedCounts) {
    ScratchDir dir;
    ASSERT_EQ(run_cli("generate --size 2 --seed 1 --out " + dir.file("m.pgm") + " --obj " +
                      dir.file("m.obj") + " >/dev/null"),
              0);
    std::ifstream in(dir.file("m.obj"));
    const auto stats = terrain::io::read_obj_stats(in);
    EXPECT_EQ(stats.vertices, 4);
    EXPECT_EQ(stats.triangles, 2);
}

TEST(Cli, AnalyzeEmitsBoxCountCsv) {
    ScratchDir dir;
    ASSERT_EQ(run_cli("analyze --size 64 --octaves 5 --seed 42 --out " + dir.file("box.csv") +
                      " >/dev/null"),
              0);
    const std::string csv = slurp(dir.file("box.csv"));
    EXPECT_EQ(csv.rfind("epsilon,count,length\n", 0), 0u);
    int lines = 0;
    for (const char c : csv)
        if (c == '\n') ++lines;
    EXPECT_EQ(lines, 7);  // header + default six box sizes
}

TEST(Cli, AnalyzeReadsPgmInput) {
    ScratchDir dir;
    ASSERT_EQ(run_cli("generate --size 64 --octaves 5 --seed 9 --out " + dir.file("m.pgm") +
                      " >/dev/null"),
              0);
    ASSERT_EQ(run_cli("analyze --in " + dir.file("m.pgm") + " --out " + dir.file("box.csv") +
                      " >/dev/null"),
              0);
    EXPECT_NE(slurp(dir.file("box.csv")).find("epsilon,count,length"), std::string::npos);
}

TEST(Cli, TextureAndPngOutputs) {
    ScratchDir dir;
    ASSERT_EQ(run_cli("texture --kind cloud --size 32 --octaves 4 --format png --out " +
                      dir.file("cloud.png") + " >/dev/null"),
              0);
    std::ifstream in(dir.file("cloud.png"), std::ios::binary);
    const auto img = terrain::io::read_png16(in);
    EXPECT_EQ(img.width, 32);
    EXPECT_EQ(img.height, 32);
}

TEST(Cli, ExitCodesFollowErrorTaxonomy) {
    ScratchDir dir;
    EXPECT_EQ(run_cli("generate --method no_such_method --out " + dir.file("x.pgm") +
                      " 2>/dev/null"),
              1);
    EXPECT_EQ(run_cli("generate --size 8 --out /nonexistent_dir/x.pgm 2>/dev/null"), 2);
    // all-land map: sea level far below every height
    EXPECT_EQ(run_cli("analyze --size 32 --octaves 2 --sea-level -1e9 2>/dev/null >/dev/null"), 1);
    EXPECT_EQ(run_cli("--help >/dev/null"), 0);
    EXPECT_EQ(run_cli("generate --size 0 --out " + dir.file("y.pgm") + " 2>/dev/null"), 1);
}

TEST(Cli, ThreadsEnvOverrideProducesSameMap) {
    ScratchDir dir;
    const std::string flags = "generate --size 32 --octaves 3 --seed 5 --format csv --out ";
    ASSERT_EQ(run_cli(flags + dir.file("a.csv") + " --threads 1 >/dev/null"), 0);
    const std::string with_env = "env TERRAIN_THREADS=4 " + cli_path() + " " + flags +
                                 dir.file("b.csv") + " >/dev/null";
    const int status = std::system(with_env.c_str());
    ASSERT_TRUE(WIFEXITED(status));
    ASSERT_EQ(WEXITSTATUS(status), 0);
    EXPECT_EQ(slurp(dir.file("a.csv")), slurp(dir.file("b.csv")));
}

TEST(Cli, BenchEmitsCsvStructure) {
    ScratchDir dir;
    ASSERT_EQ(run_cli("bench --methods zg,perlin3 --octaves 1,2 --sizes 32 --reps 3 --csv " +
                      dir.file("bench.csv") + " --speedup-csv " + dir.file("speed.csv") +
                      " >/dev/null"),
              0);
    const std::string bench_csv = slurp(dir.file("bench.csv"));
    EXPECT_EQ(bench_csv.rfind("method,octaves,resolution,repetitions", 0), 0u);
    int lines = 0;
    for (const char c : bench_csv)
        if (c == '\n') ++lines;
    EXPECT_EQ(lines, 5);  // header + 2 methods x 2 octave counts
    EXPECT_NE(slurp(dir.file("speed.csv")).find("perlin3,"), std::string::npos);
}
