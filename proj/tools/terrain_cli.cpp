// terrain: procedural heightmap generation, texture synthesis, fractal
// analysis, and generator benchmarking on top of the terrain:: library.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error, 3 numerical error.
#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "terrain/analysis.hpp"
#include "terrain/bench.hpp"
#include "terrain/errors.hpp"
#include "terrain/fbm.hpp"
#include "terrain/io.hpp"
#include "terrain/texture.hpp"

namespace {

using terrain::ValidationError;

// ------------------------------------------------------------- shared flags

struct FbmFlags {
    std::string method = "zg";
    int size = 256;
    int octaves = 1;
    double persistence = 0.5;
    int freq = 2;
    double freq_ratio = 2.0;
    std::uint64_t seed = 0;
    std::string variant;
    int smoothstep = 0;  // 0 = not given
    bool normalize = false;
    double amplitude = 1.0;
    std::optional<double> gradient_weight;
    int threads = -1;  // -1 = not given; falls back to TERRAIN_THREADS, then 1
};

void add_fbm_flags(CLI::App* cmd, FbmFlags& f) {
    cmd->add_option("--method", f.method,
                    "Generator: zg, zg_paper, zg_separable, generic, perlin, perlin3, perlin5")
        ->capture_default_str();
    cmd->add_option("--size", f.size, "Map resolution R (R x R pixels)")->capture_default_str();
    cmd->add_option("--octaves", f.octaves, "Number of octaves")->capture_default_str();
    cmd->add_option("--persistence", f.persistence, "Amplitude falloff per octave, in (0, 1]")
        ->capture_default_str();
    cmd->add_option("--freq", f.freq, "Base frequency (cells across the map at octave 0)")
        ->capture_default_str();
    cmd->add_option("--freq-ratio", f.freq_ratio, "Frequency multiplier between octaves")
        ->capture_default_str();
    cmd->add_option("--seed", f.seed, "Lattice seed")->capture_default_str();
    cmd->add_option("--variant", f.variant, "Zero-gradient kernel variant: paper or separable");
    cmd->add_option("--smoothstep", f.smoothstep, "Smoothstep order 3 or 5 (5 is perlin-only)");
    cmd->add_flag("--normalize", f.normalize, "Rescale output to [-1, 1]");
    cmd->add_option("--amplitude", f.amplitude, "Base amplitude h0")->capture_default_str();
    cmd->add_option("--gradient-weight", f.gradient_weight,
                    "Corner gradient magnitude w for the generic method (default h0/100)");
    cmd->add_option("--threads", f.threads, "Worker threads (0 = hardware concurrency)");
}

int resolve_threads(int flag_value) {
    if (flag_value >= 0) return flag_value;
    if (const char* env = std::getenv("TERRAIN_THREADS")) {
        try {
            return std::stoi(env);
        } catch (const std::exception&) {
            throw ValidationError("TERRAIN_THREADS is not an integer");
        }
    }
    return 1;
}

terrain::fbm::FbmConfig to_config(const FbmFlags& f) {
    terrain::fbm::FbmConfig cfg;
    const auto method = terrain::fbm::parse_method(f.method);
    if (!method) throw ValidationError("unknown method: " + f.method);
    cfg.method = *method;

    using terrain::fbm::Method;
    if (!f.variant.empty()) {
        if (cfg.method != Method::zg_paper && cfg.method != Method::zg_separable)
            throw ValidationError("--variant only applies to the zg method");
        if (f.variant == "paper")
            cfg.method = Method::zg_paper;
        else if (f.variant == "separable")
            cfg.method = Method::zg_separable;
        else
            throw ValidationError("unknown variant: " + f.variant);
    }
    if (f.smoothstep != 0) {
        if (f.smoothstep != 3 && f.smoothstep != 5)
            throw ValidationError("--smoothstep must be 3 or 5");
        const bool perlin = cfg.method == Method::perlin3 || cfg.method == Method::perlin5;
        if (perlin)
            cfg.method = f.smoothstep == 5 ? Method::perlin5 : Method::perlin3;
        else if (f.smoothstep == 5)
            throw ValidationError("--smoothstep 5 is only available for the perlin method");
    }

    cfg.seed = f.seed;
    cfg.resolution = f.size;
    cfg.octaves = f.octaves;
    cfg.persistence = f.persistence;
    cfg.base_frequency = f.freq;
    cfg.frequency_ratio = f.freq_ratio;
    cfg.base_amplitude = f.amplitude;
    cfg.gradient_weight = f.gradient_weight;
    cfg.normalize = f.normalize;
    cfg.threads = resolve_threads(f.threads);
    cfg.validate();
    return cfg;
}

// ------------------------------------------------------------- file output

std::string default_extension(const std::string& format) {
    if (format == "pgm16") return ".pgm";
    if (format == "png") return ".png";
    if (format == "csv") return ".csv";
    throw ValidationError("unknown format: " + format + " (expected pgm16, png, or csv)");
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return path + suffix;
    return path.substr(0, dot) + suffix + path.substr(dot);
}

void write_map(const std::string& format, const std::string& path, const terrain::fbm::Heightmap& hm) {
    if (format == "pgm16")
        terrain::io::write_pgm16(path, hm);
    else if (format == "png")
        terrain::io::write_png16(path, hm);
    else if (format == "csv")
        terrain::io::write_csv_matrix(path, hm);
    else
        throw ValidationError("unknown format: " + format);
    std::cout << "wrote " << path << " (" << hm.resolution << "x" << hm.resolution << ")\n";
}

// Central differences inside, one-sided at the borders; pixel units.
terrain::fbm::Heightmap gradient_norm_map(const terrain::fbm::Heightmap& hm) {
    const int R = hm.resolution;
    terrain::fbm::Heightmap out = hm;
    const auto clamped = [&](int x, int y) {
        return hm.at(std::clamp(x, 0, R - 1), std::clamp(y, 0, R - 1));
    };
    for (int y = 0; y < R; ++y)
        for (int x = 0; x < R; ++x) {
            const double gx = 0.5 * (clamped(x + 1, y) - clamped(x - 1, y));
            const double gy = 0.5 * (clamped(x, y + 1) - clamped(x, y - 1));
            out.data[static_cast<std::size_t>(y) * static_cast<std::size_t>(R) +
                     static_cast<std::size_t>(x)] = std::sqrt(gx * gx + gy * gy);
        }
    return out;
}

terrain::fbm::Heightmap hessian_norm_map(const terrain::fbm::Heightmap& hm) {
    const int R = hm.resolution;
    terrain::fbm::Heightmap out = hm;
    const auto clamped = [&](int x, int y) {
        return hm.at(std::clamp(x, 0, R - 1), std::clamp(y, 0, R - 1));
    };
    for (int y = 0; y < R; ++y)
        for (int x = 0; x < R; ++x) {
            const double hxx = clamped(x + 1, y) - 2.0 * clamped(x, y) + clamped(x - 1, y);
            const double hyy = clamped(x, y + 1) - 2.0 * clamped(x, y) + clamped(x, y - 1);
            const double hxy = 0.25 * (clamped(x + 1, y + 1) - clamped(x - 1, y + 1) -
                                       clamped(x + 1, y - 1) + clamped(x - 1, y - 1));
            out.data[static_cast<std::size_t>(y) * static_cast<std::size_t>(R) +
                     static_cast<std::size_t>(x)] =
                std::sqrt(hxx * hxx + 2.0 * hxy * hxy + hyy * hyy);
        }
    return out;
}

// Fixed five-stop terrain gradient over normalized heights; water below sea.
std::array<std::uint8_t, 3> terrain_color(double t, double sea) {
    struct Stop {
        double t;
        double r, g, b;
    };
    const Stop stops[] = {
        {-1.0, 10, 30, 90},        // deep water
        {sea, 60, 110, 180},       // shallow water
        {sea + 0.02, 214, 200, 160},  // sand
        {sea + 0.35, 70, 140, 60},    // grass
        {sea + 0.7, 130, 120, 110},   // rock
        {1.0, 245, 245, 245},      // snow
    };
    const int n = static_cast<int>(std::size(stops));
    if (t <= stops[0].t) return {10, 30, 90};
    for (int i = 0; i + 1 < n; ++i) {
        if (t <= stops[i + 1].t) {
            const double span = stops[i + 1].t - stops[i].t;
            const double u = span > 0.0 ? (t - stops[i].t) / span : 0.0;
            const auto mix = [&](double a, double b) {
                return static_cast<std::uint8_t>(std::lround(a + (b - a) * u));
            };
            return {mix(stops[i].r, stops[i + 1].r), mix(stops[i].g, stops[i + 1].g),
                    mix(stops[i].b, stops[i + 1].b)};
        }
    }
    return {245, 245, 245};
}

void write_color_map(const std::string& path, const terrain::fbm::Heightmap& hm, double sea) {
    const auto norm = terrain::fbm::normalize_map(hm);
    std::vector<std::uint8_t> rgb;
    rgb.reserve(norm.data.size() * 3);
    for (const double v : norm.data) {
        const auto c = terrain_color(v, sea);
        rgb.insert(rgb.end(), c.begin(), c.end());
    }
    auto out = terrain::io::detail::open_out(path);
    terrain::io::write_ppm(out, rgb, hm.resolution, hm.resolution);
    std::cout << "wrote " << path << " (color)\n";
}

// ------------------------------------------------------------- subcommands

struct GenerateArgs {
    FbmFlags fbm;
    std::string out = "terrain";
    std::string format = "pgm16";
    bool gradient_maps = false;
    std::string obj_path;
    double height_scale = 1.0;
    std::string color_path;
    double color_sea = 0.0;
    std::vector<long long> origin;
    int extent = 0;  // 0 = full map
};

int run_generate(const GenerateArgs& args) {
    const auto cfg = to_config(args.fbm);
    terrain::fbm::Heightmap hm;
    if (!args.origin.empty() || args.extent != 0) {
        const std::array<long long, 2> origin{args.origin.empty() ? 0 : args.origin[0],
                                              args.origin.size() > 1 ? args.origin[1] : 0};
        const int extent = args.extent != 0 ? args.extent : cfg.resolution;
        hm = terrain::fbm::generate_region(cfg, origin, extent);
    } else {
        hm = terrain::fbm::generate_heightmap(cfg);
    }
    for (const auto& w : hm.warnings) std::cerr << "warning: " << w << "\n";

    std::string out = args.out;
    if (out.find_last_of('.') == std::string::npos ||
        out.find_last_of('.') < out.find_last_of('/') + 1)
        out += default_extension(args.format);
    write_map(args.format, out, hm);

    if (args.gradient_maps) {
        write_map(args.format, with_suffix(out, "_grad"), gradient_norm_map(hm));
        write_map(args.format, with_suffix(out, "_hess"), hessian_norm_map(hm));
    }
    if (!args.obj_path.empty()) {
        terrain::io::write_obj(args.obj_path, hm, args.height_scale);
        std::cout << "wrote " << args.obj_path << " (mesh)\n";
    }
    if (!args.color_path.empty()) write_color_map(args.color_path, hm, args.color_sea);
    return 0;
}

struct TextureArgs {
    FbmFlags fbm;
    std::string kind = "marble";
    double gain = 1.0;
    double pattern_freq = 4.0;
    std::string out = "texture";
    std::string format = "pgm16";
};

int run_texture(const TextureArgs& args) {
    terrain::texture::TextureSpec spec;
    const auto kind = terrain::texture::parse_kind(args.kind);
    if (!kind) throw ValidationError("unknown texture kind: " + args.kind);
    spec.kind = *kind;
    spec.fbm = to_config(args.fbm);
    spec.gain = args.gain;
    spec.pattern_frequency = args.pattern_freq;
    const auto img = terrain::texture::render(spec);

    std::string out = args.out;
    if (out.find_last_of('.') == std::string::npos ||
        out.find_last_of('.') < out.find_last_of('/') + 1)
        out += default_extension(args.format);
    write_map(args.format, out, img);
    return 0;
}

struct AnalyzeArgs {
    FbmFlags fbm;
    std::string in_path;
    std::optional<double> sea_level;
    std::vector<int> box_sizes;
    std::string out;
    bool crest = false;
    double crest_a = 2.0;
    double crest_f = 2.0;
    int crest_n = 10;
    bool sweep = false;
    int sweep_n_min = 1;
    int sweep_n_max = 8;
    std::vector<double> sweep_persistences;
};

void emit_csv(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    auto out = terrain::io::detail::open_out(path);
    out << content;
    if (!out) throw terrain::IoError("write failed: " + path);
    std::cout << "wrote " << path << "\n";
}

int run_analyze(const AnalyzeArgs& args) {
    if (args.crest) {
        terrain::analysis::CrestConfig cfg;
        cfg.a = args.crest_a;
        cfg.f = args.crest_f;
        const auto result = terrain::analysis::crest_dimension(cfg, args.crest_n);
        std::ostringstream csv;
        csv << "epsilon,length\n";
        for (const auto& p : result.points)
            csv << terrain::io::detail::format_double(p[0]) << ','
                << terrain::io::detail::format_double(p[1]) << '\n';
        emit_csv(args.out, csv.str());
        std::printf("crest a=%g f=%g n_max=%d  D=%.6f r2=%.6f%s\n", cfg.a, cfg.f, args.crest_n,
                    result.d, result.r2, result.degenerate ? " (degenerate fit)" : "");
        return 0;
    }

    if (args.sweep) {
        terrain::fbm::FbmConfig base = to_config(args.fbm);
        std::vector<double> ps = args.sweep_persistences;
        if (ps.empty()) ps = {0.3, 0.5, 0.7};
        const auto sizes =
            args.box_sizes.empty() ? terrain::analysis::default_box_sizes() : args.box_sizes;
        const auto rows = terrain::analysis::dimension_vs_octaves(base, args.sweep_n_min,
                                                                  args.sweep_n_max, ps, sizes);
        std::ostringstream csv;
        terrain::io::write_sweep_csv(csv, rows);
        emit_csv(args.out, csv.str());
        std::printf("sweep: %zu rows (N=%d..%d, %zu persistence values)\n", rows.size(),
                    args.sweep_n_min, args.sweep_n_max, ps.size());
        return 0;
    }

    terrain::fbm::Heightmap hm;
    if (!args.in_path.empty())
        hm = terrain::io::read_pgm16_heightmap(args.in_path);
    else
        hm = terrain::fbm::generate_heightmap(to_config(args.fbm));
    const auto mask = args.sea_level ? terrain::analysis::coastline_mask(hm, *args.sea_level)
                                     : terrain::analysis::coastline_mask(hm);
    const auto sizes =
        args.box_sizes.empty() ? terrain::analysis::default_box_sizes() : args.box_sizes;
    const auto report = terrain::analysis::box_count(mask, sizes);
    std::ostringstream csv;
    terrain::io::write_box_count_csv(csv, report);
    emit_csv(args.out, csv.str());
    std::printf("box-count: R=%d sea=%.6g land=%.3f coast_px=%lld  D=%.6f k=%.6g r2=%.6f\n",
                mask.resolution, mask.sea_level, mask.land_fraction, mask.pixel_count(), report.d,
                report.k, report.r2);
    return 0;
}

struct BenchArgs {
    std::vector<std::string> methods{"zg", "perlin3", "generic"};
    std::vector<int> octaves{1, 2, 4, 8};
    std::vector<int> sizes{256};
    int reps = 100;
    int warmup = 1;
    int threads = -1;
    std::uint64_t seed = 0;
    std::string csv_path;
    std::string speedup_csv_path;
};

int run_bench_cmd(const BenchArgs& args) {
    std::vector<terrain::bench::BenchRun> runs;
    for (const auto& method_name : args.methods) {
        const auto method = terrain::fbm::parse_method(method_name);
        if (!method) throw ValidationError("unknown method: " + method_name);
        for (const int n : args.octaves) {
            for (const int r : args.sizes) {
                terrain::fbm::FbmConfig cfg;
                cfg.method = *method;
                cfg.octaves = n;
                cfg.resolution = r;
                cfg.seed = args.seed;
                cfg.threads = args.threads >= 0 ? args.threads : 1;  // stable comparisons
                runs.push_back(terrain::bench::run_bench(cfg, args.reps, args.warmup));
                const auto& run = runs.back();
                std::printf("%-12s N=%d R=%-5d reps=%d  median=%.6fs mean=%.6fs sd=%.2g\n",
                            terrain::fbm::method_name(run.method), run.octaves, run.resolution,
                            run.repetitions, run.median, run.mean, run.stddev);
            }
        }
    }
    {
        std::ostringstream csv;
        terrain::bench::write_bench_csv(csv, runs);
        if (!args.csv_path.empty()) emit_csv(args.csv_path, csv.str());
    }

    bool have_baseline = false;
    for (const auto& run : runs)
        if (run.method == terrain::fbm::Method::zg_paper) have_baseline = true;
    if (have_baseline) {
        const auto report = terrain::bench::speedups_vs(runs);
        for (const auto& row : report.rows)
            std::printf("speedup %-12s N=%d R=%-5d  S=%.4f\n",
                        terrain::fbm::method_name(row.method), row.octaves, row.resolution,
                        row.speedup);
        if (!args.speedup_csv_path.empty()) {
            std::ostringstream csv;
            terrain::bench::write_speedup_csv(csv, report);
            emit_csv(args.speedup_csv_path, csv.str());
        }
    } else {
        std::cerr << "warning: no zg baseline run, speedups skipped\n";
    }

    // Per-method cost model when the grid spans enough shapes.
    for (const auto& method_name : args.methods) {
        const auto method = terrain::fbm::parse_method(method_name);
        std::vector<terrain::bench::BenchRun> mine;
        for (const auto& run : runs)
            if (run.method == *method) mine.push_back(run);
        if (mine.size() < 3) continue;
        try {
            const auto fit = terrain::bench::fit_cost_model(mine);
            std::printf("cost model %-12s T = %.4g * N * R^2 + %.4g * 4^N  (r2=%.4f)\n",
                        terrain::fbm::method_name(*method), fit.alpha, fit.beta, fit.r2);
        } catch (const ValidationError&) {
            // degenerate grid (single shape); nothing to report
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boundary-constrained polynomial terrain generator"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* cmd_gen = app.add_subcommand("generate", "Generate a heightmap and write it to disk");
    add_fbm_flags(cmd_gen, gen.fbm);
    cmd_gen->add_option("--out", gen.out, "Output path (extension added from --format)")
        ->capture_default_str();
    cmd_gen->add_option("--format", gen.format, "Output format: pgm16, png, csv")
        ->capture_default_str();
    cmd_gen->add_flag("--gradient-maps", gen.gradient_maps,
                      "Also write first and second order gradient-norm images");
    cmd_gen->add_option("--obj", gen.obj_path, "Also write a heightfield mesh (OBJ)");
    cmd_gen->add_option("--height-scale", gen.height_scale, "Vertical scale for the OBJ mesh")
        ->capture_default_str();
    cmd_gen->add_option("--color", gen.color_path, "Also write a colormapped PPM render");
    cmd_gen->add_option("--sea-level", gen.color_sea, "Sea level for the colormap, in [-1, 1]")
        ->capture_default_str();
    cmd_gen->add_option("--origin", gen.origin, "Region origin in global pixels: x,y")
        ->delimiter(',')
        ->expected(2);
    cmd_gen->add_option("--extent", gen.extent, "Region size in pixels (default: full map)");

    TextureArgs tex;
    auto* cmd_tex = app.add_subcommand("texture", "Render a marble, wood, or cloud texture");
    add_fbm_flags(cmd_tex, tex.fbm);
    cmd_tex->add_option("--kind", tex.kind, "Texture kind: marble, wood, cloud")
        ->capture_default_str();
    cmd_tex->add_option("--gain", tex.gain, "Turbulence gain")->capture_default_str();
    cmd_tex->add_option("--pattern-freq", tex.pattern_freq, "Stripe or ring frequency")
        ->capture_default_str();
    cmd_tex->add_option("--out", tex.out, "Output path")->capture_default_str();
    cmd_tex->add_option("--format", tex.format, "Output format: pgm16, png, csv")
        ->capture_default_str();

    AnalyzeArgs ana;
    auto* cmd_ana = app.add_subcommand("analyze", "Fractal dimension analysis");
    add_fbm_flags(cmd_ana, ana.fbm);
    cmd_ana->add_option("--in", ana.in_path, "Analyze an existing 16-bit PGM heightmap");
    cmd_ana->add_option("--sea-level", ana.sea_level, "Sea level (default: map median)");
    cmd_ana->add_option("--box-sizes", ana.box_sizes, "Box sizes in pixels")->delimiter(',');
    cmd_ana->add_option("--out", ana.out, "CSV output path (default: stdout)");
    cmd_ana->add_flag("--crest", ana.crest, "Measure the sinusoid crest dimension instead");
    cmd_ana->add_option("--a", ana.crest_a, "Crest amplitude base")->capture_default_str();
    cmd_ana->add_option("--f", ana.crest_f, "Crest frequency base")->capture_default_str();
    cmd_ana->add_option("--n", ana.crest_n, "Crest octave sweep upper bound")
        ->capture_default_str();
    cmd_ana->add_flag("--sweep", ana.sweep, "Dimension-vs-octaves sweep over persistence values");
    cmd_ana->add_option("--n-min", ana.sweep_n_min, "Sweep octave lower bound")
        ->capture_default_str();
    cmd_ana->add_option("--n-max", ana.sweep_n_max, "Sweep octave upper bound")
        ->capture_default_str();
    cmd_ana->add_option("--persistences", ana.sweep_persistences, "Sweep persistence values")
        ->delimiter(',');

    BenchArgs bench;
    auto* cmd_bench = app.add_subcommand("bench", "Time the generators and fit the cost model");
    cmd_bench->add_option("--methods", bench.methods, "Methods to benchmark")->delimiter(',');
    cmd_bench->add_option("--octaves", bench.octaves, "Octave counts")->delimiter(',');
    cmd_bench->add_option("--sizes", bench.sizes, "Resolutions")->delimiter(',');
    cmd_bench->add_option("--reps", bench.reps, "Timed repetitions per cell")
        ->capture_default_str();
    cmd_bench->add_option("--warmup", bench.warmup, "Discarded warmup runs per cell")
        ->capture_default_str();
    cmd_bench->add_option("--threads", bench.threads, "Worker threads (default 1 for stability)");
    cmd_bench->add_option("--seed", bench.seed, "Lattice seed")->capture_default_str();
    cmd_bench->add_option("--csv", bench.csv_path, "Timing CSV output path");
    cmd_bench->add_option("--speedup-csv", bench.speedup_csv_path, "Speedup CSV output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(cmd_gen)) return run_generate(gen);
        if (app.got_subcommand(cmd_tex)) return run_texture(tex);
        if (app.got_subcommand(cmd_ana)) return run_analyze(ana);
        if (app.got_subcommand(cmd_bench)) return run_bench_cmd(bench);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const terrain::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 2;
    } catch (const terrain::SolveError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const terrain::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
