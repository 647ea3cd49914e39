// File formats for heightmaps and analysis reports. 16-bit PGM is the
// canonical lossless interchange format (original height range recorded in a
// header comment); PNG output uses a minimal self-contained encoder over
// zlib; CSV follows RFC 4180 with '.' decimals and LF line endings; OBJ
// exports a row-major heightfield mesh.
#pragma once

#include <zlib.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "terrain/analysis.hpp"
#include "terrain/errors.hpp"
#include "terrain/fbm.hpp"

namespace terrain::io {

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void require_finite(std::span<const double> data, const char* what) {
    for (const double v : data)
        if (!std::isfinite(v)) throw ValidationError(std::string(what) + ": data contains non-finite values");
}

inline void require_grid(std::span<const double> data, int width, int height, const char* what) {
    if (width < 1 || height < 1) throw ValidationError(std::string(what) + ": empty grid");
    if (data.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw ValidationError(std::string(what) + ": data size does not match dimensions");
}

struct Range {
    double lo = 0.0, hi = 0.0;
};

inline Range data_range(std::span<const double> data) {
    Range r{data[0], data[0]};
    for (const double v : data) {
        r.lo = std::min(r.lo, v);
        r.hi = std::max(r.hi, v);
    }
    return r;
}

// Affine height -> 16-bit sample quantization shared by PGM and PNG writers.
inline std::uint16_t quantize16(double v, const Range& r) {
    if (r.hi == r.lo) return 0;
    const double t = (v - r.lo) / (r.hi - r.lo);
    return static_cast<std::uint16_t>(std::lround(t * 65535.0));
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    return in;
}

}  // namespace detail

struct Image16 {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> samples;  // row-major
    double hmin = 0.0;                   // original height range, if recorded
    double hmax = 0.0;
};

// ---------------------------------------------------------------- PGM (P5)

inline void write_pgm16(std::ostream& out, std::span<const double> data, int width, int height) {
    detail::require_grid(data, width, height, "write_pgm16");
    detail::require_finite(data, "write_pgm16");
    const auto range = detail::data_range(data);
    out << "P5\n";
    out << "# hmin=" << detail::format_double(range.lo) << " hmax=" << detail::format_double(range.hi)
        << "\n";
    out << width << " " << height << "\n65535\n";
    for (const double v : data) {
        const std::uint16_t s = detail::quantize16(v, range);
        const unsigned char bytes[2] = {static_cast<unsigned char>(s >> 8),
                                        static_cast<unsigned char>(s & 0xFF)};
        out.write(reinterpret_cast<const char*>(bytes), 2);
    }
    if (!out) throw IoError("write_pgm16: stream write failed");
}

inline void write_pgm16(const std::string& path, const fbm::Heightmap& hm) {
    auto out = detail::open_out(path);
    write_pgm16(out, hm.data, hm.resolution, hm.resolution);
}

inline Image16 read_pgm16(std::istream& in) {
    std::string magic;
    in >> magic;
    if (magic != "P5") throw IoError("read_pgm16: not a P5 PGM stream");
    Image16 img;
    bool have_range = false;
    int maxval = 0;
    int fields_read = 0;  // width, height, maxval in order, comments anywhere
    while (fields_read < 3) {
        in >> std::ws;
        if (in.peek() == '#') {
            std::string comment;
            std::getline(in, comment);
            double lo = 0.0, hi = 0.0;
            if (std::sscanf(comment.c_str(), "# hmin=%lf hmax=%lf", &lo, &hi) == 2) {
                img.hmin = lo;
                img.hmax = hi;
                have_range = true;
            }
            continue;
        }
        int value = 0;
        if (!(in >> value)) throw IoError("read_pgm16: malformed header");
        if (fields_read == 0)
            img.width = value;
        else if (fields_read == 1)
            img.height = value;
        else
            maxval = value;
        ++fields_read;
    }
    if (img.width < 1 || img.height < 1) throw IoError("read_pgm16: bad dimensions");
    if (maxval != 65535) throw IoError("read_pgm16: expected 16-bit maxval 65535");
    in.get();  // single whitespace byte before binary payload
    const std::size_t count = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
    img.samples.resize(count);
    std::vector<unsigned char> raw(count * 2);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size()))
        throw IoError("read_pgm16: truncated pixel data");
    for (std::size_t i = 0; i < count; ++i)
        img.samples[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    if (!have_range) {
        img.hmin = 0.0;
        img.hmax = 1.0;
    }
    return img;
}

inline std::vector<double> heights_from_image(const Image16& img) {
    std::vector<double> out(img.samples.size());
    const double span = img.hmax - img.hmin;
    for (std::size_t i = 0; i < img.samples.size(); ++i)
        out[i] = img.hmin + static_cast<double>(img.samples[i]) / 65535.0 * span;
    return out;
}

inline fbm::Heightmap read_pgm16_heightmap(const std::string& path) {
    auto in = detail::open_in(path);
    const auto img = read_pgm16(in);
    if (img.width != img.height) throw IoError("read_pgm16_heightmap: heightmaps must be square");
    fbm::Heightmap hm;
    hm.resolution = img.width;
    hm.data = heights_from_image(img);
    return hm;
}

// ---------------------------------------------------------------- PNG (16-bit grayscale)

namespace detail {

inline void push_be32(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v >> 24));
    out.push_back(static_cast<unsigned char>(v >> 16));
    out.push_back(static_cast<unsigned char>(v >> 8));
    out.push_back(static_cast<unsigned char>(v));
}

inline void write_chunk(std::ostream& out, const char type[5], const std::vector<unsigned char>& data) {
    std::vector<unsigned char> buf;
    push_be32(buf, static_cast<std::uint32_t>(data.size()));
    buf.insert(buf.end(), type, type + 4);
    buf.insert(buf.end(), data.begin(), data.end());
    const auto crc = ::crc32(0L, buf.data() + 4, static_cast<uInt>(buf.size() - 4));
    push_be32(buf, static_cast<std::uint32_t>(crc));
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

}  // namespace detail

inline void write_png16(std::ostream& out, std::span<const double> data, int width, int height) {
    detail::require_grid(data, width, height, "write_png16");
    detail::require_finite(data, "write_png16");
    const auto range = detail::data_range(data);

    static const unsigned char signature[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    out.write(reinterpret_cast<const char*>(signature), 8);

    std::vector<unsigned char> ihdr;
    detail::push_be32(ihdr, static_cast<std::uint32_t>(width));
    detail::push_be32(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(16);  // bit depth
    ihdr.push_back(0);   // grayscale
    ihdr.push_back(0);   // deflate
    ihdr.push_back(0);   // adaptive filtering
    ihdr.push_back(0);   // no interlace
    detail::write_chunk(out, "IHDR", ihdr);

    const std::string note = "hmin=" + detail::format_double(range.lo) +
                             " hmax=" + detail::format_double(range.hi);
    std::vector<unsigned char> text;
    const char* keyword = "Comment";
    text.insert(text.end(), keyword, keyword + 8);  // includes the NUL separator
    text.insert(text.end(), note.begin(), note.end());
    detail::write_chunk(out, "tEXt", text);

    // Raw image: per-row filter byte 0 followed by big-endian samples.
    std::vector<unsigned char> raw;
    raw.reserve(static_cast<std::size_t>(height) * (1 + static_cast<std::size_t>(width) * 2));
    for (int y = 0; y < height; ++y) {
        raw.push_back(0);
        for (int x = 0; x < width; ++x) {
            const std::uint16_t s =
                detail::quantize16(data[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                                        static_cast<std::size_t>(x)],
                                   range);
            raw.push_back(static_cast<unsigned char>(s >> 8));
            raw.push_back(static_cast<unsigned char>(s & 0xFF));
        }
    }
    uLongf compressed_size = ::compressBound(static_cast<uLong>(raw.size()));
    std::vector<unsigned char> compressed(compressed_size);
    if (::compress2(compressed.data(), &compressed_size, raw.data(), static_cast<uLong>(raw.size()), 9) !=
        Z_OK)
        throw IoError("write_png16: zlib compression failed");
    compressed.resize(compressed_size);
    detail::write_chunk(out, "IDAT", compressed);
    detail::write_chunk(out, "IEND", {});
    if (!out) throw IoError("write_png16: stream write failed");
}

inline void write_png16(const std::string& path, const fbm::Heightmap& hm) {
    auto out = detail::open_out(path);
    write_png16(out, hm.data, hm.resolution, hm.resolution);
}

// Reads only the subset this library writes: 16-bit grayscale, filter 0 rows.
inline Image16 read_png16(std::istream& in) {
    unsigned char signature[8];
    in.read(reinterpret_cast<char*>(signature), 8);
    static const unsigned char expected[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    if (in.gcount() != 8 || std::memcmp(signature, expected, 8) != 0)
        throw IoError("read_png16: not a PNG stream");

    Image16 img;
    std::vector<unsigned char> idat;
    bool done = false;
    const auto read_be32 = [&]() {
        unsigned char b[4];
        in.read(reinterpret_cast<char*>(b), 4);
        if (in.gcount() != 4) throw IoError("read_png16: truncated chunk");
        return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
               (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
    };
    while (!done) {
        const std::uint32_t length = read_be32();
        char type[5] = {};
        in.read(type, 4);
        if (in.gcount() != 4) throw IoError("read_png16: truncated chunk type");
        std::vector<unsigned char> payload(length);
        if (length > 0) {
            in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(length));
            if (in.gcount() != static_cast<std::streamsize>(length))
                throw IoError("read_png16: truncated chunk payload");
        }
        read_be32();  // CRC, not verified on read
        if (std::strcmp(type, "IHDR") == 0) {
            if (payload.size() != 13) throw IoError("read_png16: bad IHDR");
            img.width = static_cast<int>((payload[0] << 24) | (payload[1] << 16) | (payload[2] << 8) |
                                         payload[3]);
            img.height = static_cast<int>((payload[4] << 24) | (payload[5] << 16) | (payload[6] << 8) |
                                          payload[7]);
            if (payload[8] != 16 || payload[9] != 0)
                throw IoError("read_png16: only 16-bit grayscale is supported");
        } else if (std::strcmp(type, "tEXt") == 0) {
            const std::string text(payload.begin(), payload.end());
            const auto nul = text.find('\0');
            if (nul != std::string::npos) {
                double lo = 0.0, hi = 0.0;
                if (std::sscanf(text.c_str() + nul + 1, "hmin=%lf hmax=%lf", &lo, &hi) == 2) {
                    img.hmin = lo;
                    img.hmax = hi;
                }
            }
        } else if (std::strcmp(type, "IDAT") == 0) {
            idat.insert(idat.end(), payload.begin(), payload.end());
        } else if (std::strcmp(type, "IEND") == 0) {
            done = true;
        }
    }
    if (img.width < 1 || img.height < 1) throw IoError("read_png16: missing IHDR");

    const std::size_t row_bytes = 1 + static_cast<std::size_t>(img.width) * 2;
    std::vector<unsigned char> raw(row_bytes * static_cast<std::size_t>(img.height));
    uLongf raw_size = static_cast<uLongf>(raw.size());
    if (::uncompress(raw.data(), &raw_size, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
        raw_size != raw.size())
        throw IoError("read_png16: zlib decompression failed");

    img.samples.resize(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y) {
        const unsigned char* row = raw.data() + static_cast<std::size_t>(y) * row_bytes;
        if (row[0] != 0) throw IoError("read_png16: unsupported PNG filter type");
        for (int x = 0; x < img.width; ++x)
            img.samples[static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width) +
                        static_cast<std::size_t>(x)] =
                static_cast<std::uint16_t>((row[1 + 2 * x] << 8) | row[2 + 2 * x]);
    }
    return img;
}

// ---------------------------------------------------------------- PPM (P6, 8-bit RGB)

inline void write_ppm(std::ostream& out, std::span<const std::uint8_t> rgb, int width, int height) {
    if (rgb.size() != 3 * static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw ValidationError("write_ppm: buffer size does not match dimensions");
    out << "P6\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
    if (!out) throw IoError("write_ppm: stream write failed");
}

// ---------------------------------------------------------------- CSV

inline void write_csv_matrix(std::ostream& out, std::span<const double> data, int width, int height) {
    detail::require_grid(data, width, height, "write_csv_matrix");
    detail::require_finite(data, "write_csv_matrix");
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (x > 0) out << ',';
            out << detail::format_double(
                data[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                     static_cast<std::size_t>(x)]);
        }
        out << '\n';
    }
    if (!out) throw IoError("write_csv_matrix: stream write failed");
}

inline void write_csv_matrix(const std::string& path, const fbm::Heightmap& hm) {
    auto out = detail::open_out(path);
    write_csv_matrix(out, hm.data, hm.resolution, hm.resolution);
}

struct CsvMatrix {
    int width = 0;
    int height = 0;
    std::vector<double> values;
};

inline CsvMatrix read_csv_matrix(std::istream& in) {
    CsvMatrix m;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string field;
        int cols = 0;
        while (std::getline(row, field, ',')) {
            double v = 0.0;
            try {
                std::size_t consumed = 0;
                v = std::stod(field, &consumed);
                if (consumed != field.size()) throw IoError("read_csv_matrix: non-numeric field");
            } catch (const std::logic_error&) {
                throw IoError("read_csv_matrix: non-numeric field");
            }
            m.values.push_back(v);
            ++cols;
        }
        if (m.width == 0)
            m.width = cols;
        else if (cols != m.width)
            throw IoError("read_csv_matrix: ragged rows");
        ++m.height;
    }
    if (m.width == 0) throw IoError("read_csv_matrix: empty input");
    return m;
}

inline void write_box_count_csv(std::ostream& out, const analysis::BoxCountReport& report) {
    out << "epsilon,count,length\n";
    for (std::size_t i = 0; i < report.sizes.size(); ++i)
        out << report.sizes[i] << ',' << report.counts[i] << ','
            << detail::format_double(report.lengths[i]) << '\n';
    if (!out) throw IoError("write_box_count_csv: stream write failed");
}

inline void write_sweep_csv(std::ostream& out, std::span<const analysis::SweepRow> rows) {
    out << "octaves,persistence,dimension,r2\n";
    for (const auto& row : rows)
        out << row.octaves << ',' << detail::format_double(row.persistence) << ','
            << detail::format_double(row.d) << ',' << detail::format_double(row.r2) << '\n';
    if (!out) throw IoError("write_sweep_csv: stream write failed");
}

// ---------------------------------------------------------------- OBJ

// One vertex per pixel at (x, h * height_scale, y), row-major; each grid quad
// splits into two counter-clockwise triangles. Indices are 1-based.
inline void write_obj(std::ostream& out, std::span<const double> data, int width, int height,
                      double height_scale = 1.0) {
    detail::require_grid(data, width, height, "write_obj");
    detail::require_finite(data, "write_obj");
    if (!std::isfinite(height_scale)) throw ValidationError("write_obj: non-finite height scale");
    out << "# heightfield " << width << "x" << height << "\n";
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            out << "v " << x << ' '
                << detail::format_double(
                       data[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                            static_cast<std::size_t>(x)] *
                       height_scale)
                << ' ' << y << '\n';
    const auto index = [width](int x, int y) { return y * width + x + 1; };
    for (int y = 0; y + 1 < height; ++y) {
        for (int x = 0; x + 1 < width; ++x) {
            out << "f " << index(x, y) << ' ' << index(x + 1, y) << ' ' << index(x + 1, y + 1) << '\n';
            out << "f " << index(x, y) << ' ' << index(x + 1, y + 1) << ' ' << index(x, y + 1) << '\n';
        }
    }
    if (!out) throw IoError("write_obj: stream write failed");
}

inline void write_obj(const std::string& path, const fbm::Heightmap& hm, double height_scale = 1.0) {
    auto out = detail::open_out(path);
    write_obj(out, hm.data, hm.resolution, hm.resolution, height_scale);
}

struct ObjStats {
    long long vertices = 0;
    long long triangles = 0;
    double min_height = 0.0;
    double max_height = 0.0;
};

inline ObjStats read_obj_stats(std::istream& in) {
    ObjStats stats;
    std::string line;
    bool first_vertex = true;
    while (std::getline(in, line)) {
        if (line.rfind("v ", 0) == 0) {
            double x = 0.0, h = 0.0, z = 0.0;
            if (std::sscanf(line.c_str(), "v %lf %lf %lf", &x, &h, &z) != 3)
                throw IoError("read_obj_stats: malformed vertex line");
            if (first_vertex) {
                stats.min_height = stats.max_height = h;
                first_vertex = false;
            } else {
                stats.min_height = std::min(stats.min_height, h);
                stats.max_height = std::max(stats.max_height, h);
            }
            ++stats.vertices;
        } else if (line.rfind("f ", 0) == 0) {
            ++stats.triangles;
        }
    }
    return stats;
}

}  // namespace terrain::io
