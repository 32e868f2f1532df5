#include "sartol/raster.hpp"
#include "sartol/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace sartol {

namespace {

// One PGM header token: skips whitespace and '#' comment lines.
std::string next_token(const std::vector<unsigned char>& b, size_t& pos, const std::string& ctx) {
    while (pos < b.size()) {
        unsigned char c = b[pos];
        if (c == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            ++pos;
        } else {
            break;
        }
    }
    size_t start = pos;
    while (pos < b.size()) {
        unsigned char c = b[pos];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '#') break;
        ++pos;
    }
    if (start == pos) throw DataError(ctx + ": truncated PGM header");
    return std::string(b.begin() + start, b.begin() + pos);
}

long parse_header_int(const std::string& tok, const std::string& ctx, const char* what) {
    for (char c : tok) {
        if (c < '0' || c > '9') {
            throw DataError(ctx + ": malformed PGM " + what + " token '" + tok + "'");
        }
    }
    if (tok.empty() || tok.size() > 9) {
        throw DataError(ctx + ": malformed PGM " + what + " token '" + tok + "'");
    }
    return std::stol(tok);
}

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return bytes;
}

void write_file(const std::string& path, const unsigned char* data, size_t n) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out) throw DataError("write failed: " + path);
}

} // namespace

Raster decode_pgm(const std::vector<unsigned char>& bytes, const std::string& ctx) {
    size_t pos = 0;
    std::string magic = next_token(bytes, pos, ctx);
    if (magic != "P5") throw DataError(ctx + ": malformed PGM magic token '" + magic + "'");
    long w = parse_header_int(next_token(bytes, pos, ctx), ctx, "width");
    long h = parse_header_int(next_token(bytes, pos, ctx), ctx, "height");
    long maxv = parse_header_int(next_token(bytes, pos, ctx), ctx, "maxval");
    if (w < 1 || h < 1) throw DataError(ctx + ": non-positive PGM dimensions");
    if (maxv < 1 || maxv > 65535) throw DataError(ctx + ": PGM maxval out of range");
    // exactly one whitespace byte separates header and payload
    if (pos >= bytes.size()) throw DataError(ctx + ": truncated PGM payload");
    ++pos;

    Raster r(static_cast<int>(w), static_cast<int>(h), static_cast<std::uint16_t>(maxv));
    size_t n = r.size();
    bool wide = maxv > 255;
    size_t need = n * (wide ? 2 : 1);
    if (bytes.size() - pos < need) {
        throw DataError(ctx + ": PGM payload truncated (expected " + std::to_string(need) +
                        " bytes, got " + std::to_string(bytes.size() - pos) + ")");
    }
    if (wide) {
        for (size_t i = 0; i < n; ++i) {
            std::uint16_t v = static_cast<std::uint16_t>((bytes[pos + 2 * i] << 8) | bytes[pos + 2 * i + 1]);
            if (v > maxv) throw DataError(ctx + ": PGM sample exceeds maxval");
            r.samples[i] = v;
        }
    } else {
        for (size_t i = 0; i < n; ++i) {
            if (bytes[pos + i] > maxv) throw DataError(ctx + ": PGM sample exceeds maxval");
            r.samples[i] = bytes[pos + i];
        }
    }
    return r;
}

Raster read_pgm(const std::string& path) {
    return decode_pgm(read_file(path), path);
}

std::vector<unsigned char> encode_pgm(const Raster& raster) {
    std::uint16_t maxs = 0;
    for (std::uint16_t s : raster.samples) maxs = std::max(maxs, s);
    bool wide = maxs > 255;
    std::uint16_t maxv = wide ? 65535 : 255;

    char header[64];
    int hn = std::snprintf(header, sizeof(header), "P5 %d %d %d\n",
                           raster.width, raster.height, static_cast<int>(maxv));
    std::vector<unsigned char> out(header, header + hn);
    out.reserve(hn + raster.size() * (wide ? 2 : 1));
    if (wide) {
        for (std::uint16_t s : raster.samples) {
            out.push_back(static_cast<unsigned char>(s >> 8));
            out.push_back(static_cast<unsigned char>(s & 0xFF));
        }
    } else {
        for (std::uint16_t s : raster.samples) {
            out.push_back(static_cast<unsigned char>(s));
        }
    }
    return out;
}

void write_pgm(const Raster& raster, const std::string& path) {
    std::vector<unsigned char> bytes = encode_pgm(raster);
    write_file(path, bytes.data(), bytes.size());
}

NormStats compute_stats(const std::vector<const Raster*>& rasters) {
    size_t n = 0;
    double sum = 0.0;
    for (const Raster* r : rasters) {
        for (std::uint16_t s : r->samples) sum += s;
        n += r->size();
    }
    if (n == 0) throw DataError("compute_stats: empty raster collection");
    double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const Raster* r : rasters) {
        for (std::uint16_t s : r->samples) {
            double d = s - mean;
            ss += d * d;
        }
    }
    double var = ss / static_cast<double>(n);
    if (var <= 0.0) throw DataError("compute_stats: degenerate statistics (constant data)");
    return NormStats{mean, std::sqrt(var)};
}

NormStats compute_stats(const std::vector<Raster>& rasters) {
    std::vector<const Raster*> ptrs;
    ptrs.reserve(rasters.size());
    for (const Raster& r : rasters) ptrs.push_back(&r);
    return compute_stats(ptrs);
}

FloatRaster normalize(const Raster& raster, const NormStats& stats) {
    if (stats.std <= 0.0) throw DataError("normalize: std must be positive");
    FloatRaster out(raster.width, raster.height);
    double inv = 1.0 / stats.std;
    for (size_t i = 0; i < raster.size(); ++i) {
        out.values[i] = (raster.samples[i] - stats.mean) * inv;
    }
    return out;
}

void write_ppm(const RgbRaster& raster, const std::string& path) {
    char header[64];
    int hn = std::snprintf(header, sizeof(header), "P6 %d %d 255\n", raster.width, raster.height);
    std::vector<unsigned char> out(header, header + hn);
    out.insert(out.end(), raster.rgb.begin(), raster.rgb.end());
    write_file(path, out.data(), out.size());
}

} // namespace sartol
