#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sartol {

// Grayscale integer raster, row-major, samples in [0, max_value], max 65535.
struct Raster {
    int width = 0;
    int height = 0;
    std::uint16_t max_value = 255;
    std::vector<std::uint16_t> samples;

    Raster() = default;
    Raster(int w, int h, std::uint16_t maxv = 255)
        : width(w), height(h), max_value(maxv), samples(static_cast<size_t>(w) * h, 0) {}

    std::uint16_t& at(int x, int y) { return samples[static_cast<size_t>(y) * width + x]; }
    std::uint16_t at(int x, int y) const { return samples[static_cast<size_t>(y) * width + x]; }
    size_t size() const { return samples.size(); }
};

// Real-valued raster; all values finite.
struct FloatRaster {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    FloatRaster() = default;
    FloatRaster(int w, int h, double fill = 0.0)
        : width(w), height(h), values(static_cast<size_t>(w) * h, fill) {}

    double& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
    double at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
    size_t size() const { return values.size(); }
};

struct NormStats {
    double mean = 0.0;
    double std = 1.0; // always > 0
};

// Reflect index into [0, n): mirror padding without edge repetition
// (..., 2, 1, 0 | 0, 1, 2, ... n-1 | n-1, n-2, ...).
inline int mirror_index(int i, int n) {
    if (n == 1) return 0;
    int period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
}

// Binary PGM (P5). 16-bit samples are big-endian on disk per the netpbm
// convention. write_pgm emits the canonical form: "P5 W H MAXV\n" with single
// spaces, maxval 255 when every sample fits a byte, 65535 otherwise.
Raster read_pgm(const std::string& path);
void write_pgm(const Raster& raster, const std::string& path);

// Serialize to the same canonical bytes write_pgm puts on disk.
std::vector<unsigned char> encode_pgm(const Raster& raster);
Raster decode_pgm(const std::vector<unsigned char>& bytes, const std::string& context);

// Mean and population std over every pixel of every raster (two-pass).
// Throws DataError on an empty collection or constant data.
NormStats compute_stats(const std::vector<const Raster*>& rasters);
NormStats compute_stats(const std::vector<Raster>& rasters);

// value = (sample - mean) / std
FloatRaster normalize(const Raster& raster, const NormStats& stats);

// Interleaved 8-bit RGB, written as binary PPM (P6).
struct RgbRaster {
    int width = 0;
    int height = 0;
    std::vector<unsigned char> rgb;

    RgbRaster() = default;
    RgbRaster(int w, int h) : width(w), height(h), rgb(static_cast<size_t>(w) * h * 3, 0) {}

    void set(int x, int y, unsigned char r, unsigned char g, unsigned char b) {
        size_t i = (static_cast<size_t>(y) * width + x) * 3;
        rgb[i] = r; rgb[i + 1] = g; rgb[i + 2] = b;
    }
};

void write_ppm(const RgbRaster& raster, const std::string& path);

} // namespace sartol
