#pragma once

#include "sartol/raster.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace sartol {

struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits; // 0 or 1, row-major

    BinaryMask() = default;
    BinaryMask(int w, int h, bool fill = false)
        : width(w), height(h), bits(static_cast<size_t>(w) * h, fill ? 1 : 0) {}

    bool get(int x, int y) const { return bits[static_cast<size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { bits[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }
    size_t size() const { return bits.size(); }
    size_t count() const;

    bool operator==(const BinaryMask&) const = default;
};

enum class RoadClass { Major, Country, Dirt };

// Fixed label thickness per road class, in pixels.
inline int road_thickness(RoadClass c) {
    switch (c) {
        case RoadClass::Major: return 7;
        case RoadClass::Country: return 5;
        case RoadClass::Dirt: return 3;
    }
    return 0;
}

const char* road_class_name(RoadClass c);
RoadClass road_class_from_name(const std::string& name);

struct Road {
    RoadClass cls = RoadClass::Dirt;
    std::vector<std::pair<double, double>> polyline; // sub-pixel (x, y), >= 2 vertices
};

struct RoadVectorSet {
    int canvas_width = 0;
    int canvas_height = 0;
    std::vector<Road> roads;
};

// Line-oriented text serialization: one road per line, "class x0,y0 x1,y1 ...".
// A leading "canvas W H" line records the raster dimensions.
std::string serialize_roads(const RoadVectorSet& roads);
RoadVectorSet parse_roads(const std::string& text);
RoadVectorSet read_roads(const std::string& path);
void write_roads(const RoadVectorSet& roads, const std::string& path);

// A pixel is road iff its center lies within thickness/2 of any segment of
// any polyline; the per-class masks are OR-ed together.
BinaryMask rasterize_roads(const RoadVectorSet& roads);

// Squared Euclidean distance to the nearest set pixel, exact in the integer
// domain. Pixels of an empty mask get kUnreachable.
constexpr std::int64_t kUnreachable = std::numeric_limits<std::int64_t>::max() / 4;
std::vector<std::int64_t> edt_squared(const BinaryMask& mask);

struct DistanceField {
    int width = 0;
    int height = 0;
    std::vector<double> distances; // +infinity where unreachable

    double at(int x, int y) const { return distances[static_cast<size_t>(y) * width + x]; }
};

DistanceField euclidean_distance_transform(const BinaryMask& mask);

struct TolerantGroundTruth {
    int t_max = 0;
    FloatRaster y_tol;  // in [0, 1]
    BinaryMask y_bin;
    BinaryMask valid;   // pixels that participate in loss and metrics
};

// y_tol = 1 on road pixels, 1 - t/(t_max+1) for background within distance
// t <= t_max of a road, 0 beyond.
TolerantGroundTruth make_tolerant(const BinaryMask& mask, int t_max, const BinaryMask& valid);

// y_tol on-disk form: 16-bit PGM with sample = round(y_tol * 65535).
Raster quantize_unit(const FloatRaster& field);
FloatRaster dequantize_unit(const Raster& raster);

// 0/255 PGM form of a mask.
Raster mask_to_raster(const BinaryMask& mask);
BinaryMask raster_to_mask(const Raster& raster);

// Grid isometries, shared by augmentation and the equivariance tests.
// rot90 is counter-clockwise; out(x, y) = in(W-1-y, x) maps a WxH grid to HxW.
template <class G>
G rot90(const G& g) {
    G out = g;
    out.width = g.height;
    out.height = g.width;
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            size_t dst = static_cast<size_t>(y) * out.width + x;
            size_t src = static_cast<size_t>(x) * g.width + (g.width - 1 - y);
            grid_values(out)[dst] = grid_values(g)[src];
        }
    }
    return out;
}

template <class G>
G flip_h(const G& g) { // mirror left-right
    G out = g;
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            grid_values(out)[static_cast<size_t>(y) * g.width + x] =
                grid_values(g)[static_cast<size_t>(y) * g.width + (g.width - 1 - x)];
        }
    }
    return out;
}

template <class G>
G flip_v(const G& g) { // mirror top-bottom
    G out = g;
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            grid_values(out)[static_cast<size_t>(y) * g.width + x] =
                grid_values(g)[static_cast<size_t>(g.height - 1 - y) * g.width + x];
        }
    }
    return out;
}

inline std::vector<double>& grid_values(FloatRaster& g) { return g.values; }
inline const std::vector<double>& grid_values(const FloatRaster& g) { return g.values; }
inline std::vector<std::uint8_t>& grid_values(BinaryMask& g) { return g.bits; }
inline const std::vector<std::uint8_t>& grid_values(const BinaryMask& g) { return g.bits; }
inline std::vector<std::uint16_t>& grid_values(Raster& g) { return g.samples; }
inline const std::vector<std::uint16_t>& grid_values(const Raster& g) { return g.samples; }

} // namespace sartol
