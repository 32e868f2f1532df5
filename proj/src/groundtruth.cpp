#include "sartol/groundtruth.hpp"
#include "sartol/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sartol {

size_t BinaryMask::count() const {
    size_t n = 0;
    for (std::uint8_t b : bits) n += b;
    return n;
}

const char* road_class_name(RoadClass c) {
    switch (c) {
        case RoadClass::Major: return "major";
        case RoadClass::Country: return "country";
        case RoadClass::Dirt: return "dirt";
    }
    return "?";
}

RoadClass road_class_from_name(const std::string& name) {
    if (name == "major") return RoadClass::Major;
    if (name == "country") return RoadClass::Country;
    if (name == "dirt") return RoadClass::Dirt;
    throw DataError("unknown road class '" + name + "'");
}

std::string serialize_roads(const RoadVectorSet& rs) {
    std::ostringstream out;
    out.precision(17);
    out << "canvas " << rs.canvas_width << " " << rs.canvas_height << "\n";
    for (const Road& r : rs.roads) {
        out << road_class_name(r.cls);
        for (const auto& [x, y] : r.polyline) out << " " << x << "," << y;
        out << "\n";
    }
    return out.str();
}

RoadVectorSet parse_roads(const std::string& text) {
    RoadVectorSet rs;
    std::istringstream in(text);
    std::string line;
    bool have_canvas = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string head;
        ls >> head;
        if (head == "canvas") {
            if (!(ls >> rs.canvas_width >> rs.canvas_height)) {
                throw DataError("roads file: malformed canvas line");
            }
            have_canvas = true;
            continue;
        }
        Road road;
        road.cls = road_class_from_name(head);
        std::string pt;
        while (ls >> pt) {
            size_t comma = pt.find(',');
            if (comma == std::string::npos) {
                throw DataError("roads file: malformed vertex '" + pt + "'");
            }
            road.polyline.emplace_back(std::stod(pt.substr(0, comma)),
                                       std::stod(pt.substr(comma + 1)));
        }
        if (road.polyline.size() < 2) {
            throw DataError("roads file: polyline needs at least 2 vertices");
        }
        rs.roads.push_back(std::move(road));
    }
    if (!have_canvas) throw DataError("roads file: missing canvas line");
    return rs;
}

RoadVectorSet read_roads(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open roads file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_roads(buf.str());
}

void write_roads(const RoadVectorSet& roads, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open roads file for writing: " + path);
    out << serialize_roads(roads);
    if (!out) throw DataError("write failed: " + path);
}

namespace {

// squared distance from point p to segment ab
double point_segment_dist2(double px, double py, double ax, double ay, double bx, double by) {
    double dx = bx - ax, dy = by - ay;
    double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) {
        t = ((px - ax) * dx + (py - ay) * dy) / len2;
        t = std::clamp(t, 0.0, 1.0);
    }
    double cx = ax + t * dx - px;
    double cy = ay + t * dy - py;
    return cx * cx + cy * cy;
}

} // namespace

BinaryMask rasterize_roads(const RoadVectorSet& rs) {
    // Pixel (x, y) has its center at coordinates (x, y).
    BinaryMask mask(rs.canvas_width, rs.canvas_height);
    for (const Road& road : rs.roads) {
        double r = road_thickness(road.cls) / 2.0;
        double r2 = r * r;
        for (size_t i = 0; i + 1 < road.polyline.size(); ++i) {
            auto [ax, ay] = road.polyline[i];
            auto [bx, by] = road.polyline[i + 1];
            int x0 = std::max(0, static_cast<int>(std::ceil(std::min(ax, bx) - r)));
            int x1 = std::min(rs.canvas_width - 1, static_cast<int>(std::floor(std::max(ax, bx) + r)));
            int y0 = std::max(0, static_cast<int>(std::ceil(std::min(ay, by) - r)));
            int y1 = std::min(rs.canvas_height - 1, static_cast<int>(std::floor(std::max(ay, by) + r)));
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    if (point_segment_dist2(x, y, ax, ay, bx, by) <= r2) {
                        mask.set(x, y, true);
                    }
                }
            }
        }
    }
    return mask;
}

std::vector<std::int64_t> edt_squared(const BinaryMask& mask) {
    const int w = mask.width, h = mask.height;
    const std::int64_t big = static_cast<std::int64_t>(w - 1) * (w - 1) +
                             static_cast<std::int64_t>(h - 1) * (h - 1) + 1;
    std::vector<std::int64_t> col(static_cast<size_t>(w) * h);

    // pass 1: squared distance to the nearest set pixel within each column
#pragma omp parallel for schedule(static)
    for (int x = 0; x < w; ++x) {
        int last = -1;
        for (int y = 0; y < h; ++y) {
            if (mask.get(x, y)) last = y;
            col[static_cast<size_t>(y) * w + x] =
                last < 0 ? big : static_cast<std::int64_t>(y - last) * (y - last);
        }
        last = -1;
        for (int y = h - 1; y >= 0; --y) {
            if (mask.get(x, y)) last = y;
            if (last >= 0) {
                std::int64_t d = static_cast<std::int64_t>(last - y) * (last - y);
                std::int64_t& c = col[static_cast<size_t>(y) * w + x];
                c = std::min(c, d);
            }
        }
    }

    // pass 2: per row, lower envelope of parabolas x -> (x - x')^2 + col[x']
    // (Felzenszwalb & Huttenlocher)
    std::vector<std::int64_t> out(static_cast<size_t>(w) * h);
#pragma omp parallel
    {
        std::vector<int> v(w);
        std::vector<double> z(w + 1);
#pragma omp for schedule(static)
        for (int y = 0; y < h; ++y) {
            const std::int64_t* f = &col[static_cast<size_t>(y) * w];
            std::int64_t* d = &out[static_cast<size_t>(y) * w];
            int k = 0;
            v[0] = 0;
            z[0] = -1e30;
            z[1] = 1e30;
            for (int q = 1; q < w; ++q) {
                double fq = static_cast<double>(f[q]);
                for (;;) {
                    double fp = static_cast<double>(f[v[k]]);
                    double s = (fq + static_cast<double>(q) * q - (fp + static_cast<double>(v[k]) * v[k])) /
                               (2.0 * (q - v[k]));
                    if (s <= z[k]) {
                        --k;
                    } else {
                        ++k;
                        v[k] = q;
                        z[k] = s;
                        z[k + 1] = 1e30;
                        break;
                    }
                }
            }
            k = 0;
            for (int q = 0; q < w; ++q) {
                while (z[k + 1] < static_cast<double>(q)) ++k;
                std::int64_t dx = q - v[k];
                d[q] = dx * dx + f[v[k]];
            }
        }
    }

    for (std::int64_t& d : out) {
        if (d >= big) d = kUnreachable;
    }
    return out;
}

DistanceField euclidean_distance_transform(const BinaryMask& mask) {
    std::vector<std::int64_t> sq = edt_squared(mask);
    DistanceField df;
    df.width = mask.width;
    df.height = mask.height;
    df.distances.resize(sq.size());
    for (size_t i = 0; i < sq.size(); ++i) {
        df.distances[i] = sq[i] >= kUnreachable ? std::numeric_limits<double>::infinity()
                                                : std::sqrt(static_cast<double>(sq[i]));
    }
    return df;
}

TolerantGroundTruth make_tolerant(const BinaryMask& mask, int t_max, const BinaryMask& valid) {
    if (mask.width != valid.width || mask.height != valid.height) {
        throw DataError("make_tolerant: mask and valid dimensions differ");
    }
    if (t_max < 0) throw ConfigError("make_tolerant: t_max must be non-negative");

    TolerantGroundTruth gt;
    gt.t_max = t_max;
    gt.y_bin = mask;
    gt.valid = valid;
    gt.y_tol = FloatRaster(mask.width, mask.height);

    std::vector<std::int64_t> sq = edt_squared(mask);
    std::int64_t band = static_cast<std::int64_t>(t_max) * t_max;
    for (size_t i = 0; i < sq.size(); ++i) {
        if (mask.bits[i]) {
            gt.y_tol.values[i] = 1.0;
        } else if (sq[i] <= band) {
            double t = std::sqrt(static_cast<double>(sq[i]));
            gt.y_tol.values[i] = 1.0 - t / (t_max + 1);
        } else {
            gt.y_tol.values[i] = 0.0;
        }
    }
    return gt;
}

Raster quantize_unit(const FloatRaster& field) {
    Raster out(field.width, field.height, 65535);
    for (size_t i = 0; i < field.size(); ++i) {
        double v = std::clamp(field.values[i], 0.0, 1.0);
        out.samples[i] = static_cast<std::uint16_t>(std::lround(v * 65535.0));
    }
    return out;
}

FloatRaster dequantize_unit(const Raster& raster) {
    FloatRaster out(raster.width, raster.height);
    for (size_t i = 0; i < raster.size(); ++i) {
        out.values[i] = raster.samples[i] / 65535.0;
    }
    return out;
}

Raster mask_to_raster(const BinaryMask& mask) {
    Raster out(mask.width, mask.height, 255);
    for (size_t i = 0; i < mask.size(); ++i) out.samples[i] = mask.bits[i] ? 255 : 0;
    return out;
}

BinaryMask raster_to_mask(const Raster& raster) {
    BinaryMask out(raster.width, raster.height);
    for (size_t i = 0; i < raster.size(); ++i) out.bits[i] = raster.samples[i] != 0;
    return out;
}

} // namespace sartol
