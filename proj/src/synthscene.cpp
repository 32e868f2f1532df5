#include "sartol/synthscene.hpp"
#include "sartol/errors.hpp"
#include "sartol/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace sartol {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kVertexMargin = 7.0; // max label thickness

void check_config(const SceneConfig& c) {
    if (c.width < 128 || c.height < 128) {
        throw ConfigError("scene: width and height must be >= 128");
    }
    if (c.looks < 1) throw ConfigError("scene: looks must be >= 1");
    if (!(c.contrast > 0.0 && c.contrast < 1.0)) {
        throw ConfigError("scene: contrast must be in (0,1)");
    }
    if (c.embankment_gain < 1.0) throw ConfigError("scene: embankment_gain must be >= 1");
    if (c.n_major < 0 || c.n_country < 0 || c.n_dirt < 0 || c.n_rivers < 0 || c.n_hedges < 0) {
        throw ConfigError("scene: object counts must be non-negative");
    }
}

// Smoothed random walk crossing the canvas: enters on one side, drifts toward
// the opposite side with bounded heading deviation, exits within the vertex
// margin.
std::vector<std::pair<double, double>> random_polyline(SplitMix64& rng, int w, int h,
                                                       double turn_sigma) {
    int side = static_cast<int>(rng.next_below(4)); // 0 left, 1 right, 2 top, 3 bottom
    double along = rng.uniform(0.15, 0.85);
    double x, y, base;
    switch (side) {
        case 0: x = 0; y = along * h; base = 0.0; break;
        case 1: x = w - 1; y = along * h; base = kPi; break;
        case 2: x = along * w; y = 0; base = kPi / 2; break;
        default: x = along * w; y = h - 1; base = -kPi / 2; break;
    }
    base += rng.uniform(-0.5, 0.5);
    double heading = base;
    const double step = 12.0;
    const double max_dev = 0.9;

    std::vector<std::pair<double, double>> pts;
    auto clamp_pt = [&](double px, double py) {
        return std::make_pair(std::clamp(px, -kVertexMargin, w + kVertexMargin),
                              std::clamp(py, -kVertexMargin, h + kVertexMargin));
    };
    for (int i = 0; i < 4096; ++i) {
        pts.push_back(clamp_pt(x, y));
        x += step * std::cos(heading);
        y += step * std::sin(heading);
        if (x < -kVertexMargin || x > w + kVertexMargin ||
            y < -kVertexMargin || y > h + kVertexMargin) {
            break;
        }
        heading += std::clamp(rng.normal() * turn_sigma, -0.35, 0.35);
        heading = base + std::clamp(heading - base, -max_dev, max_dev);
    }
    pts.push_back(clamp_pt(x, y));
    return pts;
}

// footprint of a free polyline with the given thickness (same predicate as
// rasterize_roads)
void paint_polyline(BinaryMask& mask, const std::vector<std::pair<double, double>>& pts,
                    double thickness) {
    double r = thickness / 2.0;
    double r2 = r * r;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        auto [ax, ay] = pts[i];
        auto [bx, by] = pts[i + 1];
        int x0 = std::max(0, static_cast<int>(std::ceil(std::min(ax, bx) - r)));
        int x1 = std::min(mask.width - 1, static_cast<int>(std::floor(std::max(ax, bx) + r)));
        int y0 = std::max(0, static_cast<int>(std::ceil(std::min(ay, by) - r)));
        int y1 = std::min(mask.height - 1, static_cast<int>(std::floor(std::max(ay, by) + r)));
        for (int yy = y0; yy <= y1; ++yy) {
            for (int xx = x0; xx <= x1; ++xx) {
                double dx = bx - ax, dy = by - ay;
                double len2 = dx * dx + dy * dy;
                double t = 0.0;
                if (len2 > 0.0) {
                    t = std::clamp(((xx - ax) * dx + (yy - ay) * dy) / len2, 0.0, 1.0);
                }
                double cx = ax + t * dx - xx;
                double cy = ay + t * dy - yy;
                if (cx * cx + cy * cy <= r2) mask.set(xx, yy, true);
            }
        }
    }
}

// low-frequency value noise: coarse random grid, bilinearly interpolated
FloatRaster background_field(SplitMix64& rng, int w, int h) {
    const int spacing = 64;
    int gw = w / spacing + 2;
    int gh = h / spacing + 2;
    std::vector<double> grid(static_cast<size_t>(gw) * gh);
    for (double& g : grid) g = rng.uniform(0.7, 1.3);

    FloatRaster out(w, h);
    for (int y = 0; y < h; ++y) {
        int gy = y / spacing;
        double fy = static_cast<double>(y % spacing) / spacing;
        for (int x = 0; x < w; ++x) {
            int gx = x / spacing;
            double fx = static_cast<double>(x % spacing) / spacing;
            double a = grid[static_cast<size_t>(gy) * gw + gx];
            double b = grid[static_cast<size_t>(gy) * gw + gx + 1];
            double c = grid[static_cast<size_t>(gy + 1) * gw + gx];
            double d = grid[static_cast<size_t>(gy + 1) * gw + gx + 1];
            out.at(x, y) = (a * (1 - fx) + b * fx) * (1 - fy) + (c * (1 - fx) + d * fx) * fy;
        }
    }
    return out;
}

} // namespace

Raster add_speckle(const FloatRaster& reflectivity, int looks, std::uint64_t seed) {
    if (looks < 1) throw ConfigError("add_speckle: looks must be >= 1");
    for (double v : reflectivity.values) {
        if (!(v > 0.0)) throw DataError("add_speckle: reflectivity must be strictly positive");
    }
    SplitMix64 rng(seed);
    Raster out(reflectivity.width, reflectivity.height, 65535);
    double shape = static_cast<double>(looks);
    for (size_t i = 0; i < reflectivity.size(); ++i) {
        double s = rng.gamma(shape) / shape; // unit mean
        double v = reflectivity.values[i] * s * kReflectivityScale;
        long q = std::lround(v);
        out.samples[i] = static_cast<std::uint16_t>(std::clamp(q, 0L, 65535L));
    }
    return out;
}

Scene generate_scene(const SceneConfig& c) {
    check_config(c);
    Scene scene;
    scene.roads.canvas_width = c.width;
    scene.roads.canvas_height = c.height;

    SplitMix64 road_rng(SplitMix64::derive(c.seed, 1));
    for (int i = 0; i < c.n_major; ++i) {
        scene.roads.roads.push_back({RoadClass::Major, random_polyline(road_rng, c.width, c.height, 0.10)});
    }
    for (int i = 0; i < c.n_country; ++i) {
        scene.roads.roads.push_back({RoadClass::Country, random_polyline(road_rng, c.width, c.height, 0.15)});
    }
    for (int i = 0; i < c.n_dirt; ++i) {
        scene.roads.roads.push_back({RoadClass::Dirt, random_polyline(road_rng, c.width, c.height, 0.20)});
    }

    BinaryMask road_mask = rasterize_roads(scene.roads);

    SplitMix64 river_rng(SplitMix64::derive(c.seed, 2));
    BinaryMask river_mask(c.width, c.height);
    for (int i = 0; i < c.n_rivers; ++i) {
        paint_polyline(river_mask, random_polyline(river_rng, c.width, c.height, 0.05), 12.0);
    }
    // roads win where the footprints would overlap
    for (size_t i = 0; i < river_mask.size(); ++i) {
        if (road_mask.bits[i]) river_mask.bits[i] = 0;
    }

    SplitMix64 hedge_rng(SplitMix64::derive(c.seed, 3));
    BinaryMask hedge_mask(c.width, c.height);
    for (int i = 0; i < c.n_hedges; ++i) {
        paint_polyline(hedge_mask, random_polyline(hedge_rng, c.width, c.height, 0.18), 1.5);
    }
    for (size_t i = 0; i < hedge_mask.size(); ++i) {
        if (road_mask.bits[i] || river_mask.bits[i]) hedge_mask.bits[i] = 0;
    }

    SplitMix64 bg_rng(SplitMix64::derive(c.seed, 4));
    scene.reflectivity = background_field(bg_rng, c.width, c.height);

    // 2-px bright embankment rim around the road footprint
    std::vector<std::int64_t> road_dist2 = edt_squared(road_mask);
    double river_factor = c.contrast * 0.8;
    for (size_t i = 0; i < scene.reflectivity.size(); ++i) {
        double v = scene.reflectivity.values[i];
        if (road_mask.bits[i]) {
            v *= c.contrast;
        } else if (road_dist2[i] <= 4) {
            v *= c.embankment_gain;
        } else if (river_mask.bits[i]) {
            v *= river_factor;
        } else if (hedge_mask.bits[i]) {
            v *= c.embankment_gain;
        }
        scene.reflectivity.values[i] = v;
    }

    scene.valid = BinaryMask(c.width, c.height, true);
    scene.image = add_speckle(scene.reflectivity, c.looks, SplitMix64::derive(c.seed, 5));
    return scene;
}

std::string serialize_manifest(const DatasetManifest& m) {
    std::ostringstream out;
    for (const SceneFiles& s : m.scenes) {
        out << s.scene_id << " " << s.image_path << " " << s.roads_path << " "
            << s.valid_path << " " << s.seed << "\n";
    }
    return out.str();
}

DatasetManifest parse_manifest(const std::string& text) {
    DatasetManifest m;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        SceneFiles s;
        if (!(ls >> s.scene_id >> s.image_path >> s.roads_path >> s.valid_path >> s.seed)) {
            throw DataError("manifest: malformed line '" + line + "'");
        }
        m.scenes.push_back(std::move(s));
    }
    return m;
}

DatasetManifest read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open manifest: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    DatasetManifest m = parse_manifest(buf.str());
    // stored paths are relative to the manifest's directory
    fs::path dir = fs::path(path).parent_path();
    for (SceneFiles& s : m.scenes) {
        s.image_path = (dir / s.image_path).string();
        s.roads_path = (dir / s.roads_path).string();
        s.valid_path = (dir / s.valid_path).string();
    }
    return m;
}

DatasetManifest generate_dataset(const SceneConfig& config, int n_scenes, const std::string& out_dir) {
    if (n_scenes < 0) throw ConfigError("generate_dataset: n_scenes must be non-negative");
    fs::create_directories(out_dir);

    DatasetManifest manifest;
    for (int i = 0; i < n_scenes; ++i) {
        SceneConfig sc = config;
        sc.seed = config.seed + static_cast<std::uint64_t>(i);
        Scene scene = generate_scene(sc);

        char name[64];
        std::snprintf(name, sizeof(name), "scene_%04d", i);
        SceneFiles files;
        files.scene_id = i;
        files.seed = sc.seed;
        files.image_path = std::string(name) + "_image.pgm";
        files.roads_path = std::string(name) + "_roads.txt";
        files.valid_path = std::string(name) + "_valid.pgm";

        write_pgm(scene.image, (fs::path(out_dir) / files.image_path).string());
        write_roads(scene.roads, (fs::path(out_dir) / files.roads_path).string());
        write_pgm(mask_to_raster(scene.valid), (fs::path(out_dir) / files.valid_path).string());
        manifest.scenes.push_back(std::move(files));
    }

    std::ofstream out(fs::path(out_dir) / "manifest.txt", std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write manifest in " + out_dir);
    out << serialize_manifest(manifest);
    return manifest;
}

} // namespace sartol
