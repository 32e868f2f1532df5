#pragma once

#include "sartol/groundtruth.hpp"
#include "sartol/raster.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sartol {

struct SceneConfig {
    int width = 512;
    int height = 512;
    int n_major = 2;
    int n_country = 2;
    int n_dirt = 1;
    int n_rivers = 1;
    int n_hedges = 2;
    int looks = 1;              // speckle averaging factor, >= 1
    double contrast = 0.35;     // road-to-background reflectivity ratio, in (0,1)
    double embankment_gain = 1.8; // bright rim multiplier, >= 1
    std::uint64_t seed = 0;
};

struct Scene {
    Raster image;            // speckled 16-bit image
    RoadVectorSet roads;
    BinaryMask valid;
    FloatRaster reflectivity; // pre-speckle field, kept for oracle tests
};

// Fixed global factor mapping unit reflectivity to 16-bit samples.
constexpr double kReflectivityScale = 2000.0;

// Multiplicative speckle: sample = round(reflectivity * s * kReflectivityScale)
// clamped to [0, 65535], s ~ Gamma(looks, 1/looks) i.i.d. per pixel from the
// seeded stream.
Raster add_speckle(const FloatRaster& reflectivity, int looks, std::uint64_t seed);

Scene generate_scene(const SceneConfig& config);

struct SceneFiles {
    int scene_id = 0;
    std::string image_path;
    std::string roads_path;
    std::string valid_path;
    std::uint64_t seed = 0;
};

struct DatasetManifest {
    std::vector<SceneFiles> scenes;
};

std::string serialize_manifest(const DatasetManifest& manifest);
DatasetManifest parse_manifest(const std::string& text);
DatasetManifest read_manifest(const std::string& path);

// Writes n_scenes scene triples (image PGM, roads text, valid PGM) under
// out_dir, per-scene seed = config.seed + index, plus a manifest file
// out_dir/manifest.txt.
DatasetManifest generate_dataset(const SceneConfig& config, int n_scenes, const std::string& out_dir);

} // namespace sartol
