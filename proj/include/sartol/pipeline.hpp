#pragma once

#include "sartol/autonet.hpp"
#include "sartol/eval.hpp"
#include "sartol/runconfig.hpp"
#include "sartol/synthscene.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sartol {

struct LoadedScene {
    int scene_id = 0;
    Raster image;
    RoadVectorSet roads;
    BinaryMask valid;
    BinaryMask y_bin;
};

std::vector<LoadedScene> load_scenes(const DatasetManifest& manifest);

// Tolerant ground truth + tiling of the train split (top split_fraction rows
// of each scene), plus dataset statistics computed over those train regions.
struct TiledData {
    PatchSet patches;
    PatchSetHeader header;
};

TiledData tile_scenes(const std::vector<LoadedScene>& scenes, int t_max, double split_fraction,
                      int patch_size, int stride, AugmentMode mode);

// As above, but whole scenes (no split); used when holding out entire scenes.
TiledData tile_whole_scenes(const std::vector<LoadedScene>& scenes, int t_max,
                            int patch_size, int stride, AugmentMode mode);

// Prediction + confusion over the bottom (1 - split_fraction) rows of each
// scene; counts pooled across scenes. split_fraction = 0 evaluates whole
// scenes.
ConfusionCounts evaluate_scenes(const TrainedModel& model, const std::vector<LoadedScene>& scenes,
                                double split_fraction, double threshold, int tile, int overlap);

// One sweep cell: tile with the cell's t_max, train, evaluate on the per-scene
// test split.
struct CellResult {
    MetricsReport report;
    TrainHistory history;
};

CellResult run_cell(const std::vector<LoadedScene>& scenes, const RunConfig& config,
                    int t_max, double lambda);

// FNV-1a digest of a file, hex-encoded; used by run manifests to detect input
// drift between sweep cells.
std::string file_digest(const std::string& path);

// config snapshot + input digests + tool version, written next to outputs
void write_run_manifest(const std::string& out_dir, const std::string& command,
                        const RunConfig& config, const std::vector<std::string>& input_files);

extern const char* kToolVersion;

} // namespace sartol
