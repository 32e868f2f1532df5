#pragma once

#include "sartol/autonet.hpp"
#include "sartol/dataset.hpp"
#include "sartol/synthscene.hpp"

#include <string>
#include <vector>

namespace sartol {

struct DatasetConfig {
    int patch_size = 256;
    int stride = 256;
    AugmentMode augment = AugmentMode::Rotations;
    double split_fraction = 0.8;
};

struct EvalConfig {
    double threshold = 0.5;
};

struct PathsConfig {
    std::string out_dir = "out";
    std::string scenes_dir;
    std::string patches_dir;
    std::string checkpoint;
    std::string image;
    std::string prediction;
    std::string truth;
    std::string valid;
    std::string roads;
};

// The one structured configuration every CLI command reads. JSON layout
// mirrors the struct nesting; unknown keys are rejected.
struct RunConfig {
    SceneConfig scene;
    DatasetConfig dataset;
    TrainConfig train;
    EvalConfig eval;
    PathsConfig paths;
    int n_scenes = 8;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides = {});
std::string serialize_run_config(const RunConfig& config);

const char* augment_mode_name(AugmentMode mode);
AugmentMode augment_mode_from_name(const std::string& name);

} // namespace sartol
