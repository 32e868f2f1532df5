#pragma once

#include "sartol/dataset.hpp"
#include "sartol/net_graph.hpp"
#include "sartol/raster.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sartol {

struct TrainConfig {
    std::string model = "mini_fcn";
    double learning_rate = 5e-4;
    double lr_decay_per_epoch = 0.90;
    int epochs = 10;
    int batch_size = 16;
    int t_max = 4;
    double lambda = 2.0; // road loss weight, clamped to W = [1, 1/f_road]
    std::uint64_t seed = 0;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    double lr = 0.0;
    double mean_loss = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    double effective_lambda = 1.0;

    std::string to_csv() const;
};

// Batch tensors assembled from patch entries; image samples normalized with
// the given stats.
struct Batch {
    Tensor4<float> image;
    Tensor4<float> y_tol;
    Tensor4<float> y_bin;
    Tensor4<float> valid;
};

Batch make_batch(const PatchSet& patches, const std::vector<int>& indices, const NormStats& stats);

struct TrainedModel {
    ModelSpec spec;
    ModelParams<float> params;
    NormStats stats; // normalization carried with the checkpoint
};

// Full training protocol: per-epoch shuffled batches (epoch seed = seed +
// epoch), ADAM with lr = base * decay^epoch, deterministic end to end.
TrainedModel train(const ModelSpec& spec, const PatchSet& patches, const NormStats& stats,
                   double f_road, const TrainConfig& config, TrainHistory& history);

// Sliding-tile inference with mirrored edge padding; overlapping tile regions
// are averaged. Input is a raw raster; normalization uses the model's stats.
FloatRaster predict_full(const TrainedModel& model, const Raster& image, int tile, int overlap);

// Versioned binary checkpoint: header (magic, version, model name, layer
// table, norm stats), then parameter tensors in declaration order as 32-bit
// little-endian floats. Layout notes in docs/checkpoint_format.md.
void save_checkpoint(const TrainedModel& model, const std::string& path);
TrainedModel load_checkpoint(const std::string& path);

} // namespace sartol
