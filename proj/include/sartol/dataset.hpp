#pragma once

#include "sartol/groundtruth.hpp"
#include "sartol/raster.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sartol {

struct Rect {
    int x0 = 0, y0 = 0, width = 0, height = 0;
};

struct AreaSplit {
    Rect train;
    Rect test;
};

// Horizontal split: train = top round(fraction * height) rows, test = rest.
AreaSplit split_area(int width, int height, double train_fraction);

enum class AugmentMode { None, Rotations, RotationsAndFlips };

struct PatchEntry {
    Raster image;        // raw integer samples; normalization applied at batch time
    FloatRaster y_tol;   // snapped to the 16-bit grid so disk and memory paths agree
    BinaryMask y_bin;
    BinaryMask valid;
    int scene_id = 0;
    int x_off = 0;
    int y_off = 0;
    std::string aug = "r0";
};

struct PatchSet {
    int patch_size = 0;
    std::vector<PatchEntry> entries;
};

// Aligned square crops at offsets 0, stride, 2*stride, ... fully inside the
// region, row-major offset order. Patches with an all-false valid mask are
// dropped.
PatchSet extract_patches(const Raster& image, const FloatRaster& y_tol,
                         const BinaryMask& y_bin, const BinaryMask& valid,
                         const Rect& region, int patch_size, int stride, int scene_id);

// Rotations: 4 entries per input (0/90/180/270 ccw). RotationsAndFlips: the
// full dihedral group, rotations first then their horizontal flips.
PatchSet augment(const PatchSet& patches, AugmentMode mode);

// road pixels / valid pixels
double road_frequency(const std::vector<const BinaryMask*>& y_bins,
                      const std::vector<const BinaryMask*>& valids);
double road_frequency(const PatchSet& patches);

// Seeded permutation of entry indices, chunked into batches; the last batch
// may be short.
std::vector<std::vector<int>> epoch_iter(const PatchSet& patches, int batch_size,
                                         std::uint64_t epoch_seed);

struct PatchSetHeader {
    int patch_size = 0;
    NormStats stats;     // from the training split images
    double f_road = 0.0; // from the training split masks
    int t_max = 0;
};

// Directory-of-PGMs materialization with a manifest; round-trips exactly.
void write_patchset(const PatchSet& patches, const PatchSetHeader& header, const std::string& dir);
PatchSet read_patchset(const std::string& dir, PatchSetHeader* header = nullptr);

} // namespace sartol
