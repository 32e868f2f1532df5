#pragma once

#include "sartol/groundtruth.hpp"
#include "sartol/raster.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sartol {

struct ConfusionCounts {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

    std::uint64_t total() const { return tp + fp + fn + tn; }
};

// Any 0/0 ratio stays unset rather than collapsing to 0 or 1.
struct MetricsReport {
    std::optional<double> iou, precision, recall, accuracy;
    ConfusionCounts counts;
    // context labels for sweep tables
    std::string area;
    std::string model;
    int t_max = 0;
    double lambda = 1.0;
};

// true iff value >= threshold
BinaryMask binarize(const FloatRaster& prediction, double threshold);

// counts over valid pixels only; road is the positive class
ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& truth, const BinaryMask& valid);

MetricsReport metrics(const ConfusionCounts& counts);

// TP green, FP red, FN blue, TN dark gray, invalid black
RgbRaster overlay(const BinaryMask& pred, const BinaryMask& truth, const BinaryMask& valid);

// CSV: header area,model,t_max,lambda,iou,precision,recall,accuracy; metric
// cells are percentages with two decimals ("undef" for 0/0); rows sorted by
// context labels.
std::string sweep_report(const std::vector<MetricsReport>& results);

} // namespace sartol
