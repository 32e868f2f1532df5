#pragma once

#include "sartol/raster.hpp"

namespace sartol {

struct NlMeansParams {
    int patch_radius = 3;
    int search_radius = 10;
    double h = 10.0; // smoothing strength, > 0
};

// Robust noise estimate: median absolute deviation of horizontal first
// differences, divided by sqrt(2) and by 0.6745.
double estimate_sigma(const Raster& raster);

// Non-local means: each pixel becomes the weight-normalized average over the
// search window, weight exp(-max(0, d^2 - 2*sigma^2) / h^2) where d^2 is the
// mean squared difference between the two patches (mirror-padded at edges).
// Output rounded and clamped to the input sample range. OpenMP over rows;
// bit-identical to nl_means_ref.
Raster nl_means(const Raster& raster, const NlMeansParams& params);

// Serial reference, kept for tests and benchmarks.
Raster nl_means_ref(const Raster& raster, const NlMeansParams& params);

} // namespace sartol
