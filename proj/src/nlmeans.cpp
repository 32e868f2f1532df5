#include "sartol/nlmeans.hpp"
#include "sartol/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace sartol {

namespace {

void check_params(const Raster& r, const NlMeansParams& p) {
    if (p.patch_radius < 1) throw ConfigError("nl_means: patch_radius must be >= 1");
    if (p.search_radius < p.patch_radius) {
        throw ConfigError("nl_means: search_radius must be >= patch_radius");
    }
    if (!(p.h > 0.0)) throw ConfigError("nl_means: h must be positive");
    int need = 2 * p.search_radius + 1;
    if (r.width < need || r.height < need) {
        throw DataError("nl_means: raster smaller than the search window");
    }
}

// Mean squared difference between the patches centered at (x0,y0) and (x1,y1).
double patch_dist2(const Raster& r, int x0, int y0, int x1, int y1, int pr) {
    double acc = 0.0;
    for (int dy = -pr; dy <= pr; ++dy) {
        int ya = mirror_index(y0 + dy, r.height);
        int yb = mirror_index(y1 + dy, r.height);
        for (int dx = -pr; dx <= pr; ++dx) {
            int xa = mirror_index(x0 + dx, r.width);
            int xb = mirror_index(x1 + dx, r.width);
            double d = static_cast<double>(r.at(xa, ya)) - static_cast<double>(r.at(xb, yb));
            acc += d * d;
        }
    }
    int side = 2 * pr + 1;
    return acc / static_cast<double>(side * side);
}

std::uint16_t filter_pixel(const Raster& r, int x, int y, const NlMeansParams& p,
                           double two_sigma2, double inv_h2,
                           std::uint16_t lo, std::uint16_t hi) {
    double wsum = 0.0;
    double vsum = 0.0;
    for (int dy = -p.search_radius; dy <= p.search_radius; ++dy) {
        for (int dx = -p.search_radius; dx <= p.search_radius; ++dx) {
            int xs = mirror_index(x + dx, r.width);
            int ys = mirror_index(y + dy, r.height);
            double d2 = patch_dist2(r, x, y, xs, ys, p.patch_radius);
            double w = std::exp(-std::max(0.0, d2 - two_sigma2) * inv_h2);
            wsum += w;
            vsum += w * static_cast<double>(r.at(xs, ys));
        }
    }
    double v = vsum / wsum;
    long rounded = std::lround(v);
    rounded = std::clamp(rounded, static_cast<long>(lo), static_cast<long>(hi));
    return static_cast<std::uint16_t>(rounded);
}

Raster run(const Raster& r, const NlMeansParams& p, bool parallel) {
    check_params(r, p);
    double sigma = estimate_sigma(r);
    double two_sigma2 = 2.0 * sigma * sigma;
    double inv_h2 = 1.0 / (p.h * p.h);
    auto [lo_it, hi_it] = std::minmax_element(r.samples.begin(), r.samples.end());
    std::uint16_t lo = *lo_it, hi = *hi_it;

    Raster out(r.width, r.height, r.max_value);
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int y = 0; y < r.height; ++y) {
            for (int x = 0; x < r.width; ++x) {
                out.at(x, y) = filter_pixel(r, x, y, p, two_sigma2, inv_h2, lo, hi);
            }
        }
    } else {
        for (int y = 0; y < r.height; ++y) {
            for (int x = 0; x < r.width; ++x) {
                out.at(x, y) = filter_pixel(r, x, y, p, two_sigma2, inv_h2, lo, hi);
            }
        }
    }
    return out;
}

} // namespace

double estimate_sigma(const Raster& r) {
    std::vector<double> diffs;
    diffs.reserve(r.size());
    for (int y = 0; y < r.height; ++y) {
        for (int x = 1; x < r.width; ++x) {
            diffs.push_back(std::abs(static_cast<double>(r.at(x, y)) -
                                     static_cast<double>(r.at(x - 1, y))));
        }
    }
    if (diffs.empty()) return 0.0;
    size_t mid = diffs.size() / 2;
    std::nth_element(diffs.begin(), diffs.begin() + mid, diffs.end());
    double mad = diffs[mid];
    return mad / (std::sqrt(2.0) * 0.6745);
}

Raster nl_means(const Raster& r, const NlMeansParams& p) { return run(r, p, true); }

Raster nl_means_ref(const Raster& r, const NlMeansParams& p) { return run(r, p, false); }

} // namespace sartol
