#include "sartol/dataset.hpp"
#include "sartol/errors.hpp"
#include "sartol/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace fs = std::filesystem;

namespace sartol {

AreaSplit split_area(int width, int height, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("split_area: train_fraction must be in (0,1)");
    }
    int train_rows = static_cast<int>(std::lround(train_fraction * height));
    if (train_rows < 1 || train_rows >= height) {
        throw ConfigError("split_area: fraction yields an empty region");
    }
    AreaSplit s;
    s.train = Rect{0, 0, width, train_rows};
    s.test = Rect{0, train_rows, width, height - train_rows};
    return s;
}

namespace {

template <class G>
G crop(const G& g, int x0, int y0, int size) {
    G out = g;
    out.width = size;
    out.height = size;
    grid_values(out).resize(static_cast<size_t>(size) * size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            grid_values(out)[static_cast<size_t>(y) * size + x] =
                grid_values(g)[static_cast<size_t>(y0 + y) * g.width + (x0 + x)];
        }
    }
    return out;
}

} // namespace

PatchSet extract_patches(const Raster& image, const FloatRaster& y_tol,
                         const BinaryMask& y_bin, const BinaryMask& valid,
                         const Rect& region, int patch_size, int stride, int scene_id) {
    if (patch_size < 1 || stride < 1) {
        throw ConfigError("extract_patches: patch_size and stride must be >= 1");
    }
    if (region.width < patch_size || region.height < patch_size) {
        throw ConfigError("extract_patches: region smaller than patch_size");
    }

    PatchSet ps;
    ps.patch_size = patch_size;
    for (int oy = 0; oy + patch_size <= region.height; oy += stride) {
        for (int ox = 0; ox + patch_size <= region.width; ox += stride) {
            int ax = region.x0 + ox;
            int ay = region.y0 + oy;
            PatchEntry e;
            e.valid = crop(valid, ax, ay, patch_size);
            if (e.valid.count() == 0) continue;
            e.image = crop(image, ax, ay, patch_size);
            // snap tolerant targets to the 16-bit storage grid
            e.y_tol = dequantize_unit(quantize_unit(crop(y_tol, ax, ay, patch_size)));
            e.y_bin = crop(y_bin, ax, ay, patch_size);
            e.scene_id = scene_id;
            e.x_off = ax;
            e.y_off = ay;
            ps.entries.push_back(std::move(e));
        }
    }
    return ps;
}

namespace {

PatchEntry transform_entry(const PatchEntry& e, int quarter_turns, bool hflip, const char* tag) {
    PatchEntry out = e;
    for (int i = 0; i < quarter_turns; ++i) {
        out.image = rot90(out.image);
        out.y_tol = rot90(out.y_tol);
        out.y_bin = rot90(out.y_bin);
        out.valid = rot90(out.valid);
    }
    if (hflip) {
        out.image = flip_h(out.image);
        out.y_tol = flip_h(out.y_tol);
        out.y_bin = flip_h(out.y_bin);
        out.valid = flip_h(out.valid);
    }
    out.aug = tag;
    return out;
}

} // namespace

PatchSet augment(const PatchSet& patches, AugmentMode mode) {
    static const char* rot_tags[4] = {"r0", "r90", "r180", "r270"};
    static const char* flip_tags[4] = {"r0f", "r90f", "r180f", "r270f"};

    PatchSet out;
    out.patch_size = patches.patch_size;
    for (const PatchEntry& e : patches.entries) {
        if (mode == AugmentMode::None) {
            out.entries.push_back(e);
            continue;
        }
        for (int r = 0; r < 4; ++r) {
            out.entries.push_back(transform_entry(e, r, false, rot_tags[r]));
        }
        if (mode == AugmentMode::RotationsAndFlips) {
            for (int r = 0; r < 4; ++r) {
                out.entries.push_back(transform_entry(e, r, true, flip_tags[r]));
            }
        }
    }
    return out;
}

double road_frequency(const std::vector<const BinaryMask*>& y_bins,
                      const std::vector<const BinaryMask*>& valids) {
    if (y_bins.size() != valids.size()) {
        throw DataError("road_frequency: mask list size mismatch");
    }
    std::uint64_t road = 0, total = 0;
    for (size_t i = 0; i < y_bins.size(); ++i) {
        const BinaryMask& b = *y_bins[i];
        const BinaryMask& v = *valids[i];
        if (b.width != v.width || b.height != v.height) {
            throw DataError("road_frequency: mask dimensions mismatch");
        }
        for (size_t j = 0; j < b.size(); ++j) {
            if (v.bits[j]) {
                ++total;
                road += b.bits[j];
            }
        }
    }
    if (total == 0) throw DataError("road_frequency: zero valid pixels");
    return static_cast<double>(road) / static_cast<double>(total);
}

double road_frequency(const PatchSet& patches) {
    std::vector<const BinaryMask*> bins, valids;
    for (const PatchEntry& e : patches.entries) {
        bins.push_back(&e.y_bin);
        valids.push_back(&e.valid);
    }
    return road_frequency(bins, valids);
}

std::vector<std::vector<int>> epoch_iter(const PatchSet& patches, int batch_size,
                                         std::uint64_t epoch_seed) {
    if (batch_size < 1) throw ConfigError("epoch_iter: batch_size must be >= 1");
    if (patches.entries.empty()) throw DataError("epoch_iter: empty patch set");

    std::vector<int> order(patches.entries.size());
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 rng(epoch_seed);
    for (size_t i = order.size() - 1; i > 0; --i) {
        size_t j = static_cast<size_t>(rng.next_below(i + 1));
        std::swap(order[i], order[j]);
    }

    std::vector<std::vector<int>> batches;
    for (size_t i = 0; i < order.size(); i += batch_size) {
        size_t end = std::min(order.size(), i + batch_size);
        batches.emplace_back(order.begin() + i, order.begin() + end);
    }
    return batches;
}

void write_patchset(const PatchSet& patches, const PatchSetHeader& header, const std::string& dir) {
    fs::create_directories(dir);
    std::ostringstream man;
    man.precision(17);
    man << "patchset " << patches.patch_size << " " << patches.entries.size() << "\n";
    man << "stats " << header.stats.mean << " " << header.stats.std << "\n";
    man << "froad " << header.f_road << "\n";
    man << "tmax " << header.t_max << "\n";
    for (size_t i = 0; i < patches.entries.size(); ++i) {
        const PatchEntry& e = patches.entries[i];
        char base[32];
        std::snprintf(base, sizeof(base), "patch_%05zu", i);
        write_pgm(e.image, (fs::path(dir) / (std::string(base) + "_img.pgm")).string());
        write_pgm(quantize_unit(e.y_tol), (fs::path(dir) / (std::string(base) + "_ytol.pgm")).string());
        write_pgm(mask_to_raster(e.y_bin), (fs::path(dir) / (std::string(base) + "_ybin.pgm")).string());
        write_pgm(mask_to_raster(e.valid), (fs::path(dir) / (std::string(base) + "_valid.pgm")).string());
        man << base << " " << e.scene_id << " " << e.x_off << " " << e.y_off << " " << e.aug << "\n";
    }
    std::ofstream out(fs::path(dir) / "patches.txt", std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write patch manifest in " + dir);
    out << man.str();
}

PatchSet read_patchset(const std::string& dir, PatchSetHeader* header) {
    std::ifstream in(fs::path(dir) / "patches.txt", std::ios::binary);
    if (!in) throw DataError("cannot open patch manifest in " + dir);

    PatchSet ps;
    PatchSetHeader hdr;
    std::string tok;
    size_t count = 0;
    in >> tok >> ps.patch_size >> count;
    if (tok != "patchset") throw DataError("patch manifest: bad magic");
    in >> tok >> hdr.stats.mean >> hdr.stats.std;
    if (tok != "stats") throw DataError("patch manifest: missing stats");
    in >> tok >> hdr.f_road;
    if (tok != "froad") throw DataError("patch manifest: missing froad");
    in >> tok >> hdr.t_max;
    if (tok != "tmax") throw DataError("patch manifest: missing tmax");
    hdr.patch_size = ps.patch_size;

    for (size_t i = 0; i < count; ++i) {
        std::string base;
        PatchEntry e;
        if (!(in >> base >> e.scene_id >> e.x_off >> e.y_off >> e.aug)) {
            throw DataError("patch manifest: truncated entry list");
        }
        e.image = read_pgm((fs::path(dir) / (base + "_img.pgm")).string());
        e.y_tol = dequantize_unit(read_pgm((fs::path(dir) / (base + "_ytol.pgm")).string()));
        e.y_bin = raster_to_mask(read_pgm((fs::path(dir) / (base + "_ybin.pgm")).string()));
        e.valid = raster_to_mask(read_pgm((fs::path(dir) / (base + "_valid.pgm")).string()));
        ps.entries.push_back(std::move(e));
    }
    if (header) *header = hdr;
    return ps;
}

} // namespace sartol
