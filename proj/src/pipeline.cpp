#include "sartol/pipeline.hpp"
#include "sartol/errors.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace sartol {

const char* kToolVersion = "sartol 1.0.0";

std::vector<LoadedScene> load_scenes(const DatasetManifest& manifest) {
    std::vector<LoadedScene> scenes;
    scenes.reserve(manifest.scenes.size());
    for (const SceneFiles& f : manifest.scenes) {
        LoadedScene s;
        s.scene_id = f.scene_id;
        s.image = read_pgm(f.image_path);
        s.roads = read_roads(f.roads_path);
        s.valid = raster_to_mask(read_pgm(f.valid_path));
        s.y_bin = rasterize_roads(s.roads);
        if (s.valid.width != s.image.width || s.valid.height != s.image.height) {
            throw DataError("scene " + std::to_string(f.scene_id) + ": valid mask dims mismatch");
        }
        scenes.push_back(std::move(s));
    }
    return scenes;
}

namespace {

TiledData tile_impl(const std::vector<LoadedScene>& scenes, int t_max, double split_fraction,
                    int patch_size, int stride, AugmentMode mode) {
    if (scenes.empty()) throw DataError("tile: no scenes");

    TiledData out;
    out.patches.patch_size = patch_size;
    out.header.patch_size = patch_size;
    out.header.t_max = t_max;

    // stats and f_road come from the training regions only
    std::vector<Raster> train_crops;
    std::uint64_t road_px = 0, valid_px = 0;

    for (const LoadedScene& s : scenes) {
        Rect region{0, 0, s.image.width, s.image.height};
        if (split_fraction > 0.0) {
            region = split_area(s.image.width, s.image.height, split_fraction).train;
        }
        TolerantGroundTruth gt = make_tolerant(s.y_bin, t_max, s.valid);

        PatchSet ps = extract_patches(s.image, gt.y_tol, gt.y_bin, gt.valid, region,
                                      patch_size, stride, s.scene_id);
        PatchSet aug = augment(ps, mode);
        for (PatchEntry& e : aug.entries) out.patches.entries.push_back(std::move(e));

        Raster crop_img(region.width, region.height);
        for (int y = 0; y < region.height; ++y) {
            for (int x = 0; x < region.width; ++x) {
                crop_img.at(x, y) = s.image.at(region.x0 + x, region.y0 + y);
                size_t i = static_cast<size_t>(region.y0 + y) * s.image.width + (region.x0 + x);
                if (s.valid.bits[i]) {
                    ++valid_px;
                    road_px += s.y_bin.bits[i];
                }
            }
        }
        train_crops.push_back(std::move(crop_img));
    }

    out.header.stats = compute_stats(train_crops);
    if (valid_px == 0) throw DataError("tile: zero valid pixels in the training split");
    out.header.f_road = static_cast<double>(road_px) / static_cast<double>(valid_px);
    return out;
}

} // namespace

TiledData tile_scenes(const std::vector<LoadedScene>& scenes, int t_max, double split_fraction,
                      int patch_size, int stride, AugmentMode mode) {
    return tile_impl(scenes, t_max, split_fraction, patch_size, stride, mode);
}

TiledData tile_whole_scenes(const std::vector<LoadedScene>& scenes, int t_max,
                            int patch_size, int stride, AugmentMode mode) {
    return tile_impl(scenes, t_max, 0.0, patch_size, stride, mode);
}

ConfusionCounts evaluate_scenes(const TrainedModel& model, const std::vector<LoadedScene>& scenes,
                                double split_fraction, double threshold, int tile, int overlap) {
    ConfusionCounts total;
    for (const LoadedScene& s : scenes) {
        Rect region{0, 0, s.image.width, s.image.height};
        if (split_fraction > 0.0) {
            region = split_area(s.image.width, s.image.height, split_fraction).test;
        }
        Raster crop(region.width, region.height);
        BinaryMask truth(region.width, region.height), valid(region.width, region.height);
        for (int y = 0; y < region.height; ++y) {
            for (int x = 0; x < region.width; ++x) {
                crop.at(x, y) = s.image.at(region.x0 + x, region.y0 + y);
                size_t i = static_cast<size_t>(region.y0 + y) * s.image.width + (region.x0 + x);
                truth.set(x, y, s.y_bin.bits[i] != 0);
                valid.set(x, y, s.valid.bits[i] != 0);
            }
        }
        FloatRaster pred = predict_full(model, crop, tile, overlap);
        ConfusionCounts c = confusion(binarize(pred, threshold), truth, valid);
        total.tp += c.tp;
        total.fp += c.fp;
        total.fn += c.fn;
        total.tn += c.tn;
    }
    return total;
}

CellResult run_cell(const std::vector<LoadedScene>& scenes, const RunConfig& config,
                    int t_max, double lambda) {
    TiledData tiled = tile_scenes(scenes, t_max, config.dataset.split_fraction,
                                  config.dataset.patch_size, config.dataset.stride,
                                  config.dataset.augment);
    TrainConfig tc = config.train;
    tc.t_max = t_max;
    tc.lambda = lambda;
    ModelSpec spec = spec_by_name(tc.model);

    CellResult res;
    TrainedModel model = train(spec, tiled.patches, tiled.header.stats, tiled.header.f_road,
                               tc, res.history);
    ConfusionCounts counts = evaluate_scenes(model, scenes, config.dataset.split_fraction,
                                             config.eval.threshold, config.dataset.patch_size, 16);
    res.report = metrics(counts);
    res.report.area = "synthetic";
    res.report.model = tc.model;
    res.report.t_max = t_max;
    res.report.lambda = lambda;
    return res;
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file for digest: " + path);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001B3ULL;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

void write_run_manifest(const std::string& out_dir, const std::string& command,
                        const RunConfig& config, const std::vector<std::string>& input_files) {
    nlohmann::json m;
    m["tool"] = kToolVersion;
    m["command"] = command;
    m["config"] = nlohmann::json::parse(serialize_run_config(config));
    nlohmann::json digests = nlohmann::json::object();
    for (const std::string& f : input_files) digests[f] = file_digest(f);
    m["inputs"] = digests;

    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / ("run_manifest_" + command + ".json"),
                      std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write run manifest in " + out_dir);
    out << m.dump(2) << "\n";
}

} // namespace sartol
