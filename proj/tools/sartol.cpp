#include "sartol/pipeline.hpp"
#include "sartol/errors.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace sartol;

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << text;
    if (!out) throw DataError("write failed: " + path);
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

BinaryMask load_valid_or_all(const std::string& path, int w, int h) {
    if (path.empty()) return BinaryMask(w, h, true);
    BinaryMask m = raster_to_mask(read_pgm(path));
    if (m.width != w || m.height != h) throw DataError("valid mask dims mismatch: " + path);
    return m;
}

int cmd_synth(const RunConfig& cfg) {
    generate_dataset(cfg.scene, cfg.n_scenes, cfg.paths.out_dir);
    write_run_manifest(cfg.paths.out_dir, "synth", cfg, {});
    std::cout << "wrote " << cfg.n_scenes << " scenes to " << cfg.paths.out_dir << "\n";
    return 0;
}

int cmd_gt(const RunConfig& cfg) {
    if (cfg.paths.roads.empty()) throw ConfigError("gt: paths.roads is required");
    RoadVectorSet roads = read_roads(cfg.paths.roads);
    BinaryMask mask = rasterize_roads(roads);
    BinaryMask valid = load_valid_or_all(cfg.paths.valid, mask.width, mask.height);
    TolerantGroundTruth gt = make_tolerant(mask, cfg.train.t_max, valid);

    fs::create_directories(cfg.paths.out_dir);
    write_pgm(mask_to_raster(gt.y_bin), (fs::path(cfg.paths.out_dir) / "ybin.pgm").string());
    write_pgm(quantize_unit(gt.y_tol), (fs::path(cfg.paths.out_dir) / "ytol.pgm").string());
    write_pgm(mask_to_raster(gt.valid), (fs::path(cfg.paths.out_dir) / "valid.pgm").string());
    write_run_manifest(cfg.paths.out_dir, "gt", cfg, {cfg.paths.roads});
    std::cout << "wrote tolerant ground truth (t_max=" << cfg.train.t_max << ") to "
              << cfg.paths.out_dir << "\n";
    return 0;
}

std::string scenes_manifest_path(const RunConfig& cfg) {
    std::string dir = cfg.paths.scenes_dir.empty() ? cfg.paths.out_dir : cfg.paths.scenes_dir;
    return (fs::path(dir) / "manifest.txt").string();
}

int cmd_tile(const RunConfig& cfg) {
    std::string manifest_path = scenes_manifest_path(cfg);
    DatasetManifest manifest = read_manifest(manifest_path);
    std::vector<LoadedScene> scenes = load_scenes(manifest);
    TiledData tiled = tile_scenes(scenes, cfg.train.t_max, cfg.dataset.split_fraction,
                                  cfg.dataset.patch_size, cfg.dataset.stride, cfg.dataset.augment);
    std::string patches_dir = cfg.paths.patches_dir.empty()
                                  ? (fs::path(cfg.paths.out_dir) / "patches").string()
                                  : cfg.paths.patches_dir;
    write_patchset(tiled.patches, tiled.header, patches_dir);
    write_run_manifest(cfg.paths.out_dir, "tile", cfg, {manifest_path});
    std::cout << "wrote " << tiled.patches.entries.size() << " patches to " << patches_dir
              << " (f_road=" << tiled.header.f_road << ")\n";
    return 0;
}

int cmd_train(const RunConfig& cfg) {
    std::string patches_dir = cfg.paths.patches_dir.empty()
                                  ? (fs::path(cfg.paths.out_dir) / "patches").string()
                                  : cfg.paths.patches_dir;
    PatchSetHeader header;
    PatchSet patches = read_patchset(patches_dir, &header);
    ModelSpec spec = spec_by_name(cfg.train.model);
    TrainHistory history;
    TrainedModel model = train(spec, patches, header.stats, header.f_road, cfg.train, history);

    fs::create_directories(cfg.paths.out_dir);
    std::string ckpt = cfg.paths.checkpoint.empty()
                           ? (fs::path(cfg.paths.out_dir) / "model.ckpt").string()
                           : cfg.paths.checkpoint;
    save_checkpoint(model, ckpt);
    write_text((fs::path(cfg.paths.out_dir) / "history.csv").string(), history.to_csv());
    write_run_manifest(cfg.paths.out_dir, "train",
                       cfg, {(fs::path(patches_dir) / "patches.txt").string()});
    std::cout << "trained " << cfg.train.model << " for " << cfg.train.epochs
              << " epochs, final loss " << history.epochs.back().mean_loss << ", checkpoint "
              << ckpt << "\n";
    return 0;
}

int cmd_predict(const RunConfig& cfg) {
    if (cfg.paths.checkpoint.empty()) throw ConfigError("predict: paths.checkpoint is required");
    if (cfg.paths.image.empty()) throw ConfigError("predict: paths.image is required");
    TrainedModel model = load_checkpoint(cfg.paths.checkpoint);
    Raster image = read_pgm(cfg.paths.image);
    FloatRaster pred = predict_full(model, image, cfg.dataset.patch_size, 16);

    fs::create_directories(cfg.paths.out_dir);
    std::string out_path = cfg.paths.prediction.empty()
                               ? (fs::path(cfg.paths.out_dir) / "prediction.pgm").string()
                               : cfg.paths.prediction;
    write_pgm(quantize_unit(pred), out_path);
    write_run_manifest(cfg.paths.out_dir, "predict", cfg, {cfg.paths.checkpoint, cfg.paths.image});
    std::cout << "wrote prediction to " << out_path << "\n";
    return 0;
}

int cmd_eval(const RunConfig& cfg) {
    if (cfg.paths.prediction.empty()) throw ConfigError("eval: paths.prediction is required");
    if (cfg.paths.truth.empty()) throw ConfigError("eval: paths.truth is required");
    FloatRaster pred = dequantize_unit(read_pgm(cfg.paths.prediction));
    BinaryMask truth = raster_to_mask(read_pgm(cfg.paths.truth));
    BinaryMask valid = load_valid_or_all(cfg.paths.valid, truth.width, truth.height);

    BinaryMask pred_mask = binarize(pred, cfg.eval.threshold);
    MetricsReport report = metrics(confusion(pred_mask, truth, valid));
    report.area = "input";
    report.model = cfg.train.model;
    report.t_max = cfg.train.t_max;
    report.lambda = cfg.train.lambda;

    fs::create_directories(cfg.paths.out_dir);
    write_text((fs::path(cfg.paths.out_dir) / "metrics.csv").string(), sweep_report({report}));
    write_ppm(overlay(pred_mask, truth, valid),
              (fs::path(cfg.paths.out_dir) / "overlay.ppm").string());
    write_run_manifest(cfg.paths.out_dir, "eval", cfg, {cfg.paths.prediction, cfg.paths.truth});
    std::cout << sweep_report({report});
    return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::string& tmax_list, const std::string& lambda_list) {
    std::string manifest_path = scenes_manifest_path(cfg);
    DatasetManifest manifest = read_manifest(manifest_path);
    std::vector<LoadedScene> scenes = load_scenes(manifest);

    std::vector<MetricsReport> reports;
    for (int t_max : parse_int_list(tmax_list)) {
        for (double lambda : parse_double_list(lambda_list)) {
            CellResult cell = run_cell(scenes, cfg, t_max, lambda);
            reports.push_back(cell.report);
            std::cout << "cell t_max=" << t_max << " lambda=" << lambda << " iou="
                      << (cell.report.iou ? std::to_string(*cell.report.iou) : "undef") << "\n";
        }
    }
    fs::create_directories(cfg.paths.out_dir);
    write_text((fs::path(cfg.paths.out_dir) / "sweep.csv").string(), sweep_report(reports));
    write_run_manifest(cfg.paths.out_dir, "sweep", cfg, {manifest_path});
    std::cout << sweep_report(reports);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sartol: tolerant road segmentation pipeline for speckled grayscale rasters"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string tmax_list = "0,1,2,4,8";
    std::string lambda_list = "1";

    const char* names[] = {"synth", "gt", "tile", "train", "predict", "eval", "sweep"};
    const char* descs[] = {
        "generate a synthetic speckled dataset",
        "rasterize roads and build tolerant ground truth",
        "tile scenes into training patches",
        "train a model on tiled patches",
        "predict a full raster with a trained checkpoint",
        "threshold + score a prediction against binary truth",
        "run the t_max / lambda experiment grid",
    };
    for (int i = 0; i < 7; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], descs[i]);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--override", overrides, "key.subkey=value config override");
        if (std::string(names[i]) == "sweep") {
            sub->add_option("--t-max-list", tmax_list, "comma-separated t_max values");
            sub->add_option("--lambda-list", lambda_list, "comma-separated loss weights");
        }
    }

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = load_run_config(config_path, overrides);
        std::string sub = app.get_subcommands()[0]->get_name();
        if (sub == "synth") return cmd_synth(cfg);
        if (sub == "gt") return cmd_gt(cfg);
        if (sub == "tile") return cmd_tile(cfg);
        if (sub == "train") return cmd_train(cfg);
        if (sub == "predict") return cmd_predict(cfg);
        if (sub == "eval") return cmd_eval(cfg);
        if (sub == "sweep") return cmd_sweep(cfg, tmax_list, lambda_list);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
