#include "sartol/runconfig.hpp"
#include "sartol/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

using nlohmann::json;

namespace sartol {

const char* augment_mode_name(AugmentMode mode) {
    switch (mode) {
        case AugmentMode::None: return "none";
        case AugmentMode::Rotations: return "rotations";
        case AugmentMode::RotationsAndFlips: return "rotations_and_flips";
    }
    return "?";
}

AugmentMode augment_mode_from_name(const std::string& name) {
    if (name == "none") return AugmentMode::None;
    if (name == "rotations") return AugmentMode::Rotations;
    if (name == "rotations_and_flips") return AugmentMode::RotationsAndFlips;
    throw ConfigError("config: unknown augment mode '" + name + "'");
}

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ConfigError("config: unknown key '" + where + "." + it.key() + "'");
        }
    }
}

template <class T>
void get(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: bad value for '" + where + "." + key + "'");
    }
}

} // namespace

RunConfig parse_run_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: JSON parse error: ") + e.what());
    }
    check_keys(root, "", {"scene", "dataset", "train", "eval", "paths", "n_scenes"});

    RunConfig c;
    if (root.contains("scene")) {
        const json& s = root["scene"];
        check_keys(s, "scene", {"width", "height", "n_major", "n_country", "n_dirt", "n_rivers",
                                "n_hedges", "looks", "contrast", "embankment_gain", "seed"});
        get(s, "width", c.scene.width, "scene");
        get(s, "height", c.scene.height, "scene");
        get(s, "n_major", c.scene.n_major, "scene");
        get(s, "n_country", c.scene.n_country, "scene");
        get(s, "n_dirt", c.scene.n_dirt, "scene");
        get(s, "n_rivers", c.scene.n_rivers, "scene");
        get(s, "n_hedges", c.scene.n_hedges, "scene");
        get(s, "looks", c.scene.looks, "scene");
        get(s, "contrast", c.scene.contrast, "scene");
        get(s, "embankment_gain", c.scene.embankment_gain, "scene");
        get(s, "seed", c.scene.seed, "scene");
    }
    if (root.contains("dataset")) {
        const json& d = root["dataset"];
        check_keys(d, "dataset", {"patch_size", "stride", "augment", "split_fraction"});
        get(d, "patch_size", c.dataset.patch_size, "dataset");
        get(d, "stride", c.dataset.stride, "dataset");
        std::string aug = augment_mode_name(c.dataset.augment);
        get(d, "augment", aug, "dataset");
        c.dataset.augment = augment_mode_from_name(aug);
        get(d, "split_fraction", c.dataset.split_fraction, "dataset");
    }
    if (root.contains("train")) {
        const json& t = root["train"];
        check_keys(t, "train", {"model", "learning_rate", "lr_decay_per_epoch", "epochs",
                                "batch_size", "t_max", "lambda", "seed"});
        get(t, "model", c.train.model, "train");
        get(t, "learning_rate", c.train.learning_rate, "train");
        get(t, "lr_decay_per_epoch", c.train.lr_decay_per_epoch, "train");
        get(t, "epochs", c.train.epochs, "train");
        get(t, "batch_size", c.train.batch_size, "train");
        get(t, "t_max", c.train.t_max, "train");
        get(t, "lambda", c.train.lambda, "train");
        get(t, "seed", c.train.seed, "train");
    }
    if (root.contains("eval")) {
        const json& e = root["eval"];
        check_keys(e, "eval", {"threshold"});
        get(e, "threshold", c.eval.threshold, "eval");
    }
    if (root.contains("paths")) {
        const json& p = root["paths"];
        check_keys(p, "paths", {"out_dir", "scenes_dir", "patches_dir", "checkpoint", "image",
                                "prediction", "truth", "valid", "roads"});
        get(p, "out_dir", c.paths.out_dir, "paths");
        get(p, "scenes_dir", c.paths.scenes_dir, "paths");
        get(p, "patches_dir", c.paths.patches_dir, "paths");
        get(p, "checkpoint", c.paths.checkpoint, "paths");
        get(p, "image", c.paths.image, "paths");
        get(p, "prediction", c.paths.prediction, "paths");
        get(p, "truth", c.paths.truth, "paths");
        get(p, "valid", c.paths.valid, "paths");
        get(p, "roads", c.paths.roads, "paths");
    }
    get(root, "n_scenes", c.n_scenes, "");
    return c;
}

std::string serialize_run_config(const RunConfig& c) {
    json root;
    root["scene"] = {{"width", c.scene.width},
                     {"height", c.scene.height},
                     {"n_major", c.scene.n_major},
                     {"n_country", c.scene.n_country},
                     {"n_dirt", c.scene.n_dirt},
                     {"n_rivers", c.scene.n_rivers},
                     {"n_hedges", c.scene.n_hedges},
                     {"looks", c.scene.looks},
                     {"contrast", c.scene.contrast},
                     {"embankment_gain", c.scene.embankment_gain},
                     {"seed", c.scene.seed}};
    root["dataset"] = {{"patch_size", c.dataset.patch_size},
                       {"stride", c.dataset.stride},
                       {"augment", augment_mode_name(c.dataset.augment)},
                       {"split_fraction", c.dataset.split_fraction}};
    root["train"] = {{"model", c.train.model},
                     {"learning_rate", c.train.learning_rate},
                     {"lr_decay_per_epoch", c.train.lr_decay_per_epoch},
                     {"epochs", c.train.epochs},
                     {"batch_size", c.train.batch_size},
                     {"t_max", c.train.t_max},
                     {"lambda", c.train.lambda},
                     {"seed", c.train.seed}};
    root["eval"] = {{"threshold", c.eval.threshold}};
    root["paths"] = {{"out_dir", c.paths.out_dir},
                     {"scenes_dir", c.paths.scenes_dir},
                     {"patches_dir", c.paths.patches_dir},
                     {"checkpoint", c.paths.checkpoint},
                     {"image", c.paths.image},
                     {"prediction", c.paths.prediction},
                     {"truth", c.paths.truth},
                     {"valid", c.paths.valid},
                     {"roads", c.paths.roads}};
    root["n_scenes"] = c.n_scenes;
    return root.dump(2) + "\n";
}

RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();

    json root;
    try {
        root = json::parse(buf.str());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: JSON parse error: ") + e.what());
    }
    for (const std::string& ov : overrides) {
        size_t eq = ov.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("override '" + ov + "' must look like key.subkey=value");
        }
        std::string keypath = ov.substr(0, eq);
        std::string value = ov.substr(eq + 1);
        json* node = &root;
        size_t start = 0;
        for (;;) {
            size_t dot = keypath.find('.', start);
            std::string key = keypath.substr(start, dot == std::string::npos ? dot : dot - start);
            if (dot == std::string::npos) {
                json parsed = json::parse(value, nullptr, false);
                (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
                break;
            }
            node = &(*node)[key];
            start = dot + 1;
        }
    }
    return parse_run_config(root.dump());
}

} // namespace sartol
