#include "sartol/autonet.hpp"
#include "sartol/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sartol {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
    if (!(lr_decay_per_epoch > 0.0 && lr_decay_per_epoch <= 1.0)) {
        throw ConfigError("train: lr_decay_per_epoch must be in (0,1]");
    }
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (t_max < 0) throw ConfigError("train: t_max must be non-negative");
    if (lambda < 1.0) throw ConfigError("train: lambda must be >= 1");
    spec_by_name(model);
}

std::string TrainHistory::to_csv() const {
    std::ostringstream out;
    out << "epoch,lr,mean_loss\n";
    for (const EpochRecord& r : epochs) {
        char line[96];
        std::snprintf(line, sizeof(line), "%d,%.10e,%.10e\n", r.epoch, r.lr, r.mean_loss);
        out << line;
    }
    return out.str();
}

Batch make_batch(const PatchSet& patches, const std::vector<int>& indices, const NormStats& stats) {
    if (indices.empty()) throw DataError("make_batch: empty index list");
    int size = patches.patch_size;
    int n = static_cast<int>(indices.size());
    Batch b{Tensor4<float>(n, 1, size, size), Tensor4<float>(n, 1, size, size),
            Tensor4<float>(n, 1, size, size), Tensor4<float>(n, 1, size, size)};
    double inv = 1.0 / stats.std;
    for (int i = 0; i < n; ++i) {
        const PatchEntry& e = patches.entries[indices[i]];
        float* img = b.image.plane(i, 0);
        float* yt = b.y_tol.plane(i, 0);
        float* yb = b.y_bin.plane(i, 0);
        float* vd = b.valid.plane(i, 0);
        for (size_t j = 0; j < e.image.size(); ++j) {
            img[j] = static_cast<float>((e.image.samples[j] - stats.mean) * inv);
            yt[j] = static_cast<float>(e.y_tol.values[j]);
            yb[j] = e.y_bin.bits[j] ? 1.0f : 0.0f;
            vd[j] = e.valid.bits[j] ? 1.0f : 0.0f;
        }
    }
    return b;
}

TrainedModel train(const ModelSpec& spec, const PatchSet& patches, const NormStats& stats,
                   double f_road, const TrainConfig& config, TrainHistory& history) {
    config.validate();
    if (patches.entries.empty()) throw DataError("train: empty patch set");
    if (patches.patch_size % spec.downsample != 0) {
        throw ConfigError("train: patch size not divisible by the model's downsampling factor");
    }

    // clamp lambda to the admissible interval W = [1, 1/f_road]
    double lambda = config.lambda;
    double cap = f_road > 0.0 ? 1.0 / f_road : 1.0;
    lambda = std::clamp(lambda, 1.0, std::max(1.0, cap));
    history.effective_lambda = lambda;
    history.epochs.clear();

    TrainedModel model;
    model.spec = spec;
    model.stats = stats;
    model.params = init_params<float>(spec, config.seed);
    AdamState<float> adam = init_adam(model.params);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double lr = config.learning_rate * std::pow(config.lr_decay_per_epoch, epoch);
        auto batches = epoch_iter(patches, config.batch_size,
                                  config.seed + static_cast<std::uint64_t>(epoch));
        double loss_sum = 0.0;
        int step = 0;
        for (const std::vector<int>& idx : batches) {
            Batch b = make_batch(patches, idx, stats);
            ForwardCache<float> cache;
            Tensor4<float> pred = forward(spec, model.params, b.image, true, &cache);
            Tensor4<float> dpred;
            double loss = weighted_mse(pred, b.y_tol, b.y_bin, b.valid, lambda, &dpred);
            if (!std::isfinite(loss)) {
                throw NumericError("train: NaN loss at epoch " + std::to_string(epoch) +
                                   " step " + std::to_string(step));
            }
            ModelGrads<float> grads = backward(spec, model.params, cache, dpred);
            adam_step(model.params, grads, adam, lr);
            loss_sum += loss;
            ++step;
        }
        history.epochs.push_back({epoch, lr, loss_sum / static_cast<double>(step)});
    }
    return model;
}

FloatRaster predict_full(const TrainedModel& model, const Raster& image, int tile, int overlap) {
    if (tile < 1 || overlap < 0 || tile < 2 * overlap) {
        throw ConfigError("predict_full: need tile >= 2*overlap");
    }
    if (tile % model.spec.downsample != 0) {
        throw ConfigError("predict_full: tile not divisible by the model's downsampling factor");
    }
    FloatRaster norm = normalize(image, model.stats);

    int stride = tile - overlap;
    auto positions = [&](int dim) {
        std::vector<int> pos;
        if (dim <= tile) {
            pos.push_back(0);
            return pos;
        }
        for (int p = 0;; p += stride) {
            if (p + tile >= dim) {
                pos.push_back(dim - tile);
                break;
            }
            pos.push_back(p);
        }
        return pos;
    };

    // mirror-pad up to the tile size when the image is smaller
    int padded_w = std::max(image.width, tile);
    int padded_h = std::max(image.height, tile);
    FloatRaster field(padded_w, padded_h);
    for (int y = 0; y < padded_h; ++y) {
        for (int x = 0; x < padded_w; ++x) {
            field.at(x, y) = norm.at(mirror_index(x, image.width), mirror_index(y, image.height));
        }
    }

    FloatRaster sum(padded_w, padded_h);
    FloatRaster cnt(padded_w, padded_h);
    ModelParams<float> params = model.params; // forward is read-only in infer mode
    for (int py : positions(padded_h)) {
        for (int px : positions(padded_w)) {
            Tensor4<float> in(1, 1, tile, tile);
            for (int y = 0; y < tile; ++y) {
                for (int x = 0; x < tile; ++x) {
                    in.at(0, 0, y, x) = static_cast<float>(field.at(px + x, py + y));
                }
            }
            Tensor4<float> out = forward<float>(model.spec, params, in, false, nullptr);
            for (int y = 0; y < tile; ++y) {
                for (int x = 0; x < tile; ++x) {
                    sum.at(px + x, py + y) += static_cast<double>(out.at(0, 0, y, x));
                    cnt.at(px + x, py + y) += 1.0;
                }
            }
        }
    }

    FloatRaster result(image.width, image.height);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            result.at(x, y) = sum.at(x, y) / cnt.at(x, y);
        }
    }
    return result;
}

namespace {

constexpr char kMagic[8] = {'S', 'R', 'T', 'L', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<char*>(b), 4);
}

void put_i32(std::ostream& out, std::int32_t v) { put_u32(out, static_cast<std::uint32_t>(v)); }

void put_f64(std::ostream& out, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    out.write(reinterpret_cast<char*>(b), 8);
}

void put_floats(std::ostream& out, const float* p, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        std::uint32_t u;
        std::memcpy(&u, &p[i], 4);
        put_u32(out, u);
    }
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::int32_t get_i32(std::istream& in) { return static_cast<std::int32_t>(get_u32(in)); }

double get_f64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

void get_floats(std::istream& in, float* p, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        std::uint32_t u = get_u32(in);
        std::memcpy(&p[i], &u, 4);
    }
}

} // namespace

void save_checkpoint(const TrainedModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open checkpoint for writing: " + path);
    out.write(kMagic, 8);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(model.spec.name.size()));
    out.write(model.spec.name.data(), static_cast<std::streamsize>(model.spec.name.size()));
    put_u32(out, static_cast<std::uint32_t>(model.spec.layers.size()));
    for (const LayerSpec& l : model.spec.layers) {
        put_i32(out, static_cast<std::int32_t>(l.kind));
        put_i32(out, l.k);
        put_i32(out, l.in_ch);
        put_i32(out, l.out_ch);
        put_i32(out, l.stride);
        put_i32(out, l.src);
    }
    put_i32(out, model.spec.downsample);
    put_f64(out, model.stats.mean);
    put_f64(out, model.stats.std);
    for (const LayerParams<float>& p : model.params.layers) {
        put_floats(out, p.w.v.data(), p.w.size());
        put_floats(out, p.b.data(), p.b.size());
        put_floats(out, p.gamma.data(), p.gamma.size());
        put_floats(out, p.beta.data(), p.beta.size());
        put_floats(out, p.run_mean.data(), p.run_mean.size());
        put_floats(out, p.run_var.data(), p.run_var.size());
    }
    if (!out) throw DataError("checkpoint write failed: " + path);
}

TrainedModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) {
        throw DataError("not a checkpoint file: " + path);
    }
    std::uint32_t version = get_u32(in);
    if (version != kVersion) {
        throw DataError("unsupported checkpoint version " + std::to_string(version));
    }
    TrainedModel model;
    std::uint32_t name_len = get_u32(in);
    model.spec.name.resize(name_len);
    in.read(model.spec.name.data(), name_len);
    std::uint32_t n_layers = get_u32(in);
    model.spec.layers.resize(n_layers);
    for (LayerSpec& l : model.spec.layers) {
        l.kind = static_cast<LayerKind>(get_i32(in));
        l.k = get_i32(in);
        l.in_ch = get_i32(in);
        l.out_ch = get_i32(in);
        l.stride = get_i32(in);
        l.src = get_i32(in);
    }
    model.spec.downsample = get_i32(in);
    model.stats.mean = get_f64(in);
    model.stats.std = get_f64(in);
    model.spec.validate();

    // allocate via init and overwrite with the stored values
    model.params = init_params<float>(model.spec, 0);
    for (LayerParams<float>& p : model.params.layers) {
        get_floats(in, p.w.v.data(), p.w.size());
        get_floats(in, p.b.data(), p.b.size());
        get_floats(in, p.gamma.data(), p.gamma.size());
        get_floats(in, p.beta.data(), p.beta.size());
        get_floats(in, p.run_mean.data(), p.run_mean.size());
        get_floats(in, p.run_var.data(), p.run_var.size());
    }
    if (!in) throw DataError("checkpoint truncated: " + path);
    return model;
}

} // namespace sartol
