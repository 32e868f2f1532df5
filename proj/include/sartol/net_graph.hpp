#pragma once

#include "sartol/errors.hpp"
#include "sartol/net_kernels.hpp"
#include "sartol/rng.hpp"
#include "sartol/tensor.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace sartol {

enum class LayerKind : std::int32_t {
    Conv = 0,        // k x k, stride 1, mirror-padded "same"
    BatchNorm = 1,
    ReLU = 2,
    MaxPool2 = 3,
    TConv = 4,       // k=4, stride 2, output 2x input
    FuseAdd = 5,     // out = in + conv1x1(src activation)
    FuseAddId = 6,   // out = in + src activation (residual shortcut)
    FuseConcat = 7,  // out = channel concat(in, src activation)
    Sigmoid = 8,
};

struct LayerSpec {
    LayerKind kind = LayerKind::Conv;
    int k = 0;
    int in_ch = 0;
    int out_ch = 0;
    int stride = 1;
    int src = -1; // fuse layers: index of the source layer (its output)
};

struct ModelSpec {
    std::string name;
    std::vector<LayerSpec> layers;
    int downsample = 1; // input dims must be divisible by this

    void validate() const;
};

// MiniFCN: 3 conv/pool blocks (widths 16/32/64), bottleneck, decoder with two
// add-after-1x1 skip fusions from the pooled encoder features. Downsample 8.
ModelSpec mini_fcn_spec();

// MiniResUNet: symmetric 3-level encoder/decoder, residual unit in every
// block, concat skip per resolution level. Downsample 4.
ModelSpec mini_res_unet_spec();

ModelSpec spec_by_name(const std::string& name);

template <class T>
struct LayerParams {
    Tensor4<T> w;
    std::vector<T> b;
    std::vector<T> gamma, beta, run_mean, run_var;
};

template <class T>
struct ModelParams {
    std::vector<LayerParams<T>> layers;
};

// Gradients mirror the trainable parameter shapes (w/b/gamma/beta).
template <class T>
using ModelGrads = ModelParams<T>;

constexpr double kBnMomentum = 0.9;
constexpr double kBnEps = 1e-5;

namespace detail {

template <class T>
Tensor4<T> bilinear_tconv_kernel(int out_ch, int in_ch, int k, int stride) {
    // 1D bilinear factor: f(i) = 1 - |i - c| / stride, c = (k - 1) / 2
    Tensor4<T> w(out_ch, in_ch, k, k);
    double c = (k - 1) / 2.0;
    for (int oc = 0; oc < out_ch; ++oc) {
        for (int ic = 0; ic < in_ch; ++ic) {
            double chan = in_ch == out_ch ? (ic == oc ? 1.0 : 0.0) : 1.0 / in_ch;
            if (chan == 0.0) continue;
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    double fy = 1.0 - std::abs(ky - c) / stride;
                    double fx = 1.0 - std::abs(kx - c) / stride;
                    w.at(oc, ic, ky, kx) = static_cast<T>(chan * fy * fx);
                }
            }
        }
    }
    return w;
}

} // namespace detail

// He-uniform conv weights from the seeded stream (in declaration order),
// bilinear transposed-conv weights, zero biases, identity batch-norm.
template <class T>
ModelParams<T> init_params(const ModelSpec& spec, std::uint64_t seed) {
    spec.validate();
    SplitMix64 rng(seed);
    ModelParams<T> params;
    params.layers.resize(spec.layers.size());
    for (size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        LayerParams<T>& p = params.layers[i];
        switch (l.kind) {
            case LayerKind::Conv:
            case LayerKind::FuseAdd: {
                int k = l.kind == LayerKind::FuseAdd ? 1 : l.k;
                p.w = Tensor4<T>(l.out_ch, l.in_ch, k, k);
                double bound = std::sqrt(6.0 / (static_cast<double>(l.in_ch) * k * k));
                for (auto& v : p.w.v) v = static_cast<T>(rng.uniform(-bound, bound));
                if (l.kind == LayerKind::Conv) p.b.assign(l.out_ch, T(0));
                break;
            }
            case LayerKind::TConv:
                p.w = detail::bilinear_tconv_kernel<T>(l.out_ch, l.in_ch, l.k, l.stride);
                p.b.assign(l.out_ch, T(0));
                break;
            case LayerKind::BatchNorm:
                p.gamma.assign(l.out_ch, T(1));
                p.beta.assign(l.out_ch, T(0));
                p.run_mean.assign(l.out_ch, T(0));
                p.run_var.assign(l.out_ch, T(1));
                break;
            default:
                break;
        }
    }
    return params;
}

template <class T>
struct ForwardCache {
    Tensor4<T> input;
    std::vector<Tensor4<T>> acts; // acts[i] = output of layer i
    std::vector<kernels::BatchNormCache<T>> bn;
    std::vector<std::vector<std::uint8_t>> pool_argmax;
};

template <class T>
Tensor4<T> forward(const ModelSpec& spec, ModelParams<T>& params, const Tensor4<T>& input,
                   bool train, ForwardCache<T>* cache) {
    if (input.h % spec.downsample != 0 || input.w % spec.downsample != 0) {
        throw DataError(spec.name + ": input dims must be divisible by " +
                        std::to_string(spec.downsample));
    }
    const size_t L = spec.layers.size();
    std::vector<Tensor4<T>> acts(L);
    if (cache) {
        cache->input = input;
        cache->bn.assign(L, {});
        cache->pool_argmax.assign(L, {});
    }

    auto in_of = [&](size_t i) -> const Tensor4<T>& { return i == 0 ? input : acts[i - 1]; };

    for (size_t i = 0; i < L; ++i) {
        const LayerSpec& l = spec.layers[i];
        LayerParams<T>& p = params.layers[i];
        const Tensor4<T>& x = in_of(i);
        switch (l.kind) {
            case LayerKind::Conv:
                acts[i] = kernels::conv_forward(x, p.w, p.b);
                break;
            case LayerKind::BatchNorm:
                acts[i] = kernels::batchnorm_forward(x, p.gamma, p.beta, p.run_mean, p.run_var,
                                                     train, static_cast<T>(kBnMomentum),
                                                     static_cast<T>(kBnEps),
                                                     cache ? &cache->bn[i] : nullptr);
                break;
            case LayerKind::ReLU:
                acts[i] = kernels::relu_forward(x);
                break;
            case LayerKind::MaxPool2: {
                std::vector<std::uint8_t> argmax;
                acts[i] = kernels::maxpool2_forward(x, argmax);
                if (cache) cache->pool_argmax[i] = std::move(argmax);
                break;
            }
            case LayerKind::TConv:
                acts[i] = kernels::tconv_forward(x, p.w, p.b, l.stride);
                break;
            case LayerKind::FuseAdd: {
                const Tensor4<T>& s = acts[l.src];
                Tensor4<T> proj = kernels::conv_forward(s, p.w, std::vector<T>(l.out_ch, T(0)));
                acts[i] = x;
                for (size_t j = 0; j < acts[i].size(); ++j) acts[i].v[j] += proj.v[j];
                break;
            }
            case LayerKind::FuseAddId: {
                const Tensor4<T>& s = acts[l.src];
                acts[i] = x;
                for (size_t j = 0; j < acts[i].size(); ++j) acts[i].v[j] += s.v[j];
                break;
            }
            case LayerKind::FuseConcat: {
                const Tensor4<T>& s = acts[l.src];
                Tensor4<T> out(x.n, x.c + s.c, x.h, x.w);
                for (int n = 0; n < x.n; ++n) {
                    for (int c = 0; c < x.c; ++c) {
                        std::copy_n(x.plane(n, c), static_cast<size_t>(x.h) * x.w, out.plane(n, c));
                    }
                    for (int c = 0; c < s.c; ++c) {
                        std::copy_n(s.plane(n, c), static_cast<size_t>(s.h) * s.w,
                                    out.plane(n, x.c + c));
                    }
                }
                acts[i] = std::move(out);
                break;
            }
            case LayerKind::Sigmoid:
                acts[i] = kernels::sigmoid_forward(x);
                break;
        }
    }

    Tensor4<T> out = acts.back();
    for (T v : out.v) {
        if (!std::isfinite(static_cast<double>(v))) {
            throw NumericError(spec.name + ": non-finite activation in network output");
        }
    }
    if (cache) cache->acts = std::move(acts);
    return out;
}

// dOut is the gradient of the loss w.r.t. the network output (after sigmoid).
template <class T>
ModelGrads<T> backward(const ModelSpec& spec, const ModelParams<T>& params,
                       const ForwardCache<T>& cache, const Tensor4<T>& dout_last) {
    const size_t L = spec.layers.size();
    if (cache.acts.size() != L) throw DataError("backward: cache does not match spec");

    ModelGrads<T> grads;
    grads.layers.resize(L);
    std::vector<Tensor4<T>> dacts(L); // gradient w.r.t. each layer's output
    dacts[L - 1] = dout_last;

    auto in_of = [&](size_t i) -> const Tensor4<T>& {
        return i == 0 ? cache.input : cache.acts[i - 1];
    };
    auto add_to = [](Tensor4<T>& dst, const Tensor4<T>& inc) {
        if (dst.size() == 0) {
            dst = inc;
        } else {
            for (size_t j = 0; j < dst.size(); ++j) dst.v[j] += inc.v[j];
        }
    };

    Tensor4<T> din_final;
    for (size_t ii = L; ii-- > 0;) {
        const LayerSpec& l = spec.layers[ii];
        const LayerParams<T>& p = params.layers[ii];
        LayerParams<T>& g = grads.layers[ii];
        const Tensor4<T>& x = in_of(ii);
        Tensor4<T>& dy = dacts[ii];
        if (dy.size() == 0) dy = Tensor4<T>(cache.acts[ii].n, cache.acts[ii].c,
                                            cache.acts[ii].h, cache.acts[ii].w);
        Tensor4<T> dx;
        switch (l.kind) {
            case LayerKind::Conv:
                kernels::conv_backward(x, p.w, dy, dx, g.w, g.b);
                break;
            case LayerKind::BatchNorm:
                dx = kernels::batchnorm_backward(dy, cache.bn[ii], p.gamma, g.gamma, g.beta);
                break;
            case LayerKind::ReLU:
                dx = kernels::relu_backward(dy, x);
                break;
            case LayerKind::MaxPool2:
                dx = kernels::maxpool2_backward(dy, cache.pool_argmax[ii], x.h, x.w);
                break;
            case LayerKind::TConv:
                kernels::tconv_backward(x, p.w, dy, l.stride, dx, g.w, g.b);
                break;
            case LayerKind::FuseAdd: {
                const Tensor4<T>& s = cache.acts[l.src];
                Tensor4<T> dsrc, dw_unused;
                std::vector<T> db_unused;
                kernels::conv_backward(s, p.w, dy, dsrc, g.w, db_unused);
                add_to(dacts[l.src], dsrc);
                dx = dy;
                break;
            }
            case LayerKind::FuseAddId:
                add_to(dacts[l.src], dy);
                dx = dy;
                break;
            case LayerKind::FuseConcat: {
                const Tensor4<T>& s = cache.acts[l.src];
                dx = Tensor4<T>(x.n, x.c, x.h, x.w);
                Tensor4<T> dsrc(s.n, s.c, s.h, s.w);
                for (int n = 0; n < x.n; ++n) {
                    for (int c = 0; c < x.c; ++c) {
                        std::copy_n(dy.plane(n, c), static_cast<size_t>(x.h) * x.w, dx.plane(n, c));
                    }
                    for (int c = 0; c < s.c; ++c) {
                        std::copy_n(dy.plane(n, x.c + c), static_cast<size_t>(s.h) * s.w,
                                    dsrc.plane(n, c));
                    }
                }
                add_to(dacts[l.src], dsrc);
                break;
            }
            case LayerKind::Sigmoid:
                dx = kernels::sigmoid_backward(dy, cache.acts[ii]);
                break;
        }
        if (ii == 0) {
            din_final = std::move(dx);
        } else {
            add_to(dacts[ii - 1], dx);
        }
        dy = Tensor4<T>(); // free as we go
    }
    return grads;
}

// Eq-style class-weighted MSE over valid pixels. Masks use 1-channel tensors
// of 0/1 values aligned with the prediction. Returns the loss; when dpred is
// given it receives dLoss/dPrediction.
template <class T>
double weighted_mse(const Tensor4<T>& pred, const Tensor4<T>& y_tol, const Tensor4<T>& y_bin,
                    const Tensor4<T>& valid, double lambda, Tensor4<T>* dpred = nullptr) {
    if (!pred.same_shape(y_tol) || !pred.same_shape(y_bin) || !pred.same_shape(valid)) {
        throw DataError("weighted_mse: shape mismatch");
    }
    double n_valid = 0.0;
    for (T v : valid.v) n_valid += static_cast<double>(v);
    if (n_valid == 0.0) throw DataError("weighted_mse: zero valid pixels");

    double loss = 0.0;
    if (dpred) *dpred = Tensor4<T>(pred.n, pred.c, pred.h, pred.w);
    for (size_t i = 0; i < pred.size(); ++i) {
        if (valid.v[i] == T(0)) continue;
        double w = y_bin.v[i] != T(0) ? lambda : 1.0;
        double r = static_cast<double>(pred.v[i]) - static_cast<double>(y_tol.v[i]);
        loss += w * r * r;
        if (dpred) dpred->v[i] = static_cast<T>(2.0 * w * r / n_valid);
    }
    return loss / n_valid;
}

template <class T>
struct AdamState {
    std::vector<std::vector<T>> m, v; // flattened per parameter tensor: w, b, gamma, beta
    long step = 0;
};

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

template <class T>
AdamState<T> init_adam(const ModelParams<T>& params) {
    AdamState<T> st;
    for (const LayerParams<T>& p : params.layers) {
        for (size_t n : {p.w.size(), p.b.size(), p.gamma.size(), p.beta.size()}) {
            st.m.emplace_back(n, T(0));
            st.v.emplace_back(n, T(0));
        }
    }
    return st;
}

template <class T>
void adam_step(ModelParams<T>& params, const ModelGrads<T>& grads, AdamState<T>& state,
               double lr) {
    ++state.step;
    double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));

    size_t slot = 0;
    auto update = [&](T* p, const T* g, size_t n) {
        std::vector<T>& m = state.m[slot];
        std::vector<T>& v = state.v[slot];
        ++slot;
        if (n == 0) return;
        for (size_t i = 0; i < n; ++i) {
            double gi = static_cast<double>(g[i]);
            double mi = kAdamBeta1 * static_cast<double>(m[i]) + (1.0 - kAdamBeta1) * gi;
            double vi = kAdamBeta2 * static_cast<double>(v[i]) + (1.0 - kAdamBeta2) * gi * gi;
            m[i] = static_cast<T>(mi);
            v[i] = static_cast<T>(vi);
            double mhat = mi / bc1;
            double vhat = vi / bc2;
            p[i] = static_cast<T>(static_cast<double>(p[i]) - lr * mhat / (std::sqrt(vhat) + kAdamEps));
        }
    };

    for (size_t li = 0; li < params.layers.size(); ++li) {
        LayerParams<T>& p = params.layers[li];
        const LayerParams<T>& g = grads.layers[li];
        update(p.w.v.data(), g.w.v.data(), p.w.size());
        update(p.b.data(), g.b.data(), p.b.size());
        update(p.gamma.data(), g.gamma.data(), p.gamma.size());
        update(p.beta.data(), g.beta.data(), p.beta.size());
    }
}

} // namespace sartol
