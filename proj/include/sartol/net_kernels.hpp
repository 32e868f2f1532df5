#pragma once

#include "sartol/raster.hpp"
#include "sartol/tensor.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

// Layer-level compute kernels. Everything here is deterministic under OpenMP:
// each output slice is owned by exactly one thread and accumulated in the
// same order as the serial loop, so results are bit-identical to a
// single-threaded run.

namespace sartol::kernels {

template <class T>
Tensor4<T> pad_mirror(const Tensor4<T>& in, int p) {
    if (p == 0) return in;
    Tensor4<T> out(in.n, in.c, in.h + 2 * p, in.w + 2 * p);
    for (int n = 0; n < in.n; ++n) {
        for (int c = 0; c < in.c; ++c) {
            const T* src = in.plane(n, c);
            T* dst = out.plane(n, c);
            for (int y = 0; y < out.h; ++y) {
                int sy = mirror_index(y - p, in.h);
                for (int x = 0; x < out.w; ++x) {
                    dst[static_cast<size_t>(y) * out.w + x] =
                        src[static_cast<size_t>(sy) * in.w + mirror_index(x - p, in.w)];
                }
            }
        }
    }
    return out;
}

// fold gradients of the mirror-padded buffer back onto the source grid
template <class T>
void unpad_mirror_accumulate(const Tensor4<T>& dpad, int p, Tensor4<T>& din) {
    for (int n = 0; n < din.n; ++n) {
        for (int c = 0; c < din.c; ++c) {
            const T* src = dpad.plane(n, c);
            T* dst = din.plane(n, c);
            for (int y = 0; y < dpad.h; ++y) {
                int sy = mirror_index(y - p, din.h);
                for (int x = 0; x < dpad.w; ++x) {
                    dst[static_cast<size_t>(sy) * din.w + mirror_index(x - p, din.w)] +=
                        src[static_cast<size_t>(y) * dpad.w + x];
                }
            }
        }
    }
}

// Convolution, stride 1, "same" output size via mirror padding p = k/2.
// weights: (out_ch, in_ch, k, k)
template <class T>
Tensor4<T> conv_forward(const Tensor4<T>& in, const Tensor4<T>& w, const std::vector<T>& b) {
    const int k = w.h, p = k / 2;
    const int oc_n = w.n, ic_n = w.c;
    Tensor4<T> pad = pad_mirror(in, p);
    Tensor4<T> out(in.n, oc_n, in.h, in.w);

#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < in.n; ++n) {
        for (int oc = 0; oc < oc_n; ++oc) {
            T* o = out.plane(n, oc);
            const size_t plane = static_cast<size_t>(in.h) * in.w;
            for (size_t i = 0; i < plane; ++i) o[i] = b[oc];
            for (int ic = 0; ic < ic_n; ++ic) {
                const T* pp = pad.plane(n, ic);
                for (int ky = 0; ky < k; ++ky) {
                    for (int kx = 0; kx < k; ++kx) {
                        T wv = w.at(oc, ic, ky, kx);
                        for (int y = 0; y < in.h; ++y) {
                            const T* prow = pp + static_cast<size_t>(y + ky) * pad.w + kx;
                            T* orow = o + static_cast<size_t>(y) * in.w;
                            for (int x = 0; x < in.w; ++x) orow[x] += wv * prow[x];
                        }
                    }
                }
            }
        }
    }
    return out;
}

// Serial reference used by tests and benchmarks.
template <class T>
Tensor4<T> conv_forward_ref(const Tensor4<T>& in, const Tensor4<T>& w, const std::vector<T>& b) {
    const int k = w.h, p = k / 2;
    Tensor4<T> pad = pad_mirror(in, p);
    Tensor4<T> out(in.n, w.n, in.h, in.w);
    for (int n = 0; n < in.n; ++n) {
        for (int oc = 0; oc < w.n; ++oc) {
            for (int y = 0; y < in.h; ++y) {
                for (int x = 0; x < in.w; ++x) {
                    T acc = b[oc];
                    for (int ic = 0; ic < w.c; ++ic) {
                        for (int ky = 0; ky < k; ++ky) {
                            for (int kx = 0; kx < k; ++kx) {
                                acc += w.at(oc, ic, ky, kx) * pad.at(n, ic, y + ky, x + kx);
                            }
                        }
                    }
                    out.at(n, oc, y, x) = acc;
                }
            }
        }
    }
    return out;
}

template <class T>
void conv_backward(const Tensor4<T>& in, const Tensor4<T>& w, const Tensor4<T>& dout,
                   Tensor4<T>& din, Tensor4<T>& dw, std::vector<T>& db) {
    const int k = w.h, p = k / 2;
    const int oc_n = w.n, ic_n = w.c;
    Tensor4<T> pad = pad_mirror(in, p);

    dw = Tensor4<T>(w.n, w.c, w.h, w.w);
    db.assign(oc_n, T(0));

#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < oc_n; ++oc) {
        T bacc = T(0);
        for (int n = 0; n < in.n; ++n) {
            const T* dop = dout.plane(n, oc);
            for (size_t i = 0; i < static_cast<size_t>(in.h) * in.w; ++i) bacc += dop[i];
            for (int ic = 0; ic < ic_n; ++ic) {
                const T* pp = pad.plane(n, ic);
                for (int ky = 0; ky < k; ++ky) {
                    for (int kx = 0; kx < k; ++kx) {
                        T acc = T(0);
                        for (int y = 0; y < in.h; ++y) {
                            const T* prow = pp + static_cast<size_t>(y + ky) * pad.w + kx;
                            const T* drow = dop + static_cast<size_t>(y) * in.w;
                            for (int x = 0; x < in.w; ++x) acc += prow[x] * drow[x];
                        }
                        dw.at(oc, ic, ky, kx) += acc;
                    }
                }
            }
        }
        db[oc] = bacc;
    }

    Tensor4<T> dpad(pad.n, pad.c, pad.h, pad.w);
#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < in.n; ++n) {
        for (int ic = 0; ic < ic_n; ++ic) {
            T* dp = dpad.plane(n, ic);
            for (int oc = 0; oc < oc_n; ++oc) {
                const T* dop = dout.plane(n, oc);
                for (int ky = 0; ky < k; ++ky) {
                    for (int kx = 0; kx < k; ++kx) {
                        T wv = w.at(oc, ic, ky, kx);
                        for (int y = 0; y < in.h; ++y) {
                            T* drow = dp + static_cast<size_t>(y + ky) * dpad.w + kx;
                            const T* orow = dop + static_cast<size_t>(y) * in.w;
                            for (int x = 0; x < in.w; ++x) drow[x] += wv * orow[x];
                        }
                    }
                }
            }
        }
    }
    din = Tensor4<T>(in.n, in.c, in.h, in.w);
    unpad_mirror_accumulate(dpad, p, din);
}

// Transposed convolution, kernel k, stride s, padding (k - s) / 2; output is
// exactly s times the input size. weights: (out_ch, in_ch, k, k)
template <class T>
Tensor4<T> tconv_forward(const Tensor4<T>& in, const Tensor4<T>& w, const std::vector<T>& b,
                         int stride) {
    const int k = w.h, p = (k - stride) / 2;
    const int oc_n = w.n, ic_n = w.c;
    Tensor4<T> out(in.n, oc_n, in.h * stride, in.w * stride);

#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < in.n; ++n) {
        for (int oc = 0; oc < oc_n; ++oc) {
            T* o = out.plane(n, oc);
            for (size_t i = 0; i < static_cast<size_t>(out.h) * out.w; ++i) o[i] = b[oc];
            for (int ic = 0; ic < ic_n; ++ic) {
                const T* ip = in.plane(n, ic);
                for (int iy = 0; iy < in.h; ++iy) {
                    for (int ky = 0; ky < k; ++ky) {
                        int y = iy * stride - p + ky;
                        if (y < 0 || y >= out.h) continue;
                        for (int kx = 0; kx < k; ++kx) {
                            T wv = w.at(oc, ic, ky, kx);
                            int x0 = -p + kx;
                            T* orow = o + static_cast<size_t>(y) * out.w;
                            const T* irow = ip + static_cast<size_t>(iy) * in.w;
                            for (int ix = 0; ix < in.w; ++ix) {
                                int x = ix * stride + x0;
                                if (x >= 0 && x < out.w) orow[x] += wv * irow[ix];
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

template <class T>
void tconv_backward(const Tensor4<T>& in, const Tensor4<T>& w, const Tensor4<T>& dout,
                    int stride, Tensor4<T>& din, Tensor4<T>& dw, std::vector<T>& db) {
    const int k = w.h, p = (k - stride) / 2;
    const int oc_n = w.n, ic_n = w.c;

    din = Tensor4<T>(in.n, in.c, in.h, in.w);
#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < in.n; ++n) {
        for (int ic = 0; ic < ic_n; ++ic) {
            T* dp = din.plane(n, ic);
            for (int oc = 0; oc < oc_n; ++oc) {
                const T* dop = dout.plane(n, oc);
                for (int iy = 0; iy < in.h; ++iy) {
                    for (int ky = 0; ky < k; ++ky) {
                        int y = iy * stride - p + ky;
                        if (y < 0 || y >= dout.h) continue;
                        for (int kx = 0; kx < k; ++kx) {
                            T wv = w.at(oc, ic, ky, kx);
                            int x0 = -p + kx;
                            const T* orow = dop + static_cast<size_t>(y) * dout.w;
                            T* drow = dp + static_cast<size_t>(iy) * in.w;
                            for (int ix = 0; ix < in.w; ++ix) {
                                int x = ix * stride + x0;
                                if (x >= 0 && x < dout.w) drow[ix] += wv * orow[x];
                            }
                        }
                    }
                }
            }
        }
    }

    dw = Tensor4<T>(w.n, w.c, w.h, w.w);
    db.assign(oc_n, T(0));
#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < oc_n; ++oc) {
        T bacc = T(0);
        for (int n = 0; n < in.n; ++n) {
            const T* dop = dout.plane(n, oc);
            for (size_t i = 0; i < static_cast<size_t>(dout.h) * dout.w; ++i) bacc += dop[i];
            for (int ic = 0; ic < ic_n; ++ic) {
                const T* ip = in.plane(n, ic);
                for (int iy = 0; iy < in.h; ++iy) {
                    for (int ky = 0; ky < k; ++ky) {
                        int y = iy * stride - p + ky;
                        if (y < 0 || y >= dout.h) continue;
                        for (int kx = 0; kx < k; ++kx) {
                            int x0 = -p + kx;
                            T acc = T(0);
                            const T* orow = dop + static_cast<size_t>(y) * dout.w;
                            const T* irow = ip + static_cast<size_t>(iy) * in.w;
                            for (int ix = 0; ix < in.w; ++ix) {
                                int x = ix * stride + x0;
                                if (x >= 0 && x < dout.w) acc += irow[ix] * orow[x];
                            }
                            dw.at(oc, ic, ky, kx) += acc;
                        }
                    }
                }
            }
        }
        db[oc] = bacc;
    }
}

// 2x2 max pooling, stride 2; argmax (0..3) kept for backward. Requires even
// spatial dims.
template <class T>
Tensor4<T> maxpool2_forward(const Tensor4<T>& in, std::vector<std::uint8_t>& argmax) {
    Tensor4<T> out(in.n, in.c, in.h / 2, in.w / 2);
    argmax.assign(out.size(), 0);
    size_t oi = 0;
    for (int n = 0; n < in.n; ++n) {
        for (int c = 0; c < in.c; ++c) {
            const T* ip = in.plane(n, c);
            T* op = out.plane(n, c);
            for (int y = 0; y < out.h; ++y) {
                for (int x = 0; x < out.w; ++x, ++oi) {
                    const T* base = ip + static_cast<size_t>(2 * y) * in.w + 2 * x;
                    T best = base[0];
                    int arg = 0;
                    if (base[1] > best) { best = base[1]; arg = 1; }
                    if (base[in.w] > best) { best = base[in.w]; arg = 2; }
                    if (base[in.w + 1] > best) { best = base[in.w + 1]; arg = 3; }
                    op[static_cast<size_t>(y) * out.w + x] = best;
                    argmax[oi] = static_cast<std::uint8_t>(arg);
                }
            }
        }
    }
    return out;
}

template <class T>
Tensor4<T> maxpool2_backward(const Tensor4<T>& dout, const std::vector<std::uint8_t>& argmax,
                             int in_h, int in_w) {
    Tensor4<T> din(dout.n, dout.c, in_h, in_w);
    size_t oi = 0;
    for (int n = 0; n < dout.n; ++n) {
        for (int c = 0; c < dout.c; ++c) {
            const T* dop = dout.plane(n, c);
            T* dip = din.plane(n, c);
            for (int y = 0; y < dout.h; ++y) {
                for (int x = 0; x < dout.w; ++x, ++oi) {
                    int arg = argmax[oi];
                    int iy = 2 * y + (arg >> 1);
                    int ix = 2 * x + (arg & 1);
                    dip[static_cast<size_t>(iy) * in_w + ix] += dop[static_cast<size_t>(y) * dout.w + x];
                }
            }
        }
    }
    return din;
}

template <class T>
struct BatchNormCache {
    Tensor4<T> xhat;
    std::vector<T> mean, invstd;
};

// Train mode: batch statistics (population variance) and running-average
// update with the given momentum. Infer mode: running statistics.
template <class T>
Tensor4<T> batchnorm_forward(const Tensor4<T>& in, const std::vector<T>& gamma,
                             const std::vector<T>& beta, std::vector<T>& run_mean,
                             std::vector<T>& run_var, bool train, T momentum, T eps,
                             BatchNormCache<T>* cache) {
    Tensor4<T> out(in.n, in.c, in.h, in.w);
    const size_t plane = static_cast<size_t>(in.h) * in.w;
    const size_t m = static_cast<size_t>(in.n) * plane;

    if (cache) {
        cache->xhat = Tensor4<T>(in.n, in.c, in.h, in.w);
        cache->mean.assign(in.c, T(0));
        cache->invstd.assign(in.c, T(0));
    }

#pragma omp parallel for schedule(static)
    for (int c = 0; c < in.c; ++c) {
        T mean, invstd;
        if (train) {
            T sum = T(0);
            for (int n = 0; n < in.n; ++n) {
                const T* ip = in.plane(n, c);
                for (size_t i = 0; i < plane; ++i) sum += ip[i];
            }
            mean = sum / static_cast<T>(m);
            T ss = T(0);
            for (int n = 0; n < in.n; ++n) {
                const T* ip = in.plane(n, c);
                for (size_t i = 0; i < plane; ++i) {
                    T d = ip[i] - mean;
                    ss += d * d;
                }
            }
            T var = ss / static_cast<T>(m);
            run_mean[c] = momentum * run_mean[c] + (T(1) - momentum) * mean;
            run_var[c] = momentum * run_var[c] + (T(1) - momentum) * var;
            invstd = T(1) / std::sqrt(var + eps);
        } else {
            mean = run_mean[c];
            invstd = T(1) / std::sqrt(run_var[c] + eps);
        }
        for (int n = 0; n < in.n; ++n) {
            const T* ip = in.plane(n, c);
            T* op = out.plane(n, c);
            T* xp = cache ? cache->xhat.plane(n, c) : nullptr;
            for (size_t i = 0; i < plane; ++i) {
                T xh = (ip[i] - mean) * invstd;
                if (xp) xp[i] = xh;
                op[i] = gamma[c] * xh + beta[c];
            }
        }
        if (cache) {
            cache->mean[c] = mean;
            cache->invstd[c] = invstd;
        }
    }
    return out;
}

template <class T>
Tensor4<T> batchnorm_backward(const Tensor4<T>& dout, const BatchNormCache<T>& cache,
                              const std::vector<T>& gamma, std::vector<T>& dgamma,
                              std::vector<T>& dbeta) {
    Tensor4<T> din(dout.n, dout.c, dout.h, dout.w);
    dgamma.assign(dout.c, T(0));
    dbeta.assign(dout.c, T(0));
    const size_t plane = static_cast<size_t>(dout.h) * dout.w;
    const T m = static_cast<T>(static_cast<size_t>(dout.n) * plane);

#pragma omp parallel for schedule(static)
    for (int c = 0; c < dout.c; ++c) {
        T dg = T(0), db = T(0);
        for (int n = 0; n < dout.n; ++n) {
            const T* dop = dout.plane(n, c);
            const T* xp = cache.xhat.plane(n, c);
            for (size_t i = 0; i < plane; ++i) {
                dg += dop[i] * xp[i];
                db += dop[i];
            }
        }
        dgamma[c] = dg;
        dbeta[c] = db;
        T scale = gamma[c] * cache.invstd[c] / m;
        for (int n = 0; n < dout.n; ++n) {
            const T* dop = dout.plane(n, c);
            const T* xp = cache.xhat.plane(n, c);
            T* dip = din.plane(n, c);
            for (size_t i = 0; i < plane; ++i) {
                dip[i] = scale * (m * dop[i] - db - xp[i] * dg);
            }
        }
    }
    return din;
}

template <class T>
Tensor4<T> relu_forward(const Tensor4<T>& in) {
    Tensor4<T> out = in;
    for (T& v : out.v) v = v > T(0) ? v : T(0);
    return out;
}

template <class T>
Tensor4<T> relu_backward(const Tensor4<T>& dout, const Tensor4<T>& in) {
    Tensor4<T> din = dout;
    for (size_t i = 0; i < din.size(); ++i) {
        if (!(in.v[i] > T(0))) din.v[i] = T(0);
    }
    return din;
}

template <class T>
Tensor4<T> sigmoid_forward(const Tensor4<T>& in) {
    Tensor4<T> out = in;
    for (T& v : out.v) v = T(1) / (T(1) + std::exp(-v));
    return out;
}

template <class T>
Tensor4<T> sigmoid_backward(const Tensor4<T>& dout, const Tensor4<T>& out) {
    Tensor4<T> din = dout;
    for (size_t i = 0; i < din.size(); ++i) {
        din.v[i] *= out.v[i] * (T(1) - out.v[i]);
    }
    return din;
}

} // namespace sartol::kernels
