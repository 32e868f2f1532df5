// OpenMP kernels vs their serial reference implementations.
#include "sartol/groundtruth.hpp"
#include "sartol/net_kernels.hpp"
#include "sartol/nlmeans.hpp"
#include "sartol/rng.hpp"

#include <benchmark/benchmark.h>

using namespace sartol;

namespace {

Tensor4<float> random_tensor(int n, int c, int h, int w, std::uint64_t seed) {
    Tensor4<float> t(n, c, h, w);
    SplitMix64 rng(seed);
    for (auto& v : t.v) v = static_cast<float>(rng.normal());
    return t;
}

Raster random_raster(int w, int h, std::uint64_t seed) {
    Raster r(w, h);
    SplitMix64 rng(seed);
    for (auto& s : r.samples) s = static_cast<std::uint16_t>(rng.next_below(256));
    return r;
}

BinaryMask sparse_mask(int w, int h, std::uint64_t seed) {
    BinaryMask m(w, h);
    SplitMix64 rng(seed);
    for (auto& b : m.bits) b = rng.next_double() < 0.01 ? 1 : 0;
    return m;
}

// brute-force EDT, the test oracle
std::vector<std::int64_t> edt_brute(const BinaryMask& mask) {
    std::vector<std::pair<int, int>> set_px;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (mask.get(x, y)) set_px.emplace_back(x, y);
        }
    }
    std::vector<std::int64_t> out(mask.size(), kUnreachable);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            std::int64_t best = kUnreachable;
            for (auto [sx, sy] : set_px) {
                std::int64_t dx = x - sx, dy = y - sy;
                best = std::min(best, dx * dx + dy * dy);
            }
            out[static_cast<size_t>(y) * mask.width + x] = best;
        }
    }
    return out;
}

void BM_conv_omp(benchmark::State& state) {
    Tensor4<float> in = random_tensor(4, 16, 64, 64, 1);
    Tensor4<float> w = random_tensor(16, 16, 3, 3, 2);
    std::vector<float> b(16, 0.1f);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::conv_forward(in, w, b));
}
BENCHMARK(BM_conv_omp);

void BM_conv_serial(benchmark::State& state) {
    Tensor4<float> in = random_tensor(4, 16, 64, 64, 1);
    Tensor4<float> w = random_tensor(16, 16, 3, 3, 2);
    std::vector<float> b(16, 0.1f);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::conv_forward_ref(in, w, b));
}
BENCHMARK(BM_conv_serial);

void BM_nlmeans_omp(benchmark::State& state) {
    Raster r = random_raster(128, 128, 3);
    NlMeansParams p{3, 8, 10.0};
    for (auto _ : state) benchmark::DoNotOptimize(nl_means(r, p));
}
BENCHMARK(BM_nlmeans_omp);

void BM_nlmeans_serial(benchmark::State& state) {
    Raster r = random_raster(128, 128, 3);
    NlMeansParams p{3, 8, 10.0};
    for (auto _ : state) benchmark::DoNotOptimize(nl_means_ref(r, p));
}
BENCHMARK(BM_nlmeans_serial);

void BM_edt_fast(benchmark::State& state) {
    BinaryMask m = sparse_mask(256, 256, 4);
    for (auto _ : state) benchmark::DoNotOptimize(edt_squared(m));
}
BENCHMARK(BM_edt_fast);

void BM_edt_brute(benchmark::State& state) {
    BinaryMask m = sparse_mask(256, 256, 4);
    for (auto _ : state) benchmark::DoNotOptimize(edt_brute(m));
}
BENCHMARK(BM_edt_brute);

} // namespace

BENCHMARK_MAIN();
