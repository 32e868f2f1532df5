#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sartol/errors.hpp"
#include "sartol/nlmeans.hpp"
#include "sartol/raster.hpp"
#include "sartol/rng.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace sartol;

namespace {

Raster random_raster(int w, int h, std::uint16_t maxv, std::uint64_t seed) {
    Raster r(w, h, maxv);
    SplitMix64 rng(seed);
    for (auto& s : r.samples) s = static_cast<std::uint16_t>(rng.next_below(maxv + 1ULL));
    return r;
}

std::string tmp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_CASE("mirror_index reflects without repeating the edge sample") {
    // n=4: ... 2 1 0 | 0 1 2 3 | 3 2 1 0 | 0 1 ...
    int expected[] = {1, 0, 0, 1, 2, 3, 3, 2};
    for (int i = -2; i < 6; ++i) CHECK(mirror_index(i, 4) == expected[i + 2]);
    CHECK(mirror_index(-5, 4) == 3);
    CHECK(mirror_index(8, 4) == 0);
    CHECK(mirror_index(100, 1) == 0);
    CHECK(mirror_index(-100, 1) == 0);
}

TEST_CASE("pgm encode produces the canonical header and byte order") {
    Raster r(3, 2, 255);
    for (size_t i = 0; i < r.size(); ++i) r.samples[i] = static_cast<std::uint16_t>(i * 10);
    std::vector<unsigned char> bytes = encode_pgm(r);
    std::string header(bytes.begin(), bytes.begin() + 9);
    CHECK(header == "P5 3 2 25"); // "P5 3 2 255\n" prefix
    CHECK(bytes.size() == 11 + 6);

    // 16-bit: big-endian sample bytes, maxval decided by content
    Raster r16(2, 1);
    r16.max_value = 65535;
    r16.samples = {0x1234, 0x00FF};
    std::vector<unsigned char> b16 = encode_pgm(r16);
    CHECK(std::string(b16.begin(), b16.begin() + 13) == "P5 2 1 65535\n");
    CHECK(b16[13] == 0x12);
    CHECK(b16[14] == 0x34);
    CHECK(b16[15] == 0x00);
    CHECK(b16[16] == 0xFF);
}

TEST_CASE("pgm write/read round-trips 8-bit and 16-bit rasters") {
    for (std::uint16_t maxv : {std::uint16_t(255), std::uint16_t(65535)}) {
        Raster r = random_raster(17, 9, maxv, 12345 + maxv);
        std::string path = tmp_path("sartol_test_roundtrip.pgm");
        write_pgm(r, path);
        Raster back = read_pgm(path);
        CHECK(back.width == r.width);
        CHECK(back.height == r.height);
        CHECK(back.samples == r.samples);
        std::remove(path.c_str());
    }
}

TEST_CASE("pgm decoder accepts comments and arbitrary whitespace") {
    std::string text = "P5\n# a comment\n 2  2\n255\n";
    std::vector<unsigned char> bytes(text.begin(), text.end());
    bytes.insert(bytes.end(), {10, 20, 30, 40});
    Raster r = decode_pgm(bytes, "inline");
    CHECK(r.width == 2);
    CHECK(r.height == 2);
    CHECK(r.at(1, 1) == 40);
}

TEST_CASE("pgm decoder rejects malformed input") {
    auto decode_str = [](const std::string& s) {
        return decode_pgm(std::vector<unsigned char>(s.begin(), s.end()), "inline");
    };
    CHECK_THROWS_AS(decode_str("P6 2 2 255\nxxxxxxxxxxxx"), DataError); // wrong magic
    CHECK_THROWS_AS(decode_str("P5 2 2 255\nab"), DataError);           // truncated body
    CHECK_THROWS_AS(decode_str("P5 0 2 255\n"), DataError);             // zero dimension
    CHECK_THROWS_AS(decode_str("P5 2 2 70000\n"), DataError);           // maxval too large
    CHECK_THROWS_AS(read_pgm("/nonexistent/sartol.pgm"), DataError);
}

TEST_CASE("compute_stats matches hand-computed mean and population std") {
    Raster a(2, 1), b(2, 1);
    a.samples = {1, 3};
    b.samples = {5, 7};
    NormStats st = compute_stats(std::vector<Raster>{a, b});
    CHECK(st.mean == doctest::Approx(4.0));
    CHECK(st.std == doctest::Approx(std::sqrt(5.0))); // E[x^2]-mean^2 = 21-16
}

TEST_CASE("compute_stats rejects empty and constant data") {
    CHECK_THROWS_AS(compute_stats(std::vector<Raster>{}), DataError);
    Raster flat(4, 4);
    for (auto& s : flat.samples) s = 42;
    CHECK_THROWS_AS(compute_stats(std::vector<Raster>{flat}), DataError);
}

TEST_CASE("normalize applies (x - mean) / std") {
    Raster r(2, 1);
    r.samples = {10, 30};
    FloatRaster f = normalize(r, NormStats{20.0, 5.0});
    CHECK(f.at(0, 0) == doctest::Approx(-2.0));
    CHECK(f.at(1, 0) == doctest::Approx(2.0));
}

TEST_CASE("estimate_sigma recovers noise level on synthetic gaussian noise") {
    // flat field + N(0, sigma): MAD estimator should land near sigma
    SplitMix64 rng(99);
    double sigma = 12.0;
    Raster r(256, 256, 65535);
    for (auto& s : r.samples) {
        double v = 1000.0 + sigma * rng.normal();
        s = static_cast<std::uint16_t>(std::lround(std::max(0.0, v)));
    }
    double est = estimate_sigma(r);
    CHECK(est == doctest::Approx(sigma).epsilon(0.10));
}

TEST_CASE("nl_means leaves a constant image unchanged") {
    Raster r(24, 24);
    for (auto& s : r.samples) s = 77;
    Raster out = nl_means(r, NlMeansParams{2, 5, 8.0});
    CHECK(out.samples == r.samples);
}

TEST_CASE("nl_means reduces noise variance on a noisy flat field") {
    SplitMix64 rng(7);
    Raster r(64, 64);
    for (auto& s : r.samples) {
        s = static_cast<std::uint16_t>(std::clamp(std::lround(128.0 + 15.0 * rng.normal()), 0L, 255L));
    }
    Raster out = nl_means(r, NlMeansParams{2, 6, 20.0});
    auto var = [](const Raster& x) {
        double m = 0, v = 0;
        for (auto s : x.samples) m += s;
        m /= x.size();
        for (auto s : x.samples) v += (s - m) * (s - m);
        return v / x.size();
    };
    CHECK(var(out) < 0.25 * var(r));
}

TEST_CASE("nl_means parallel kernel is bit-identical to the serial reference") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        Raster r = random_raster(31, 23, 255, seed);
        NlMeansParams p{2, 4, 12.0};
        CHECK(nl_means(r, p).samples == nl_means_ref(r, p).samples);
    }
}

TEST_CASE("nl_means validates parameters") {
    Raster r(8, 8);
    r.samples[3] = 5;
    CHECK_THROWS_AS(nl_means(r, NlMeansParams{-1, 4, 10.0}), ConfigError);
    CHECK_THROWS_AS(nl_means(r, NlMeansParams{2, 0, 10.0}), ConfigError);
    CHECK_THROWS_AS(nl_means(r, NlMeansParams{2, 4, 0.0}), ConfigError);
}

TEST_CASE("ppm writer emits a P6 with interleaved rgb") {
    RgbRaster img(2, 1);
    img.set(0, 0, 1, 2, 3);
    img.set(1, 0, 4, 5, 6);
    std::string path = tmp_path("sartol_test.ppm");
    write_ppm(img, path);
    std::ifstream in(path, std::ios::binary);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(data == std::string("P6 2 1 255\n") + std::string("\x01\x02\x03\x04\x05\x06", 6));
    std::remove(path.c_str());
}
