#include <random>

#include <benchmark/benchmark.h>

#include "imgclass/bayesnet.hpp"
#include "imgclass/clustering.hpp"
#include "imgclass/features.hpp"
#include "imgclass/image.hpp"

namespace {

imgclass::GrayImage random_block(int h, int w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pix(0, 255);
    imgclass::GrayImage img;
    img.width = w;
    img.height = h;
    img.maxval = 255;
    for (int i = 0; i < h * w; ++i) {
        img.pixels.push_back(static_cast<std::uint16_t>(pix(rng)));
    }
    return img;
}

void BM_Glcm(benchmark::State& state) {
    const auto block = random_block(28, 23, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(imgclass::glcm(block, 8, 0, 1));
    }
}
BENCHMARK(BM_Glcm);

void BM_Haralick(benchmark::State& state) {
    const auto m = imgclass::glcm(random_block(28, 23, 1), 8, 0, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(imgclass::haralick(m));
    }
}
BENCHMARK(BM_Haralick);

void BM_EmFit(benchmark::State& state) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> a(60.0, 12.0), b(180.0, 20.0);
    std::vector<double> samples;
    for (int i = 0; i < 644; ++i) samples.push_back(i % 2 ? a(rng) : b(rng));
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            imgclass::em_fit_gmm(samples, static_cast<int>(state.range(0)), 3));
    }
}
BENCHMARK(BM_EmFit)->Arg(1)->Arg(2)->Arg(3);

void BM_BlockDescriptor(benchmark::State& state) {
    const auto block = random_block(28, 23, 2);
    imgclass::FeatureConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(imgclass::block_descriptor(block, cfg));
    }
}
BENCHMARK(BM_BlockDescriptor);

void BM_KmeansFit(benchmark::State& state) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<std::vector<double>> points(640, std::vector<double>(10));
    for (auto& p : points) {
        for (double& v : p) v = n(rng);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(imgclass::kmeans_fit(points, 8, 5));
    }
}
BENCHMARK(BM_KmeansFit);

void BM_CmiMatrix(benchmark::State& state) {
    std::mt19937_64 rng(13);
    imgclass::DiscreteDataset ds;
    ds.n_attrs = 16;
    ds.cardinalities.assign(16, 8);
    ds.class_count = 5;
    std::uniform_int_distribution<int> val(0, 7), cls(0, 4);
    for (int r = 0; r < 40; ++r) {
        std::vector<int> row(16);
        for (int& v : row) v = val(rng);
        ds.instances.push_back(row);
        ds.classes.push_back(cls(rng));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(imgclass::mutual_info_matrix(ds));
    }
}
BENCHMARK(BM_CmiMatrix);

} // namespace

BENCHMARK_MAIN();
