#include <benchmark/benchmark.h>

#include <vector>

#include "auricle/frontend.hpp"
#include "auricle/rng.hpp"

using namespace auricle;

namespace {

std::vector<float> noise_segment(int n) {
    Rng rng(7);
    std::vector<float> out(static_cast<size_t>(n));
    for (auto& s : out) s = static_cast<float>(rng.uniform(-0.5, 0.5));
    return out;
}

}  // namespace

static void LogmelSegment(benchmark::State& state) {
    const Frontend fe;
    const auto segment = noise_segment(fe.config().segment_samples());
    for (auto _ : state) {
        Tensor features = fe.logmel(segment);
        benchmark::DoNotOptimize(features.data());
    }
    state.SetItemsProcessed(state.iterations() * fe.config().segment_frames());
}
BENCHMARK(LogmelSegment);

static void FftForward(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Fft fft(n);
    Rng rng(11);
    std::vector<double> re(static_cast<size_t>(n)), im(static_cast<size_t>(n));
    for (auto& v : re) v = rng.uniform(-1.0, 1.0);
    for (auto _ : state) {
        auto re2 = re;
        auto im2 = im;
        fft.forward(re2, im2);
        benchmark::DoNotOptimize(re2.data());
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(FftForward)->RangeMultiplier(2)->Range(256, 2048);

static void MelBankApply(benchmark::State& state) {
    const FrontendConfig cfg;
    const MelBank bank(cfg);
    Rng rng(13);
    std::vector<double> power(static_cast<size_t>(bank.n_bins()));
    for (auto& v : power) v = rng.uniform(0.0, 4.0);
    std::vector<double> mel(static_cast<size_t>(bank.n_mels()));
    for (auto _ : state) {
        bank.apply(power.data(), mel.data());
        benchmark::DoNotOptimize(mel.data());
    }
    state.SetItemsProcessed(state.iterations() * bank.n_mels());
}
BENCHMARK(MelBankApply);
