#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "auricle/contrastive.hpp"
#include "auricle/model.hpp"
#include "auricle/rng.hpp"
#include "auricle/tensor.hpp"

using namespace auricle;

namespace {

Tensor random_tensor(std::vector<std::int64_t> shape, std::uint64_t seed) {
    Tensor t(std::move(shape));
    Rng rng(seed);
    for (std::int64_t i = 0; i < t.numel(); ++i) {
        t[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
    }
    return t;
}

ModelConfig preset_config(bool full) {
    ModelConfig cfg;
    if (full) {
        cfg.channels = {32, 64, 128, 256};
        cfg.proj_dim = 512;
    } else {
        cfg.channels = {8, 16, 32, 64};
        cfg.proj_dim = 64;
    }
    return cfg;
}

}  // namespace

static void GemmAccumulate(benchmark::State& state) {
    const std::int64_t n = state.range(0);
    const Tensor a = random_tensor({n, n}, 3);
    const Tensor b = random_tensor({n, n}, 5);
    Tensor c({n, n});
    for (auto _ : state) {
        c.fill(0.0f);
        gemm_accumulate(a.data(), b.data(), c.data(), n, n, n);
        benchmark::DoNotOptimize(c.data());
    }
    // one multiply and one add per inner-loop step
    state.SetItemsProcessed(state.iterations() * 2 * n * n * n);
}
BENCHMARK(GemmAccumulate)->RangeMultiplier(2)->Range(64, 512);

static void EncoderForwardDesk(benchmark::State& state) {
    const std::int64_t batch = state.range(0);
    const ModelConfig cfg = preset_config(false);
    const auto enc = init_encoder<float>(cfg, 1);
    const Tensor x = random_tensor({batch, 1, cfg.n_mels, cfg.frames}, 9);
    EncoderCacheT<float> cache;
    for (auto _ : state) {
        Tensor h = encoder_forward(enc, x, &cache);
        benchmark::DoNotOptimize(h.data());
    }
    state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(EncoderForwardDesk)->Arg(1)->Arg(8)->Arg(32);

static void EncoderForwardFull(benchmark::State& state) {
    const std::int64_t batch = state.range(0);
    const ModelConfig cfg = preset_config(true);
    const auto enc = init_encoder<float>(cfg, 1);
    const Tensor x = random_tensor({batch, 1, cfg.n_mels, cfg.frames}, 9);
    EncoderCacheT<float> cache;
    for (auto _ : state) {
        Tensor h = encoder_forward(enc, x, &cache);
        benchmark::DoNotOptimize(h.data());
    }
    state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(EncoderForwardFull)->Arg(1)->Arg(8);

// One full pretraining step (forward + backward over both segment towers),
// desk preset. This is the unit of work that dominates training wall time.
static void ContrastiveStepDesk(benchmark::State& state) {
    const std::int64_t batch = state.range(0);
    const ModelConfig cfg = preset_config(false);
    const auto model = init_model<float>(cfg, 1);
    ContrastiveBatchT<float> b{random_tensor({batch, 1, cfg.n_mels, cfg.frames}, 21),
                               random_tensor({batch, 1, cfg.n_mels, cfg.frames}, 22)};
    for (auto _ : state) {
        ObjectiveCacheT<float> cache;
        ContrastiveModelT<float> grads = zeros_like(model);
        float loss = contrastive_forward(model, b, &cache);
        contrastive_backward(model, b, cache, &grads);
        benchmark::DoNotOptimize(loss);
        benchmark::DoNotOptimize(grads.encoder.blocks[0].w.data());
    }
    state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(ContrastiveStepDesk)->Arg(4)->Arg(16);
