// Parallel kernels against their serial references.
//
//   ./build/bench/seamcam_bench --benchmark_filter=Detectability

#include <benchmark/benchmark.h>
#include <omp.h>

#include "seamcam/batch.hpp"
#include "seamcam/rng.hpp"
#include "seamcam/score.hpp"
#include "seamcam/stats.hpp"
#include "seamcam/synth.hpp"

namespace {

using namespace seamcam;

DenseMask random_mask(SplitMix64 &rng, int h, int w, double density) {
    DenseMask m(h, w);
    for (std::size_t i = 0; i < m.size(); ++i) {
        m.set(i, rng.uniform() < density);
    }
    return m;
}

struct Fixture {
    std::vector<DenseMask> proposals;
    DenseMask gt;
};

Fixture make_fixture(int side, int k) {
    SplitMix64 rng(static_cast<std::uint64_t>(side) * 131 + static_cast<std::uint64_t>(k));
    Fixture f{{}, random_mask(rng, side, side, 0.3)};
    for (int i = 0; i < k; ++i) {
        f.proposals.push_back(random_mask(rng, side, side, 0.15));
    }
    return f;
}

void BM_Detectability(benchmark::State &state) {
    const auto f = make_fixture(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(detectability(f.proposals, f.gt));
    }
    state.SetItemsProcessed(state.iterations() * ((1LL << state.range(1)) - 1));
}

void BM_DetectabilityBruteforce(benchmark::State &state) {
    const auto f = make_fixture(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(detectability_bruteforce(f.proposals, f.gt));
    }
    state.SetItemsProcessed(state.iterations() * ((1LL << state.range(1)) - 1));
}

BENCHMARK(BM_Detectability)->Args({32, 7})->Args({256, 7})->Args({64, 12})->Args({256, 12})->Args({1024, 7})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DetectabilityBruteforce)->Args({32, 7})->Args({256, 7})->Args({64, 12})->Unit(benchmark::kMicrosecond);

std::vector<BundleItem> make_items(int count) {
    std::vector<BundleItem> items;
    for (int i = 0; i < count; ++i) {
        const auto inst = gen_synth_instance(static_cast<std::uint64_t>(i), 128, 128, 2, 8);
        items.push_back(BundleItem{"bench", to_bundle(inst, "img" + std::to_string(i)), ErrorCode::ParseError, ""});
    }
    return items;
}

void BM_BatchScore(benchmark::State &state) {
    static const auto items = make_items(64);
    const int workers = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(batch_score(items, pass_all_config(8), workers));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(items.size()));
}

BENCHMARK(BM_BatchScore)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Bootstrap(benchmark::State &state) {
    SplitMix64 rng(5);
    std::vector<int> indicators(2290);
    for (auto &v : indicators) {
        v = rng.uniform() < 0.79 ? 1 : 0;
    }
    const int saved = omp_get_max_threads();
    omp_set_num_threads(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(bootstrap_ci(indicators, kDefaultResamples, kDefaultSeed));
    }
    omp_set_num_threads(saved);
}

BENCHMARK(BM_Bootstrap)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
