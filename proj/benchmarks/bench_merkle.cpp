#include <benchmark/benchmark.h>

#include "tsc/merkle.hpp"

namespace {

tsc::Store store_of(int objects) {
    tsc::Store store;
    for (int i = 0; i < objects; ++i) {
        const std::string key = "object-" + std::to_string(100000 + i);
        store[key] = {key, "payload-" + std::to_string(i),
                      {static_cast<tsc::Ticks>(1000 + i), {0, static_cast<std::uint64_t>(i)}},
                      true};
    }
    return store;
}

void BM_merkle_build(benchmark::State& state) {
    const tsc::Store store = store_of(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(tsc::merkle_build(store));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_merkle_build)->Arg(64)->Arg(256)->Arg(1024);

void BM_merkle_diff_single_mutation(benchmark::State& state) {
    const tsc::Store base = store_of(static_cast<int>(state.range(0)));
    tsc::Store mutated = base;
    mutated.begin()->second.value += "!";
    const tsc::MerkleTree a = tsc::merkle_build(base);
    const tsc::MerkleTree b = tsc::merkle_build(mutated);
    for (auto _ : state) benchmark::DoNotOptimize(tsc::merkle_diff(a, b));
}
BENCHMARK(BM_merkle_diff_single_mutation)->Arg(64)->Arg(1024);

void BM_run_sync_healing(benchmark::State& state) {
    const tsc::Store source = store_of(64);
    tsc::Store target = source;
    int corrupted = 0;
    for (auto& [key, obj] : target) {
        if (corrupted++ >= 8) break;
        obj.value[0] ^= 0x55;
    }
    for (auto _ : state) benchmark::DoNotOptimize(tsc::run_sync(source, target));
}
BENCHMARK(BM_run_sync_healing);

}  // namespace
