#include <benchmark/benchmark.h>

#include "tsc/logical.hpp"
#include "tsc/time.hpp"

namespace {

void BM_vector_event(benchmark::State& state) {
    tsc::VectorTimestamp ts = tsc::make_vector_timestamp(5, 2);
    tsc::VectorTimestamp other = tsc::make_vector_timestamp(5, 1);
    other.entries = {4, 9, 1, 0, 3};
    for (auto _ : state) {
        ts = tsc::vector_event(ts, other);
        benchmark::DoNotOptimize(ts);
    }
}
BENCHMARK(BM_vector_event);

void BM_vector_compare(benchmark::State& state) {
    const tsc::VectorTimestamp a{{4, 9, 1, 0, 3}, 0};
    const tsc::VectorTimestamp b{{4, 9, 2, 0, 3}, 1};
    for (auto _ : state) benchmark::DoNotOptimize(tsc::vector_compare(a, b));
}
BENCHMARK(BM_vector_compare);

void BM_awareness_horizon(benchmark::State& state) {
    const tsc::VectorTimestamp ts{{10, 22, 7, 0, 3}, 0};
    for (auto _ : state) benchmark::DoNotOptimize(tsc::awareness_horizon(ts));
}
BENCHMARK(BM_awareness_horizon);

void BM_local_time(benchmark::State& state) {
    const tsc::PhysicalClock clock{137, 85, 0};
    tsc::GlobalTime g = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(tsc::local_time(clock, g));
        g += 17;
    }
}
BENCHMARK(BM_local_time);

}  // namespace
