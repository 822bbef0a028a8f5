#include <doctest.h>

#include <random>

#include "support/trace_oracle.hpp"
#include "tsc/logical.hpp"

using namespace tsc;

TEST_CASE("lamport counter advances per the receive rule") {
    CHECK(lamport_event({3}).counter == 4);
    CHECK(lamport_event({2}, 7).counter == 8);
    CHECK(lamport_event({9}, 2).counter == 10);
}

TEST_CASE("vector events merge componentwise and bump the owner") {
    VectorTimestamp ts = make_vector_timestamp(3, 0);
    ts = vector_event(ts);
    CHECK(ts.entries == std::vector<std::uint64_t>{1, 0, 0});

    VectorTimestamp own{{2, 0, 0}, 0};
    VectorTimestamp received{{0, 3, 1}, 1};
    CHECK(vector_event(own, received).entries == std::vector<std::uint64_t>{3, 3, 1});

    const VectorTimestamp same = vector_event(own, own);
    CHECK(same.entries == std::vector<std::uint64_t>{3, 0, 0});

    CHECK_THROWS(vector_event(own, VectorTimestamp{{1, 2}, 0}));
}

TEST_CASE("vector comparison") {
    const VectorTimestamp a{{1, 0, 0}, 0};
    const VectorTimestamp b{{1, 1, 0}, 1};
    CHECK(vector_compare(a, b) == Ordering::less);
    CHECK(vector_compare(b, a) == Ordering::greater);
    CHECK(vector_compare({{2, 0}, 0}, {{0, 2}, 1}) == Ordering::concurrent);
    CHECK(vector_compare({{5, 5, 5}, 0}, {{5, 5, 5}, 1}) == Ordering::equal);
    CHECK_THROWS(vector_compare(a, VectorTimestamp{{1, 0}, 0}));
}

TEST_CASE("awareness horizon and logical validity") {
    CHECK(awareness_horizon({{10, 22, 7, 0, 3}, 0}) == 42);
    CHECK(awareness_horizon({{2, 7, 5, 0, 1}, 0}) == 15);
    CHECK(awareness_horizon({{0, 0, 0}, 0}) == 0);

    CHECK_FALSE(tcc_valid(42, 15, 26));
    CHECK(tcc_valid(42, 15, 27));
    CHECK(tcc_valid(9, 9, 0));
    CHECK_THROWS(tcc_valid(5, 9, 100));
}

TEST_CASE("vector events strictly grow the owner's horizon") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const auto trace = test::random_trace(rng);
        const auto clocks = test::assign_clocks(trace);
        std::vector<std::uint64_t> last(trace.processes, 0);
        for (std::size_t i = 0; i < trace.events.size(); ++i) {
            const std::size_t p = trace.events[i].process;
            const std::uint64_t horizon = awareness_horizon(clocks.vector[i]);
            CHECK(horizon >= last[p] + 1);
            last[p] = horizon;
        }
    }
}

TEST_CASE("strong clock consistency against brute-force happened-before") {
    std::mt19937_64 rng(41);
    std::size_t ordered = 0, concurrent = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const auto trace = test::random_trace(rng);
        const auto hb = test::happened_before(trace);
        const auto clocks = test::assign_clocks(trace);
        for (std::size_t i = 0; i < trace.events.size(); ++i) {
            for (std::size_t j = 0; j < trace.events.size(); ++j) {
                if (i == j) continue;
                const Ordering order = vector_compare(clocks.vector[i], clocks.vector[j]);
                if (hb[i][j]) {
                    CHECK(order == Ordering::less);
                    ordered += 1;
                    // Lamport weak condition: causality implies increasing stamps.
                    CHECK(clocks.lamport[i] < clocks.lamport[j]);
                } else if (hb[j][i]) {
                    CHECK(order == Ordering::greater);
                } else {
                    CHECK(order == Ordering::concurrent);
                    concurrent += 1;
                }
            }
        }
    }
    CHECK(ordered > 0);
    CHECK(concurrent > 0);
}

TEST_CASE("comparison is a partial order") {
    std::mt19937_64 rng(43);
    auto random_vector = [&] {
        VectorTimestamp ts = make_vector_timestamp(4, rng() % 4);
        for (auto& entry : ts.entries) entry = rng() % 4;
        return ts;
    };
    for (int trial = 0; trial < 2000; ++trial) {
        const VectorTimestamp a = random_vector();
        const VectorTimestamp b = random_vector();
        const VectorTimestamp c = random_vector();
        // antisymmetry
        if (vector_compare(a, b) == Ordering::less)
            CHECK(vector_compare(b, a) == Ordering::greater);
        if (vector_compare(a, b) == Ordering::equal)
            CHECK(vector_compare(b, a) == Ordering::equal);
        // transitivity over less
        if (vector_compare(a, b) == Ordering::less && vector_compare(b, c) == Ordering::less)
            CHECK(vector_compare(a, c) == Ordering::less);
    }
}
