#include <doctest.h>

#include <random>

#include "tsc/digest.hpp"
#include "tsc/merkle.hpp"

using namespace tsc;

namespace {

Store make_store(int objects, std::uint64_t salt = 0) {
    Store store;
    for (int i = 0; i < objects; ++i) {
        const std::string key = "obj" + std::string(i < 10 ? "0" : "") + std::to_string(i);
        store[key] = {key, "value-" + std::to_string(i + salt),
                      {static_cast<Ticks>(100 + i), {0, static_cast<std::uint64_t>(i)}},
                      true};
    }
    return store;
}

}  // namespace

TEST_CASE("merkle roots") {
    CHECK(merkle_build({}).root() == kEmptyDigest);
    CHECK(merkle_build(make_store(64)).root() == merkle_build(make_store(64)).root());
    CHECK(merkle_build(make_store(64)).root() != merkle_build(make_store(63)).root());
}

TEST_CASE("any single mutation in a 64-object store changes the root") {
    const Store base = make_store(64);
    const std::uint64_t root = merkle_build(base).root();
    for (const auto& [key, obj] : base) {
        Store mutated = base;
        mutated[key].value += "!";
        CHECK(merkle_build(mutated).root() != root);
    }
}

TEST_CASE("merkle_diff finds exactly the differing leaves") {
    const Store base = make_store(64);
    SUBCASE("equal trees cost a single root comparison") {
        const MerkleDiff diff = merkle_diff(merkle_build(base), merkle_build(base));
        CHECK(diff.differing.empty());
        CHECK(diff.comparisons == 1);
    }
    SUBCASE("one differing leaf out of 64 stays within the descent bound") {
        Store mutated = base;
        mutated["obj17"].value = "corrupted";
        const MerkleDiff diff = merkle_diff(merkle_build(base), merkle_build(mutated));
        CHECK(diff.differing == std::vector<std::string>{"obj17"});
        CHECK(diff.comparisons <= 14);  // 2 * (log2(64) + 1)
    }
    SUBCASE("total divergence reports every leaf") {
        const MerkleDiff diff = merkle_diff(merkle_build(base), merkle_build(make_store(64, 1)));
        CHECK(diff.differing.size() == 64);
    }
    SUBCASE("leaf ordering conventions must match") {
        CHECK_THROWS(merkle_diff(merkle_build(base), merkle_build(make_store(63))));
    }
}

TEST_CASE("merkle_diff equals the brute-force leafwise comparison") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const int objects = 1 + static_cast<int>(rng() % 256);
        Store a = make_store(objects);
        Store b = a;
        std::vector<std::string> expected;
        for (auto& [key, obj] : b) {
            if (rng() % 8 == 0) {
                obj.value += "x";
                expected.push_back(key);
            }
        }
        const MerkleDiff diff = merkle_diff(merkle_build(a), merkle_build(b));
        CHECK(diff.differing == expected);
        const std::size_t k = expected.size();
        if (k > 0) {
            std::size_t levels = 1;
            while ((std::size_t{1} << levels) < static_cast<std::size_t>(objects)) ++levels;
            CHECK(diff.comparisons <= 2 * k * (levels + 1) + 1);
        }
    }
}

TEST_CASE("run_sync pushes the healer's state to the target") {
    const Store source = make_store(64);
    SUBCASE("equal stores transfer nothing") {
        const SyncResult result = run_sync(source, source);
        CHECK(result.objects_transferred == 0);
        CHECK(result.merged == source);
    }
    SUBCASE("missing objects are copied") {
        Store target = source;
        target.erase("obj03");
        target.erase("obj40");
        target.erase("obj63");
        const SyncResult result = run_sync(source, target);
        CHECK(result.objects_transferred == 3);
        CHECK(result.merged == source);
        CHECK(result.bytes_transferred > 0);
    }
    SUBCASE("corrupted bytes are corrected to the source") {
        Store target = source;
        target["obj10"].value[0] ^= 0x20;
        const SyncResult result = run_sync(source, target);
        CHECK(result.objects_transferred == 1);
        CHECK(result.merged == source);
    }
    SUBCASE("a strictly newer target version survives the push") {
        Store target = source;
        target["obj10"].value = "newer";
        target["obj10"].commit = {9'000, {1, 99}};
        const SyncResult result = run_sync(source, target);
        CHECK(result.merged.at("obj10").value == "newer");
        CHECK(result.objects_transferred == 0);
    }
    SUBCASE("a second immediate run transfers nothing") {
        Store target = make_store(64, 5);
        const SyncResult first = run_sync(source, target);
        const SyncResult second = run_sync(source, first.merged);
        CHECK(second.objects_transferred == 0);
    }
}
