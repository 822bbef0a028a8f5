#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsc/node.hpp"

namespace tsc {

/// Binary hash tree over a store's finalized objects in canonical key order.
/// Odd-sized levels are padded with the empty-digest sentinel, so equal
/// stores always produce equal roots.
struct MerkleTree {
    std::vector<std::string> keys;                    // leaf order
    std::vector<std::vector<std::uint64_t>> levels;   // levels[0] = leaves

    std::uint64_t root() const;
    bool empty() const { return keys.empty(); }
};

MerkleTree merkle_build(const Store& store);

// Tree over an explicit key sequence; absent keys digest to the sentinel.
// This is how two stores with different key sets are compared positionally.
MerkleTree merkle_build_over(const Store& store, const std::vector<std::string>& keys);

struct MerkleDiff {
    std::vector<std::string> differing;  // leaf keys whose digests differ
    std::size_t comparisons = 0;         // node-pair digest comparisons made
};

// Descends only into unequal subtrees. Both trees must follow the same leaf
// ordering convention (identical key sequences).
MerkleDiff merkle_diff(const MerkleTree& a, const MerkleTree& b);

struct SyncResult {
    Store merged;                          // target store after the session
    std::vector<std::string> transferred;  // keys actually copied over
    std::size_t objects_transferred = 0;
    std::size_t bytes_transferred = 0;
    std::size_t comparisons = 0;
};

// One anti-entropy session: the healer (source) pushes to the stale node
// (target). Conflicts resolve toward the higher commit stamp, so a session
// never regresses a finalized newer version the target already holds.
SyncResult run_sync(const Store& source, const Store& target);

}  // namespace tsc
