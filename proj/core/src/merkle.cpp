#include "tsc/merkle.hpp"

#include <algorithm>
#include <stdexcept>

#include "tsc/digest.hpp"

namespace tsc {

namespace {

std::uint64_t combine(std::uint64_t left, std::uint64_t right) {
    std::string bytes;
    append_u64(bytes, left);
    append_u64(bytes, right);
    return fnv64(bytes);
}

MerkleTree build_from_leaves(std::vector<std::string> keys, std::vector<std::uint64_t> leaves) {
    MerkleTree tree;
    tree.keys = std::move(keys);
    if (leaves.empty()) return tree;
    tree.levels.push_back(std::move(leaves));
    while (tree.levels.back().size() > 1) {
        const auto& below = tree.levels.back();
        std::vector<std::uint64_t> above;
        above.reserve((below.size() + 1) / 2);
        for (std::size_t i = 0; i < below.size(); i += 2) {
            const std::uint64_t right = i + 1 < below.size() ? below[i + 1] : kEmptyDigest;
            above.push_back(combine(below[i], right));
        }
        tree.levels.push_back(std::move(above));
    }
    return tree;
}

}  // namespace

std::uint64_t MerkleTree::root() const {
    if (levels.empty()) return kEmptyDigest;
    return levels.back().front();
}

MerkleTree merkle_build(const Store& store) {
    std::vector<std::string> keys;
    std::vector<std::uint64_t> leaves;
    keys.reserve(store.size());
    leaves.reserve(store.size());
    for (const auto& [key, obj] : store) {  // std::map iterates in key order
        keys.push_back(key);
        leaves.push_back(object_digest(obj));
    }
    return build_from_leaves(std::move(keys), std::move(leaves));
}

MerkleTree merkle_build_over(const Store& store, const std::vector<std::string>& keys) {
    std::vector<std::uint64_t> leaves;
    leaves.reserve(keys.size());
    for (const auto& key : keys) {
        auto it = store.find(key);
        leaves.push_back(it == store.end() ? kEmptyDigest : object_digest(it->second));
    }
    return build_from_leaves(keys, std::move(leaves));
}

MerkleDiff merkle_diff(const MerkleTree& a, const MerkleTree& b) {
    if (a.keys != b.keys)
        throw std::invalid_argument("merkle_diff requires the same leaf ordering");

    MerkleDiff diff;
    if (a.levels.empty()) {
        diff.comparisons = 1;  // both empty: root sentinel comparison
        return diff;
    }

    // Iterative descent, children visited only under unequal parents.
    struct Pos {
        std::size_t level, index;
    };
    std::vector<Pos> frontier{{a.levels.size() - 1, 0}};
    while (!frontier.empty()) {
        const Pos pos = frontier.back();
        frontier.pop_back();
        diff.comparisons += 1;
        if (a.levels[pos.level][pos.index] == b.levels[pos.level][pos.index]) continue;
        if (pos.level == 0) {
            diff.differing.push_back(a.keys[pos.index]);
            continue;
        }
        const std::size_t below = pos.level - 1;
        const std::size_t left = pos.index * 2;
        if (left < a.levels[below].size()) frontier.push_back({below, left});
        if (left + 1 < a.levels[below].size()) frontier.push_back({below, left + 1});
    }
    std::sort(diff.differing.begin(), diff.differing.end());
    return diff;
}

SyncResult run_sync(const Store& source, const Store& target) {
    std::vector<std::string> keys;
    keys.reserve(source.size() + target.size());
    for (const auto& [key, obj] : source) keys.push_back(key);
    for (const auto& [key, obj] : target) keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    const MerkleTree source_tree = merkle_build_over(source, keys);
    const MerkleTree target_tree = merkle_build_over(target, keys);
    const MerkleDiff diff = merkle_diff(source_tree, target_tree);

    SyncResult result;
    result.comparisons = diff.comparisons;
    result.merged = target;
    for (const auto& key : diff.differing) {
        auto src = source.find(key);
        if (src == source.end()) continue;  // target-only data is never erased
        auto dst = result.merged.find(key);
        if (dst != result.merged.end() && src->second.commit < dst->second.commit)
            continue;  // target already holds a newer finalized version
        result.merged[key] = src->second;
        result.transferred.push_back(key);
        result.objects_transferred += 1;
        result.bytes_transferred += key.size() + src->second.value.size() + 24;
    }
    return result;
}

}  // namespace tsc
