#pragma once

#include <cstdint>
#include <string_view>

namespace tsc {

// 64-bit FNV-1a. Not cryptographic; collision resistance at the scale of a
// five-node circle is all the read quorum and the Merkle trees need, and the
// function is trivially portable and deterministic.
inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

constexpr std::uint64_t fnv64(std::string_view bytes, std::uint64_t seed = kFnvOffset) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

// Digest of an empty input; used as the Merkle padding sentinel and as the
// leaf value for absent objects when two stores are compared over a key union.
inline constexpr std::uint64_t kEmptyDigest = kFnvOffset;

void append_u64(std::string& out, std::uint64_t v);
void append_i64(std::string& out, std::int64_t v);
void append_bytes(std::string& out, std::string_view bytes);  // length-prefixed

}  // namespace tsc
