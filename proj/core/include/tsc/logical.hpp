#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace tsc {

/// Lamport counter: orders causally related events, nothing more.
struct LamportClock {
    std::uint64_t counter = 0;
};

// Advance for a local event, or for a receive carrying the sender's counter.
LamportClock lamport_event(LamportClock clock, std::optional<std::uint64_t> received = {});

enum class Ordering { less, greater, equal, concurrent };

/// N-dimensional logical timestamp owned by one process.
struct VectorTimestamp {
    std::vector<std::uint64_t> entries;
    std::size_t owner = 0;

    bool operator==(const VectorTimestamp&) const = default;
};

VectorTimestamp make_vector_timestamp(std::size_t processes, std::size_t owner);

// Local event bumps the owner entry; a receive first merges componentwise max.
VectorTimestamp vector_event(const VectorTimestamp& ts,
                             const std::optional<VectorTimestamp>& received = {});

// Partial-order comparison of equal-length vectors.
Ordering vector_compare(const VectorTimestamp& x, const VectorTimestamp& y);

// Awareness horizon: sum of all entries.
std::uint64_t awareness_horizon(const VectorTimestamp& ts);

// Validity under a logical-staleness window: (xi_s - xi_i) <= delta.
// Requires xi_s >= xi_i.
bool tcc_valid(std::uint64_t xi_s, std::uint64_t xi_i, std::uint64_t delta);

}  // namespace tsc
