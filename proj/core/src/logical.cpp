#include "tsc/logical.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace tsc {

LamportClock lamport_event(LamportClock clock, std::optional<std::uint64_t> received) {
    if (received)
        clock.counter = std::max(*received, clock.counter) + 1;
    else
        clock.counter += 1;
    return clock;
}

VectorTimestamp make_vector_timestamp(std::size_t processes, std::size_t owner) {
    if (owner >= processes) throw std::invalid_argument("owner out of range");
    return VectorTimestamp{std::vector<std::uint64_t>(processes, 0), owner};
}

VectorTimestamp vector_event(const VectorTimestamp& ts,
                             const std::optional<VectorTimestamp>& received) {
    VectorTimestamp next = ts;
    if (received) {
        if (received->entries.size() != ts.entries.size())
            throw std::invalid_argument("vector timestamp length mismatch");
        for (std::size_t i = 0; i < next.entries.size(); ++i)
            next.entries[i] = std::max(next.entries[i], received->entries[i]);
    }
    next.entries[next.owner] += 1;
    return next;
}

Ordering vector_compare(const VectorTimestamp& x, const VectorTimestamp& y) {
    if (x.entries.size() != y.entries.size())
        throw std::invalid_argument("vector timestamp length mismatch");
    bool some_less = false;
    bool some_greater = false;
    for (std::size_t i = 0; i < x.entries.size(); ++i) {
        if (x.entries[i] < y.entries[i]) some_less = true;
        if (x.entries[i] > y.entries[i]) some_greater = true;
    }
    if (some_less && some_greater) return Ordering::concurrent;
    if (some_less) return Ordering::less;
    if (some_greater) return Ordering::greater;
    return Ordering::equal;
}

std::uint64_t awareness_horizon(const VectorTimestamp& ts) {
    return std::accumulate(ts.entries.begin(), ts.entries.end(), std::uint64_t{0});
}

bool tcc_valid(std::uint64_t xi_s, std::uint64_t xi_i, std::uint64_t delta) {
    if (xi_s < xi_i) throw std::invalid_argument("xi_s must be >= xi_i");
    return xi_s - xi_i <= delta;
}

}  // namespace tsc
