#pragma once

#include <cstdint>
#include <limits>

namespace tsc {

// All times are integer microsecond ticks.
using Ticks = std::int64_t;

// Hidden oracle time driving the event loop. Nodes never read it; they only
// see their own PhysicalClock readings.
using GlobalTime = std::int64_t;

inline constexpr Ticks kNoResyncNeeded = std::numeric_limits<Ticks>::max();

/// A per-node quartz model: a fixed offset plus a constant ppm drift over
/// oracle time. Drift must be non-negative so that integer local readings are
/// strictly increasing; a set of clocks with arbitrary relative drift is
/// expressed by shifting all rates up by the same amount.
struct PhysicalClock {
    Ticks offset_at_epoch = 0;
    std::int32_t drift_ppm = 0;
    GlobalTime last_sync = 0;
};

/// Maximum permitted pairwise deviation the sync regime guarantees.
struct SyncAccuracy {
    Ticks gamma = 0;
};

// Local reading at oracle instant g: g + offset + drift*g/10^6, the drift
// term truncated toward zero.
Ticks local_time(const PhysicalClock& clock, GlobalTime g);

// Smallest g >= 0 whose local reading is >= target. Used to schedule
// local-clock deadlines on the oracle timeline.
GlobalTime global_reaching(const PhysicalClock& clock, Ticks target_local);

// Shift the offset so that local_time(clock', g) == reading.
PhysicalClock with_local_reading(const PhysicalClock& clock, Ticks reading, GlobalTime g);

// One-shot synchronization against a reference clock with a measured round
// trip: the node adopts (reference reading) + rtt/2, leaving its reading
// within rtt/2 of the reference.
PhysicalClock cristian_sync(const PhysicalClock& node, const PhysicalClock& reference,
                            Ticks rtt, GlobalTime g);

// Largest interval I with residual + 2*max_relative_drift*I/10^6 <= gamma.
// Zero drift never needs a resync and returns kNoResyncNeeded.
// Throws std::invalid_argument when gamma <= residual.
Ticks required_sync_interval(std::int64_t max_relative_drift_ppm, Ticks gamma, Ticks residual);

}  // namespace tsc
