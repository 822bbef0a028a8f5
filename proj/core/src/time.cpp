#include "tsc/time.hpp"

#include <stdexcept>

namespace tsc {

namespace {
constexpr std::int64_t kMillion = 1'000'000;
}

Ticks local_time(const PhysicalClock& clock, GlobalTime g) {
    // C++ integer division truncates toward zero, as required.
    const std::int64_t drift_term = (static_cast<std::int64_t>(clock.drift_ppm) * g) / kMillion;
    return g + clock.offset_at_epoch + drift_term;
}

GlobalTime global_reaching(const PhysicalClock& clock, Ticks target_local) {
    if (clock.drift_ppm < 0)
        throw std::invalid_argument("clock drift must be non-negative");
    // First guess from the real-valued inverse, then walk to the exact tick.
    const std::int64_t rate = kMillion + clock.drift_ppm;
    GlobalTime g = ((target_local - clock.offset_at_epoch) * kMillion) / rate;
    if (g < 0) g = 0;
    while (local_time(clock, g) < target_local) ++g;
    while (g > 0 && local_time(clock, g - 1) >= target_local) --g;
    return g;
}

PhysicalClock with_local_reading(const PhysicalClock& clock, Ticks reading, GlobalTime g) {
    PhysicalClock adjusted = clock;
    adjusted.offset_at_epoch += reading - local_time(clock, g);
    adjusted.last_sync = g;
    return adjusted;
}

PhysicalClock cristian_sync(const PhysicalClock& node, const PhysicalClock& reference,
                            Ticks rtt, GlobalTime g) {
    if (rtt <= 0) throw std::invalid_argument("rtt must be positive");
    // The reference reading is modeled at the midpoint of the round trip.
    GlobalTime read_at = g - rtt / 2;
    if (read_at < 0) read_at = 0;
    const Ticks estimate = local_time(reference, read_at) + rtt / 2;
    return with_local_reading(node, estimate, g);
}

Ticks required_sync_interval(std::int64_t max_relative_drift_ppm, Ticks gamma, Ticks residual) {
    if (residual < 0 || gamma <= residual)
        throw std::invalid_argument("accuracy unachievable: gamma must exceed residual");
    if (max_relative_drift_ppm < 0)
        throw std::invalid_argument("drift must be non-negative");
    if (max_relative_drift_ppm == 0) return kNoResyncNeeded;
    return ((gamma - residual) * kMillion) / (2 * max_relative_drift_ppm);
}

}  // namespace tsc
