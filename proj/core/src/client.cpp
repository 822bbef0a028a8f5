#include "tsc/client.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace tsc {

CacheReadResult cache_read(ClientCache& cache, const std::string& object_id, Ticks now) {
    auto it = cache.entries.find(object_id);
    if (it == cache.entries.end()) return {CacheLookup::miss, {}, {}};
    CacheEntry& entry = it->second;
    if (entry.state == EntryState::fresh && now < entry.ending_time)
        return {CacheLookup::hit, entry.value, entry.version};
    entry.state = EntryState::old;
    return {CacheLookup::needs_revalidation, {}, entry.version};
}

void revalidate(ClientCache& cache, const std::string& object_id, Ticks now,
                Ticks delta_client, const ServerAnswer& answer) {
    CacheEntry& entry = cache.entries[object_id];
    entry.object_id = object_id;
    if (answer.modified) {
        entry.value = answer.value;
        entry.version = answer.version;
    }
    entry.start_time = now;
    entry.ending_time = now + delta_client;
    entry.state = EntryState::fresh;
}

bool mutually_consistent(const ClientCache& cache) {
    if (cache.entries.empty()) throw std::invalid_argument("cache is empty");
    Ticks latest_start = std::numeric_limits<Ticks>::min();
    Ticks earliest_ending = std::numeric_limits<Ticks>::max();
    for (const auto& [key, entry] : cache.entries) {
        latest_start = std::max(latest_start, entry.start_time);
        earliest_ending = std::min(earliest_ending, entry.ending_time);
    }
    return latest_start < earliest_ending;
}

void invalidate_temporarily(ClientCache& cache) {
    for (auto& [key, entry] : cache.entries) entry.state = EntryState::old;
}

Ticks delta_update_bound(const ClientTiming& timing) {
    return timing.delta_data + timing.delta_client + timing.delta_network;
}

}  // namespace tsc
