#pragma once

#include <map>
#include <optional>
#include <string>

#include "tsc/protocol.hpp"
#include "tsc/time.hpp"

namespace tsc {

enum class EntryState { fresh, old };

/// A cached object with its validity lifetime. Entries past their ending
/// time are marked old rather than dropped, so an unchanged object costs an
/// if-modified-since exchange instead of a full transfer.
struct CacheEntry {
    std::string object_id;
    std::string value;
    Ticks start_time = 0;
    Ticks ending_time = 0;
    EntryState state = EntryState::fresh;
    std::optional<CommitStamp> version;  // identity for if-modified-since
};

struct ClientCache {
    std::map<std::string, CacheEntry> entries;
};

/// The three client-side bounds: cache lifetime, read-timeout, and the
/// circle's own window. Their sum bounds end-to-end update visibility.
struct ClientTiming {
    Ticks delta_client = 0;
    Ticks delta_network = 0;
    Ticks delta_data = 0;
};

enum class CacheLookup { hit, needs_revalidation, miss };

struct CacheReadResult {
    CacheLookup lookup = CacheLookup::miss;
    std::string value;                   // hit only
    std::optional<CommitStamp> version;  // hit or needs_revalidation
};

// A hit requires a fresh entry whose lifetime still covers `now`; expired
// entries are demoted to old and must be revalidated before they serve again.
CacheReadResult cache_read(ClientCache& cache, const std::string& object_id, Ticks now);

struct ServerAnswer {
    bool modified = false;
    std::string value;                   // modified only
    std::optional<CommitStamp> version;
};

// Re-leases the entry for delta_client from `now`; a modified answer also
// replaces the bytes.
void revalidate(ClientCache& cache, const std::string& object_id, Ticks now,
                Ticks delta_client, const ServerAnswer& answer);

// All entries share a validity instant: the latest start precedes the
// earliest ending. Requires a non-empty cache.
bool mutually_consistent(const ClientCache& cache);

// Missed read deadline: every entry is demoted to old until a successful
// exchange completes.
void invalidate_temporarily(ClientCache& cache);

Ticks delta_update_bound(const ClientTiming& timing);

}  // namespace tsc
