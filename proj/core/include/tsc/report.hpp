#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsc/message.hpp"
#include "tsc/node.hpp"
#include "tsc/protocol.hpp"
#include "tsc/time.hpp"

namespace tsc {

struct KindCounts {
    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
};

struct CheckResult {
    std::string name;
    bool checked = false;  // some checks only apply to certain run classes
    bool ok = true;
    std::vector<std::string> violations;
};

struct AuditReport {
    std::vector<CheckResult> checks;

    bool all_ok() const {
        for (const auto& check : checks)
            if (check.checked && !check.ok) return false;
        return true;
    }
    const CheckResult* find(const std::string& name) const {
        for (const auto& check : checks)
            if (check.name == name) return &check;
        return nullptr;
    }
};

struct AntiEntropyStats {
    std::uint64_t sessions = 0;
    std::uint64_t objects_transferred = 0;
    std::uint64_t bytes_transferred = 0;
    std::uint64_t comparisons = 0;
};

/// Everything a run reports: audited verdicts, message tallies, operation
/// outcomes, and the observed latency metrics.
struct RunReport {
    std::string scenario_name;
    std::uint64_t seed = 0;
    GlobalTime end_time = 0;
    std::uint64_t events_processed = 0;

    std::map<MsgKind, KindCounts> messages;
    std::uint64_t write_path_sent = 0;
    std::uint64_t write_path_delivered = 0;
    std::uint64_t read_path_sent = 0;
    std::uint64_t read_path_delivered = 0;

    std::uint64_t writes_requested = 0;
    std::uint64_t writes_succeeded = 0;
    std::uint64_t writes_failed = 0;    // quorum miss within alpha
    std::uint64_t writes_rejected = 0;  // invalid trigger
    std::uint64_t reads_requested = 0;
    std::uint64_t reads_succeeded = 0;
    std::uint64_t reads_not_found = 0;
    std::uint64_t reads_failed = 0;
    std::uint64_t reads_rejected = 0;

    std::uint64_t client_ops = 0;
    std::uint64_t client_cache_hits = 0;
    std::uint64_t client_timeouts = 0;

    std::map<std::string, std::uint64_t> invalidations;  // reason -> count
    std::uint64_t revalidations = 0;
    std::uint64_t latency_rejections = 0;

    AntiEntropyStats anti_entropy;

    // max of the (n+1) shortest per-node round trips, one entry per
    // operation that had enough responsive peers to define it
    std::vector<Ticks> observed_write_latency;
    std::vector<Ticks> observed_read_latency;

    AuditReport audit;
    std::uint64_t trace_digest = 0;
    std::uint64_t trace_lines = 0;
};

std::string report_to_json(const RunReport& report);

}  // namespace tsc
