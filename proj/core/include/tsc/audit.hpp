#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsc/node.hpp"
#include "tsc/protocol.hpp"
#include "tsc/report.hpp"
#include "tsc/scenario.hpp"
#include "tsc/time.hpp"

namespace tsc {

/// Oracle-side record of one coordinated write: every instant is hidden
/// global time, which no node ever observed. This is what makes the audit an
/// external-observer check rather than a re-run of node logic.
struct WriteAuditRecord {
    WriteId id{};
    int trigger = -1;
    std::string object_id;
    std::uint64_t value_digest = 0;
    GlobalTime requested_g = -1;  // write instant: client request processed
    bool decided = false;
    bool success = false;
    GlobalTime decided_g = -1;
    CommitStamp commit{};
    GlobalTime close_g = -1;  // trigger's second beta window closed
    std::map<int, GlobalTime> accepted;          // non-trigger stores of the pending
    std::map<int, GlobalTime> rejected_latency;  // failed the latency bracket
    std::map<int, GlobalTime> confirm_recorded;  // arrivals counted by the trigger
    std::map<int, GlobalTime> finalized;         // commit applied (trigger included)
};

struct ReadAuditRecord {
    ReadId id{};
    int trigger = -1;
    std::string object_id;
    GlobalTime started_g = -1;
    std::optional<std::uint64_t> own_digest;
    // replier -> (arrival instant at trigger, digest carried)
    std::map<int, std::pair<GlobalTime, std::optional<std::uint64_t>>> replies;
    bool resolved = false;
    ReadOutcome outcome{};
    GlobalTime resolved_g = -1;
    std::optional<std::uint64_t> served_digest;
    std::optional<CommitStamp> served_version;
    bool entered_fetch = false;  // majority object requested; adds one omega
};

struct FinalizeAuditRecord {
    int node = -1;
    WriteId id{};
    std::string object_id;
    CommitStamp commit{};
    std::uint64_t value_digest = 0;
    GlobalTime g = -1;
    bool via_sync = false;
};

struct InvalidationAuditRecord {
    int node = -1;
    GlobalTime g = -1;
    InvalidationReason reason{};
};

enum class ClientOpOutcome {
    value,
    not_found,
    failed,
    rejected,
    timed_out,
};

struct ClientOpAuditRecord {
    int client = -1;
    ClientOpKind kind{};
    std::string object_id;
    GlobalTime scheduled_g = -1;
    GlobalTime started_g = -1;
    GlobalTime resolved_g = -1;
    ClientOpOutcome outcome{};
    bool from_cache = false;
    std::optional<CommitStamp> version;     // returned version for value reads
    GlobalTime validated_g = -1;            // cache hits: when the entry was leased
    std::optional<WriteId> write_id;        // writes: protocol id once assigned
};

/// Full external-observer history of one run.
struct OracleHistory {
    QuorumConfig quorum{};
    TimingConfig timing{};
    bool failure_free = true;
    bool audit_client_bounds = false;
    std::map<int, ClientConfig> clients;
    std::map<WriteId, WriteAuditRecord> writes;
    std::map<ReadId, ReadAuditRecord> reads;
    std::vector<FinalizeAuditRecord> finalizes;
    std::vector<InvalidationAuditRecord> invalidations;
    std::vector<ClientOpAuditRecord> client_ops;
};

// Verdicts over the completed run. Checks that do not apply to the run class
// (client bounds on faulty runs, count exactness on runs with rejections)
// are reported as unchecked.
AuditReport audit(const OracleHistory& history, const RunReport& report);

}  // namespace tsc
