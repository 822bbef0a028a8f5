#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsc/message.hpp"
#include "tsc/protocol.hpp"
#include "tsc/time.hpp"

namespace tsc {

enum class NodeStatus { valid, invalid };

/// A finalized object version. Stores keep the newest version per key,
/// ordered by commit stamp.
struct VersionedObject {
    std::string object_id;
    std::string value;
    CommitStamp commit{};
    bool finalized = true;

    bool operator==(const VersionedObject&) const = default;
};

using Store = std::map<std::string, VersionedObject>;

// Canonical digest of a version: value bytes, commit value, tie-break.
std::uint64_t object_digest(const VersionedObject& obj);

/// A write stored under its temporary receipt stamp, waiting for the
/// committed timestamp inside the local beta window.
struct PendingWrite {
    WriteId write_id{};
    std::string object_id;
    std::string value;
    Ticks t_recv = 0;
    Ticks beta_deadline = 0;

    bool operator==(const PendingWrite&) const = default;
};

/// Trigger-side bookkeeping for one coordinated write.
struct WriteCoordination {
    WriteId write_id{};
    std::string object_id;
    std::string value;
    Ticks t_send = 0;
    std::map<int, Ticks> confirmations;  // node -> confirmed receipt stamp
    Ticks alpha_deadline = 0;
    std::optional<Ticks> second_beta_deadline;
    std::uint64_t client_tag = 0;
    bool decided = false;

    bool operator==(const WriteCoordination&) const = default;
};

/// Trigger-side bookkeeping for one quorum read.
struct ReadCoordination {
    ReadId read_id{};
    std::string object_id;
    std::optional<std::uint64_t> own_digest;
    std::optional<CommitStamp> if_modified_since;
    std::map<int, std::optional<std::uint64_t>> replies;
    Ticks omega_deadline = 0;
    std::uint64_t client_tag = 0;
    bool answered = false;        // client reply already sent (early quorum)
    bool awaiting_fetch = false;  // majority object requested from peers
    std::optional<std::uint64_t> expected_digest;  // majority hash being fetched

    bool operator==(const ReadCoordination&) const = default;
};

/// Full protocol state of one replica.
struct NodeState {
    int index = 0;
    NodeStatus status = NodeStatus::valid;
    Store store;
    std::map<WriteId, PendingWrite> pending;
    std::map<WriteId, WriteCoordination> writes;
    std::map<ReadId, ReadCoordination> reads;
    std::uint64_t seq = 0;

    bool operator==(const NodeState&) const = default;
};

enum class TimerKind {
    alpha_expiry,
    beta_expiry,
    omega_expiry,
    fetch_expiry,
    write_close,  // trigger's second beta window closes; audit anchor
    revalidate_retry,
    sync_round,  // engine-owned: periodic clock synchronization probe
};

struct NodeTimer {
    TimerKind kind{};
    OpId id{};
    Ticks due_local = 0;

    bool operator==(const NodeTimer&) const = default;
};

enum class ClientStatus { accepted, rejected, value, not_modified, not_found, failed };

struct ClientReply {
    std::uint64_t client_tag = 0;
    ClientStatus status{};
    std::string value;
    std::optional<CommitStamp> version;

    bool operator==(const ClientReply&) const = default;
};

enum class NodeEventKind {
    write_begun,
    request_accepted,
    request_rejected_latency,
    confirm_recorded,
    write_decided,
    finalized,
    invalidated,
    read_begun,
    read_resolved,
    heal_mandated,
    revalidation_requested,
    revalidated,
    write_closed,
};

enum class InvalidationReason { beta_expiry, read_self_heal, fetch_timeout, crash };
enum class ReadOutcome { local_value, majority_fetch, not_found, failed };

const char* invalidation_reason_name(InvalidationReason r);
const char* read_outcome_name(ReadOutcome o);

/// Structured record of a state-machine transition, consumed by the trace
/// log and the run audit.
struct NodeEvent {
    NodeEventKind kind{};
    OpId id{};
    std::string object_id;
    bool success = false;
    CommitStamp commit{};
    InvalidationReason reason{};
    ReadOutcome outcome{};
    int peer = -1;
    std::optional<std::uint64_t> digest;  // read events: the hash in play

    bool operator==(const NodeEvent&) const = default;
};

struct ProtocolParams {
    QuorumConfig quorum{};
    TimingConfig timing{};
    Ticks revalidation_retry = 0;
    // Test hook: suppress self-invalidation on beta expiry so audits can be
    // shown to catch the resulting protocol violation.
    bool skip_beta_expiry_invalidation = false;
};

/// Result of one handler invocation. Handlers are pure: they never touch
/// anything but their inputs, so replaying a (state, event) pair reproduces
/// the identical step.
struct NodeStep {
    NodeState state;
    std::vector<Message> send;
    std::vector<NodeTimer> timers;
    std::vector<ClientReply> replies;
    std::vector<NodeEvent> events;
};

int cw_neighbor(int index, int total);
int ccw_neighbor(int index, int total);

// -- write path ------------------------------------------------------------

NodeStep begin_write(const NodeState& state, const ProtocolParams& params,
                     const std::string& object_id, const std::string& value,
                     Ticks now_local, std::uint64_t client_tag);
NodeStep on_write_request(const NodeState& state, const ProtocolParams& params,
                          const Message& msg, Ticks now_local);
NodeStep on_write_confirm(const NodeState& state, const ProtocolParams& params,
                          const Message& msg, Ticks now_local);
NodeStep on_alpha_expiry(const NodeState& state, const ProtocolParams& params,
                         WriteId id, Ticks now_local);
NodeStep on_commit_ts(const NodeState& state, const ProtocolParams& params,
                      const Message& msg, Ticks now_local);
NodeStep on_beta_expiry(const NodeState& state, const ProtocolParams& params,
                        WriteId id, Ticks now_local);
NodeStep on_write_close(const NodeState& state, const ProtocolParams& params,
                        WriteId id, Ticks now_local);

// -- read path ---------------------------------------------------------------

NodeStep begin_read(const NodeState& state, const ProtocolParams& params,
                    const std::string& object_id,
                    std::optional<CommitStamp> if_modified_since, Ticks now_local,
                    std::uint64_t client_tag);
NodeStep on_hash_request(const NodeState& state, const ProtocolParams& params,
                         const Message& msg, Ticks now_local);
NodeStep on_hash_reply(const NodeState& state, const ProtocolParams& params,
                       const Message& msg, Ticks now_local);
NodeStep on_omega_expiry(const NodeState& state, const ProtocolParams& params,
                         ReadId id, Ticks now_local);
NodeStep on_object_fetch(const NodeState& state, const ProtocolParams& params,
                         const Message& msg, Ticks now_local);
NodeStep on_object_reply(const NodeState& state, const ProtocolParams& params,
                         const Message& msg, Ticks now_local);
NodeStep on_fetch_expiry(const NodeState& state, const ProtocolParams& params,
                         ReadId id, Ticks now_local);

// -- invalidation and recovery ----------------------------------------------

NodeStep request_revalidation(const NodeState& state, const ProtocolParams& params,
                              Ticks now_local);
NodeStep on_revalidate_retry(const NodeState& state, const ProtocolParams& params,
                             Ticks now_local);
// Crash onset: drop in-flight coordinations without replies and go invalid.
NodeStep on_crash(const NodeState& state, const ProtocolParams& params, Ticks now_local);
// Applied when a completed anti-entropy session hands over the merged store.
NodeStep on_sync_completed(const NodeState& state, const ProtocolParams& params,
                           Store merged_store, Ticks now_local);

// -- read classification (exposed for tests) ---------------------------------

struct ReadClassification {
    enum class Kind { serve_local, fetch_majority, fail } kind = Kind::fail;
    // fetch_majority only: the agreed hash; nullopt means the majority agrees
    // the object does not exist.
    std::optional<std::uint64_t> majority_digest;
    std::vector<int> majority_holders;
    std::vector<int> mismatched;  // repliers disagreeing with the served hash
};

ReadClassification classify_read(std::optional<std::uint64_t> own_digest,
                                 const std::map<int, std::optional<std::uint64_t>>& replies,
                                 int n);

}  // namespace tsc
