#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "tsc/protocol.hpp"
#include "tsc/time.hpp"

namespace tsc {

enum class MsgKind {
    write_request,
    write_confirm,
    commit_ts,
    hash_request,
    hash_reply,
    object_fetch,
    object_reply,
    anti_entropy_request,
    sync_probe,
};

const char* msg_kind_name(MsgKind kind);

// Write/read traffic is what the circle's load accounting covers; repair and
// maintenance kinds are bookkept separately.
bool is_write_path(MsgKind kind);
bool is_read_path(MsgKind kind);

enum class SyncPhase { request, reply };

/// One protocol message. Every message carries the sender's local clock at
/// the instant it was sent; the remaining payload fields are used as the kind
/// requires.
struct Message {
    MsgKind kind{};
    int sender = -1;
    int receiver = -1;
    Ticks sent_local = 0;
    std::uint64_t mid = 0;  // engine-assigned trace id

    WriteId write_id{};
    ReadId read_id{};
    std::string object_id;
    std::string value;
    Ticks receipt_stamp = 0;                // write_confirm: confirmer's t_recv
    CommitStamp commit{};                   // commit_ts / object_reply
    bool has_object = false;                // object_reply: fetched object present
    std::optional<std::uint64_t> digest;    // hash_reply: nullopt = absent object
    int heal_target = -1;                   // anti_entropy_request: stale node
    SyncPhase sync_phase = SyncPhase::request;
    Ticks sync_echo = 0;     // sync_probe: requester's send reading, echoed back
    Ticks sync_reading = 0;  // sync_probe reply: reference's reading

    bool operator==(const Message&) const = default;
};

}  // namespace tsc
