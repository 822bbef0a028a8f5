#include "tsc/message.hpp"

namespace tsc {

const char* msg_kind_name(MsgKind kind) {
    switch (kind) {
        case MsgKind::write_request: return "write_request";
        case MsgKind::write_confirm: return "write_confirm";
        case MsgKind::commit_ts: return "commit_ts";
        case MsgKind::hash_request: return "hash_request";
        case MsgKind::hash_reply: return "hash_reply";
        case MsgKind::object_fetch: return "object_fetch";
        case MsgKind::object_reply: return "object_reply";
        case MsgKind::anti_entropy_request: return "anti_entropy";
        case MsgKind::sync_probe: return "sync_probe";
    }
    return "unknown";
}

bool is_write_path(MsgKind kind) {
    return kind == MsgKind::write_request || kind == MsgKind::write_confirm ||
           kind == MsgKind::commit_ts;
}

bool is_read_path(MsgKind kind) {
    return kind == MsgKind::hash_request || kind == MsgKind::hash_reply;
}

}  // namespace tsc
