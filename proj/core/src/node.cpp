#include "tsc/node.hpp"

#include <algorithm>

#include "tsc/digest.hpp"

namespace tsc {

namespace {

const VersionedObject* find_finalized(const NodeState& state, const std::string& object_id) {
    auto it = state.store.find(object_id);
    return it == state.store.end() ? nullptr : &it->second;
}

// Newest version wins; an equal or older commit never replaces the stored one.
bool apply_finalized(NodeState& state, VersionedObject obj) {
    auto it = state.store.find(obj.object_id);
    if (it != state.store.end() && !(it->second.commit < obj.commit)) return false;
    state.store[obj.object_id] = std::move(obj);
    return true;
}

Message base_message(MsgKind kind, const NodeState& state, int receiver, Ticks now_local) {
    Message m;
    m.kind = kind;
    m.sender = state.index;
    m.receiver = receiver;
    m.sent_local = now_local;
    return m;
}

// Invalidation transition: abort open coordinations with a client failure,
// then start the revalidation loop toward the ccw neighbor.
void invalidate(NodeStep& step, const ProtocolParams& params, InvalidationReason reason,
                OpId related, Ticks now_local, bool silent) {
    NodeState& state = step.state;
    NodeEvent ev;
    ev.kind = NodeEventKind::invalidated;
    ev.id = related;
    ev.reason = reason;
    step.events.push_back(ev);
    if (state.status == NodeStatus::invalid) return;
    state.status = NodeStatus::invalid;

    for (auto& [id, coord] : state.writes) {
        if (coord.decided) continue;
        coord.decided = true;
        if (!silent)
            step.replies.push_back({coord.client_tag, ClientStatus::failed, {}, {}});
    }
    for (auto& [id, coord] : state.reads) {
        if (!coord.answered && !silent)
            step.replies.push_back({coord.client_tag, ClientStatus::failed, {}, {}});
    }
    state.reads.clear();

    if (!silent) {
        Message req = base_message(MsgKind::anti_entropy_request, state,
                                   ccw_neighbor(state.index, params.quorum.total()), now_local);
        req.heal_target = state.index;
        step.send.push_back(req);
        step.timers.push_back(
            {TimerKind::revalidate_retry, {}, now_local + params.revalidation_retry});
        NodeEvent rev;
        rev.kind = NodeEventKind::revalidation_requested;
        rev.peer = req.receiver;
        step.events.push_back(rev);
    }
}

// Quorum decision shared by the all-confirms and alpha-expiry paths.
void decide_write(NodeStep& step, const ProtocolParams& params, WriteCoordination& coord,
                  Ticks now_local) {
    NodeState& state = step.state;
    coord.decided = true;

    NodeEvent decided;
    decided.kind = NodeEventKind::write_decided;
    decided.id = coord.write_id;
    decided.object_id = coord.object_id;

    const int needed = params.quorum.n;
    if (state.status == NodeStatus::invalid ||
        static_cast<int>(coord.confirmations.size()) < needed) {
        decided.success = false;
        step.events.push_back(decided);
        step.replies.push_back({coord.client_tag, ClientStatus::failed, {}, {}});
        return;
    }

    std::vector<Ticks> receipts;
    receipts.reserve(coord.confirmations.size());
    for (const auto& [node, stamp] : coord.confirmations) receipts.push_back(stamp);
    const CommitStamp commit = commit_timestamp(coord.t_send, receipts, coord.write_id);

    decided.success = true;
    decided.commit = commit;
    step.events.push_back(decided);

    // Committed timestamp goes to every responsive node.
    for (const auto& [node, stamp] : coord.confirmations) {
        Message m = base_message(MsgKind::commit_ts, state, node, now_local);
        m.write_id = coord.write_id;
        m.object_id = coord.object_id;
        m.commit = commit;
        step.send.push_back(m);
    }

    apply_finalized(state, {coord.object_id, coord.value, commit, true});
    NodeEvent fin;
    fin.kind = NodeEventKind::finalized;
    fin.id = coord.write_id;
    fin.object_id = coord.object_id;
    fin.commit = commit;
    fin.digest = fnv64(coord.value);
    step.events.push_back(fin);

    coord.second_beta_deadline = now_local + params.timing.beta;
    step.timers.push_back({TimerKind::write_close, coord.write_id, *coord.second_beta_deadline});

    step.replies.push_back({coord.client_tag, ClientStatus::accepted, {}, commit});
}

void serve_local_read(NodeStep& step, ReadCoordination& coord) {
    const VersionedObject* obj = find_finalized(step.state, coord.object_id);
    coord.answered = true;
    NodeEvent ev;
    ev.kind = NodeEventKind::read_resolved;
    ev.id = coord.read_id;
    ev.object_id = coord.object_id;
    ev.success = true;
    ev.digest = coord.own_digest;
    if (!obj) {
        ev.outcome = ReadOutcome::not_found;
        step.events.push_back(ev);
        step.replies.push_back({coord.client_tag, ClientStatus::not_found, {}, {}});
        return;
    }
    ev.outcome = ReadOutcome::local_value;
    ev.commit = obj->commit;
    step.events.push_back(ev);
    if (coord.if_modified_since && *coord.if_modified_since == obj->commit)
        step.replies.push_back({coord.client_tag, ClientStatus::not_modified, {}, obj->commit});
    else
        step.replies.push_back({coord.client_tag, ClientStatus::value, obj->value, obj->commit});
}

// Resolution at omega (or once every reply is in): answer the client if the
// early quorum never formed, then mandate healing for disagreeing repliers.
void close_read(NodeStep& step, const ProtocolParams& params, ReadId id, Ticks now_local) {
    NodeState& state = step.state;
    auto it = state.reads.find(id);
    if (it == state.reads.end()) return;
    ReadCoordination& coord = it->second;
    if (coord.awaiting_fetch) return;  // fetch timer owns the coordination now

    const auto cls = classify_read(coord.own_digest, coord.replies, params.quorum.n);

    if (!coord.answered) {
        switch (cls.kind) {
            case ReadClassification::Kind::serve_local:
                serve_local_read(step, coord);
                break;
            case ReadClassification::Kind::fetch_majority: {
                if (!cls.majority_digest.has_value()) {
                    // The majority says the object does not exist; nothing to
                    // fetch. Serve the agreed absence and heal.
                    step.replies.push_back(
                        {coord.client_tag, ClientStatus::not_found, {}, {}});
                    NodeEvent ev;
                    ev.kind = NodeEventKind::read_resolved;
                    ev.id = coord.read_id;
                    ev.object_id = coord.object_id;
                    ev.success = true;
                    ev.outcome = ReadOutcome::not_found;
                    step.events.push_back(ev);
                    state.reads.erase(it);
                    invalidate(step, params, InvalidationReason::read_self_heal, id, now_local,
                               false);
                    return;
                }
                for (int holder : cls.majority_holders) {
                    Message m = base_message(MsgKind::object_fetch, state, holder, now_local);
                    m.read_id = coord.read_id;
                    m.object_id = coord.object_id;
                    step.send.push_back(m);
                }
                coord.expected_digest = *cls.majority_digest;
                coord.awaiting_fetch = true;
                step.timers.push_back(
                    {TimerKind::fetch_expiry, coord.read_id, now_local + params.timing.omega});
                return;  // resolution continues at object_reply / fetch_expiry
            }
            case ReadClassification::Kind::fail: {
                NodeEvent ev;
                ev.kind = NodeEventKind::read_resolved;
                ev.id = coord.read_id;
                ev.object_id = coord.object_id;
                ev.success = false;
                ev.outcome = ReadOutcome::failed;
                step.events.push_back(ev);
                step.replies.push_back({coord.client_tag, ClientStatus::failed, {}, {}});
                state.reads.erase(it);
                return;
            }
        }
    }

    // Served from the local copy: any replier that disagreed gets its ccw
    // neighbor mandated to heal it. No confirmation is expected.
    for (int stale : cls.mismatched) {
        Message m = base_message(MsgKind::anti_entropy_request, state,
                                 ccw_neighbor(stale, params.quorum.total()), now_local);
        m.heal_target = stale;
        step.send.push_back(m);
        NodeEvent ev;
        ev.kind = NodeEventKind::heal_mandated;
        ev.id = coord.read_id;
        ev.peer = stale;
        step.events.push_back(ev);
    }
    state.reads.erase(it);
}

}  // namespace

std::uint64_t object_digest(const VersionedObject& obj) {
    std::string canon;
    append_bytes(canon, obj.value);
    append_i64(canon, obj.commit.value);
    append_i64(canon, obj.commit.write_id.node);
    append_u64(canon, obj.commit.write_id.seq);
    return fnv64(canon);
}

const char* invalidation_reason_name(InvalidationReason r) {
    switch (r) {
        case InvalidationReason::beta_expiry: return "beta_expiry";
        case InvalidationReason::read_self_heal: return "read_self_heal";
        case InvalidationReason::fetch_timeout: return "fetch_timeout";
        case InvalidationReason::crash: return "crash";
    }
    return "unknown";
}

const char* read_outcome_name(ReadOutcome o) {
    switch (o) {
        case ReadOutcome::local_value: return "local_value";
        case ReadOutcome::majority_fetch: return "majority_fetch";
        case ReadOutcome::not_found: return "not_found";
        case ReadOutcome::failed: return "failed";
    }
    return "unknown";
}

int cw_neighbor(int index, int total) { return (index + 1) % total; }
int ccw_neighbor(int index, int total) { return (index + total - 1) % total; }

NodeStep begin_write(const NodeState& state, const ProtocolParams& params,
                     const std::string& object_id, const std::string& value,
                     Ticks now_local, std::uint64_t client_tag) {
    NodeStep step{state, {}, {}, {}, {}};
    if (state.status == NodeStatus::invalid) {
        step.replies.push_back({client_tag, ClientStatus::rejected, {}, {}});
        return step;
    }

    NodeState& next = step.state;
    next.seq += 1;
    const WriteId id{next.index, next.seq};

    WriteCoordination coord;
    coord.write_id = id;
    coord.object_id = object_id;
    coord.value = value;
    coord.t_send = now_local;
    coord.alpha_deadline = now_local + params.timing.alpha;
    coord.client_tag = client_tag;
    next.writes[id] = coord;

    for (int v = 0; v < params.quorum.total(); ++v) {
        if (v == next.index) continue;
        Message m = base_message(MsgKind::write_request, next, v, now_local);
        m.write_id = id;
        m.object_id = object_id;
        m.value = value;
        step.send.push_back(m);
    }
    step.timers.push_back({TimerKind::alpha_expiry, id, coord.alpha_deadline});

    NodeEvent ev;
    ev.kind = NodeEventKind::write_begun;
    ev.id = id;
    ev.object_id = object_id;
    step.events.push_back(ev);
    return step;
}

NodeStep on_write_request(const NodeState& state, const ProtocolParams& params,
                          const Message& msg, Ticks now_local) {
    NodeStep step{state, {}, {}, {}, {}};
    if (state.status == NodeStatus::invalid) return step;

    NodeState& next = step.state;
    auto existing = next.pending.find(msg.write_id);
    if (existing != next.pending.end()) {
        // Duplicate request: same pending entry, confirm again.
        Message m = base_message(MsgKind::write_confirm, next, msg.sender, now_local);
        m.write_id = msg.write_id;
        m.object_id = msg.object_id;
        m.receipt_stamp = existing->second.t_recv;
        step.send.push_back(m);
        return step;
    }

    if (!valid_write_check(msg.sent_local, now_local, params.timing.gamma,
                           params.timing.alpha)) {
        // The latency bracket no longer fits inside alpha: the write cannot
        // be ordered safely here, so it is dropped without a confirmation.
        NodeEvent ev;
        ev.kind = NodeEventKind::request_rejected_latency;
        ev.id = msg.write_id;
        ev.object_id = msg.object_id;
        ev.peer = msg.sender;
        step.events.push_back(ev);
        return step;
    }

    PendingWrite pending;
    pending.write_id = msg.write_id;
    pending.object_id = msg.object_id;
    pending.value = msg.value;
    pending.t_recv = now_local;
    pending.beta_deadline = now_local + params.timing.beta;
    next.pending[msg.write_id] = pending;

    Message confirm = base_message(MsgKind::write_confirm, next, msg.sender, now_local);
    confirm.write_id = msg.write_id;
    confirm.object_id = msg.object_id;
    confirm.receipt_stamp = now_local;
    step.send.push_back(confirm);
    step.timers.push_back({TimerKind::beta_expiry, msg.write_id, pending.beta_deadline});

    NodeEvent ev;
    ev.kind = NodeEventKind::request_accepted;
    ev.id = msg.write_id;
    ev.object_id = msg.object_id;
    ev.peer = msg.sender;
    step.events.push_back(ev);
    return step;
}

NodeStep on_write_confirm(const NodeState& state, const ProtocolParams& params,
                          const Message& msg, Ticks now_local) {
    NodeStep step{state, {}, {}, {}, {}};
    auto it = step.state.writes.find(msg.write_id);
    if (it == step.state.writes.end()) return step;
    WriteCoordination& coord = it->second;
    if (coord.decided || now_local > coord.alpha_deadline) return step;  // late: ignored

    coord.confirmations[msg.sender] = msg.receipt_stamp;
    NodeEvent ev;
    ev.kind = NodeEventKind::confirm_recorded;
    ev.id = msg.write_id;
    ev.peer = msg.sender;
    step.events.push_back(ev);
    if (static_cast<int>(coord.confirmations.size()) == params.quorum.total() - 1)
        decide_write(step, params, coord, now_local);
    return step;
}

NodeStep on_alpha_expiry(const NodeState& state, const ProtocolParams& params, WriteId id,
                         Ticks now_local) {
    NodeStep step{state, {}, {}, {}, {}};
    auto it = step.state.writes.find(id);
    if (it == step.state.writes.end() || it->second.decided) return step;
    decide_write(step, params, it->second, now_local);
    return step;
}

NodeStep on_commit_ts(const NodeState& state, const ProtocolParams& params, const Message& msg,
                      Ticks now_local) {
    NodeStep step{state, {}, {}, {}, {}};
    if (state.status == NodeStatus::invalid) return step;
    NodeState& next = step.state;
    auto it = next.pending.find(msg.write_id);
    if (it == next.pending.end()) return step;  // rejected earlier or stale retransmission
    if (now_local > it->second.beta_deadline) return step;

    apply_finalized(next, {it->second.object_id, it->second.value, msg.commit, true});
    NodeEvent ev;
    ev.kind = NodeEventKind::finalized;
    ev.id = msg.write_id;
    ev.object_id = it->second.object_id;
    ev.commit = msg.commit;
    ev.digest = fnv64(it->second.value);
    step.events.push_back(ev);
    next.pending.erase(it);
    return step;
}

NodeStep on_beta_expiry(const NodeState& state, const ProtocolParams& params, WriteId id,
                        Ticks now_local) {
    NodeStep step{state, {}, {}, {}, {}};
    auto it = step.state.pending.find(id);
    if (it == step.state.pending.end()) return step;  // finalized in time
    if (params.skip_beta_expiry_invalidation) return step;
    // Pending entry is retained for anti-entropy reconciliation.
    invalidate(step, params, InvalidationReason::beta_expiry, id, now_local, false);
    return step;
}

NodeStep on_write_close(const NodeState& state, const ProtocolParams& params, WriteId id,
                        Ticks now_local) {
    NodeStep step{state, {}, {}, {}, {}};
    auto it = step.state.writes.find(id);
    if (it == step.state.writes.end()) return step;
    NodeEvent ev;
    ev.kind = NodeEventKind::write_closed;
    ev.id = id;
    ev.object_id = it->second.object_id;
    step.events.push_back(ev);
    step.state.writes.erase(it);
    return step;
}

NodeStep begin_read(const NodeState& state, const ProtocolParams& params,
                    const std::string& object_id, std::optional<CommitStamp> if_modified_since,
                    Ticks now_local, std::uint64_t client_tag) {
    NodeStep step{state, {}, {}, {}, {}};
    if (state.status == NodeStatus::invalid) {
        step.replies.push_back({client_tag, ClientStatus::rejected, {}, {}});
        return step;
    }

    NodeState& next = step.state;
    next.seq += 1;
    const ReadId id{next.index, next.seq};

    ReadCoordination coord;
    coord.read_id = id;
    coord.object_id = object_id;
    const VersionedObject* obj = find_finalized(next, object_id);
    if (obj) coord.own_digest = object_digest(*obj);
    coord.if_modified_since = if_modified_since;
    coord.omega_deadline = now_local + params.timing.omega;
    coord.client_tag = client_tag;
    next.reads[id] = coord;

    for (int v = 0; v < params.quorum.total(); ++v) {
        if (v == next.index) continue;
        Message m = base_message(MsgKind::hash_request, next, v, now_local);
        m.read_id = id;
        m.object_id = object_id;
        step.send.push_back(m);
    }
    step.timers.push_back({TimerKind::omega_expiry, id, coord.omega_deadline});

    NodeEvent ev;
    ev.kind = NodeEventKind::read_begun;
    ev.id = id;
    ev.object_id = object_id;
    ev.digest = coord.own_digest;
    step.events.push_back(ev);
    return step;
}

NodeStep on_hash_request(const NodeState& state, const ProtocolParams& params,
                         const Message& msg, Ticks now_local) {
    NodeStep step{state, {}, {}, {}, {}};
    if (state.status == NodeStatus::invalid) return step;
    Message reply = base_message(MsgKind::hash_reply, step.state, msg.sender, now_local);
    reply.read_id = msg.read_id;
    reply.object_id = msg.object_id;
    const VersionedObject* obj = find_finalized(state, msg.object_id);
    if (obj) reply.digest = object_digest(*obj);
    step.send.push_back(reply);
    return step;
}

NodeStep on_hash_reply(const NodeState& state, const ProtocolParams& params, const Message& msg,
                       Ticks now_local) {
    NodeStep step{state, {}, {}, {}, {}};
    auto it = step.state.reads.find(msg.read_id);
    if (it == step.state.reads.end()) return step;
    ReadCoordination& coord = it->second;
    if (coord.awaiting_fetch) return step;
    coord.replies[msg.sender] = msg.digest;

    if (!coord.answered) {
        int matches = 0;
        for (const auto& [node, digest] : coord.replies)
            if (digest == coord.own_digest) ++matches;
        if (matches >= params.quorum.n) serve_local_read(step, coord);
    }
    if (static_cast<int>(coord.replies.size()) == params.quorum.total() - 1)
        close_read(step, params, msg.read_id, now_local);
    return step;
}

NodeStep on_omega_expiry(const NodeState& state, const ProtocolParams& params, ReadId id,
                         Ticks now_local) {
    NodeStep step{state, {}, {}, {}, {}};
    close_read(step, params, id, now_local);
    return step;
}

NodeStep on_object_fetch(const NodeState& state, const ProtocolParams& params,
                         const Message& msg, Ticks now_local) {
    NodeStep step{state, {}, {}, {}, {}};
    if (state.status == NodeStatus::invalid) return step;
    Message reply = base_message(MsgKind::object_reply, step.state, msg.sender, now_local);
    reply.read_id = msg.read_id;
    reply.object_id = msg.object_id;
    const VersionedObject* obj = find_finalized(state, msg.object_id);
    if (obj) {
        reply.has_object = true;
        reply.value = obj->value;
        reply.commit = obj->commit;
    }
    step.send.push_back(reply);
    return step;
}

NodeStep on_object_reply(const NodeState& state, const ProtocolParams& params,
                         const Message& msg, Ticks now_local) {
    NodeStep step{state, {}, {}, {}, {}};
    NodeState& next = step.state;
    auto it = next.reads.find(msg.read_id);
    if (it == next.reads.end() || !it->second.awaiting_fetch) return step;
    ReadCoordination coord = it->second;

    // Only the hash the majority actually agreed on may be served; a source
    // that moved on in the meantime is skipped in favor of the other holders.
    if (!msg.has_object ||
        object_digest({coord.object_id, msg.value, msg.commit, true}) != *coord.expected_digest)
        return step;

    NodeEvent ev;
    ev.kind = NodeEventKind::read_resolved;
    ev.id = coord.read_id;
    ev.object_id = coord.object_id;
    ev.success = true;
    ev.outcome = ReadOutcome::majority_fetch;
    ev.commit = msg.commit;
    ev.digest = coord.expected_digest;
    step.events.push_back(ev);
    step.replies.push_back({coord.client_tag, ClientStatus::value, msg.value, msg.commit});
    next.reads.erase(msg.read_id);
    // The majority disagreed with the local copy: heal before serving again.
    invalidate(step, params, InvalidationReason::read_self_heal, msg.read_id, now_local, false);
    return step;
}

NodeStep on_fetch_expiry(const NodeState& state, const ProtocolParams& params, ReadId id,
                         Ticks now_local) {
    NodeStep step{state, {}, {}, {}, {}};
    NodeState& next = step.state;
    auto it = next.reads.find(id);
    if (it == next.reads.end() || !it->second.awaiting_fetch) return step;
    const std::uint64_t tag = it->second.client_tag;
    NodeEvent ev;
    ev.kind = NodeEventKind::read_resolved;
    ev.id = id;
    ev.object_id = it->second.object_id;
    ev.success = false;
    ev.outcome = ReadOutcome::failed;
    step.events.push_back(ev);
    step.replies.push_back({tag, ClientStatus::failed, {}, {}});
    next.reads.erase(it);
    invalidate(step, params, InvalidationReason::fetch_timeout, id, now_local, false);
    return step;
}

NodeStep request_revalidation(const NodeState& state, const ProtocolParams& params,
                              Ticks now_local) {
    NodeStep step{state, {}, {}, {}, {}};
    if (state.status == NodeStatus::valid) return step;
    Message req = base_message(MsgKind::anti_entropy_request, step.state,
                               ccw_neighbor(state.index, params.quorum.total()), now_local);
    req.heal_target = state.index;
    step.send.push_back(req);
    step.timers.push_back({TimerKind::revalidate_retry, {}, now_local + params.revalidation_retry});
    NodeEvent ev;
    ev.kind = NodeEventKind::revalidation_requested;
    ev.peer = req.receiver;
    step.events.push_back(ev);
    return step;
}

NodeStep on_revalidate_retry(const NodeState& state, const ProtocolParams& params,
                             Ticks now_local) {
    return request_revalidation(state, params, now_local);
}

NodeStep on_crash(const NodeState& state, const ProtocolParams& params, Ticks now_local) {
    NodeStep step{state, {}, {}, {}, {}};
    invalidate(step, params, InvalidationReason::crash, {}, now_local, true);
    return step;
}

NodeStep on_sync_completed(const NodeState& state, const ProtocolParams& params,
                           Store merged_store, Ticks now_local) {
    NodeStep step{state, {}, {}, {}, {}};
    NodeState& next = step.state;
    next.store = std::move(merged_store);
    // Expired pendings were reconciled by the transfer; live ones may still
    // receive their committed timestamp.
    for (auto it = next.pending.begin(); it != next.pending.end();) {
        if (it->second.beta_deadline <= now_local)
            it = next.pending.erase(it);
        else
            ++it;
    }
    if (next.status == NodeStatus::invalid) {
        next.status = NodeStatus::valid;
        NodeEvent ev;
        ev.kind = NodeEventKind::revalidated;
        step.events.push_back(ev);
    }
    return step;
}

ReadClassification classify_read(std::optional<std::uint64_t> own_digest,
                                 const std::map<int, std::optional<std::uint64_t>>& replies,
                                 int n) {
    ReadClassification cls;
    int own_matches = 0;
    for (const auto& [node, digest] : replies)
        if (digest == own_digest) ++own_matches;

    if (own_matches >= n) {
        cls.kind = ReadClassification::Kind::serve_local;
        for (const auto& [node, digest] : replies)
            if (digest != own_digest) cls.mismatched.push_back(node);
        return cls;
    }

    // Group the foreign replies; a group of n+1 identical hashes different
    // from the local one is a read quorum on its own.
    std::map<std::optional<std::uint64_t>, std::vector<int>> groups;
    for (const auto& [node, digest] : replies) groups[digest].push_back(node);
    for (const auto& [digest, holders] : groups) {
        if (digest == own_digest) continue;
        if (static_cast<int>(holders.size()) >= n + 1) {
            cls.kind = ReadClassification::Kind::fetch_majority;
            cls.majority_digest = digest;
            cls.majority_holders = holders;
            for (const auto& [node, d] : replies)
                if (d != digest) cls.mismatched.push_back(node);
            return cls;
        }
    }

    cls.kind = ReadClassification::Kind::fail;
    return cls;
}

}  // namespace tsc
