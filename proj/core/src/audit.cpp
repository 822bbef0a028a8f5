#include "tsc/audit.hpp"

#include <algorithm>
#include <sstream>

namespace tsc {

namespace {

std::string op_id_str(OpId id) {
    return std::to_string(id.node) + ":" + std::to_string(id.seq);
}

void violation(CheckResult& check, const std::string& detail) {
    check.ok = false;
    if (check.violations.size() < 32) check.violations.push_back(detail);
}

// Finalized-or-invalidated before the triggering node's second beta window
// closes, for every node that accepted the write request. Failed writes have
// no close; there every acceptor must invalidate within its own beta window.
CheckResult check_corollary(const OracleHistory& h) {
    CheckResult check{"corollary", true, true, {}};
    for (const auto& [id, w] : h.writes) {
        if (!w.decided) continue;  // truncated by the horizon
        if (w.success && w.close_g < 0) continue;  // close not observed (horizon/crash)
        for (const auto& [node, accepted_g] : w.accepted) {
            if (node == w.trigger) continue;
            const GlobalTime bound =
                w.success ? w.close_g : accepted_g + h.timing.beta;
            auto fin = w.finalized.find(node);
            if (fin != w.finalized.end() && fin->second <= bound) continue;
            bool invalidated = false;
            for (const auto& inv : h.invalidations) {
                if (inv.node == node && inv.g >= accepted_g && inv.g <= bound) {
                    invalidated = true;
                    break;
                }
            }
            if (!invalidated)
                violation(check, "write " + op_id_str(id) + ": node " +
                                     std::to_string(node) +
                                     " neither finalized nor invalidated by " +
                                     std::to_string(bound));
        }
    }
    return check;
}

// Every node that finalized a write must agree on its key, commit stamp and
// (for protocol finalizations) the value bytes.
CheckResult check_agreement(const OracleHistory& h) {
    CheckResult check{"sequential_agreement", true, true, {}};
    struct Baseline {
        const FinalizeAuditRecord* protocol = nullptr;
        const FinalizeAuditRecord* any = nullptr;
    };
    std::map<WriteId, Baseline> by_write;
    for (const auto& record : h.finalizes) {
        Baseline& base = by_write[record.id];
        if (!base.any) base.any = &record;
        if (record.commit != base.any->commit || record.object_id != base.any->object_id)
            violation(check, "write " + op_id_str(record.id) +
                                 ": commit stamp disagreement between nodes");
        if (!record.via_sync) {
            if (!base.protocol)
                base.protocol = &record;
            else if (record.value_digest != base.protocol->value_digest)
                violation(check, "write " + op_id_str(record.id) +
                                     ": finalized value bytes disagree");
        }
        if (record.commit.write_id != record.id)
            violation(check, "write " + op_id_str(record.id) + ": commit carries foreign id");
    }
    return check;
}

CheckResult check_read_quorum(const OracleHistory& h) {
    CheckResult check{"read_quorum", true, true, {}};
    const int n = h.quorum.n;
    for (const auto& [id, r] : h.reads) {
        if (!r.resolved) continue;
        if (r.outcome == ReadOutcome::failed) continue;
        int matches = 0;
        for (const auto& [node, reply] : r.replies)
            if (reply.first <= r.resolved_g && reply.second == r.served_digest) ++matches;
        const bool own_match = r.own_digest == r.served_digest;
        const int needed = own_match ? n : n + 1;
        if (matches < needed)
            violation(check, "read " + op_id_str(id) + ": served digest backed by " +
                                 std::to_string(matches + (own_match ? 1 : 0)) + " < " +
                                 std::to_string(n + 1) + " nodes");
    }
    return check;
}

CheckResult check_write_quorum(const OracleHistory& h) {
    CheckResult check{"write_quorum", true, true, {}};
    for (const auto& [id, w] : h.writes) {
        if (!w.decided || !w.success) continue;
        int confirmers = 0;
        for (const auto& [node, g] : w.confirm_recorded) {
            auto accepted = w.accepted.find(node);
            if (accepted == w.accepted.end() || accepted->second > g)
                violation(check, "write " + op_id_str(id) + ": confirm from node " +
                                     std::to_string(node) + " without acceptance");
            if (g <= w.decided_g) ++confirmers;
        }
        if (confirmers < h.quorum.n)
            violation(check, "write " + op_id_str(id) + ": only " +
                                 std::to_string(confirmers) + " confirmations at decision");
    }
    return check;
}

// Per-client observation sequences, in resolution order.
struct ClientKeyOps {
    std::vector<const ClientOpAuditRecord*> ops;
};

std::map<std::pair<int, std::string>, ClientKeyOps> per_client_key(const OracleHistory& h) {
    std::map<std::pair<int, std::string>, ClientKeyOps> result;
    for (const auto& op : h.client_ops)
        result[{op.client, op.object_id}].ops.push_back(&op);
    for (auto& [key, ops] : result)
        std::stable_sort(ops.ops.begin(), ops.ops.end(),
                         [](const ClientOpAuditRecord* a, const ClientOpAuditRecord* b) {
                             return a->resolved_g < b->resolved_g;
                         });
    return result;
}

CheckResult check_monotonic_read(const OracleHistory& h) {
    CheckResult check{"monotonic_read", true, true, {}};
    for (const auto& [key, sequence] : per_client_key(h)) {
        std::optional<CommitStamp> newest;
        for (const auto* op : sequence.ops) {
            if (op->kind != ClientOpKind::read || op->outcome != ClientOpOutcome::value ||
                !op->version)
                continue;
            if (newest && *op->version < *newest)
                violation(check, "client " + std::to_string(key.first) + " key " +
                                     key.second + ": read regressed by commit order");
            if (!newest || *newest < *op->version) newest = *op->version;
        }
    }
    return check;
}

CheckResult check_monotonic_write(const OracleHistory& h) {
    CheckResult check{"monotonic_write", true, true, {}};
    for (const auto& [key, sequence] : per_client_key(h)) {
        std::optional<CommitStamp> last;
        for (const auto* op : sequence.ops) {
            if (op->kind != ClientOpKind::write || op->outcome != ClientOpOutcome::value ||
                !op->version)
                continue;
            if (last && !(*last < *op->version))
                violation(check, "client " + std::to_string(key.first) + " key " +
                                     key.second + ": writes out of commit order");
            last = *op->version;
        }
    }
    return check;
}

CheckResult check_session(const OracleHistory& h, bool enabled) {
    CheckResult check{"session_read_your_writes", enabled, true, {}};
    if (!enabled) return check;
    for (const auto& [key, sequence] : per_client_key(h)) {
        std::optional<CommitStamp> own_write;
        for (const auto* op : sequence.ops) {
            if (op->kind == ClientOpKind::write && op->outcome == ClientOpOutcome::value &&
                op->version) {
                if (!own_write || *own_write < *op->version) own_write = *op->version;
                continue;
            }
            if (op->kind != ClientOpKind::read || !own_write) continue;
            if (op->outcome == ClientOpOutcome::value && op->version) {
                if (*op->version < *own_write)
                    violation(check, "client " + std::to_string(key.first) + " key " +
                                         key.second + ": read older than own write");
            } else if (op->outcome == ClientOpOutcome::not_found) {
                violation(check, "client " + std::to_string(key.first) + " key " +
                                     key.second + ": own write disappeared");
            }
        }
    }
    return check;
}

CheckResult check_delta_update(const OracleHistory& h, bool enabled) {
    CheckResult check{"delta_update_bound", enabled, true, {}};
    if (!enabled) return check;
    // Committed writes per key, ordered by their oracle write instant.
    std::map<std::string, std::vector<const WriteAuditRecord*>> writes_by_key;
    for (const auto& [id, w] : h.writes)
        if (w.decided && w.success) writes_by_key[w.object_id].push_back(&w);
    for (auto& [key, writes] : writes_by_key)
        std::sort(writes.begin(), writes.end(),
                  [](const WriteAuditRecord* a, const WriteAuditRecord* b) {
                      return a->requested_g < b->requested_g;
                  });

    for (const auto& op : h.client_ops) {
        if (op.kind != ClientOpKind::read) continue;
        if (op.outcome != ClientOpOutcome::value && op.outcome != ClientOpOutcome::not_found)
            continue;
        auto client = h.clients.find(op.client);
        if (client == h.clients.end()) continue;
        const Ticks window = h.timing.delta + client->second.delta_client +
                             client->second.delta_network;
        const GlobalTime threshold = op.started_g - window;
        auto writes = writes_by_key.find(op.object_id);
        if (writes == writes_by_key.end()) continue;
        for (const WriteAuditRecord* w : writes->second) {
            if (w->requested_g > threshold) break;
            const bool visible = op.outcome == ClientOpOutcome::value && op.version &&
                                 !(*op.version < w->commit);
            if (!visible)
                violation(check, "client " + std::to_string(op.client) + " key " +
                                     op.object_id + ": write " + op_id_str(w->id) +
                                     " invisible past its update bound");
        }
    }
    return check;
}

CheckResult check_freshness(const OracleHistory& h, bool enabled) {
    CheckResult check{"cache_freshness_bound", enabled, true, {}};
    if (!enabled) return check;
    for (const auto& op : h.client_ops) {
        if (op.kind != ClientOpKind::read || !op.from_cache || !op.version) continue;
        auto client = h.clients.find(op.client);
        if (client == h.clients.end()) continue;
        const Ticks window = h.timing.delta + client->second.delta_client +
                             client->second.delta_network;
        // Newest version the circle had committed when the entry was leased.
        const WriteAuditRecord* newest = nullptr;
        for (const auto& [id, w] : h.writes) {
            if (!w.success || w.object_id != op.object_id) continue;
            if (w.decided_g > op.validated_g) continue;
            if (!newest || newest->commit < w.commit) newest = &w;
        }
        if (!newest || !(*op.version < newest->commit)) continue;  // hit was newest
        if (op.started_g - newest->decided_g > window)
            violation(check, "client " + std::to_string(op.client) + " key " +
                                 op.object_id + ": cache hit staler than the bound");
    }
    return check;
}

CheckResult check_counts(const OracleHistory& h, const RunReport& rep) {
    CheckResult check{"message_count_exactness", false, true, {}};
    if (!h.failure_free || rep.latency_rejections > 0 || !h.invalidations.empty())
        return check;
    const int n = h.quorum.n;
    for (const auto& [id, w] : h.writes)
        if (!w.decided || w.close_g < 0 || static_cast<int>(w.accepted.size()) != 2 * n)
            return check;
    for (const auto& [id, r] : h.reads)
        if (!r.resolved || static_cast<int>(r.replies.size()) != 2 * n) return check;

    check.checked = true;
    const std::uint64_t writes = h.writes.size();
    const std::uint64_t reads = h.reads.size();
    if (rep.write_path_delivered != 6 * static_cast<std::uint64_t>(n) * writes)
        violation(check, "write path delivered " + std::to_string(rep.write_path_delivered) +
                             " != 6n per write");
    if (rep.read_path_delivered != 4 * static_cast<std::uint64_t>(n) * reads)
        violation(check, "read path delivered " + std::to_string(rep.read_path_delivered) +
                             " != 4n per read");
    if (rep.write_path_sent != rep.write_path_delivered ||
        rep.read_path_sent != rep.read_path_delivered)
        violation(check, "failure-free run dropped protocol messages");
    return check;
}

// The reported latency metrics must be reproducible from the records, and a
// read resolves (or rejects) within omega unless it went through a fetch.
CheckResult check_latency_metrics(const OracleHistory& h, const RunReport& rep) {
    CheckResult check{"latency_metrics", true, true, {}};
    const int n = h.quorum.n;

    std::vector<Ticks> write_latency;
    for (const auto& [id, w] : h.writes) {
        if (!w.success || static_cast<int>(w.confirm_recorded.size()) < n + 1) continue;
        std::vector<Ticks> rtts;
        for (const auto& [node, g] : w.confirm_recorded) rtts.push_back(g - w.requested_g);
        std::sort(rtts.begin(), rtts.end());
        write_latency.push_back(rtts[n]);
    }
    if (write_latency != rep.observed_write_latency)
        violation(check, "write latency metric does not match the trace");

    std::vector<Ticks> read_latency;
    for (const auto& [id, r] : h.reads) {
        if (static_cast<int>(r.replies.size()) < n + 1) continue;
        std::vector<Ticks> rtts;
        for (const auto& [node, reply] : r.replies) rtts.push_back(reply.first - r.started_g);
        std::sort(rtts.begin(), rtts.end());
        read_latency.push_back(rtts[n]);
    }
    if (read_latency != rep.observed_read_latency)
        violation(check, "read latency metric does not match the trace");

    for (const auto& [id, r] : h.reads) {
        if (!r.resolved) continue;
        // The majority-fetch detour is bounded by a second omega window.
        const Ticks bound = r.entered_fetch ? 2 * h.timing.omega : h.timing.omega;
        if (r.resolved_g - r.started_g > bound)
            violation(check, "read " + op_id_str(id) + " resolved past omega");
    }
    return check;
}

}  // namespace

AuditReport audit(const OracleHistory& history, const RunReport& report) {
    AuditReport result;
    result.checks.push_back(check_corollary(history));
    result.checks.push_back(check_agreement(history));
    result.checks.push_back(check_read_quorum(history));
    result.checks.push_back(check_write_quorum(history));
    result.checks.push_back(check_monotonic_read(history));
    result.checks.push_back(check_monotonic_write(history));
    result.checks.push_back(check_session(history, history.audit_client_bounds));
    result.checks.push_back(check_delta_update(history, history.audit_client_bounds));
    result.checks.push_back(check_freshness(history, history.audit_client_bounds));
    result.checks.push_back(check_counts(history, report));
    result.checks.push_back(check_latency_metrics(history, report));
    return result;
}

}  // namespace tsc
