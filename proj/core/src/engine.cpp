#include "tsc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <set>
#include <sstream>

#include "tsc/client.hpp"
#include "tsc/digest.hpp"
#include "tsc/merkle.hpp"
#include "tsc/node.hpp"

namespace tsc {

namespace {

const LatencyDistribution& link_distribution(const LatencyModel& model, int sender,
                                             int receiver) {
    auto it = model.per_link.find({sender, receiver});
    return it == model.per_link.end() ? model.default_link : it->second;
}

std::string op_id_str(OpId id) {
    return std::to_string(id.node) + ":" + std::to_string(id.seq);
}

}  // namespace

Ticks sample_latency(const LatencyModel& model, int sender, int receiver,
                     std::mt19937_64& rng) {
    const LatencyDistribution& dist = link_distribution(model, sender, receiver);
    switch (dist.kind) {
        case LatencyKind::constant:
            return dist.constant;
        case LatencyKind::uniform: {
            std::uniform_int_distribution<Ticks> draw(dist.lo, dist.hi);
            return draw(rng);
        }
        case LatencyKind::triangular: {
            if (dist.hi == dist.lo) return dist.lo;
            std::uniform_real_distribution<double> draw(0.0, 1.0);
            const double u = draw(rng);
            const double lo = static_cast<double>(dist.lo);
            const double hi = static_cast<double>(dist.hi);
            const double mode = static_cast<double>(dist.mode);
            const double cut = (mode - lo) / (hi - lo);
            double x;
            if (u < cut)
                x = lo + std::sqrt(u * (hi - lo) * (mode - lo));
            else
                x = hi - std::sqrt((1.0 - u) * (hi - lo) * (hi - mode));
            return std::llround(x);
        }
    }
    return 0;
}

bool node_blocked(const FaultPlan& faults, int node, GlobalTime g) {
    if (node < 0) return false;  // clients are never inside the fault plan
    for (const auto& crash : faults.crashes)
        if (crash.node == node && crash.from <= g && g < crash.to) return true;
    for (const auto& partition : faults.partitions)
        if (partition.from <= g && g < partition.to)
            for (int member : partition.nodes)
                if (member == node) return true;
    return false;
}

DeliveryPlan plan_delivery(MsgKind kind, int sender, int receiver, GlobalTime g,
                           const Scenario& scenario, std::mt19937_64& rng) {
    if (node_blocked(scenario.faults, sender, g) || node_blocked(scenario.faults, receiver, g))
        return {false, 0};
    auto loss = scenario.faults.loss.find(kind);
    if (loss != scenario.faults.loss.end()) {
        std::uniform_real_distribution<double> draw(0.0, 1.0);
        if (draw(rng) < loss->second) return {false, 0};
    }
    const Ticks latency = sample_latency(scenario.latency, sender, receiver, rng);
    Ticks processing = 0;
    if (receiver >= 0 && receiver < static_cast<int>(scenario.processing.size()))
        processing = scenario.processing[receiver];
    return {true, g + latency + processing};
}

namespace {

enum class EvKind {
    client_op_due,
    client_request_arrive,
    client_reply_arrive,
    client_timeout,
    node_deliver,
    node_wake,
    idle_check,
    session_complete,
    crash_start,
    crash_end,
    corrupt_at,
};

struct Ev {
    GlobalTime at = 0;
    std::uint64_t seq = 0;
    EvKind kind{};
    std::size_t index = 0;  // workload / fault index, or client-op tag
    int a = -1;             // node / source
    int b = -1;             // peer / target
    std::uint64_t gen = 0;
    Message msg;
    ClientReply reply;
};

struct EvOrder {
    bool operator()(const Ev& x, const Ev& y) const {
        if (x.at != y.at) return x.at > y.at;
        return x.seq > y.seq;
    }
};

struct PendingOp {
    std::size_t op_index = 0;
    ClientOpAuditRecord record;
};

struct ClientRuntime {
    ClientConfig cfg;
    ClientCache cache;
    std::optional<PendingOp> pending;
    std::deque<std::size_t> backlog;
};

class Engine {
public:
    Engine(const Scenario& scenario, std::uint64_t seed, const EngineOptions& options)
        : sc_(scenario), opt_(options), seed_(seed), rng_(seed) {
        quorum_ = quorum_config(sc_.n);
        params_.quorum = quorum_;
        params_.timing = sc_.timing;
        params_.revalidation_retry = sc_.revalidation_retry_or_default();
        params_.skip_beta_expiry_invalidation = opt_.skip_beta_expiry_invalidation;
        total_ = quorum_.total();
    }

    RunResult execute();

private:
    // -- setup and main loop --------------------------------------------------
    void initialize();
    void dispatch(const Ev& ev);

    // -- event helpers --------------------------------------------------------
    void push(Ev ev) {
        ev.seq = ++event_seq_;
        queue_.push(std::move(ev));
    }
    Ticks node_local(int node) const { return local_time(clocks_[node], now_); }

    // -- node plumbing ---------------------------------------------------------
    void apply_step(int node, NodeStep step);
    void send_internal(Message msg);
    void add_timer(int node, const NodeTimer& timer);
    void reschedule_wake(int node);
    void run_due_timers(int node);
    void dispatch_timer(int node, const NodeTimer& timer);
    void deliver_internal(const Ev& ev);
    void record_event(int node, const NodeEvent& ev);

    // -- client plumbing --------------------------------------------------------
    void client_op_due(std::size_t index);
    void start_client_op(int client, std::size_t index);
    void client_request_arrive(const Ev& ev);
    void send_client_reply(int node, const ClientReply& reply);
    void client_reply_arrive(const Ev& ev);
    void client_timeout(const Ev& ev);
    void finish_client_op(int client, ClientOpAuditRecord record);

    // -- maintenance -------------------------------------------------------------
    void start_session(int source, int target);
    void session_complete(const Ev& ev);
    void idle_check(const Ev& ev);
    void schedule_idle_check(GlobalTime at);
    void mark_activity() {
        last_activity_ = now_;
        schedule_idle_check(now_ + sc_.idle_threshold_or_default());
    }

    // -- tracing -------------------------------------------------------------------
    void emit(const std::string& line);
    void trace_message(const char* what, const Message& msg, const char* extra = nullptr);

    void finish_report();

    const Scenario& sc_;
    EngineOptions opt_;
    std::uint64_t seed_;
    std::mt19937_64 rng_;
    QuorumConfig quorum_{};
    ProtocolParams params_{};
    int total_ = 0;

    GlobalTime now_ = 0;
    std::uint64_t event_seq_ = 0;
    std::uint64_t mid_seq_ = 0;
    std::uint64_t timer_seq_ = 0;
    std::priority_queue<Ev, std::vector<Ev>, EvOrder> queue_;

    std::vector<NodeState> nodes_;
    std::vector<PhysicalClock> clocks_;
    std::vector<std::map<std::pair<Ticks, std::uint64_t>, NodeTimer>> timers_;
    std::vector<std::uint64_t> wake_gen_;
    std::vector<bool> crashed_;

    std::map<int, ClientRuntime> clients_;

    std::set<std::pair<int, int>> active_sessions_;
    int sweep_cursor_ = 0;
    std::optional<std::pair<int, int>> sweep_session_;
    GlobalTime last_activity_ = 0;
    std::uint64_t idle_gen_ = 0;

    TraceLog trace_;
    OracleHistory hist_;
    RunReport rep_;
};

void Engine::emit(const std::string& line) { trace_.add(line); }

void Engine::trace_message(const char* what, const Message& msg, const char* extra) {
    std::ostringstream line;
    line << "t=" << now_ << " ev=" << what << " mid=" << msg.mid
         << " kind=" << msg_kind_name(msg.kind) << " from=" << msg.sender
         << " to=" << msg.receiver << " ts=" << msg.sent_local;
    if (msg.kind == MsgKind::write_request || msg.kind == MsgKind::write_confirm ||
        msg.kind == MsgKind::commit_ts)
        line << " wid=" << op_id_str(msg.write_id);
    if (msg.kind == MsgKind::hash_request || msg.kind == MsgKind::hash_reply ||
        msg.kind == MsgKind::object_fetch || msg.kind == MsgKind::object_reply)
        line << " rid=" << op_id_str(msg.read_id);
    if (!msg.object_id.empty()) line << " key=" << msg.object_id;
    if (msg.kind == MsgKind::write_confirm) line << " rts=" << msg.receipt_stamp;
    if (msg.kind == MsgKind::commit_ts) line << " cv=" << msg.commit.value;
    if (msg.kind == MsgKind::hash_reply)
        line << " h=" << (msg.digest ? std::to_string(*msg.digest) : "absent");
    if (msg.kind == MsgKind::anti_entropy_request) line << " heal=" << msg.heal_target;
    if (extra) line << " " << extra;
    emit(line.str());
}

void Engine::initialize() {
    nodes_.resize(total_);
    clocks_.resize(total_);
    timers_.resize(total_);
    wake_gen_.assign(total_, 0);
    crashed_.assign(total_, false);
    for (int i = 0; i < total_; ++i) {
        nodes_[i].index = i;
        if (i < static_cast<int>(sc_.clocks.size()))
            clocks_[i] = PhysicalClock{sc_.clocks[i].offset, sc_.clocks[i].drift_ppm, 0};
    }
    for (const auto& cfg : sc_.clients) clients_[cfg.id] = ClientRuntime{cfg, {}, {}, {}};

    for (std::size_t i = 0; i < sc_.workload.size(); ++i)
        push({sc_.workload[i].at, 0, EvKind::client_op_due, i});
    for (std::size_t i = 0; i < sc_.faults.crashes.size(); ++i) {
        push({sc_.faults.crashes[i].from, 0, EvKind::crash_start, i,
              sc_.faults.crashes[i].node});
        push({sc_.faults.crashes[i].to, 0, EvKind::crash_end, i, sc_.faults.crashes[i].node});
    }
    for (std::size_t i = 0; i < sc_.faults.corruptions.size(); ++i)
        push({sc_.faults.corruptions[i].at, 0, EvKind::corrupt_at, i,
              sc_.faults.corruptions[i].node});

    if (sc_.sync_interval > 0)
        for (int i = 0; i < total_; ++i)
            if (i != sc_.sync_reference)
                add_timer(i, {TimerKind::sync_round, {}, local_time(clocks_[i], 0) +
                                                             sc_.sync_interval});
    if (sc_.convergence_sweep) schedule_idle_check(sc_.idle_threshold_or_default());

    hist_.quorum = quorum_;
    hist_.timing = sc_.timing;
    hist_.failure_free = sc_.failure_free();
    hist_.audit_client_bounds = sc_.audit_client_bounds.value_or(hist_.failure_free);
    for (const auto& cfg : sc_.clients) hist_.clients[cfg.id] = cfg;

    rep_.scenario_name = sc_.name;
    rep_.seed = seed_;
}

RunResult Engine::execute() {
    initialize();
    while (!queue_.empty() && queue_.top().at <= sc_.horizon) {
        Ev ev = queue_.top();
        queue_.pop();
        now_ = ev.at;
        dispatch(ev);
        rep_.events_processed += 1;
    }
    now_ = sc_.horizon;
    finish_report();
    RunResult result{std::move(rep_), std::move(hist_), std::move(trace_), std::move(nodes_)};
    return result;
}

void Engine::dispatch(const Ev& ev) {
    switch (ev.kind) {
        case EvKind::client_op_due: client_op_due(ev.index); break;
        case EvKind::client_request_arrive: client_request_arrive(ev); break;
        case EvKind::client_reply_arrive: client_reply_arrive(ev); break;
        case EvKind::client_timeout: client_timeout(ev); break;
        case EvKind::node_deliver: deliver_internal(ev); break;
        case EvKind::node_wake:
            if (ev.gen == wake_gen_[ev.a] && !crashed_[ev.a]) run_due_timers(ev.a);
            break;
        case EvKind::idle_check: idle_check(ev); break;
        case EvKind::session_complete: session_complete(ev); break;
        case EvKind::crash_start: {
            const int node = ev.a;
            crashed_[node] = true;
            wake_gen_[node] += 1;  // suspend timers until the crash ends
            emit("t=" + std::to_string(now_) + " ev=crash n=" + std::to_string(node) +
                 " what=start");
            apply_step(node, on_crash(nodes_[node], params_, node_local(node)));
            break;
        }
        case EvKind::crash_end: {
            const int node = ev.a;
            crashed_[node] = false;
            emit("t=" + std::to_string(now_) + " ev=crash n=" + std::to_string(node) +
                 " what=end");
            if (nodes_[node].status == NodeStatus::invalid)
                add_timer(node, {TimerKind::revalidate_retry, {}, node_local(node)});
            reschedule_wake(node);
            break;
        }
        case EvKind::corrupt_at: {
            const Corruption& fault = sc_.faults.corruptions[ev.index];
            auto it = nodes_[fault.node].store.find(fault.object_id);
            if (it != nodes_[fault.node].store.end()) {
                std::string& value = it->second.value;
                if (value.empty())
                    value.push_back(static_cast<char>(fault.xor_mask));
                else
                    value[fault.byte_index % value.size()] ^=
                        static_cast<char>(fault.xor_mask);
                emit("t=" + std::to_string(now_) + " ev=corrupt n=" +
                     std::to_string(fault.node) + " key=" + fault.object_id);
            }
            break;
        }
    }
}

// ---------------------------------------------------------------------------
// node plumbing

void Engine::send_internal(Message msg) {
    msg.mid = ++mid_seq_;
    rep_.messages[msg.kind].sent += 1;
    if (msg.kind == MsgKind::object_fetch) {
        auto record = hist_.reads.find(msg.read_id);
        if (record != hist_.reads.end()) record->second.entered_fetch = true;
    }
    if (is_write_path(msg.kind) || is_read_path(msg.kind) ||
        msg.kind == MsgKind::object_fetch || msg.kind == MsgKind::object_reply)
        mark_activity();
    trace_message("send", msg);
    const DeliveryPlan plan =
        plan_delivery(msg.kind, msg.sender, msg.receiver, now_, sc_, rng_);
    if (!plan.delivered) {
        rep_.messages[msg.kind].dropped += 1;
        trace_message("drop", msg);
        return;
    }
    Ev ev;
    ev.at = plan.at;
    ev.kind = EvKind::node_deliver;
    ev.msg = std::move(msg);
    push(std::move(ev));
}

void Engine::deliver_internal(const Ev& ev) {
    const Message& msg = ev.msg;
    const int node = msg.receiver;
    if (node_blocked(sc_.faults, node, now_)) {
        rep_.messages[msg.kind].dropped += 1;
        trace_message("drop", msg, "why=arrival_blocked");
        return;
    }
    rep_.messages[msg.kind].delivered += 1;
    if (is_write_path(msg.kind) || is_read_path(msg.kind) ||
        msg.kind == MsgKind::object_fetch || msg.kind == MsgKind::object_reply)
        mark_activity();
    trace_message("deliver", msg);

    const Ticks now_local = node_local(node);

    switch (msg.kind) {
        case MsgKind::sync_probe: {
            if (msg.sync_phase == SyncPhase::request) {
                Message reply;
                reply.kind = MsgKind::sync_probe;
                reply.sender = node;
                reply.receiver = msg.sender;
                reply.sent_local = now_local;
                reply.sync_phase = SyncPhase::reply;
                reply.sync_echo = msg.sync_echo;
                reply.sync_reading = now_local;
                send_internal(reply);
            } else {
                const Ticks rtt = now_local - msg.sync_echo;
                if (rtt > 0) {
                    const Ticks estimate = msg.sync_reading + rtt / 2;
                    clocks_[node] = with_local_reading(clocks_[node], estimate, now_);
                    emit("t=" + std::to_string(now_) + " ev=clock n=" +
                         std::to_string(node) + " local=" +
                         std::to_string(local_time(clocks_[node], now_)) +
                         " rtt=" + std::to_string(rtt));
                    reschedule_wake(node);
                }
            }
            return;
        }
        case MsgKind::anti_entropy_request: {
            if (nodes_[node].status == NodeStatus::invalid) return;
            const int target = msg.heal_target;
            if (target < 0 || target >= total_ || target == node) return;
            const auto key = std::minmax(node, target);
            if (active_sessions_.contains({key.first, key.second})) return;
            start_session(node, target);
            return;
        }
        case MsgKind::write_request:
            apply_step(node, on_write_request(nodes_[node], params_, msg, now_local));
            return;
        case MsgKind::write_confirm:
            apply_step(node, on_write_confirm(nodes_[node], params_, msg, now_local));
            return;
        case MsgKind::commit_ts:
            apply_step(node, on_commit_ts(nodes_[node], params_, msg, now_local));
            return;
        case MsgKind::hash_request:
            apply_step(node, on_hash_request(nodes_[node], params_, msg, now_local));
            return;
        case MsgKind::hash_reply: {
            auto record = hist_.reads.find(msg.read_id);
            if (record != hist_.reads.end())
                record->second.replies[msg.sender] = {now_, msg.digest};
            apply_step(node, on_hash_reply(nodes_[node], params_, msg, now_local));
            return;
        }
        case MsgKind::object_fetch:
            apply_step(node, on_object_fetch(nodes_[node], params_, msg, now_local));
            return;
        case MsgKind::object_reply:
            apply_step(node, on_object_reply(nodes_[node], params_, msg, now_local));
            return;
    }
}

void Engine::apply_step(int node, NodeStep step) {
    nodes_[node] = std::move(step.state);
    for (const auto& event : step.events) record_event(node, event);
    for (auto& msg : step.send) send_internal(std::move(msg));
    for (const auto& timer : step.timers) add_timer(node, timer);
    for (const auto& reply : step.replies) send_client_reply(node, reply);
}

void Engine::add_timer(int node, const NodeTimer& timer) {
    timers_[node][{timer.due_local, ++timer_seq_}] = timer;
    reschedule_wake(node);
}

void Engine::reschedule_wake(int node) {
    if (crashed_[node] || timers_[node].empty()) return;
    const Ticks due = timers_[node].begin()->first.first;
    const GlobalTime at = std::max(now_, global_reaching(clocks_[node], due));
    Ev ev;
    ev.at = at;
    ev.kind = EvKind::node_wake;
    ev.a = node;
    ev.gen = ++wake_gen_[node];
    push(std::move(ev));
}

void Engine::run_due_timers(int node) {
    while (!timers_[node].empty()) {
        const Ticks local = node_local(node);
        auto first = timers_[node].begin();
        if (first->first.first > local) break;
        const NodeTimer timer = first->second;
        timers_[node].erase(first);
        dispatch_timer(node, timer);
    }
    reschedule_wake(node);
}

void Engine::dispatch_timer(int node, const NodeTimer& timer) {
    const Ticks now_local = node_local(node);
    switch (timer.kind) {
        case TimerKind::alpha_expiry:
            apply_step(node, on_alpha_expiry(nodes_[node], params_, timer.id, now_local));
            break;
        case TimerKind::beta_expiry:
            apply_step(node, on_beta_expiry(nodes_[node], params_, timer.id, now_local));
            break;
        case TimerKind::omega_expiry:
            apply_step(node, on_omega_expiry(nodes_[node], params_, timer.id, now_local));
            break;
        case TimerKind::fetch_expiry:
            apply_step(node, on_fetch_expiry(nodes_[node], params_, timer.id, now_local));
            break;
        case TimerKind::write_close:
            apply_step(node, on_write_close(nodes_[node], params_, timer.id, now_local));
            break;
        case TimerKind::revalidate_retry:
            apply_step(node, on_revalidate_retry(nodes_[node], params_, now_local));
            break;
        case TimerKind::sync_round: {
            Message probe;
            probe.kind = MsgKind::sync_probe;
            probe.sender = node;
            probe.receiver = sc_.sync_reference;
            probe.sent_local = now_local;
            probe.sync_phase = SyncPhase::request;
            probe.sync_echo = now_local;
            send_internal(probe);
            add_timer(node,
                      {TimerKind::sync_round, {}, timer.due_local + sc_.sync_interval});
            break;
        }
    }
}

void Engine::record_event(int node, const NodeEvent& ev) {
    std::ostringstream line;
    line << "t=" << now_ << " ev=node n=" << node;
    switch (ev.kind) {
        case NodeEventKind::write_begun: {
            auto& record = hist_.writes[ev.id];
            record.id = ev.id;
            record.trigger = node;
            record.object_id = ev.object_id;
            record.requested_g = now_;
            line << " what=write_begun wid=" << op_id_str(ev.id) << " key=" << ev.object_id;
            break;
        }
        case NodeEventKind::request_accepted: {
            auto& record = hist_.writes[ev.id];
            record.accepted[node] = now_;
            line << " what=request_accepted wid=" << op_id_str(ev.id);
            break;
        }
        case NodeEventKind::request_rejected_latency: {
            auto& record = hist_.writes[ev.id];
            record.rejected_latency[node] = now_;
            line << " what=request_rejected wid=" << op_id_str(ev.id);
            break;
        }
        case NodeEventKind::confirm_recorded: {
            auto& record = hist_.writes[ev.id];
            record.confirm_recorded[ev.peer] = now_;
            line << " what=confirm_recorded wid=" << op_id_str(ev.id)
                 << " peer=" << ev.peer;
            break;
        }
        case NodeEventKind::write_decided: {
            auto& record = hist_.writes[ev.id];
            record.decided = true;
            record.success = ev.success;
            record.decided_g = now_;
            record.commit = ev.commit;
            line << " what=write_decided wid=" << op_id_str(ev.id) << " ok=" << ev.success
                 << " cv=" << ev.commit.value;
            break;
        }
        case NodeEventKind::finalized: {
            auto& record = hist_.writes[ev.id];
            record.finalized[node] = now_;
            if (ev.digest) record.value_digest = *ev.digest;
            hist_.finalizes.push_back(
                {node, ev.id, ev.object_id, ev.commit, ev.digest.value_or(0), now_, false});
            line << " what=finalized wid=" << op_id_str(ev.id) << " cv=" << ev.commit.value;
            break;
        }
        case NodeEventKind::invalidated: {
            hist_.invalidations.push_back({node, now_, ev.reason});
            line << " what=invalidated why=" << invalidation_reason_name(ev.reason);
            if (ev.id.node >= 0) line << " id=" << op_id_str(ev.id);
            break;
        }
        case NodeEventKind::read_begun: {
            auto& record = hist_.reads[ev.id];
            record.id = ev.id;
            record.trigger = node;
            record.object_id = ev.object_id;
            record.started_g = now_;
            record.own_digest = ev.digest;
            line << " what=read_begun rid=" << op_id_str(ev.id) << " key=" << ev.object_id;
            break;
        }
        case NodeEventKind::read_resolved: {
            auto& record = hist_.reads[ev.id];
            record.resolved = true;
            record.outcome = ev.outcome;
            record.resolved_g = now_;
            record.served_digest = ev.digest;
            if (ev.success && (ev.outcome == ReadOutcome::local_value ||
                               ev.outcome == ReadOutcome::majority_fetch))
                record.served_version = ev.commit;
            line << " what=read_resolved rid=" << op_id_str(ev.id)
                 << " outcome=" << read_outcome_name(ev.outcome);
            break;
        }
        case NodeEventKind::heal_mandated:
            line << " what=heal_mandated stale=" << ev.peer;
            break;
        case NodeEventKind::revalidation_requested:
            line << " what=revalidation_requested healer=" << ev.peer;
            break;
        case NodeEventKind::revalidated:
            rep_.revalidations += 1;
            line << " what=revalidated";
            break;
        case NodeEventKind::write_closed: {
            auto& record = hist_.writes[ev.id];
            record.close_g = now_;
            line << " what=write_closed wid=" << op_id_str(ev.id);
            break;
        }
    }
    emit(line.str());
}

// ---------------------------------------------------------------------------
// client plumbing

void Engine::client_op_due(std::size_t index) {
    const ClientOp& op = sc_.workload[index];
    ClientRuntime& rt = clients_.at(op.client);
    if (rt.pending) {
        rt.backlog.push_back(index);  // one sequential actor per client
        return;
    }
    start_client_op(op.client, index);
}

void Engine::start_client_op(int client, std::size_t index) {
    const ClientOp& op = sc_.workload[index];
    ClientRuntime& rt = clients_.at(client);

    ClientOpAuditRecord record;
    record.client = client;
    record.kind = op.op;
    record.object_id = op.object_id;
    record.scheduled_g = op.at;
    record.started_g = now_;

    emit("t=" + std::to_string(now_) + " ev=client c=" + std::to_string(client) +
         " what=start op=" + std::to_string(index) +
         (op.op == ClientOpKind::write ? " kind=write" : " kind=read") +
         " key=" + op.object_id);

    std::optional<CommitStamp> ims;
    if (op.op == ClientOpKind::read) {
        const CacheReadResult lookup = cache_read(rt.cache, op.object_id, now_);
        if (lookup.lookup == CacheLookup::hit) {
            record.resolved_g = now_;
            record.outcome = ClientOpOutcome::value;
            record.from_cache = true;
            record.version = lookup.version;
            record.validated_g = rt.cache.entries.at(op.object_id).start_time;
            rep_.client_cache_hits += 1;
            finish_client_op(client, std::move(record));
            return;
        }
        ims = lookup.version;
    }

    rt.pending = PendingOp{index, record};

    // Route to the configured trigger node.
    if (node_blocked(sc_.faults, op.node, now_)) {
        // request cannot leave or reach a dark node; the timeout will fire
    } else {
        const Ticks latency = sample_latency(sc_.latency, -1, op.node, rng_);
        Ticks processing = 0;
        if (op.node < static_cast<int>(sc_.processing.size()))
            processing = sc_.processing[op.node];
        Ev ev;
        ev.at = now_ + latency + processing;
        ev.kind = EvKind::client_request_arrive;
        ev.index = index;
        ev.a = op.node;
        if (ims) {
            ev.msg.commit = *ims;
            ev.msg.has_object = true;  // carries an if-modified-since stamp
        }
        push(std::move(ev));
    }
    Ev timeout;
    timeout.at = now_ + rt.cfg.delta_network;
    timeout.kind = EvKind::client_timeout;
    timeout.index = index;
    timeout.a = client;
    push(std::move(timeout));
}

void Engine::client_request_arrive(const Ev& ev) {
    const ClientOp& op = sc_.workload[ev.index];
    const int node = ev.a;
    if (node_blocked(sc_.faults, node, now_)) return;
    mark_activity();
    emit("t=" + std::to_string(now_) + " ev=client c=" + std::to_string(op.client) +
         " what=arrive op=" + std::to_string(ev.index) + " node=" + std::to_string(node));
    const Ticks now_local = node_local(node);
    if (op.op == ClientOpKind::write) {
        apply_step(node, begin_write(nodes_[node], params_, op.object_id, op.value, now_local,
                                     ev.index));
    } else {
        std::optional<CommitStamp> ims;
        if (ev.msg.has_object) ims = ev.msg.commit;
        apply_step(node,
                   begin_read(nodes_[node], params_, op.object_id, ims, now_local, ev.index));
    }
}

void Engine::send_client_reply(int node, const ClientReply& reply) {
    const std::size_t index = reply.client_tag;
    const ClientOp& op = sc_.workload[index];
    if (node_blocked(sc_.faults, node, now_)) return;  // reply lost with the node
    const Ticks latency = sample_latency(sc_.latency, node, -1, rng_);
    Ev ev;
    ev.at = now_ + latency;
    ev.kind = EvKind::client_reply_arrive;
    ev.index = index;
    ev.a = op.client;
    ev.reply = reply;
    push(std::move(ev));
}

void Engine::client_reply_arrive(const Ev& ev) {
    ClientRuntime& rt = clients_.at(ev.a);
    if (!rt.pending || rt.pending->op_index != ev.index) return;  // late or stale
    const ClientOp& op = sc_.workload[ev.index];

    ClientOpAuditRecord record = rt.pending->record;
    record.resolved_g = now_;

    const ClientReply& reply = ev.reply;
    switch (reply.status) {
        case ClientStatus::accepted:
            record.outcome = ClientOpOutcome::value;
            record.version = reply.version;
            revalidate(rt.cache, op.object_id, now_, rt.cfg.delta_client,
                       {true, op.value, reply.version});
            break;
        case ClientStatus::value:
            record.outcome = ClientOpOutcome::value;
            record.version = reply.version;
            revalidate(rt.cache, op.object_id, now_, rt.cfg.delta_client,
                       {true, reply.value, reply.version});
            break;
        case ClientStatus::not_modified:
            record.outcome = ClientOpOutcome::value;
            record.version = reply.version;
            revalidate(rt.cache, op.object_id, now_, rt.cfg.delta_client, {false, {}, {}});
            break;
        case ClientStatus::not_found:
            record.outcome = ClientOpOutcome::not_found;
            rt.cache.entries.erase(op.object_id);
            break;
        case ClientStatus::rejected:
            record.outcome = ClientOpOutcome::rejected;
            break;
        case ClientStatus::failed:
            record.outcome = ClientOpOutcome::failed;
            break;
    }
    finish_client_op(ev.a, std::move(record));
}

void Engine::client_timeout(const Ev& ev) {
    ClientRuntime& rt = clients_.at(ev.a);
    if (!rt.pending || rt.pending->op_index != ev.index) return;
    const ClientOp& op = sc_.workload[ev.index];

    ClientOpAuditRecord record = rt.pending->record;
    record.resolved_g = now_;
    record.outcome = ClientOpOutcome::timed_out;
    rep_.client_timeouts += 1;
    if (op.op == ClientOpKind::read) invalidate_temporarily(rt.cache);
    finish_client_op(ev.a, std::move(record));
}

void Engine::finish_client_op(int client, ClientOpAuditRecord record) {
    ClientRuntime& rt = clients_.at(client);
    rt.pending.reset();
    emit("t=" + std::to_string(now_) + " ev=client c=" + std::to_string(client) +
         " what=resolve key=" + record.object_id + " outcome=" +
         std::to_string(static_cast<int>(record.outcome)) +
         (record.from_cache ? " cache=1" : ""));
    hist_.client_ops.push_back(std::move(record));
    rep_.client_ops += 1;
    if (!rt.backlog.empty()) {
        const std::size_t next = rt.backlog.front();
        rt.backlog.pop_front();
        start_client_op(client, next);
    }
}

// ---------------------------------------------------------------------------
// anti-entropy sessions and the convergence sweep

void Engine::start_session(int source, int target) {
    const auto key = std::minmax(source, target);
    active_sessions_.insert({key.first, key.second});
    const Ticks rtt = sample_latency(sc_.latency, source, target, rng_) +
                      sample_latency(sc_.latency, target, source, rng_);
    emit("t=" + std::to_string(now_) + " ev=session src=" + std::to_string(source) +
         " dst=" + std::to_string(target) + " what=start");
    Ev ev;
    ev.at = now_ + std::max<Ticks>(1, rtt);
    ev.kind = EvKind::session_complete;
    ev.a = source;
    ev.b = target;
    push(std::move(ev));
}

void Engine::session_complete(const Ev& ev) {
    const int source = ev.a;
    const int target = ev.b;
    const auto key = std::minmax(source, target);
    active_sessions_.erase({key.first, key.second});
    const bool was_sweep = sweep_session_ && sweep_session_->first == source &&
                           sweep_session_->second == target;
    if (was_sweep) sweep_session_.reset();

    if (node_blocked(sc_.faults, source, now_) || node_blocked(sc_.faults, target, now_) ||
        nodes_[source].status == NodeStatus::invalid) {
        emit("t=" + std::to_string(now_) + " ev=session src=" + std::to_string(source) +
             " dst=" + std::to_string(target) + " what=abort");
    } else {
        SyncResult result = run_sync(nodes_[source].store, nodes_[target].store);
        rep_.anti_entropy.sessions += 1;
        rep_.anti_entropy.objects_transferred += result.objects_transferred;
        rep_.anti_entropy.bytes_transferred += result.bytes_transferred;
        rep_.anti_entropy.comparisons += result.comparisons;
        for (const auto& obj_key : result.transferred) {
            const VersionedObject& obj = result.merged.at(obj_key);
            hist_.finalizes.push_back({target, obj.commit.write_id, obj_key, obj.commit,
                                       fnv64(obj.value), now_, true});
        }
        emit("t=" + std::to_string(now_) + " ev=session src=" + std::to_string(source) +
             " dst=" + std::to_string(target) + " what=done objs=" +
             std::to_string(result.objects_transferred) + " cmp=" +
             std::to_string(result.comparisons));
        apply_step(target, on_sync_completed(nodes_[target], params_,
                                             std::move(result.merged), node_local(target)));
    }
    if (was_sweep) schedule_idle_check(now_);
}

void Engine::schedule_idle_check(GlobalTime at) {
    if (!sc_.convergence_sweep) return;
    Ev ev;
    ev.at = std::max(at, now_);
    ev.kind = EvKind::idle_check;
    ev.gen = ++idle_gen_;
    push(std::move(ev));
}

void Engine::idle_check(const Ev& ev) {
    if (ev.gen != idle_gen_ || sweep_session_) return;
    const Ticks threshold = sc_.idle_threshold_or_default();
    if (now_ - last_activity_ < threshold) {
        schedule_idle_check(last_activity_ + threshold);
        return;
    }
    const int source = sweep_cursor_;
    const int target = cw_neighbor(source, total_);
    sweep_cursor_ = cw_neighbor(sweep_cursor_, total_);
    const auto key = std::minmax(source, target);
    if (nodes_[source].status == NodeStatus::valid && !node_blocked(sc_.faults, source, now_) &&
        !node_blocked(sc_.faults, target, now_) &&
        !active_sessions_.contains({key.first, key.second})) {
        sweep_session_ = {source, target};
        start_session(source, target);
    } else {
        schedule_idle_check(now_ + std::max<Ticks>(1, threshold / 2));
    }
}

// ---------------------------------------------------------------------------

void Engine::finish_report() {
    rep_.end_time = sc_.horizon;

    for (const auto& [kind, counts] : rep_.messages) {
        if (is_write_path(kind)) {
            rep_.write_path_sent += counts.sent;
            rep_.write_path_delivered += counts.delivered;
        }
        if (is_read_path(kind)) {
            rep_.read_path_sent += counts.sent;
            rep_.read_path_delivered += counts.delivered;
        }
    }

    for (const auto& [id, record] : hist_.writes) {
        rep_.writes_requested += 1;
        if (record.decided) {
            if (record.success)
                rep_.writes_succeeded += 1;
            else
                rep_.writes_failed += 1;
        }
        rep_.latency_rejections += record.rejected_latency.size();
        if (record.success &&
            static_cast<int>(record.confirm_recorded.size()) >= quorum_.n + 1) {
            std::vector<Ticks> rtts;
            for (const auto& [node, g] : record.confirm_recorded)
                rtts.push_back(g - record.requested_g);
            std::sort(rtts.begin(), rtts.end());
            rep_.observed_write_latency.push_back(rtts[quorum_.n]);
        }
    }
    for (const auto& [id, record] : hist_.reads) {
        rep_.reads_requested += 1;
        if (!record.resolved) continue;
        switch (record.outcome) {
            case ReadOutcome::local_value:
            case ReadOutcome::majority_fetch: rep_.reads_succeeded += 1; break;
            case ReadOutcome::not_found: rep_.reads_not_found += 1; break;
            case ReadOutcome::failed: rep_.reads_failed += 1; break;
        }
        if (static_cast<int>(record.replies.size()) >= quorum_.n + 1) {
            std::vector<Ticks> rtts;
            for (const auto& [node, reply] : record.replies)
                rtts.push_back(reply.first - record.started_g);
            std::sort(rtts.begin(), rtts.end());
            rep_.observed_read_latency.push_back(rtts[quorum_.n]);
        }
    }
    for (const auto& record : hist_.client_ops) {
        if (record.outcome == ClientOpOutcome::rejected) {
            if (record.kind == ClientOpKind::write)
                rep_.writes_rejected += 1;
            else
                rep_.reads_rejected += 1;
        }
    }
    for (const auto& record : hist_.invalidations)
        rep_.invalidations[invalidation_reason_name(record.reason)] += 1;

    rep_.audit = audit(hist_, rep_);
    rep_.trace_digest = trace_.digest();
    rep_.trace_lines = trace_.size();
}

}  // namespace

RunResult run(const Scenario& scenario, std::uint64_t seed, const EngineOptions& options) {
    validate_scenario(scenario);
    Engine engine(scenario, seed, options);
    return engine.execute();
}

}  // namespace tsc
