#include <doctest.h>

#include <random>

#include "tsc/digest.hpp"
#include "tsc/node.hpp"

using namespace tsc;

namespace {

ProtocolParams params(int n = 2) {
    ProtocolParams p;
    p.quorum = quorum_config(n);
    p.timing = {1000, 100, 900, 300, 10};
    p.revalidation_retry = 1000;
    return p;
}

NodeState node(int index, NodeStatus status = NodeStatus::valid) {
    NodeState s;
    s.index = index;
    s.status = status;
    return s;
}

Message write_request(int from, int to, WriteId id, Ticks sent, const std::string& key = "k",
                      const std::string& value = "v") {
    Message m;
    m.kind = MsgKind::write_request;
    m.sender = from;
    m.receiver = to;
    m.sent_local = sent;
    m.write_id = id;
    m.object_id = key;
    m.value = value;
    return m;
}

Message confirm(int from, WriteId id, Ticks stamp) {
    Message m;
    m.kind = MsgKind::write_confirm;
    m.sender = from;
    m.receiver = id.node;
    m.write_id = id;
    m.receipt_stamp = stamp;
    m.sent_local = stamp;
    return m;
}

Message commit_msg(int to, WriteId id, CommitStamp commit, const std::string& key = "k") {
    Message m;
    m.kind = MsgKind::commit_ts;
    m.sender = id.node;
    m.receiver = to;
    m.write_id = id;
    m.object_id = key;
    m.commit = commit;
    return m;
}

Message hash_reply(int from, ReadId id, std::optional<std::uint64_t> digest,
                   const std::string& key = "k") {
    Message m;
    m.kind = MsgKind::hash_reply;
    m.sender = from;
    m.receiver = id.node;
    m.read_id = id;
    m.object_id = key;
    m.digest = digest;
    return m;
}

int count_kind(const std::vector<Message>& messages, MsgKind kind) {
    int count = 0;
    for (const auto& m : messages)
        if (m.kind == kind) ++count;
    return count;
}

}  // namespace

TEST_CASE("begin_write fans out to every other node") {
    const NodeStep step = begin_write(node(0), params(), "k", "v", 100, 1);
    CHECK(count_kind(step.send, MsgKind::write_request) == 4);
    CHECK(step.timers.size() == 1);
    CHECK(step.timers[0].kind == TimerKind::alpha_expiry);
    CHECK(step.timers[0].due_local == 200);
    CHECK(step.replies.empty());  // nothing promised to the client yet
    CHECK(step.state.writes.size() == 1);

    SUBCASE("invalid trigger rejects immediately") {
        const NodeStep rejected = begin_write(node(0, NodeStatus::invalid), params(), "k",
                                              "v", 100, 1);
        CHECK(rejected.send.empty());
        REQUIRE(rejected.replies.size() == 1);
        CHECK(rejected.replies[0].status == ClientStatus::rejected);
    }
    SUBCASE("three-node circle sends two requests") {
        const NodeStep small = begin_write(node(0), params(1), "k", "v", 100, 1);
        CHECK(count_kind(small.send, MsgKind::write_request) == 2);
    }
}

TEST_CASE("on_write_request applies the latency bracket") {
    const WriteId id{0, 1};
    SUBCASE("acceptable latency stores the pending write and confirms") {
        // d = 50, gamma 10, alpha 100: worst latency 60 fits
        const NodeStep step = on_write_request(node(1), params(), write_request(0, 1, id, 0),
                                               50);
        REQUIRE(step.send.size() == 1);
        CHECK(step.send[0].kind == MsgKind::write_confirm);
        CHECK(step.send[0].receipt_stamp == 50);
        REQUIRE(step.state.pending.contains(id));
        CHECK(step.state.pending.at(id).beta_deadline == 950);
        REQUIRE(step.timers.size() == 1);
        CHECK(step.timers[0].kind == TimerKind::beta_expiry);
    }
    SUBCASE("excessive latency bracket is dropped without a confirmation") {
        // d = 95, worst latency 105 > alpha 100
        const NodeStep step = on_write_request(node(1), params(), write_request(0, 1, id, 0),
                                               95);
        CHECK(step.send.empty());
        CHECK(step.state.pending.empty());
        REQUIRE(step.events.size() == 1);
        CHECK(step.events[0].kind == NodeEventKind::request_rejected_latency);
    }
    SUBCASE("invalid nodes stay silent") {
        const NodeStep step = on_write_request(node(1, NodeStatus::invalid), params(),
                                               write_request(0, 1, id, 0), 50);
        CHECK(step.send.empty());
        CHECK(step.events.empty());
    }
    SUBCASE("duplicate requests re-confirm with the original stamp") {
        NodeStep first = on_write_request(node(1), params(), write_request(0, 1, id, 0), 50);
        const NodeStep second =
            on_write_request(first.state, params(), write_request(0, 1, id, 0), 70);
        REQUIRE(second.send.size() == 1);
        CHECK(second.send[0].receipt_stamp == 50);
        CHECK(second.state == first.state);
    }
}

TEST_CASE("confirmation quorum decides the write") {
    const ProtocolParams p = params();
    NodeStep step = begin_write(node(0), p, "k", "v", 100, 7);
    const WriteId id = step.state.writes.begin()->first;

    SUBCASE("all four confirmations decide early") {
        for (int v = 1; v <= 4; ++v)
            step = on_write_confirm(step.state, p, confirm(v, id, 150 + v), 160 + v);
        CHECK(count_kind(step.send, MsgKind::commit_ts) == 4);
        REQUIRE(step.replies.size() == 1);
        CHECK(step.replies[0].status == ClientStatus::accepted);
        CHECK(step.replies[0].version->value == 155);  // max receipt 154, plus one
        CHECK(step.state.store.at("k").value == "v");
        CHECK(step.state.writes.at(id).second_beta_deadline.has_value());
    }
    SUBCASE("quorum of two at alpha expiry") {
        step = on_write_confirm(step.state, p, confirm(1, id, 150), 160);
        step = on_write_confirm(step.state, p, confirm(2, id, 152), 162);
        step = on_alpha_expiry(step.state, p, id, 200);
        CHECK(count_kind(step.send, MsgKind::commit_ts) == 2);
        REQUIRE(step.replies.size() == 1);
        CHECK(step.replies[0].status == ClientStatus::accepted);
    }
    SUBCASE("one confirmation misses the quorum") {
        step = on_write_confirm(step.state, p, confirm(1, id, 150), 160);
        step = on_alpha_expiry(step.state, p, id, 200);
        CHECK(count_kind(step.send, MsgKind::commit_ts) == 0);
        REQUIRE(step.replies.size() == 1);
        CHECK(step.replies[0].status == ClientStatus::failed);
        CHECK(step.state.store.empty());
    }
    SUBCASE("confirmations after the deadline are ignored") {
        step = on_write_confirm(step.state, p, confirm(1, id, 150), 201);
        CHECK(step.state.writes.at(id).confirmations.empty());
    }
}

TEST_CASE("commit finalizes a pending write inside beta") {
    const ProtocolParams p = params();
    const WriteId id{0, 1};
    NodeStep accepted = on_write_request(node(1), p, write_request(0, 1, id, 0), 50);
    const CommitStamp commit{60, id};

    SUBCASE("within the window") {
        const NodeStep done = on_commit_ts(accepted.state, p, commit_msg(1, id, commit), 400);
        CHECK(done.state.pending.empty());
        CHECK(done.state.store.at("k").commit == commit);
    }
    SUBCASE("unknown write id is ignored") {
        const NodeStep done =
            on_commit_ts(accepted.state, p, commit_msg(1, WriteId{0, 9}, commit), 400);
        CHECK(done.state == accepted.state);
    }
    SUBCASE("invalid node ignores commits") {
        NodeStep expired = on_beta_expiry(accepted.state, p, id, 950);
        CHECK(expired.state.status == NodeStatus::invalid);
        const NodeStep done = on_commit_ts(expired.state, p, commit_msg(1, id, commit), 960);
        CHECK(done.state.store.empty());
    }
}

TEST_CASE("beta expiry invalidates and keeps the pending entry") {
    const ProtocolParams p = params();
    const WriteId id{0, 1};
    NodeStep accepted = on_write_request(node(1), p, write_request(0, 1, id, 0), 50);

    SUBCASE("missed commit invalidates") {
        const NodeStep expired = on_beta_expiry(accepted.state, p, id, 950);
        CHECK(expired.state.status == NodeStatus::invalid);
        CHECK(expired.state.pending.contains(id));  // kept for reconciliation
        // revalidation starts toward the ccw neighbor
        REQUIRE(expired.send.size() == 1);
        CHECK(expired.send[0].kind == MsgKind::anti_entropy_request);
        CHECK(expired.send[0].receiver == 0);  // ccw of node 1 in a five-circle
        CHECK(expired.send[0].heal_target == 1);
    }
    SUBCASE("finalized write makes the expiry a no-op") {
        const NodeStep done =
            on_commit_ts(accepted.state, p, commit_msg(1, id, CommitStamp{60, id}), 400);
        const NodeStep expiry = on_beta_expiry(done.state, p, id, 950);
        CHECK(expiry.state == done.state);
        CHECK(expiry.state.status == NodeStatus::valid);
    }
    SUBCASE("one finalized and one expired pending still invalidate the node") {
        const WriteId other{2, 5};
        NodeStep two = on_write_request(accepted.state, p, write_request(2, 1, other, 10), 60);
        two = on_commit_ts(two.state, p, commit_msg(1, other, CommitStamp{70, other}), 400);
        const NodeStep expired = on_beta_expiry(two.state, p, id, 950);
        CHECK(expired.state.status == NodeStatus::invalid);
    }
    SUBCASE("the mutation hook suppresses the invalidation") {
        ProtocolParams mutant = p;
        mutant.skip_beta_expiry_invalidation = true;
        const NodeStep expired = on_beta_expiry(accepted.state, mutant, id, 950);
        CHECK(expired.state.status == NodeStatus::valid);
    }
}

TEST_CASE("reads fan out hash requests") {
    const NodeStep step = begin_read(node(0), params(), "k", {}, 100, 3);
    CHECK(count_kind(step.send, MsgKind::hash_request) == 4);
    REQUIRE(step.timers.size() == 1);
    CHECK(step.timers[0].kind == TimerKind::omega_expiry);
    CHECK(step.timers[0].due_local == 400);
    CHECK_FALSE(step.state.reads.begin()->second.own_digest.has_value());  // absent key

    SUBCASE("invalid trigger rejects") {
        const NodeStep rejected = begin_read(node(0, NodeStatus::invalid), params(), "k", {},
                                             100, 3);
        CHECK(rejected.send.empty());
        REQUIRE(rejected.replies.size() == 1);
        CHECK(rejected.replies[0].status == ClientStatus::rejected);
    }
}

TEST_CASE("hash requests are answered from the finalized store") {
    const ProtocolParams p = params();
    Message request;
    request.kind = MsgKind::hash_request;
    request.sender = 0;
    request.receiver = 1;
    request.read_id = {0, 1};
    request.object_id = "k";

    NodeState holder = node(1);
    holder.store["k"] = {"k", "v", {60, {0, 9}}, true};

    const NodeStep with = on_hash_request(holder, p, request, 100);
    REQUIRE(with.send.size() == 1);
    CHECK(with.send[0].digest == object_digest(holder.store.at("k")));

    const NodeStep without = on_hash_request(node(1), p, request, 100);
    REQUIRE(without.send.size() == 1);
    CHECK_FALSE(without.send[0].digest.has_value());

    const NodeStep silent = on_hash_request(node(1, NodeStatus::invalid), p, request, 100);
    CHECK(silent.send.empty());
}

TEST_CASE("read resolution cases") {
    const ProtocolParams p = params();
    NodeState trigger = node(0);
    const VersionedObject obj{"k", "v", {60, {0, 9}}, true};
    trigger.store["k"] = obj;
    const std::uint64_t own = object_digest(obj);

    NodeStep step = begin_read(trigger, p, "k", {}, 100, 3);
    const ReadId id = step.state.reads.begin()->first;

    SUBCASE("two matching replies serve the local value early") {
        step = on_hash_reply(step.state, p, hash_reply(1, id, own), 150);
        CHECK(step.replies.empty());
        step = on_hash_reply(step.state, p, hash_reply(2, id, own), 160);
        REQUIRE(step.replies.size() == 1);
        CHECK(step.replies[0].status == ClientStatus::value);
        CHECK(step.replies[0].value == "v");
    }
    SUBCASE("a disagreeing replier gets its ccw neighbor mandated to heal it") {
        step = on_hash_reply(step.state, p, hash_reply(1, id, own), 150);
        step = on_hash_reply(step.state, p, hash_reply(2, id, own), 160);
        step = on_hash_reply(step.state, p, hash_reply(3, id, 12345), 170);
        const NodeStep closed = on_omega_expiry(step.state, p, id, 400);
        REQUIRE(closed.send.size() == 1);
        CHECK(closed.send[0].kind == MsgKind::anti_entropy_request);
        CHECK(closed.send[0].receiver == 2);  // ccw neighbor of node 3
        CHECK(closed.send[0].heal_target == 3);
        CHECK(closed.state.reads.empty());
    }
    SUBCASE("a foreign majority is fetched and the trigger self-invalidates") {
        NodeState stale = trigger;
        stale.store["k"].value = "old";
        step = begin_read(stale, p, "k", {}, 100, 3);
        const ReadId rid = step.state.reads.begin()->first;
        step = on_hash_reply(step.state, p, hash_reply(1, rid, own), 150);
        step = on_hash_reply(step.state, p, hash_reply(2, rid, own), 160);
        step = on_hash_reply(step.state, p, hash_reply(3, rid, own), 170);
        // three agreeing foreign hashes trigger the fetch
        step = on_omega_expiry(step.state, p, rid, 400);
        CHECK(count_kind(step.send, MsgKind::object_fetch) == 3);
        CHECK(step.state.reads.at(rid).awaiting_fetch);

        Message reply;
        reply.kind = MsgKind::object_reply;
        reply.sender = 1;
        reply.receiver = 0;
        reply.read_id = rid;
        reply.object_id = "k";
        reply.has_object = true;
        reply.value = obj.value;
        reply.commit = obj.commit;
        const NodeStep served = on_object_reply(step.state, p, reply, 450);
        REQUIRE_FALSE(served.replies.empty());
        CHECK(served.replies[0].status == ClientStatus::value);
        CHECK(served.replies[0].value == "v");
        CHECK(served.state.status == NodeStatus::invalid);
    }
    SUBCASE("no agreement fails the read") {
        step = on_hash_reply(step.state, p, hash_reply(1, id, 111), 150);
        step = on_hash_reply(step.state, p, hash_reply(2, id, 222), 160);
        step = on_hash_reply(step.state, p, hash_reply(3, id, std::nullopt), 170);
        const NodeStep closed = on_omega_expiry(step.state, p, id, 400);
        REQUIRE(closed.replies.size() == 1);
        CHECK(closed.replies[0].status == ClientStatus::failed);
    }
    SUBCASE("if-modified-since reports an unchanged version") {
        step = begin_read(trigger, p, "k", obj.commit, 100, 3);
        const ReadId rid = step.state.reads.begin()->first;
        step = on_hash_reply(step.state, p, hash_reply(1, rid, own), 150);
        step = on_hash_reply(step.state, p, hash_reply(2, rid, own), 160);
        REQUIRE(step.replies.size() == 1);
        CHECK(step.replies[0].status == ClientStatus::not_modified);
    }
}

TEST_CASE("read classification against a first-principles enumeration") {
    // Replies range over: matches-own h0, two foreign hashes, absent.
    const std::optional<std::uint64_t> own = 1000;
    const std::optional<std::uint64_t> choices[] = {1000, 2000, 3000, std::nullopt};
    const int n = 2;
    for (int count = 0; count <= 4; ++count) {
        std::vector<int> pick(count, 0);
        while (true) {
            std::map<int, std::optional<std::uint64_t>> replies;
            for (int i = 0; i < count; ++i) replies[i + 1] = choices[pick[i]];

            // independent expectation
            int own_matches = 0;
            std::map<std::optional<std::uint64_t>, int> tally;
            for (const auto& [node, digest] : replies) {
                if (digest == own) ++own_matches;
                tally[digest] += 1;
            }
            std::optional<std::optional<std::uint64_t>> majority;
            for (const auto& [digest, votes] : tally)
                if (digest != own && votes >= n + 1) majority = digest;

            const ReadClassification cls = classify_read(own, replies, n);
            if (own_matches >= n) {
                CHECK(cls.kind == ReadClassification::Kind::serve_local);
                CHECK(static_cast<int>(cls.mismatched.size()) == count - own_matches);
            } else if (majority) {
                CHECK(cls.kind == ReadClassification::Kind::fetch_majority);
                CHECK(cls.majority_digest == *majority);
                CHECK(static_cast<int>(cls.majority_holders.size()) >= n + 1);
            } else {
                CHECK(cls.kind == ReadClassification::Kind::fail);
            }

            int i = count - 1;
            while (i >= 0 && pick[i] == 3) pick[i--] = 0;
            if (i < 0) break;
            pick[i] += 1;
        }
        if (count == 0) continue;
    }
}

TEST_CASE("revalidation loops toward the ccw neighbor until healed") {
    const ProtocolParams p = params();
    NodeState invalid = node(3, NodeStatus::invalid);
    const NodeStep request = request_revalidation(invalid, p, 500);
    REQUIRE(request.send.size() == 1);
    CHECK(request.send[0].receiver == 2);
    CHECK(request.send[0].heal_target == 3);
    REQUIRE(request.timers.size() == 1);
    CHECK(request.timers[0].kind == TimerKind::revalidate_retry);
    CHECK(request.timers[0].due_local == 1500);

    SUBCASE("valid nodes do not ask") {
        const NodeStep idle = request_revalidation(node(3), p, 500);
        CHECK(idle.send.empty());
        CHECK(idle.timers.empty());
    }
    SUBCASE("a completed session restores validity and prunes expired pendings") {
        invalid.pending[{0, 1}] = {{0, 1}, "k", "v", 50, 950};
        invalid.pending[{0, 2}] = {{0, 2}, "k2", "v2", 800, 1700};
        Store healed;
        healed["k"] = {"k", "v", {60, {0, 1}}, true};
        const NodeStep done = on_sync_completed(invalid, p, healed, 1000);
        CHECK(done.state.status == NodeStatus::valid);
        CHECK(done.state.store == healed);
        CHECK_FALSE(done.state.pending.contains(WriteId{0, 1}));  // expired, reconciled
        CHECK(done.state.pending.contains(WriteId{0, 2}));        // still live
        REQUIRE(done.events.size() == 1);
        CHECK(done.events[0].kind == NodeEventKind::revalidated);
    }
}

TEST_CASE("neighbor arithmetic wraps the circle") {
    CHECK(cw_neighbor(4, 5) == 0);
    CHECK(cw_neighbor(0, 5) == 1);
    CHECK(ccw_neighbor(0, 5) == 4);
    CHECK(ccw_neighbor(3, 5) == 2);
}

TEST_CASE("handlers are pure: replaying a step reproduces it") {
    const ProtocolParams p = params();
    std::mt19937_64 rng(77);

    auto same_step = [](const NodeStep& a, const NodeStep& b) {
        return a.state == b.state && a.send == b.send && a.timers == b.timers &&
               a.replies == b.replies && a.events == b.events;
    };

    for (int trial = 0; trial < 50; ++trial) {
        NodeState base = node(static_cast<int>(rng() % 5));
        if (rng() % 3 == 0) base.status = NodeStatus::invalid;
        if (rng() % 2 == 0)
            base.store["k"] = {"k", "v" + std::to_string(rng() % 3),
                               {static_cast<Ticks>(rng() % 100), {0, rng() % 5}}, true};

        const WriteId id{0, 1 + rng() % 3};
        const Ticks now = static_cast<Ticks>(rng() % 500);
        switch (rng() % 5) {
            case 0:
                CHECK(same_step(begin_write(base, p, "k", "v", now, 1),
                                begin_write(base, p, "k", "v", now, 1)));
                break;
            case 1: {
                const Message m = write_request(0, base.index, id, 0);
                CHECK(same_step(on_write_request(base, p, m, now),
                                on_write_request(base, p, m, now)));
                break;
            }
            case 2:
                CHECK(same_step(begin_read(base, p, "k", {}, now, 2),
                                begin_read(base, p, "k", {}, now, 2)));
                break;
            case 3:
                CHECK(same_step(on_beta_expiry(base, p, id, now),
                                on_beta_expiry(base, p, id, now)));
                break;
            default:
                CHECK(same_step(request_revalidation(base, p, now),
                                request_revalidation(base, p, now)));
                break;
        }
    }
}
