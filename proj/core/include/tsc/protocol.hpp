#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tsc/time.hpp"

namespace tsc {

/// Replication setup (2n+1, n+1, n+1): N replicas, R agreeing replies per
/// read, W stores per write (the trigger plus n confirmations).
struct QuorumConfig {
    int n = 0;

    int total() const { return 2 * n + 1; }
    int read_quorum() const { return n + 1; }
    int write_quorum() const { return n + 1; }
};

QuorumConfig quorum_config(int n);  // throws for n < 1

/// Protocol time windows, all in ticks. alpha + beta must equal delta.
struct TimingConfig {
    Ticks delta = 0;
    Ticks alpha = 0;
    Ticks beta = 0;
    Ticks omega = 0;
    Ticks gamma = 0;

    bool operator==(const TimingConfig&) const = default;
};

struct TimingCheck {
    bool ok = true;
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
};

// Errors on alpha+beta != delta or non-positive windows; warns when alpha is
// not small against beta (alpha >= beta/10).
TimingCheck validate_timing(const TimingConfig& cfg);

// Window needed under exactly constant latency and processing time.
Ticks alpha_ideal(Ticks latency, Ticks processing);

// Acceptance test for an incoming write request: with pairwise clock
// deviation bounded by gamma, the true latency of a message stamped t_send
// and received at t_recv lies in [max(0, d-gamma), d+gamma], d = t_recv -
// t_send. Accept only if even the largest possible latency fits inside alpha.
bool valid_write_check(Ticks t_send, Ticks t_recv, Ticks gamma, Ticks alpha);

/// Identifies a write (also a read) by the issuing node and its sequence
/// counter; doubles as the commit tie-breaker.
struct OpId {
    int node = -1;
    std::uint64_t seq = 0;

    auto operator<=>(const OpId&) const = default;
};

using WriteId = OpId;
using ReadId = OpId;

/// Final ordering stamp of a committed write. Values live in protocol
/// logical time: they are only ever compared to each other and to locally
/// recorded window boundaries.
struct CommitStamp {
    Ticks value = 0;
    WriteId write_id{};

    auto operator<=>(const CommitStamp&) const = default;
};

// Smallest stamp strictly above the trigger's send stamp and every collected
// receipt; minimality keeps the commit inside as many beta windows as the
// constraint allows.
CommitStamp commit_timestamp(Ticks t_send, std::span<const Ticks> receipts, WriteId id);

}  // namespace tsc
