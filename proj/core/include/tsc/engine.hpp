#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "tsc/audit.hpp"
#include "tsc/report.hpp"
#include "tsc/scenario.hpp"
#include "tsc/trace.hpp"

namespace tsc {

struct EngineOptions {
    // Audit-sensitivity hook: builds a protocol mutant that keeps nodes valid
    // past a missed commit deadline. The audits must catch it.
    bool skip_beta_expiry_invalidation = false;
};

struct RunResult {
    RunReport report;
    OracleHistory history;
    TraceLog trace;
    std::vector<NodeState> final_nodes;
};

// Executes one seeded run to the scenario horizon. Deterministic: a fixed
// (scenario, seed, options) triple reproduces the identical trace bytes.
RunResult run(const Scenario& scenario, std::uint64_t seed, const EngineOptions& options = {});

struct DeliveryPlan {
    bool delivered = false;
    GlobalTime at = 0;  // valid when delivered
};

// Transit decision for one message: faults may drop it at transit start,
// otherwise it arrives after a sampled latency plus the receiver's fixed
// processing delay. Exposed for direct testing.
DeliveryPlan plan_delivery(MsgKind kind, int sender, int receiver, GlobalTime g,
                           const Scenario& scenario, std::mt19937_64& rng);

// Sampled link latency; consumes the generator deterministically.
Ticks sample_latency(const LatencyModel& model, int sender, int receiver,
                     std::mt19937_64& rng);

// True when a partition or crash interval covers the node at instant g.
bool node_blocked(const FaultPlan& faults, int node, GlobalTime g);

}  // namespace tsc
