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

enum class LatencyKind { constant, uniform, triangular };

struct LatencyDistribution {
    LatencyKind kind = LatencyKind::constant;
    Ticks constant = 0;        // constant
    Ticks lo = 0, hi = 0;      // uniform / triangular
    Ticks mode = 0;            // triangular

    bool operator==(const LatencyDistribution&) const = default;
};

/// Link latency model: one default distribution plus optional per-link
/// overrides keyed by (sender, receiver).
struct LatencyModel {
    LatencyDistribution default_link;
    std::map<std::pair<int, int>, LatencyDistribution> per_link;

    bool operator==(const LatencyModel&) const = default;
};

struct Partition {
    std::vector<int> nodes;  // cut off from everyone for the interval
    GlobalTime from = 0, to = 0;

    bool operator==(const Partition&) const = default;
};

struct Crash {
    int node = -1;
    GlobalTime from = 0, to = 0;

    bool operator==(const Crash&) const = default;
};

struct Corruption {
    int node = -1;
    std::string object_id;
    std::size_t byte_index = 0;
    std::uint8_t xor_mask = 0xff;
    GlobalTime at = 0;

    bool operator==(const Corruption&) const = default;
};

struct FaultPlan {
    std::vector<Partition> partitions;
    std::vector<Crash> crashes;
    std::vector<Corruption> corruptions;
    // Independent per-delivery loss probability by message kind.
    std::map<MsgKind, double> loss;

    bool operator==(const FaultPlan&) const = default;
};

enum class ClientOpKind { write, read };

struct ClientOp {
    GlobalTime at = 0;
    int client = 0;
    ClientOpKind op = ClientOpKind::write;
    std::string object_id;
    std::string value;  // writes only
    int node = 0;       // triggering node the client is routed to

    bool operator==(const ClientOp&) const = default;
};

struct ClientConfig {
    int id = 0;
    Ticks delta_client = 0;
    Ticks delta_network = 0;

    bool operator==(const ClientConfig&) const = default;
};

struct ClockConfig {
    Ticks offset = 0;
    std::int32_t drift_ppm = 0;  // non-negative; relative drift via rate shifts

    bool operator==(const ClockConfig&) const = default;
};

/// Complete input of one simulated run (minus the seed, which the runner
/// supplies so one scenario can fan out into a batch).
struct Scenario {
    std::string name;
    int n = 2;
    TimingConfig timing;
    Ticks sync_interval = 0;  // 0 disables periodic clock synchronization
    int sync_reference = 0;
    std::vector<ClockConfig> clocks;       // one per node; missing -> ideal
    std::vector<Ticks> processing;         // per-node P_v; missing -> 0
    LatencyModel latency;
    std::vector<ClientConfig> clients;
    std::vector<ClientOp> workload;
    FaultPlan faults;
    GlobalTime horizon = 0;
    std::uint64_t seed = 1;
    Ticks idle_threshold = 0;       // 0 -> default 10*delta
    Ticks revalidation_retry = 0;   // 0 -> default delta
    bool convergence_sweep = true;
    std::optional<bool> audit_client_bounds;  // default: only failure-free runs

    bool operator==(const Scenario&) const = default;

    Ticks idle_threshold_or_default() const {
        return idle_threshold > 0 ? idle_threshold : 10 * timing.delta;
    }
    Ticks revalidation_retry_or_default() const {
        return revalidation_retry > 0 ? revalidation_retry : timing.delta;
    }
    bool failure_free() const {
        return faults.partitions.empty() && faults.crashes.empty() &&
               faults.corruptions.empty() && faults.loss.empty();
    }
};

struct ScenarioError {
    std::string message;
};

// Parses and validates; throws std::runtime_error carrying the offending
// field or the violated invariant by name.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text);
std::string scenario_to_json(const Scenario& scenario);

// Validation shared by parsing and programmatic construction. Returns
// warnings; throws on hard errors.
std::vector<std::string> validate_scenario(const Scenario& scenario);

// Returns a copy with the fault merged into the schedule; intervals must lie
// within the horizon.
Scenario inject(Scenario scenario, const Partition& fault);
Scenario inject(Scenario scenario, const Crash& fault);
Scenario inject(Scenario scenario, const Corruption& fault);

}  // namespace tsc
