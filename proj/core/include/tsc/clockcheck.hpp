#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tsc {

/// Result of replaying a message trace under vector and Lamport clocks and
/// comparing against the brute-force happened-before relation of the trace's
/// event graph.
struct ClockCheckResult {
    std::size_t events = 0;
    std::size_t pairs_checked = 0;
    std::size_t vector_mismatches = 0;
    std::size_t lamport_violations = 0;
    std::vector<std::string> details;

    bool ok() const { return vector_mismatches == 0 && lamport_violations == 0; }
};

// Consumes the simulator's trace lines: every internal `send` becomes a send
// event at its sender, every `deliver` a receive event at its receiver,
// matched by message id.
ClockCheckResult check_trace_clocks(const std::vector<std::string>& lines);

}  // namespace tsc
