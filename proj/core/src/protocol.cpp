#include "tsc/protocol.hpp"

#include <algorithm>
#include <stdexcept>

namespace tsc {

QuorumConfig quorum_config(int n) {
    if (n < 1) throw std::invalid_argument("quorum parameter n must be >= 1");
    return QuorumConfig{n};
}

TimingCheck validate_timing(const TimingConfig& cfg) {
    TimingCheck check;
    if (cfg.alpha <= 0) check.errors.push_back("alpha must be positive");
    if (cfg.beta <= 0) check.errors.push_back("beta must be positive");
    if (cfg.omega <= 0) check.errors.push_back("omega must be positive");
    if (cfg.gamma <= 0) check.errors.push_back("gamma must be positive");
    if (cfg.alpha + cfg.beta != cfg.delta)
        check.errors.push_back("alpha+beta != delta");
    else if (cfg.alpha > 0 && cfg.beta > 0 && cfg.alpha >= cfg.beta / 10)
        check.warnings.push_back("alpha is not small against beta (alpha >= beta/10)");
    check.ok = check.errors.empty();
    return check;
}

Ticks alpha_ideal(Ticks latency, Ticks processing) {
    if (latency < 0 || processing < 0)
        throw std::invalid_argument("latency and processing must be non-negative");
    return 2 * latency + processing;
}

bool valid_write_check(Ticks t_send, Ticks t_recv, Ticks gamma, Ticks alpha) {
    if (gamma <= 0) throw std::invalid_argument("gamma must be positive");
    const Ticks d = t_recv - t_send;
    const Ticks worst = std::max<Ticks>({0, d - gamma, d + gamma});
    return worst <= alpha;
}

CommitStamp commit_timestamp(Ticks t_send, std::span<const Ticks> receipts, WriteId id) {
    if (receipts.empty()) throw std::invalid_argument("receipts must be non-empty");
    Ticks top = t_send;
    for (Ticks r : receipts) top = std::max(top, r);
    return CommitStamp{top + 1, id};
}

}  // namespace tsc
