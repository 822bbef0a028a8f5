// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit status is non-zero if any
// criterion fails. Expected wall time is a few minutes on a laptop.

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "support/scenarios.hpp"
#include "support/trace_oracle.hpp"
#include "tsc/digest.hpp"
#include "tsc/engine.hpp"
#include "tsc/logical.hpp"
#include "tsc/merkle.hpp"

using namespace tsc;

namespace {

int g_failures = 0;

void criterion(int number, const std::string& name, const std::function<std::string()>& body) {
    std::string detail;
    bool ok = true;
    try {
        detail = body();
    } catch (const std::exception& err) {
        ok = false;
        detail = err.what();
    }
    if (!ok) ++g_failures;
    std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", number, name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
}

[[noreturn]] void fail(const std::string& message) { throw std::runtime_error(message); }

void require(bool condition, const std::string& message) {
    if (!condition) fail(message);
}

unsigned worker_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 2 : std::min(hw, 8u);
}

// ---------------------------------------------------------------------------

std::string message_count_exactness() {
    const RunResult result = run(test::failure_free_basic(2), 1);
    require(result.report.writes_succeeded == 1 && result.report.reads_succeeded == 1,
            "operations did not complete");
    require(result.report.write_path_sent == 12, "write path sent != 12");
    require(result.report.write_path_delivered == 12, "write path delivered != 12");
    require(result.report.read_path_sent == 8, "read path sent != 8");
    require(result.report.read_path_delivered == 8, "read path delivered != 8");
    return "12 write-path and 8 read-path messages";
}

struct SweepStats {
    std::atomic<std::uint64_t> runs{0};
    std::atomic<std::uint64_t> corollary_violations{0};
    std::atomic<std::uint64_t> agreement_violations{0};
    std::atomic<std::uint64_t> other_failures{0};
    std::atomic<std::uint64_t> accepted_requests{0};
    std::atomic<std::uint64_t> invalidations{0};
    std::mutex detail_mutex;
    std::vector<std::string> details;
};

SweepStats g_sweep;
bool g_sweep_done = false;

void run_adversarial_sweep(std::uint64_t seeds) {
    std::atomic<std::uint64_t> next{1};
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < worker_count(); ++w) {
        workers.emplace_back([&] {
            for (std::uint64_t seed = next.fetch_add(1); seed <= seeds;
                 seed = next.fetch_add(1)) {
                const Scenario scenario = test::adversarial(seed);
                const RunResult result = run(scenario, seed);
                g_sweep.runs.fetch_add(1);
                for (const auto& [id, record] : result.history.writes)
                    g_sweep.accepted_requests.fetch_add(record.accepted.size());
                g_sweep.invalidations.fetch_add(result.history.invalidations.size());
                for (const auto& check : result.report.audit.checks) {
                    if (!check.checked || check.ok) continue;
                    if (check.name == "corollary")
                        g_sweep.corollary_violations.fetch_add(check.violations.size());
                    else if (check.name == "sequential_agreement")
                        g_sweep.agreement_violations.fetch_add(check.violations.size());
                    else
                        g_sweep.other_failures.fetch_add(1);
                    std::lock_guard<std::mutex> lock(g_sweep.detail_mutex);
                    if (g_sweep.details.size() < 8)
                        g_sweep.details.push_back("seed " + std::to_string(seed) + " " +
                                                  check.name + ": " + check.violations[0]);
                }
            }
        });
    }
    for (auto& worker : workers) worker.join();
    g_sweep_done = true;
}

std::string corollary_zero_violations() {
    if (!g_sweep_done) run_adversarial_sweep(10'000);
    require(g_sweep.accepted_requests.load() > 10'000,
            "the sweep produced too few accepted write requests to be meaningful");
    require(g_sweep.invalidations.load() > 1'000,
            "the sweep produced too few invalidations to be meaningful");
    if (g_sweep.corollary_violations.load() != 0) {
        std::string detail =
            "violations: " + std::to_string(g_sweep.corollary_violations.load());
        for (const auto& d : g_sweep.details) detail += "; " + d;
        fail(detail);
    }
    std::ostringstream out;
    out << g_sweep.runs.load() << " runs, " << g_sweep.accepted_requests.load()
        << " accepted requests, " << g_sweep.invalidations.load()
        << " invalidations, 0 violations";
    return out.str();
}

std::string agreement_zero_violations() {
    if (!g_sweep_done) run_adversarial_sweep(10'000);
    require(g_sweep.agreement_violations.load() == 0,
            "violations: " + std::to_string(g_sweep.agreement_violations.load()));
    require(g_sweep.other_failures.load() == 0,
            "other audit checks failed: " + std::to_string(g_sweep.other_failures.load()));
    return "no commit-order or byte disagreement across " +
           std::to_string(g_sweep.runs.load()) + " runs";
}

std::string paper_worked_example() {
    require(awareness_horizon({{10, 22, 7, 0, 3}, 0}) == 42, "xi_s != 42");
    require(awareness_horizon({{2, 7, 5, 0, 1}, 0}) == 15, "xi_i != 15");
    require(awareness_horizon({{10, 22, 7, 0, 3}, 0}) -
                    awareness_horizon({{2, 7, 5, 0, 1}, 0}) ==
                27,
            "delta_i != 27");
    require(!tcc_valid(42, 15, 26), "window 26 must be invalid");
    require(tcc_valid(42, 15, 27), "window 27 must be valid");
    return "xi_s=42, xi_i=15, delta_i=27";
}

std::string strong_clock_consistency() {
    std::mt19937_64 rng(20260809);
    std::uint64_t ordered = 0, concurrent = 0;
    for (int trial = 0; trial < 1'000; ++trial) {
        const auto trace = test::random_trace(rng, 8, 50);
        const auto hb = test::happened_before(trace);
        const auto clocks = test::assign_clocks(trace);
        for (std::size_t i = 0; i < trace.events.size(); ++i) {
            for (std::size_t j = 0; j < trace.events.size(); ++j) {
                if (i == j) continue;
                const Ordering order = vector_compare(clocks.vector[i], clocks.vector[j]);
                if (hb[i][j]) {
                    require(order == Ordering::less, "ordered pair not detected");
                    require(clocks.lamport[i] < clocks.lamport[j],
                            "lamport stamp not increasing along causality");
                    ++ordered;
                } else if (!hb[j][i]) {
                    require(order == Ordering::concurrent, "concurrent pair misordered");
                    ++concurrent;
                }
            }
        }
    }
    std::ostringstream out;
    out << "1000 traces, " << ordered << " ordered and " << concurrent
        << " concurrent pairs all agree";
    return out.str();
}

std::string quorum_availability() {
    int served = 0, rejected = 0;
    for (int a = 0; a < 5; ++a) {
        for (int b = a + 1; b < 5; ++b) {
            const int trigger = a == 0 ? (b == 1 ? 2 : 1) : 0;
            const RunResult result = run(test::crash_quorum({a, b}, trigger), 17);
            require(result.report.writes_succeeded == 1, "write failed with two dark nodes");
            require(result.report.reads_succeeded == 1, "read failed with two dark nodes");
            require(result.report.audit.all_ok(), "audit failed with two dark nodes");
            ++served;
        }
    }
    for (int a = 0; a < 5; ++a) {
        for (int b = a + 1; b < 5; ++b) {
            for (int c = b + 1; c < 5; ++c) {
                int trigger = 0;
                while (trigger == a || trigger == b || trigger == c) ++trigger;
                const Scenario scenario = test::crash_quorum({a, b, c}, trigger);
                const RunResult result = run(scenario, 17);
                require(result.report.writes_succeeded == 0 &&
                            result.report.writes_failed == 1,
                        "write not rejected with three dark nodes");
                require(result.report.reads_failed == 1,
                        "read not rejected with three dark nodes");
                for (const auto& [id, w] : result.history.writes)
                    require(w.decided_g - w.requested_g <= scenario.timing.alpha,
                            "write rejection exceeded alpha");
                for (const auto& [id, r] : result.history.reads)
                    require(r.resolved_g - r.started_g <= scenario.timing.omega,
                            "read rejection exceeded omega");
                require(result.report.audit.all_ok(), "audit failed with three dark nodes");
                ++rejected;
            }
        }
    }
    std::ostringstream out;
    out << served << " two-down node sets served; " << rejected
        << " three-down sets rejected within alpha/omega";
    return out.str();
}

std::string anti_entropy_exactness() {
    Store source;
    for (int i = 0; i < 64; ++i) {
        const std::string key = "obj" + std::string(i < 10 ? "0" : "") + std::to_string(i);
        source[key] = {key, "payload-" + std::to_string(i),
                       {static_cast<Ticks>(1000 + i), {0, static_cast<std::uint64_t>(i)}},
                       true};
    }
    for (const std::size_t k : {std::size_t{1}, std::size_t{5}, std::size_t{17}}) {
        Store target = source;
        std::size_t corrupted = 0;
        for (auto& [key, obj] : target) {
            if (corrupted >= k) break;
            obj.value[0] ^= 0x55;
            ++corrupted;
        }
        const SyncResult result = run_sync(source, target);
        require(result.objects_transferred == k,
                "transferred " + std::to_string(result.objects_transferred) +
                    " != " + std::to_string(k));
        require(result.comparisons <= 2 * k * 7,
                "comparisons " + std::to_string(result.comparisons) +
                    " exceed the bound for k=" + std::to_string(k));
        require(result.merged == source, "post-sync store not byte-identical");
    }
    return "k in {1,5,17}: exact transfers, bounded comparisons, byte-identical stores";
}

std::string end_to_end_update_bound() {
    std::atomic<std::uint64_t> reads{0};
    std::atomic<std::uint64_t> writes{0};
    std::atomic<std::uint64_t> violations{0};
    std::atomic<std::uint64_t> next{1};
    std::mutex detail_mutex;
    std::string first_detail;
    const std::uint64_t seeds = 150;
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < worker_count(); ++w) {
        workers.emplace_back([&] {
            for (std::uint64_t seed = next.fetch_add(1); seed <= seeds;
                 seed = next.fetch_add(1)) {
                const RunResult result = run(test::client_bounds(seed), seed);
                writes.fetch_add(result.report.writes_succeeded);
                reads.fetch_add(result.report.reads_succeeded);
                const CheckResult* bound = result.report.audit.find("delta_update_bound");
                if (bound == nullptr || !bound->checked) {
                    violations.fetch_add(1);
                    continue;
                }
                if (!bound->ok) {
                    violations.fetch_add(bound->violations.size());
                    std::lock_guard<std::mutex> lock(detail_mutex);
                    if (first_detail.empty())
                        first_detail =
                            "seed " + std::to_string(seed) + ": " + bound->violations[0];
                }
            }
        });
    }
    for (auto& worker : workers) worker.join();
    require(writes.load() > 500 && reads.load() > 500, "too little traffic to be meaningful");
    require(violations.load() == 0, "violations: " + std::to_string(violations.load()) +
                                        (first_detail.empty() ? "" : "; " + first_detail));
    std::ostringstream out;
    out << seeds << " failure-free runs, " << writes.load() << " writes visible to "
        << reads.load() << " reads within delta_data+delta_client+delta_network";
    return out.str();
}

std::string determinism() {
    const Scenario scenarios[] = {test::failure_free_basic(2), test::adversarial(99),
                                  test::adversarial_with_faults(123), test::client_bounds(5)};
    for (const Scenario& scenario : scenarios) {
        const std::uint64_t d1 = run(scenario, 42).report.trace_digest;
        const std::uint64_t d2 = run(scenario, 42).report.trace_digest;
        const std::uint64_t d3 = run(scenario, 42).report.trace_digest;
        require(d1 == d2 && d2 == d3, "trace digests diverged for " + scenario.name);
    }
    return "3x repeated executions of 4 scenario classes are bit-identical";
}

std::string audit_sensitivity() {
    EngineOptions mutant;
    mutant.skip_beta_expiry_invalidation = true;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const RunResult result = run(test::adversarial(seed), seed, mutant);
        const CheckResult* corollary = result.report.audit.find("corollary");
        if (corollary != nullptr && corollary->checked && !corollary->ok)
            return "mutant caught at seed " + std::to_string(seed) + ": " +
                   corollary->violations[0];
    }
    fail("the corollary audit never flagged the invalidation-skipping mutant");
}

}  // namespace

int main() {
    std::printf("acceptance suite: timed-consistency circle simulator\n");
    criterion(1, "message-count exactness (6n write, 4n read)", message_count_exactness);
    criterion(2, "finalized-or-invalid before the second beta close, 10k seeded runs",
              corollary_zero_violations);
    criterion(3, "sequential agreement across the same runs", agreement_zero_violations);
    criterion(4, "awareness-horizon worked example", paper_worked_example);
    criterion(5, "strong clock consistency on 1000 random traces", strong_clock_consistency);
    criterion(6, "quorum availability with 2 and 3 dark nodes", quorum_availability);
    criterion(7, "anti-entropy transfer and comparison exactness", anti_entropy_exactness);
    criterion(8, "end-to-end update visibility bound", end_to_end_update_bound);
    criterion(9, "bit-identical traces across repeated executions", determinism);
    criterion(10, "audit sensitivity against an invalidation-skipping mutant",
              audit_sensitivity);
    if (g_failures > 0) {
        std::printf("%d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
