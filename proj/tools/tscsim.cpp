// tscsim: deterministic simulator for a timed-consistency quorum circle.
//
// Subcommands:
//   validate <scenario.json>
//   run <scenario.json> [--seed S] [--trace out] [--report out]
//   batch <scenario.json> --seeds N [--seed-start S0] [--jobs J]
//   clocks check <trace>
//
// Exit codes: 0 = ok / all audits pass, 1 = audit failure, 2 = usage or
// configuration error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tsc/clockcheck.hpp"
#include "tsc/engine.hpp"
#include "tsc/report.hpp"
#include "tsc/scenario.hpp"
#include "tsc/trace.hpp"

namespace {

int cmd_validate(const std::string& path) {
    tsc::Scenario scenario = tsc::load_scenario(path);
    const auto warnings = tsc::validate_scenario(scenario);
    std::cout << "scenario ok: n=" << scenario.n << " (N=" << 2 * scenario.n + 1
              << ", R=W=" << scenario.n + 1 << ")"
              << " delta=" << scenario.timing.delta << " alpha=" << scenario.timing.alpha
              << " beta=" << scenario.timing.beta << " omega=" << scenario.timing.omega
              << " gamma=" << scenario.timing.gamma << " horizon=" << scenario.horizon
              << " ops=" << scenario.workload.size() << "\n";
    if (scenario.latency.default_link.kind == tsc::LatencyKind::constant) {
        tsc::Ticks processing = 0;
        for (tsc::Ticks p : scenario.processing) processing = std::max(processing, p);
        std::cout << "hint: ideal alpha for this constant-latency link is "
                  << tsc::alpha_ideal(scenario.latency.default_link.constant, processing)
                  << "\n";
    }
    for (const auto& warning : warnings) std::cout << "warning: " << warning << "\n";
    return 0;
}

int cmd_run(const std::string& path, std::uint64_t seed, bool seed_set,
            const std::string& trace_path, const std::string& report_path) {
    tsc::Scenario scenario = tsc::load_scenario(path);
    const std::uint64_t effective_seed = seed_set ? seed : scenario.seed;
    tsc::RunResult result = tsc::run(scenario, effective_seed);
    const std::string report = tsc::report_to_json(result.report);
    if (report_path.empty()) {
        std::cout << report;
    } else {
        std::ofstream out(report_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open report output: " + report_path);
        out << report;
    }
    if (!trace_path.empty()) result.trace.write_to(trace_path);
    for (const auto& check : result.report.audit.checks) {
        if (!check.checked || check.ok) continue;
        std::cerr << "audit failed: " << check.name << "\n";
        for (const auto& v : check.violations) std::cerr << "  " << v << "\n";
    }
    return result.report.audit.all_ok() ? 0 : 1;
}

int cmd_batch(const std::string& path, std::uint64_t seeds, std::uint64_t seed_start,
              unsigned jobs) {
    if (seeds == 0) throw std::runtime_error("--seeds must be at least 1");
    tsc::Scenario scenario = tsc::load_scenario(path);

    std::vector<tsc::RunReport> reports(seeds);
    std::vector<std::thread> workers;
    std::atomic<std::uint64_t> next{0};
    const unsigned worker_count =
        std::max(1u, std::min<unsigned>(jobs, std::thread::hardware_concurrency()));
    for (unsigned w = 0; w < worker_count; ++w) {
        workers.emplace_back([&] {
            for (std::uint64_t i = next.fetch_add(1); i < seeds; i = next.fetch_add(1))
                reports[i] = tsc::run(scenario, seed_start + i).report;
        });
    }
    for (auto& worker : workers) worker.join();

    std::uint64_t audits_passed = 0;
    std::uint64_t writes_ok = 0, writes_total = 0, reads_ok = 0, reads_total = 0;
    std::vector<tsc::Ticks> write_latency, read_latency;
    for (const auto& report : reports) {
        if (report.audit.all_ok()) ++audits_passed;
        writes_ok += report.writes_succeeded;
        writes_total += report.writes_requested + report.writes_rejected;
        reads_ok += report.reads_succeeded;
        reads_total += report.reads_requested + report.reads_rejected;
        write_latency.insert(write_latency.end(), report.observed_write_latency.begin(),
                             report.observed_write_latency.end());
        read_latency.insert(read_latency.end(), report.observed_read_latency.begin(),
                            report.observed_read_latency.end());
    }
    std::sort(write_latency.begin(), write_latency.end());
    std::sort(read_latency.begin(), read_latency.end());

    auto percentile = [](const std::vector<tsc::Ticks>& values, std::size_t pct) {
        return values.empty() ? tsc::Ticks{0} : values[(values.size() - 1) * pct / 100];
    };
    std::cout << "seeds: " << seeds << " (starting at " << seed_start << ")\n";
    std::cout << "audits passed: " << audits_passed << "/" << seeds << "\n";
    if (writes_total)
        std::cout << "write success: " << writes_ok << "/" << writes_total << "\n";
    if (reads_total) std::cout << "read success: " << reads_ok << "/" << reads_total << "\n";
    if (!write_latency.empty())
        std::cout << "write latency p50/p95/max: " << percentile(write_latency, 50) << "/"
                  << percentile(write_latency, 95) << "/" << write_latency.back() << "\n";
    if (!read_latency.empty())
        std::cout << "read latency p50/p95/max: " << percentile(read_latency, 50) << "/"
                  << percentile(read_latency, 95) << "/" << read_latency.back() << "\n";
    for (std::uint64_t i = 0; i < seeds; ++i) {
        if (reports[i].audit.all_ok()) continue;
        std::cerr << "seed " << seed_start + i << ": audit failed\n";
        for (const auto& check : reports[i].audit.checks)
            if (check.checked && !check.ok)
                for (const auto& v : check.violations)
                    std::cerr << "  [" << check.name << "] " << v << "\n";
    }
    return audits_passed == seeds ? 0 : 1;
}

int cmd_clocks_check(const std::string& path) {
    const auto lines = tsc::read_trace_file(path);
    const tsc::ClockCheckResult result = tsc::check_trace_clocks(lines);
    std::cout << "events: " << result.events << "\n";
    std::cout << "pairs checked: " << result.pairs_checked << "\n";
    std::cout << "vector mismatches: " << result.vector_mismatches << "\n";
    std::cout << "lamport violations: " << result.lamport_violations << "\n";
    for (const auto& detail : result.details) std::cout << "  " << detail << "\n";
    std::cout << (result.ok() ? "clock audit passed" : "clock audit FAILED") << "\n";
    return result.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"timed-consistency circle simulator"};
    app.require_subcommand(1);

    std::string path;
    std::uint64_t seed = 0;
    std::string trace_path, report_path;
    std::uint64_t seeds = 0, seed_start = 1;
    unsigned jobs = std::thread::hardware_concurrency();

    auto* validate = app.add_subcommand("validate", "check a scenario file");
    validate->add_option("file", path)->required();

    auto* run = app.add_subcommand("run", "execute one seeded run");
    run->add_option("file", path)->required();
    auto* seed_opt = run->add_option("--seed", seed, "run seed (default: scenario seed)");
    run->add_option("--trace", trace_path, "write the trace log here");
    run->add_option("--report", report_path, "write the JSON report here (default: stdout)");

    auto* batch = app.add_subcommand("batch", "run a seed batch and aggregate");
    batch->add_option("file", path)->required();
    batch->add_option("--seeds", seeds, "number of seeds")->required();
    batch->add_option("--seed-start", seed_start, "first seed (default 1)");
    batch->add_option("--jobs", jobs, "parallel workers");

    auto* clocks = app.add_subcommand("clocks", "logical clock audits");
    auto* check = clocks->add_subcommand("check", "audit a trace's clock consistency");
    check->add_option("trace", path)->required();
    clocks->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return cmd_validate(path);
        if (run->parsed())
            return cmd_run(path, seed, seed_opt->count() > 0, trace_path, report_path);
        if (batch->parsed()) return cmd_batch(path, seeds, seed_start, jobs);
        if (clocks->parsed() && check->parsed()) return cmd_clocks_check(path);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    return 2;
}
