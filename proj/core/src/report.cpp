#include "tsc/report.hpp"

#include <algorithm>

#include <json.hpp>

namespace tsc {

namespace {

using nlohmann::json;

json latency_summary(std::vector<Ticks> values) {
    json out;
    out["count"] = values.size();
    if (values.empty()) return out;
    std::sort(values.begin(), values.end());
    out["min"] = values.front();
    out["max"] = values.back();
    out["p50"] = values[values.size() / 2];
    out["p95"] = values[(values.size() * 95) / 100];
    return out;
}

}  // namespace

std::string report_to_json(const RunReport& report) {
    json root;
    root["scenario"] = report.scenario_name;
    root["seed"] = report.seed;
    root["end_time"] = report.end_time;
    root["events_processed"] = report.events_processed;

    json messages = json::object();
    for (const auto& [kind, counts] : report.messages)
        messages[msg_kind_name(kind)] = {{"sent", counts.sent},
                                         {"delivered", counts.delivered},
                                         {"dropped", counts.dropped}};
    root["messages"] = messages;
    root["write_path"] = {{"sent", report.write_path_sent},
                          {"delivered", report.write_path_delivered}};
    root["read_path"] = {{"sent", report.read_path_sent},
                         {"delivered", report.read_path_delivered}};

    root["writes"] = {{"requested", report.writes_requested},
                      {"succeeded", report.writes_succeeded},
                      {"failed", report.writes_failed},
                      {"rejected", report.writes_rejected}};
    root["reads"] = {{"requested", report.reads_requested},
                     {"succeeded", report.reads_succeeded},
                     {"not_found", report.reads_not_found},
                     {"failed", report.reads_failed},
                     {"rejected", report.reads_rejected}};
    root["clients"] = {{"ops", report.client_ops},
                       {"cache_hits", report.client_cache_hits},
                       {"timeouts", report.client_timeouts}};

    root["invalidations"] = report.invalidations;
    root["revalidations"] = report.revalidations;
    root["latency_rejections"] = report.latency_rejections;
    root["anti_entropy"] = {{"sessions", report.anti_entropy.sessions},
                            {"objects_transferred", report.anti_entropy.objects_transferred},
                            {"bytes_transferred", report.anti_entropy.bytes_transferred},
                            {"comparisons", report.anti_entropy.comparisons}};

    root["observed_write_latency"] = latency_summary(report.observed_write_latency);
    root["observed_read_latency"] = latency_summary(report.observed_read_latency);

    json audit = json::object();
    json checks = json::array();
    for (const auto& check : report.audit.checks) {
        json entry = {{"name", check.name},
                      {"checked", check.checked},
                      {"ok", check.ok},
                      {"violations", check.violations}};
        checks.push_back(entry);
    }
    audit["checks"] = checks;
    audit["all_ok"] = report.audit.all_ok();
    root["audit"] = audit;

    char digest[32];
    std::snprintf(digest, sizeof(digest), "%016llx",
                  static_cast<unsigned long long>(report.trace_digest));
    root["trace_digest"] = digest;
    root["trace_lines"] = report.trace_lines;
    return root.dump(2) + "\n";
}

}  // namespace tsc
