#include "tsc/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tsc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) { throw std::runtime_error(message); }

void expect_keys(const json& obj, const std::string& where,
                 const std::set<std::string>& known) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.contains(it.key())) fail("unknown field '" + it.key() + "' in " + where);
}

MsgKind msg_kind_from_name(const std::string& name) {
    for (MsgKind kind : {MsgKind::write_request, MsgKind::write_confirm, MsgKind::commit_ts,
                         MsgKind::hash_request, MsgKind::hash_reply, MsgKind::object_fetch,
                         MsgKind::object_reply, MsgKind::anti_entropy_request,
                         MsgKind::sync_probe}) {
        if (name == msg_kind_name(kind)) return kind;
    }
    fail("unknown message kind '" + name + "' in faults.loss");
}

LatencyDistribution parse_distribution(const json& obj, const std::string& where) {
    LatencyDistribution dist;
    const std::string kind = obj.value("kind", "constant");
    if (kind == "constant") {
        dist.kind = LatencyKind::constant;
        dist.constant = obj.value("value", Ticks{0});
    } else if (kind == "uniform") {
        dist.kind = LatencyKind::uniform;
        dist.lo = obj.at("lo").get<Ticks>();
        dist.hi = obj.at("hi").get<Ticks>();
    } else if (kind == "triangular") {
        dist.kind = LatencyKind::triangular;
        dist.lo = obj.at("lo").get<Ticks>();
        dist.mode = obj.at("mode").get<Ticks>();
        dist.hi = obj.at("hi").get<Ticks>();
    } else {
        fail("unknown latency kind '" + kind + "' in " + where);
    }
    return dist;
}

json distribution_to_json(const LatencyDistribution& dist) {
    json obj;
    switch (dist.kind) {
        case LatencyKind::constant:
            obj["kind"] = "constant";
            obj["value"] = dist.constant;
            break;
        case LatencyKind::uniform:
            obj["kind"] = "uniform";
            obj["lo"] = dist.lo;
            obj["hi"] = dist.hi;
            break;
        case LatencyKind::triangular:
            obj["kind"] = "triangular";
            obj["lo"] = dist.lo;
            obj["mode"] = dist.mode;
            obj["hi"] = dist.hi;
            break;
    }
    return obj;
}

void check_distribution(const LatencyDistribution& dist, const std::string& where,
                        std::vector<std::string>& errors) {
    switch (dist.kind) {
        case LatencyKind::constant:
            if (dist.constant < 0) errors.push_back(where + ": latency must be non-negative");
            break;
        case LatencyKind::uniform:
            if (dist.lo < 0 || dist.hi < dist.lo)
                errors.push_back(where + ": uniform bounds require 0 <= lo <= hi");
            break;
        case LatencyKind::triangular:
            if (dist.lo < 0 || dist.mode < dist.lo || dist.hi < dist.mode)
                errors.push_back(where + ": triangular bounds require 0 <= lo <= mode <= hi");
            break;
    }
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& err) {
        fail(std::string("parse error: ") + err.what());
    }
    if (!root.is_object()) fail("scenario must be a JSON object");
    expect_keys(root, "scenario",
                {"name", "n", "timing", "sync", "clocks", "processing", "latency", "clients",
                 "workload", "faults", "horizon", "seed", "idle_threshold",
                 "revalidation_retry", "convergence_sweep", "audit_client_bounds"});

    Scenario s;
    s.name = root.value("name", "");
    s.n = root.value("n", 2);

    if (!root.contains("timing") || !root["timing"].contains("delta"))
        fail("timing.delta is required");
    const json& timing = root["timing"];
    expect_keys(timing, "timing", {"delta", "alpha", "beta", "omega", "gamma"});
    s.timing.delta = timing.at("delta").get<Ticks>();
    // Default windows honor alpha << beta.
    s.timing.alpha = timing.value("alpha", s.timing.delta / 20);
    s.timing.beta = timing.value("beta", s.timing.delta - s.timing.alpha);
    s.timing.omega = timing.value("omega", s.timing.delta / 2);
    s.timing.gamma = timing.value("gamma", std::max<Ticks>(1, s.timing.alpha / 4));

    if (root.contains("sync")) {
        expect_keys(root["sync"], "sync", {"interval", "reference"});
        s.sync_interval = root["sync"].value("interval", Ticks{0});
        s.sync_reference = root["sync"].value("reference", 0);
    }

    if (root.contains("clocks")) {
        for (const auto& entry : root["clocks"]) {
            expect_keys(entry, "clocks[]", {"offset", "drift_ppm"});
            s.clocks.push_back(
                {entry.value("offset", Ticks{0}), entry.value("drift_ppm", 0)});
        }
    }
    if (root.contains("processing"))
        s.processing = root["processing"].get<std::vector<Ticks>>();

    if (root.contains("latency")) {
        const json& latency = root["latency"];
        expect_keys(latency, "latency",
                    {"kind", "value", "lo", "mode", "hi", "links"});
        s.latency.default_link = parse_distribution(latency, "latency");
        if (latency.contains("links")) {
            for (const auto& link : latency["links"]) {
                expect_keys(link, "latency.links[]",
                            {"from", "to", "kind", "value", "lo", "mode", "hi"});
                s.latency.per_link[{link.at("from").get<int>(), link.at("to").get<int>()}] =
                    parse_distribution(link, "latency.links[]");
            }
        }
    }

    if (root.contains("clients")) {
        for (const auto& entry : root["clients"]) {
            expect_keys(entry, "clients[]", {"id", "delta_client", "delta_network"});
            s.clients.push_back({entry.at("id").get<int>(),
                                 entry.at("delta_client").get<Ticks>(),
                                 entry.at("delta_network").get<Ticks>()});
        }
    }

    if (root.contains("workload")) {
        for (const auto& entry : root["workload"]) {
            expect_keys(entry, "workload[]", {"at", "client", "op", "key", "value", "node"});
            ClientOp op;
            op.at = entry.at("at").get<GlobalTime>();
            op.client = entry.at("client").get<int>();
            const std::string kind = entry.at("op").get<std::string>();
            if (kind == "write")
                op.op = ClientOpKind::write;
            else if (kind == "read")
                op.op = ClientOpKind::read;
            else
                fail("unknown workload op '" + kind + "'");
            op.object_id = entry.at("key").get<std::string>();
            op.value = entry.value("value", "");
            op.node = entry.value("node", 0);
            s.workload.push_back(op);
        }
    }

    if (root.contains("faults")) {
        const json& faults = root["faults"];
        expect_keys(faults, "faults", {"partitions", "crashes", "corruptions", "loss"});
        if (faults.contains("partitions")) {
            for (const auto& entry : faults["partitions"]) {
                expect_keys(entry, "faults.partitions[]", {"nodes", "from", "to"});
                s.faults.partitions.push_back({entry.at("nodes").get<std::vector<int>>(),
                                               entry.at("from").get<GlobalTime>(),
                                               entry.at("to").get<GlobalTime>()});
            }
        }
        if (faults.contains("crashes")) {
            for (const auto& entry : faults["crashes"]) {
                expect_keys(entry, "faults.crashes[]", {"node", "from", "to"});
                s.faults.crashes.push_back({entry.at("node").get<int>(),
                                            entry.at("from").get<GlobalTime>(),
                                            entry.at("to").get<GlobalTime>()});
            }
        }
        if (faults.contains("corruptions")) {
            for (const auto& entry : faults["corruptions"]) {
                expect_keys(entry, "faults.corruptions[]",
                            {"node", "key", "byte", "xor", "at"});
                s.faults.corruptions.push_back(
                    {entry.at("node").get<int>(), entry.at("key").get<std::string>(),
                     entry.value("byte", std::size_t{0}),
                     static_cast<std::uint8_t>(entry.value("xor", 0xff)),
                     entry.at("at").get<GlobalTime>()});
            }
        }
        if (faults.contains("loss")) {
            for (auto it = faults["loss"].begin(); it != faults["loss"].end(); ++it)
                s.faults.loss[msg_kind_from_name(it.key())] = it.value().get<double>();
        }
    }

    if (root.contains("horizon")) {
        s.horizon = root["horizon"].get<GlobalTime>();
    } else {
        GlobalTime last = 0;
        for (const auto& op : s.workload) last = std::max(last, op.at);
        s.horizon = last + 20 * s.timing.delta;
    }
    s.seed = root.value("seed", std::uint64_t{1});
    s.idle_threshold = root.value("idle_threshold", Ticks{0});
    s.revalidation_retry = root.value("revalidation_retry", Ticks{0});
    s.convergence_sweep = root.value("convergence_sweep", true);
    if (root.contains("audit_client_bounds") && !root["audit_client_bounds"].is_null())
        s.audit_client_bounds = root["audit_client_bounds"].get<bool>();

    const auto warnings = validate_scenario(s);  // throws on hard errors
    (void)warnings;
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open scenario file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

std::string scenario_to_json(const Scenario& s) {
    json root;
    root["name"] = s.name;
    root["n"] = s.n;
    root["timing"] = {{"delta", s.timing.delta},
                      {"alpha", s.timing.alpha},
                      {"beta", s.timing.beta},
                      {"omega", s.timing.omega},
                      {"gamma", s.timing.gamma}};
    root["sync"] = {{"interval", s.sync_interval}, {"reference", s.sync_reference}};
    root["clocks"] = json::array();
    for (const auto& clock : s.clocks)
        root["clocks"].push_back({{"offset", clock.offset}, {"drift_ppm", clock.drift_ppm}});
    root["processing"] = s.processing;
    root["latency"] = distribution_to_json(s.latency.default_link);
    if (!s.latency.per_link.empty()) {
        root["latency"]["links"] = json::array();
        for (const auto& [link, dist] : s.latency.per_link) {
            json entry = distribution_to_json(dist);
            entry["from"] = link.first;
            entry["to"] = link.second;
            root["latency"]["links"].push_back(entry);
        }
    }
    root["clients"] = json::array();
    for (const auto& client : s.clients)
        root["clients"].push_back({{"id", client.id},
                                   {"delta_client", client.delta_client},
                                   {"delta_network", client.delta_network}});
    root["workload"] = json::array();
    for (const auto& op : s.workload) {
        json entry = {{"at", op.at},
                      {"client", op.client},
                      {"op", op.op == ClientOpKind::write ? "write" : "read"},
                      {"key", op.object_id},
                      {"node", op.node}};
        if (op.op == ClientOpKind::write) entry["value"] = op.value;
        root["workload"].push_back(entry);
    }
    json faults = json::object();
    if (!s.faults.partitions.empty()) {
        faults["partitions"] = json::array();
        for (const auto& p : s.faults.partitions)
            faults["partitions"].push_back(
                {{"nodes", p.nodes}, {"from", p.from}, {"to", p.to}});
    }
    if (!s.faults.crashes.empty()) {
        faults["crashes"] = json::array();
        for (const auto& c : s.faults.crashes)
            faults["crashes"].push_back({{"node", c.node}, {"from", c.from}, {"to", c.to}});
    }
    if (!s.faults.corruptions.empty()) {
        faults["corruptions"] = json::array();
        for (const auto& c : s.faults.corruptions)
            faults["corruptions"].push_back({{"node", c.node},
                                             {"key", c.object_id},
                                             {"byte", c.byte_index},
                                             {"xor", c.xor_mask},
                                             {"at", c.at}});
    }
    if (!s.faults.loss.empty()) {
        json loss = json::object();
        for (const auto& [kind, probability] : s.faults.loss)
            loss[msg_kind_name(kind)] = probability;
        faults["loss"] = loss;
    }
    root["faults"] = faults;
    root["horizon"] = s.horizon;
    root["seed"] = s.seed;
    root["idle_threshold"] = s.idle_threshold;
    root["revalidation_retry"] = s.revalidation_retry;
    root["convergence_sweep"] = s.convergence_sweep;
    if (s.audit_client_bounds)
        root["audit_client_bounds"] = *s.audit_client_bounds;
    else
        root["audit_client_bounds"] = nullptr;
    return root.dump(2) + "\n";
}

std::vector<std::string> validate_scenario(const Scenario& s) {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;

    if (s.n < 1) errors.push_back("n must be >= 1: a single node is not a distributed system");
    const int total = 2 * s.n + 1;

    const TimingCheck timing = validate_timing(s.timing);
    errors.insert(errors.end(), timing.errors.begin(), timing.errors.end());
    warnings.insert(warnings.end(), timing.warnings.begin(), timing.warnings.end());
    if (s.timing.gamma >= s.timing.alpha)
        warnings.push_back("gamma >= alpha: most write requests will fail the latency check");

    if (s.horizon <= 0) errors.push_back("horizon must be positive");
    if (s.horizon > Ticks{100'000'000'000}) errors.push_back("horizon too large");

    if (!s.clocks.empty() && static_cast<int>(s.clocks.size()) != total)
        errors.push_back("clocks must list exactly 2n+1 entries");
    for (const auto& clock : s.clocks)
        if (clock.drift_ppm < 0)
            errors.push_back(
                "drift_ppm must be non-negative (shift all rates up to express relative drift)");
    if (!s.processing.empty() && static_cast<int>(s.processing.size()) != total)
        errors.push_back("processing must list exactly 2n+1 entries");
    for (Ticks p : s.processing)
        if (p < 0) errors.push_back("processing delays must be non-negative");

    check_distribution(s.latency.default_link, "latency", errors);
    for (const auto& [link, dist] : s.latency.per_link)
        check_distribution(dist, "latency.links", errors);

    if (s.sync_interval < 0) errors.push_back("sync.interval must be non-negative");
    if (s.sync_reference < 0 || s.sync_reference >= total)
        errors.push_back("sync.reference out of range");

    std::set<int> client_ids;
    for (const auto& client : s.clients) {
        if (!client_ids.insert(client.id).second)
            errors.push_back("duplicate client id " + std::to_string(client.id));
        if (client.delta_client <= 0) errors.push_back("delta_client must be positive");
        if (client.delta_network <= 0) errors.push_back("delta_network must be positive");
    }
    for (const auto& op : s.workload) {
        if (!client_ids.contains(op.client))
            errors.push_back("workload references unknown client " + std::to_string(op.client));
        if (op.node < 0 || op.node >= total) errors.push_back("workload node out of range");
        if (op.at < 0 || op.at > s.horizon)
            errors.push_back("workload op time outside horizon");
        if (op.object_id.empty()) errors.push_back("workload op key must be non-empty");
    }

    for (const auto& p : s.faults.partitions) {
        if (p.from < 0 || p.to < p.from || p.to > s.horizon)
            errors.push_back("partition interval outside horizon");
        for (int node : p.nodes)
            if (node < 0 || node >= total) errors.push_back("partition node out of range");
    }
    for (const auto& c : s.faults.crashes) {
        if (c.from < 0 || c.to < c.from || c.to > s.horizon)
            errors.push_back("crash interval outside horizon");
        if (c.node < 0 || c.node >= total) errors.push_back("crash node out of range");
    }
    for (const auto& c : s.faults.corruptions) {
        if (c.at < 0 || c.at > s.horizon) errors.push_back("corruption time outside horizon");
        if (c.node < 0 || c.node >= total) errors.push_back("corruption node out of range");
    }
    for (const auto& [kind, probability] : s.faults.loss)
        if (probability < 0.0 || probability > 1.0)
            errors.push_back("loss probability must be within [0,1]");

    if (!errors.empty()) {
        std::string joined = "invalid scenario:";
        for (const auto& error : errors) joined += "\n  - " + error;
        fail(joined);
    }
    return warnings;
}

Scenario inject(Scenario scenario, const Partition& fault) {
    scenario.faults.partitions.push_back(fault);
    validate_scenario(scenario);
    return scenario;
}

Scenario inject(Scenario scenario, const Crash& fault) {
    scenario.faults.crashes.push_back(fault);
    validate_scenario(scenario);
    return scenario;
}

Scenario inject(Scenario scenario, const Corruption& fault) {
    scenario.faults.corruptions.push_back(fault);
    validate_scenario(scenario);
    return scenario;
}

}  // namespace tsc
