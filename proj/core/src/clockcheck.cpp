#include "tsc/clockcheck.hpp"

#include <map>
#include <stdexcept>

#include "tsc/logical.hpp"
#include "tsc/trace.hpp"

namespace tsc {

namespace {

struct TraceEvent {
    int process = -1;
    bool is_send = false;
    std::uint64_t mid = 0;
};

constexpr std::size_t kMaxEvents = 50'000;

}  // namespace

ClockCheckResult check_trace_clocks(const std::vector<std::string>& lines) {
    std::vector<TraceEvent> events;
    int max_process = -1;

    for (const auto& line : lines) {
        const auto fields = parse_trace_line(line);
        auto ev = fields.find("ev");
        if (ev == fields.end()) continue;
        if (ev->second != "send" && ev->second != "deliver") continue;
        TraceEvent event;
        event.is_send = ev->second == "send";
        event.process = std::stoi(fields.at(event.is_send ? "from" : "to"));
        event.mid = std::stoull(fields.at("mid"));
        if (event.process < 0) continue;
        max_process = std::max(max_process, event.process);
        events.push_back(event);
        if (events.size() > kMaxEvents)
            throw std::runtime_error("trace too large for the clock audit");
    }

    ClockCheckResult result;
    result.events = events.size();
    if (events.empty()) return result;
    const std::size_t processes = static_cast<std::size_t>(max_process) + 1;

    // Replay both clock kinds over the trace.
    std::vector<VectorTimestamp> current;
    for (std::size_t p = 0; p < processes; ++p)
        current.push_back(make_vector_timestamp(processes, p));
    std::vector<LamportClock> lamport(processes);

    std::vector<VectorTimestamp> stamps;
    std::vector<std::uint64_t> lamport_stamps;
    std::map<std::uint64_t, std::size_t> send_of;  // mid -> send event index
    stamps.reserve(events.size());

    std::vector<std::vector<std::size_t>> preds(events.size());
    std::vector<std::size_t> last_on_process(processes, SIZE_MAX);

    for (std::size_t i = 0; i < events.size(); ++i) {
        const TraceEvent& event = events[i];
        const std::size_t p = static_cast<std::size_t>(event.process);
        if (last_on_process[p] != SIZE_MAX) preds[i].push_back(last_on_process[p]);
        if (event.is_send) {
            current[p] = vector_event(current[p]);
            lamport[p] = lamport_event(lamport[p]);
            send_of[event.mid] = i;
        } else {
            auto send = send_of.find(event.mid);
            if (send == send_of.end())
                throw std::runtime_error("trace delivers message " +
                                         std::to_string(event.mid) + " before its send");
            preds[i].push_back(send->second);
            current[p] = vector_event(current[p], stamps[send->second]);
            lamport[p] = lamport_event(lamport[p], lamport_stamps[send->second]);
        }
        stamps.push_back(current[p]);
        lamport_stamps.push_back(lamport[p].counter);
        last_on_process[p] = i;
    }

    // Brute-force happened-before: the trace order is already topological.
    const std::size_t words = (events.size() + 63) / 64;
    std::vector<std::vector<std::uint64_t>> reach(events.size(),
                                                  std::vector<std::uint64_t>(words, 0));
    auto set_bit = [&](std::vector<std::uint64_t>& bits, std::size_t j) {
        bits[j / 64] |= std::uint64_t{1} << (j % 64);
    };
    auto get_bit = [&](const std::vector<std::uint64_t>& bits, std::size_t j) {
        return (bits[j / 64] >> (j % 64)) & 1;
    };
    for (std::size_t i = 0; i < events.size(); ++i) {
        for (std::size_t pred : preds[i]) {
            set_bit(reach[i], pred);
            for (std::size_t w = 0; w < words; ++w) reach[i][w] |= reach[pred][w];
        }
    }

    for (std::size_t i = 0; i < events.size(); ++i) {
        for (std::size_t j = i + 1; j < events.size(); ++j) {
            result.pairs_checked += 1;
            const bool before = get_bit(reach[j], i);  // i -> j (j is later in order)
            const Ordering order = vector_compare(stamps[i], stamps[j]);
            const Ordering expected = before ? Ordering::less : Ordering::concurrent;
            if (order != expected) {
                result.vector_mismatches += 1;
                if (result.details.size() < 16)
                    result.details.push_back("events " + std::to_string(i) + "," +
                                             std::to_string(j) +
                                             ": vector order disagrees with trace causality");
            }
            if (before && !(lamport_stamps[i] < lamport_stamps[j])) {
                result.lamport_violations += 1;
                if (result.details.size() < 16)
                    result.details.push_back("events " + std::to_string(i) + "," +
                                             std::to_string(j) +
                                             ": lamport stamp not increasing along causality");
            }
        }
    }
    return result;
}

}  // namespace tsc
