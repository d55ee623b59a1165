#pragma once

#include <cstdint>
#include <vector>

namespace deig {

// Per-worker traffic counters, maintained by the coordinator from the
// abstract message stream so every transport reports identical numbers.
struct WorkerCounters {
    std::uint64_t messages_sent = 0;      // worker -> coordinator
    std::uint64_t messages_received = 0;  // coordinator -> worker
    std::uint64_t uplink_gradient_bytes = 0;
    std::uint64_t uplink_other_bytes = 0;
    std::uint64_t downlink_bytes = 0;
    std::uint64_t overhead_bytes = 0;  // 17 bytes per message, both directions

    bool operator==(const WorkerCounters&) const = default;
};

struct CommLedger {
    std::vector<WorkerCounters> workers;
    std::uint64_t rounds = 0;  // coordinator-initiated message waves

    bool operator==(const CommLedger&) const = default;
};

}  // namespace deig
