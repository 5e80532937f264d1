#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "aslsim/energy.hpp"
#include "aslsim/net_model.hpp"
#include "aslsim/trace.hpp"

namespace aslsim {

struct LatencySummary {
    std::size_t samples = 0;
    double mean_ms = 0.0;
    double median_ms = 0.0;
    double p95_ms = 0.0;
    double p99_ms = 0.0;
};

// End-to-end delivery ratio over leaf-originated packets generated after the
// warm-up window. Packets still in flight at the horizon are excluded from
// the denominator.
double pdr(const SlotTrace& trace, const Topology& topology);

// Delay statistics over packets delivered to the sink (generated after
// warm-up). Throws if nothing was delivered.
LatencySummary latency_stats(const SlotTrace& trace, const Topology& topology);

// Number of idle-listening slots recorded for one node after warm-up.
std::uint64_t idle_listen_count(const SlotTrace& trace, int node);

struct NodeMetrics {
    int node = 0;
    std::string role;
    PowerBreakdown power;
    double rdc = 0.0;
    std::uint64_t rx_idle_slots = 0;
    double rx_idle_s = 0.0;
    double lifetime_days = 0.0;
};

struct MetricsReport {
    double pdr = 0.0;
    LatencySummary latency;
    std::vector<NodeMetrics> nodes;
    PowerBreakdown network_power;  // mean over nodes
    double network_rdc = 0.0;      // mean over nodes
    std::uint64_t network_rx_idle_slots = 0;
    double network_rx_idle_s = 0.0;
    double network_lifetime_days = 0.0;
};

MetricsReport build_report(const SlotTrace& trace, const Topology& topology,
                           const std::map<int, EnergyLedger>& ledgers,
                           const PlatformCurrents& currents = PlatformCurrents{},
                           double battery_joules = kCoinCellJoules);

// Flat CSV: one row per node plus a trailing network row.
void write_report_csv(const MetricsReport& report, const std::filesystem::path& path);
// Structured document with the power breakdown; key order is stable.
void write_report_json(const MetricsReport& report, const std::filesystem::path& path);

}  // namespace aslsim
