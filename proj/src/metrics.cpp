#include "aslsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"

#include "aslsim/atomic_write.hpp"

namespace aslsim {

namespace {

struct PacketFates {
    // seq -> created_asn for counted (post-warmup, leaf-origin) packets
    std::map<std::uint64_t, std::int64_t> counted;
    std::map<std::uint64_t, std::int64_t> delivered;  // seq -> delivered asn
    std::set<std::uint64_t> dropped;
};

PacketFates collect_fates(const SlotTrace& trace, const Topology& topology, bool leaves_only) {
    std::set<int> origins;
    if (leaves_only) {
        for (int id : topology.leaf_ids()) origins.insert(id);
    } else {
        for (int id : topology.node_ids()) origins.insert(id);
    }
    const int sink = topology.sink_id();

    PacketFates f;
    for (const SlotEvent& e : trace.events) {
        switch (e.kind) {
            case EventKind::gen:
                if (e.asn >= trace.warmup_end_asn && origins.count(e.src))
                    f.counted.emplace(e.seq, e.asn);
                break;
            case EventKind::tx:
                if (e.dst == sink && e.outcome == "ok") f.delivered.emplace(e.seq, e.asn);
                break;
            case EventKind::drop_retry:
            case EventKind::drop_queue:
                f.dropped.insert(e.seq);
                break;
            default:
                break;
        }
    }
    return f;
}

double percentile(const std::vector<double>& sorted, double q) {
    // nearest-rank
    const std::size_t n = sorted.size();
    std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    if (rank == 0) rank = 1;
    if (rank > n) rank = n;
    return sorted[rank - 1];
}

}  // namespace

double pdr(const SlotTrace& trace, const Topology& topology) {
    const PacketFates f = collect_fates(trace, topology, /*leaves_only=*/true);
    std::uint64_t counted = 0;
    std::uint64_t delivered = 0;
    for (const auto& [seq, created] : f.counted) {
        const bool done = f.delivered.count(seq) > 0;
        const bool dropped = f.dropped.count(seq) > 0;
        if (!done && !dropped) continue;  // in flight at horizon
        ++counted;
        if (done) ++delivered;
    }
    if (counted == 0) return 1.0;
    return static_cast<double>(delivered) / static_cast<double>(counted);
}

LatencySummary latency_stats(const SlotTrace& trace, const Topology& topology) {
    const PacketFates f = collect_fates(trace, topology, /*leaves_only=*/false);
    std::vector<double> delays;
    for (const auto& [seq, created] : f.counted) {
        auto it = f.delivered.find(seq);
        if (it == f.delivered.end()) continue;
        delays.push_back(static_cast<double>(it->second - created) * trace.timeslot_ms);
    }
    if (delays.empty()) throw std::runtime_error("no delivered packets to summarize");
    std::sort(delays.begin(), delays.end());
    LatencySummary s;
    s.samples = delays.size();
    double sum = 0.0;
    for (double d : delays) sum += d;
    s.mean_ms = sum / static_cast<double>(delays.size());
    s.median_ms = percentile(delays, 0.5);
    s.p95_ms = percentile(delays, 0.95);
    s.p99_ms = percentile(delays, 0.99);
    return s;
}

std::uint64_t idle_listen_count(const SlotTrace& trace, int node) {
    std::uint64_t count = 0;
    for (const SlotEvent& e : trace.events)
        if (e.kind == EventKind::rx_idle && e.src == node && e.asn >= trace.warmup_end_asn) ++count;
    return count;
}

MetricsReport build_report(const SlotTrace& trace, const Topology& topology,
                           const std::map<int, EnergyLedger>& ledgers,
                           const PlatformCurrents& currents, double battery_joules) {
    MetricsReport r;
    r.pdr = pdr(trace, topology);
    try {
        r.latency = latency_stats(trace, topology);
    } catch (const std::runtime_error&) {
        r.latency = LatencySummary{};
    }

    PowerBreakdown total{};
    double rdc_sum = 0.0;
    for (const auto& [id, ledger] : ledgers) {
        NodeMetrics nm;
        nm.node = id;
        nm.role = to_string(topology.node(id).role);
        nm.power = average_power(ledger, currents);
        nm.rdc = radio_duty_cycle(ledger);
        nm.rx_idle_slots = idle_listen_count(trace, id);
        nm.rx_idle_s = ledger.rx_idle_s;
        nm.lifetime_days = lifetime_days(nm.power.total_mw, battery_joules);
        total.cpu_mw += nm.power.cpu_mw;
        total.lpm_mw += nm.power.lpm_mw;
        total.deep_lpm_mw += nm.power.deep_lpm_mw;
        total.tx_mw += nm.power.tx_mw;
        total.rx_receive_mw += nm.power.rx_receive_mw;
        total.rx_idle_mw += nm.power.rx_idle_mw;
        total.total_mw += nm.power.total_mw;
        rdc_sum += nm.rdc;
        r.network_rx_idle_slots += nm.rx_idle_slots;
        r.network_rx_idle_s += nm.rx_idle_s;
        r.nodes.push_back(std::move(nm));
    }
    const double n = static_cast<double>(r.nodes.size());
    if (n > 0) {
        r.network_power = PowerBreakdown{total.cpu_mw / n,       total.lpm_mw / n,
                                         total.deep_lpm_mw / n,  total.tx_mw / n,
                                         total.rx_receive_mw / n, total.rx_idle_mw / n,
                                         total.total_mw / n};
        r.network_rdc = rdc_sum / n;
        r.network_lifetime_days = lifetime_days(r.network_power.total_mw, battery_joules);
    }
    return r;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

void write_report_csv(const MetricsReport& report, const std::filesystem::path& path) {
    write_file_atomic(path, /*binary=*/false, [&](std::ostream& os) {
        os << "scope,node,role,cpu_mw,lpm_mw,deep_lpm_mw,tx_mw,rx_receive_mw,rx_idle_mw,total_mw,rdc,"
              "rx_idle_slots,rx_idle_s,lifetime_days,pdr,latency_mean_ms,latency_median_ms,"
              "latency_p95_ms,latency_p99_ms\n";
        for (const NodeMetrics& nm : report.nodes) {
            os << "node," << nm.node << ',' << nm.role << ',' << fmt(nm.power.cpu_mw) << ','
               << fmt(nm.power.lpm_mw) << ',' << fmt(nm.power.deep_lpm_mw) << ','
               << fmt(nm.power.tx_mw) << ',' << fmt(nm.power.rx_receive_mw) << ','
               << fmt(nm.power.rx_idle_mw) << ',' << fmt(nm.power.total_mw) << ',' << fmt(nm.rdc)
               << ',' << nm.rx_idle_slots << ',' << fmt(nm.rx_idle_s) << ','
               << fmt(nm.lifetime_days) << ",,,,,\n";
        }
        const PowerBreakdown& p = report.network_power;
        os << "network,0,-," << fmt(p.cpu_mw) << ',' << fmt(p.lpm_mw) << ',' << fmt(p.deep_lpm_mw)
           << ',' << fmt(p.tx_mw) << ',' << fmt(p.rx_receive_mw) << ',' << fmt(p.rx_idle_mw) << ','
           << fmt(p.total_mw) << ',' << fmt(report.network_rdc) << ','
           << report.network_rx_idle_slots << ',' << fmt(report.network_rx_idle_s) << ','
           << fmt(report.network_lifetime_days) << ',' << fmt(report.pdr) << ','
           << fmt(report.latency.mean_ms) << ',' << fmt(report.latency.median_ms) << ','
           << fmt(report.latency.p95_ms) << ',' << fmt(report.latency.p99_ms) << "\n";
    });
}

void write_report_json(const MetricsReport& report, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["pdr"] = report.pdr;
    j["latency_ms"] = {
        {"samples", report.latency.samples}, {"mean", report.latency.mean_ms},
        {"median", report.latency.median_ms}, {"p95", report.latency.p95_ms},
        {"p99", report.latency.p99_ms},
    };
    auto power_json = [](const PowerBreakdown& p) {
        return nlohmann::ordered_json{
            {"cpu_mw", p.cpu_mw},
            {"lpm_mw", p.lpm_mw},
            {"deep_lpm_mw", p.deep_lpm_mw},
            {"tx_mw", p.tx_mw},
            {"rx_receive_mw", p.rx_receive_mw},
            {"rx_idle_mw", p.rx_idle_mw},
            {"total_mw", p.total_mw},
        };
    };
    j["network"] = {
        {"power", power_json(report.network_power)},
        {"rdc", report.network_rdc},
        {"rx_idle_slots", report.network_rx_idle_slots},
        {"rx_idle_s", report.network_rx_idle_s},
        {"lifetime_days", report.network_lifetime_days},
    };
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const NodeMetrics& nm : report.nodes) {
        nodes.push_back({
            {"node", nm.node},
            {"role", nm.role},
            {"power", power_json(nm.power)},
            {"rdc", nm.rdc},
            {"rx_idle_slots", nm.rx_idle_slots},
            {"rx_idle_s", nm.rx_idle_s},
            {"lifetime_days", nm.lifetime_days},
        });
    }
    j["nodes"] = std::move(nodes);

    write_file_atomic(path, /*binary=*/false, [&](std::ostream& os) { os << j.dump(2) << "\n"; });
}

}  // namespace aslsim
