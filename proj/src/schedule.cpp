#include "aslsim/schedule.hpp"

#include <stdexcept>

namespace aslsim {

void SlotframeConfig::validate() const {
    if (length < 1) throw std::invalid_argument("slotframe length must be >= 1");
    if (timeslot_ms <= 0.0) throw std::invalid_argument("timeslot must be positive");
    if (channel_offsets < 1) throw std::invalid_argument("need at least one channel offset");
    if (max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
    if (queue_capacity < 1) throw std::invalid_argument("queue_capacity must be >= 1");
    if (overhead_duty < 0.0 || overhead_duty >= 1.0) throw std::invalid_argument("overhead_duty out of [0,1)");
}

int rx_slot_for(int node_id, int slotframe_len) { return node_id % slotframe_len; }

int link_slot_for(int sender_id, int receiver_id, int slotframe_len) {
    constexpr int kMultiplier = 31;
    return (sender_id * kMultiplier + receiver_id) % slotframe_len;
}

Schedule build_schedule(const Topology& topology, SchedulerKind kind, const SlotframeConfig& cfg) {
    cfg.validate();
    Schedule sched;
    for (const NodeSpec& n : topology.nodes()) sched[n.id];  // every node present

    if (kind == SchedulerKind::receiver_based) {
        for (const NodeSpec& n : topology.nodes()) {
            sched[n.id].push_back(Cell{rx_slot_for(n.id, cfg.length), n.id % cfg.channel_offsets,
                                       CellDir::rx, 0});
            if (n.parent_id) {
                const int p = *n.parent_id;
                sched[n.id].push_back(
                    Cell{rx_slot_for(p, cfg.length), p % cfg.channel_offsets, CellDir::tx, p});
            }
        }
    } else {
        for (const NodeSpec& n : topology.nodes()) {
            if (!n.parent_id) continue;
            const int p = *n.parent_id;
            const int slot = link_slot_for(n.id, p, cfg.length);
            const int chan = (n.id * 31 + p) % cfg.channel_offsets;
            sched[n.id].push_back(Cell{slot, chan, CellDir::tx, p});
            sched[p].push_back(Cell{slot, chan, CellDir::rx, n.id});
        }
    }
    return sched;
}

}  // namespace aslsim
