#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "aslsim/net_model.hpp"

namespace aslsim {

struct SlotframeConfig {
    int length = 17;          // L, slots per slotframe
    double timeslot_ms = 10.0;
    int channel_offsets = 4;  // C
    int max_retries = 8;
    int queue_capacity = 8;
    double overhead_duty = 0.004;  // beacon/broadcast slotframes as Rx-equivalent duty

    void validate() const;
};

enum class CellDir { tx, rx };

struct Cell {
    int slot_offset = 0;
    int channel_offset = 0;
    CellDir dir = CellDir::rx;
    int peer = 0;  // node id; 0 = any sender (receiver-based Rx cell)
};

enum class SchedulerKind { receiver_based, link_based };

// Receiver-based slot hash: a node's Rx slot is a function of its id alone.
int rx_slot_for(int node_id, int slotframe_len);

// Link-based slot hash over the ordered (sender, receiver) pair.
int link_slot_for(int sender_id, int receiver_id, int slotframe_len);

using Schedule = std::map<int, std::vector<Cell>>;

Schedule build_schedule(const Topology& topology, SchedulerKind kind, const SlotframeConfig& cfg);

}  // namespace aslsim
