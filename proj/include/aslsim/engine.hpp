#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aslsim/agent.hpp"
#include "aslsim/energy.hpp"
#include "aslsim/net_model.hpp"
#include "aslsim/qtable.hpp"
#include "aslsim/schedule.hpp"
#include "aslsim/trace.hpp"

namespace aslsim {

enum class Protocol { orchestra, orchestra_lb, prilm, rl_asl, rl_asl_lb };

const char* to_string(Protocol p);
Protocol protocol_from_string(const std::string& s);
SchedulerKind scheduler_for(Protocol p);
bool protocol_uses_agent(Protocol p);

// Transmitter/receiver coordination state, per inbound link. A receiver may
// apply its listening policy to a link only once the link is synced.
struct HandshakeState {
    enum class Phase { unsynced, synced };
    Phase phase = Phase::unsynced;
};

enum class HandshakeEvent { ack_received, parent_changed };

HandshakeState two_h_observe(HandshakeState state, HandshakeEvent event);

// Announced next-transmission slot for one (receiver, sender) pair.
struct PrilmLinkState {
    std::optional<std::int64_t> next_tx_asn;
};

enum class ListenDecision { listen, skip };

// Listen while any sender's announcement is unknown or already due. With no
// senders at all there is nothing to receive, so the slot is skipped.
ListenDecision prilm_decide(std::span<const PrilmLinkState> senders, std::int64_t asn);

// One hop-level packet in flight.
struct PacketRecord {
    std::uint64_t seq = 0;  // global id assigned at generation
    int origin = 0;
    int hop_src = 0;
    int hop_dst = 0;
    std::int64_t created_asn = 0;
    std::optional<std::int64_t> delivered_asn;
    int retries_used = 0;
};

struct OriginCounters {
    std::uint64_t generated = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped_retry = 0;
    std::uint64_t dropped_queue = 0;
};

struct EngineOptions {
    Protocol protocol = Protocol::orchestra;
    SlotframeConfig slotframe;
    AgentConfig agent;
    const QTable* frozen_table = nullptr;  // required by rl protocols unless training
    bool training = false;
    std::uint64_t seed = 1;
    double link_success_prob = 1.0;
    std::map<std::pair<int, int>, double> link_success_overrides;  // (src,dst) -> prob
    std::int64_t warmup_end_asn = 0;
    bool record_trace = true;
};

// Deterministic slot-by-slot simulator of the unicast slotframe. A single
// instance is strictly sequential; independent instances can run in parallel.
class Engine {
  public:
    Engine(Topology topology, std::map<int, TrafficProfile> traffic, EngineOptions options);

    // Advances one slot and returns the events it produced.
    const std::vector<SlotEvent>& step();

    void run(std::int64_t slots);

    std::int64_t asn() const { return asn_; }
    const SlotTrace& trace() const { return trace_; }
    SlotTrace release_trace() { return std::move(trace_); }
    const std::map<int, EnergyLedger>& ledgers() const { return ledgers_; }
    const std::map<int, OriginCounters>& origin_counters() const { return counters_; }
    std::uint64_t in_flight() const;

    const Agent* agent_for(int node) const;
    const QTable* table_for(int node) const;
    HandshakeState handshake(int receiver, int sender) const;

    // Episode-weighted merge inputs: (node, table, completed episodes).
    struct NodeModel {
        int node = 0;
        const QTable* table = nullptr;
        std::uint64_t episodes = 0;
    };
    std::vector<NodeModel> node_models() const;

  private:
    struct NodeState {
        int id = 0;
        NodeRole role = NodeRole::leaf;
        std::optional<int> parent;
        std::vector<int> children;
        std::deque<PacketRecord> queue;

        bool generates = false;
        TrafficProfile profile;
        double next_gen_ms = 0.0;
        std::int64_t announce_period_slots = 0;  // 0 = sender announces nothing
        std::mt19937_64 traffic_rng;

        std::map<int, HandshakeState> link_sync;  // by child
        std::map<int, PrilmLinkState> prilm;      // by child
        std::unique_ptr<QTable> own_table;
        std::unique_ptr<Agent> agent;

        // per-slot scratch, milliseconds
        double slot_tx_ms = 0.0;
        double slot_rx_receive_ms = 0.0;
        double slot_rx_idle_ms = 0.0;
        int slot_decisions = 0;
    };

    void generate_traffic(std::int64_t asn);
    void decide_listening(std::int64_t asn, int slot);
    void resolve_transmissions(std::int64_t asn, int slot);
    void resolve_listen_outcomes(std::int64_t asn, int slot);
    void charge_energy(std::int64_t asn);
    void emit(SlotEvent e);
    double link_success(int src, int dst) const;
    void drop_or_retry(NodeState& sender, std::int64_t asn, int slot, int channel);

    Topology topo_;
    EngineOptions opt_;
    Schedule schedule_;
    std::map<int, NodeState> nodes_;
    std::shared_ptr<QTable> shared_table_;  // eval-mode copy, frozen

    // per slot offset: (node, cell) pairs
    std::vector<std::vector<std::pair<int, Cell>>> tx_index_;
    std::vector<std::vector<std::pair<int, Cell>>> rx_index_;

    std::int64_t asn_ = 0;
    std::uint64_t next_seq_ = 0;
    SlotTrace trace_;
    std::vector<SlotEvent> slot_events_;
    std::map<int, EnergyLedger> ledgers_;
    std::map<int, OriginCounters> counters_;

    // slot-scoped listening state
    struct Listening {
        int channel = -1;
        std::vector<int> peers;  // empty = any
        bool agent_pending = false;
    };
    std::map<int, Listening> listening_;
    std::map<int, std::pair<int, bool>> addressed_;  // receiver -> (sender, delivered)
};

}  // namespace aslsim
