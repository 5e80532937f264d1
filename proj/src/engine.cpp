#include "aslsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aslsim/rng.hpp"

namespace aslsim {

const char* to_string(Protocol p) {
    switch (p) {
        case Protocol::orchestra: return "orchestra";
        case Protocol::orchestra_lb: return "orchestra-lb";
        case Protocol::prilm: return "prilm";
        case Protocol::rl_asl: return "rl-asl";
        case Protocol::rl_asl_lb: return "rl-asl-lb";
    }
    return "?";
}

Protocol protocol_from_string(const std::string& s) {
    if (s == "orchestra") return Protocol::orchestra;
    if (s == "orchestra-lb") return Protocol::orchestra_lb;
    if (s == "prilm") return Protocol::prilm;
    if (s == "rl-asl") return Protocol::rl_asl;
    if (s == "rl-asl-lb") return Protocol::rl_asl_lb;
    throw std::invalid_argument("unknown protocol: " + s);
}

SchedulerKind scheduler_for(Protocol p) {
    return (p == Protocol::orchestra_lb || p == Protocol::rl_asl_lb) ? SchedulerKind::link_based
                                                                     : SchedulerKind::receiver_based;
}

bool protocol_uses_agent(Protocol p) { return p == Protocol::rl_asl || p == Protocol::rl_asl_lb; }

HandshakeState two_h_observe(HandshakeState state, HandshakeEvent event) {
    switch (event) {
        case HandshakeEvent::ack_received: state.phase = HandshakeState::Phase::synced; break;
        case HandshakeEvent::parent_changed: state.phase = HandshakeState::Phase::unsynced; break;
    }
    return state;
}

ListenDecision prilm_decide(std::span<const PrilmLinkState> senders, std::int64_t asn) {
    for (const PrilmLinkState& s : senders) {
        if (!s.next_tx_asn || *s.next_tx_asn <= asn) return ListenDecision::listen;
    }
    return ListenDecision::skip;
}

Engine::Engine(Topology topology, std::map<int, TrafficProfile> traffic, EngineOptions options)
    : topo_(std::move(topology)), opt_(std::move(options)) {
    opt_.slotframe.validate();
    schedule_ = build_schedule(topo_, scheduler_for(opt_.protocol), opt_.slotframe);

    const bool rl = protocol_uses_agent(opt_.protocol);
    if (rl && !opt_.training) {
        if (!opt_.frozen_table) throw std::invalid_argument("rl protocols need a frozen table in eval mode");
        shared_table_ = std::make_shared<QTable>(*opt_.frozen_table);
        shared_table_->set_mode(QTable::Mode::frozen);
    }
    if (opt_.protocol == Protocol::prilm) {
        for (const auto& [id, prof] : traffic)
            if (prof.jittered)
                throw std::invalid_argument("prilm requires non-jittered periodic traffic");
    }

    for (const NodeSpec& spec : topo_.nodes()) {
        NodeState& n = nodes_[spec.id];
        n.id = spec.id;
        n.role = spec.role;
        n.parent = spec.parent_id;
        n.children = topo_.children_of(spec.id);
        for (int c : n.children) {
            n.link_sync[c] = HandshakeState{};
            n.prilm[c] = PrilmLinkState{};
        }

        auto it = traffic.find(spec.id);
        if (it != traffic.end()) {
            n.generates = true;
            n.profile = it->second;
            n.traffic_rng.seed(derive_seed(opt_.seed, SeedDomain::traffic, static_cast<std::uint64_t>(spec.id)));
            n.next_gen_ms = uniform01(n.traffic_rng) * n.profile.mean_interval_s * 1000.0;
            if (!n.profile.jittered) {
                n.announce_period_slots =
                    std::llround(n.profile.mean_interval_s * 1000.0 / opt_.slotframe.timeslot_ms);
            }
        }

        if (rl && !n.children.empty()) {
            QTable* table = nullptr;
            if (opt_.training) {
                n.own_table = std::make_unique<QTable>(opt_.agent.bins.state_count());
                table = n.own_table.get();
            } else {
                table = shared_table_.get();
            }
            n.agent = std::make_unique<Agent>(
                opt_.agent, *table, n.children,
                derive_seed(opt_.seed, SeedDomain::agent, static_cast<std::uint64_t>(spec.id)));
        }

        ledgers_[spec.id] = EnergyLedger{};
        counters_[spec.id] = OriginCounters{};
    }

    tx_index_.resize(opt_.slotframe.length);
    rx_index_.resize(opt_.slotframe.length);
    for (const auto& [id, cells] : schedule_) {
        for (const Cell& c : cells) {
            auto& index = (c.dir == CellDir::tx) ? tx_index_ : rx_index_;
            index[c.slot_offset].emplace_back(id, c);
        }
    }
    for (auto& bucket : tx_index_)
        std::sort(bucket.begin(), bucket.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& bucket : rx_index_) {
        std::sort(bucket.begin(), bucket.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first < b.first;
            if (a.second.channel_offset != b.second.channel_offset)
                return a.second.channel_offset < b.second.channel_offset;
            return a.second.peer < b.second.peer;
        });
    }

    trace_.slotframe_len = opt_.slotframe.length;
    trace_.channel_offsets = opt_.slotframe.channel_offsets;
    trace_.timeslot_ms = opt_.slotframe.timeslot_ms;
    trace_.warmup_end_asn = opt_.warmup_end_asn;
    trace_.seed = opt_.seed;
}

void Engine::emit(SlotEvent e) {
    slot_events_.push_back(e);
    if (opt_.record_trace) trace_.events.push_back(std::move(e));
}

double Engine::link_success(int src, int dst) const {
    auto it = opt_.link_success_overrides.find({src, dst});
    return it != opt_.link_success_overrides.end() ? it->second : opt_.link_success_prob;
}

void Engine::generate_traffic(std::int64_t asn) {
    const double tau = opt_.slotframe.timeslot_ms;
    const double slot_end_ms = static_cast<double>(asn + 1) * tau;
    const int slot = static_cast<int>(asn % opt_.slotframe.length);
    for (auto& [id, n] : nodes_) {
        if (!n.generates) continue;
        while (n.next_gen_ms < slot_end_ms) {
            const std::uint64_t seq = ++next_seq_;
            counters_[id].generated += 1;
            emit(SlotEvent{asn, slot, 0, id, n.parent.value_or(0), EventKind::gen, seq, "-"});
            if (static_cast<int>(n.queue.size()) >= opt_.slotframe.queue_capacity) {
                counters_[id].dropped_queue += 1;
                emit(SlotEvent{asn, slot, 0, id, id, EventKind::drop_queue, seq, "-"});
            } else {
                n.queue.push_back(PacketRecord{seq, id, id, n.parent.value_or(0), asn, std::nullopt, 0});
            }
            n.next_gen_ms += next_interval(n.profile, n.traffic_rng) * 1000.0;
        }
    }
}

void Engine::decide_listening(std::int64_t asn, int slot) {
    listening_.clear();
    addressed_.clear();

    int prev_node = -1;
    for (std::size_t i = 0; i < rx_index_[slot].size(); ++i) {
        const auto& [id, cell] = rx_index_[slot][i];
        if (id == prev_node) {
            // additional rx cell for the same node in this slot: attach only
            // if it shares the already-active channel (single radio)
            auto lit = listening_.find(id);
            if (lit != listening_.end() && lit->second.channel == cell.channel_offset &&
                cell.peer != 0)
                lit->second.peers.push_back(cell.peer);
            continue;
        }
        prev_node = id;
        NodeState& n = nodes_.at(id);

        // tx takes precedence over rx when both land on the same slot
        bool busy_tx = false;
        for (const Cell& c : schedule_.at(id))
            if (c.dir == CellDir::tx && c.slot_offset == slot && !n.queue.empty()) busy_tx = true;
        if (busy_tx) continue;

        bool listen = true;
        bool agent_pending = false;
        switch (opt_.protocol) {
            case Protocol::orchestra:
            case Protocol::orchestra_lb:
                listen = true;
                break;
            case Protocol::prilm: {
                std::vector<PrilmLinkState> senders;
                senders.reserve(n.children.size());
                for (int c : n.children) senders.push_back(n.prilm.at(c));
                listen = prilm_decide(senders, asn) == ListenDecision::listen;
                break;
            }
            case Protocol::rl_asl:
            case Protocol::rl_asl_lb: {
                if (n.children.empty()) {
                    // nothing is 2H-registered to this slot, safe to sleep
                    listen = false;
                } else {
                    n.slot_decisions += 1;
                    listen = n.agent->on_rx_slot(asn) == RxAction::listen_rx;
                    agent_pending = n.agent->awaiting_outcome();
                }
                break;
            }
        }

        if (listen) {
            Listening l;
            l.channel = cell.channel_offset;
            if (cell.peer != 0) l.peers.push_back(cell.peer);
            l.agent_pending = agent_pending;
            listening_[id] = std::move(l);
        } else {
            emit(SlotEvent{asn, slot, cell.channel_offset, id, 0, EventKind::skip, 0, "-"});
        }
    }
}

void Engine::drop_or_retry(NodeState& sender, std::int64_t asn, int slot, int channel) {
    PacketRecord& pkt = sender.queue.front();
    if (pkt.retries_used >= opt_.slotframe.max_retries) {
        counters_[pkt.origin].dropped_retry += 1;
        emit(SlotEvent{asn, slot, channel, sender.id, pkt.origin, EventKind::drop_retry, pkt.seq, "-"});
        sender.queue.pop_front();
    } else {
        pkt.retries_used += 1;
    }
}

void Engine::resolve_transmissions(std::int64_t asn, int slot) {
    // group contenders by receiver
    std::map<int, std::vector<std::pair<int, Cell>>> by_receiver;
    for (const auto& [id, cell] : tx_index_[slot]) {
        if (nodes_.at(id).queue.empty()) continue;
        by_receiver[cell.peer].emplace_back(id, cell);
    }

    for (auto& [receiver, contenders] : by_receiver) {
        // shared-slot contention resolves to a single transmitter; the rest
        // back off silently and keep their packets queued
        std::size_t winner_idx = 0;
        if (contenders.size() > 1) {
            const std::uint64_t h = event_hash(
                derive_seed(opt_.seed, SeedDomain::contention, static_cast<std::uint64_t>(receiver)),
                static_cast<std::uint64_t>(asn));
            winner_idx = static_cast<std::size_t>(h % contenders.size());
        }
        const auto& [sender_id, cell] = contenders[winner_idx];
        NodeState& sender = nodes_.at(sender_id);
        NodeState& recv = nodes_.at(receiver);
        PacketRecord pkt = sender.queue.front();

        sender.slot_tx_ms += 0.4 * opt_.slotframe.timeslot_ms;
        sender.slot_rx_receive_ms += 0.1 * opt_.slotframe.timeslot_ms;  // ack window

        bool radio_match = false;
        auto lit = listening_.find(receiver);
        if (lit != listening_.end() && lit->second.channel == cell.channel_offset) {
            const auto& peers = lit->second.peers;
            radio_match = peers.empty() || std::find(peers.begin(), peers.end(), sender_id) != peers.end();
        }

        bool delivered = false;
        if (radio_match) {
            addressed_[receiver] = {sender_id, false};
            const double p = link_success(sender_id, receiver);
            delivered = p >= 1.0 ||
                        uniform01_from_hash(event_hash(
                            derive_seed(opt_.seed, SeedDomain::link_loss, static_cast<std::uint64_t>(sender_id)),
                            static_cast<std::uint64_t>(asn))) < p;
        }

        if (!delivered) {
            emit(SlotEvent{asn, slot, cell.channel_offset, sender_id, receiver, EventKind::tx, pkt.seq, "fail"});
            drop_or_retry(sender, asn, slot, cell.channel_offset);
            continue;
        }

        addressed_[receiver] = {sender_id, true};
        emit(SlotEvent{asn, slot, cell.channel_offset, sender_id, receiver, EventKind::tx, pkt.seq, "ok"});
        emit(SlotEvent{asn, slot, cell.channel_offset, receiver, sender_id, EventKind::ack, pkt.seq, "-"});
        sender.queue.pop_front();

        recv.link_sync[sender_id] = two_h_observe(recv.link_sync[sender_id], HandshakeEvent::ack_received);
        if (sender.announce_period_slots > 0)
            recv.prilm[sender_id].next_tx_asn = asn + sender.announce_period_slots;

        if (receiver == topo_.sink_id()) {
            counters_[pkt.origin].delivered += 1;
        } else if (static_cast<int>(recv.queue.size()) >= opt_.slotframe.queue_capacity) {
            counters_[pkt.origin].dropped_queue += 1;
            emit(SlotEvent{asn, slot, cell.channel_offset, receiver, pkt.origin, EventKind::drop_queue, pkt.seq,
                           "-"});
        } else {
            recv.queue.push_back(
                PacketRecord{pkt.seq, pkt.origin, receiver, recv.parent.value_or(0), pkt.created_asn,
                             std::nullopt, 0});
        }
    }
}

void Engine::resolve_listen_outcomes(std::int64_t asn, int slot) {
    const double tau = opt_.slotframe.timeslot_ms;
    for (const auto& [id, l] : listening_) {
        NodeState& n = nodes_.at(id);
        auto hit = addressed_.find(id);
        if (hit != addressed_.end()) {
            const auto [sender, delivered] = hit->second;
            if (delivered) {
                n.slot_rx_receive_ms += 0.9 * tau;
                n.slot_tx_ms += 0.1 * tau;  // ack back
            } else {
                n.slot_rx_receive_ms += tau;  // necessary listening, failed attempt
            }
            if (n.agent && l.agent_pending) {
                n.agent->report_outcome(asn, delivered, delivered ? sender : -1);
            } else if (n.agent && delivered) {
                n.agent->note_reception(sender, asn);
            }
        } else {
            n.slot_rx_idle_ms += tau;
            int channel = l.channel;
            emit(SlotEvent{asn, slot, channel, id, 0, EventKind::rx_idle, 0, "-"});
            if (n.agent && l.agent_pending) n.agent->report_outcome(asn, false, -1);
        }
    }
}

void Engine::charge_energy(std::int64_t asn) {
    const double tau = opt_.slotframe.timeslot_ms;
    const bool counted = asn >= opt_.warmup_end_asn;
    for (auto& [id, n] : nodes_) {
        if (counted) {
            EnergyLedger& led = ledgers_[id];
            const double cpu = (0.02 + 0.01 * n.slot_decisions) * tau;
            double radio = n.slot_tx_ms + n.slot_rx_receive_ms + n.slot_rx_idle_ms;
            const double overhead = std::min(opt_.slotframe.overhead_duty * tau, std::max(0.0, tau - radio));
            const double rx_receive = n.slot_rx_receive_ms + overhead;
            radio += overhead;
            const double lpm = std::clamp(radio - cpu, 0.0, tau - cpu);
            const double deep = tau - cpu - lpm;

            led.cpu_s += cpu / 1000.0;
            led.lpm_s += lpm / 1000.0;
            led.deep_lpm_s += deep / 1000.0;
            led.tx_s += n.slot_tx_ms / 1000.0;
            led.rx_receive_s += rx_receive / 1000.0;
            led.rx_idle_s += n.slot_rx_idle_ms / 1000.0;
            led.elapsed_s += tau / 1000.0;
        }
        n.slot_tx_ms = 0.0;
        n.slot_rx_receive_ms = 0.0;
        n.slot_rx_idle_ms = 0.0;
        n.slot_decisions = 0;
    }
}

const std::vector<SlotEvent>& Engine::step() {
    slot_events_.clear();
    const int slot = static_cast<int>(asn_ % opt_.slotframe.length);
    generate_traffic(asn_);
    decide_listening(asn_, slot);
    resolve_transmissions(asn_, slot);
    resolve_listen_outcomes(asn_, slot);
    charge_energy(asn_);
    asn_ += 1;
    trace_.duration_slots = asn_;
    return slot_events_;
}

void Engine::run(std::int64_t slots) {
    if (slots <= 0) throw std::invalid_argument("duration must be positive");
    for (std::int64_t i = 0; i < slots; ++i) step();
}

std::uint64_t Engine::in_flight() const {
    std::uint64_t total = 0;
    for (const auto& [id, n] : nodes_) total += n.queue.size();
    return total;
}

const Agent* Engine::agent_for(int node) const {
    auto it = nodes_.find(node);
    return it != nodes_.end() && it->second.agent ? it->second.agent.get() : nullptr;
}

const QTable* Engine::table_for(int node) const {
    auto it = nodes_.find(node);
    if (it == nodes_.end()) return nullptr;
    if (it->second.own_table) return it->second.own_table.get();
    return shared_table_.get();
}

HandshakeState Engine::handshake(int receiver, int sender) const {
    return nodes_.at(receiver).link_sync.at(sender);
}

std::vector<Engine::NodeModel> Engine::node_models() const {
    std::vector<NodeModel> out;
    for (const auto& [id, n] : nodes_) {
        if (!n.agent || !n.own_table) continue;
        out.push_back(NodeModel{id, n.own_table.get(), n.agent->episode().episodes_completed});
    }
    return out;
}

}  // namespace aslsim
