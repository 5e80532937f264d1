#include "aslsim/net_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "aslsim/rng.hpp"

namespace aslsim {

const char* to_string(NodeRole role) {
    switch (role) {
        case NodeRole::sink: return "sink";
        case NodeRole::relay: return "relay";
        case NodeRole::leaf: return "leaf";
    }
    return "?";
}

NodeRole node_role_from_string(const std::string& s) {
    if (s == "sink") return NodeRole::sink;
    if (s == "relay") return NodeRole::relay;
    if (s == "leaf") return NodeRole::leaf;
    throw std::invalid_argument("unknown node role: " + s);
}

double node_distance(const NodeSpec& a, const NodeSpec& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

const NodeSpec& Topology::node(int id) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                               [](const NodeSpec& n, int v) { return n.id < v; });
    if (it == nodes_.end() || it->id != id)
        throw std::out_of_range("no node with id " + std::to_string(id));
    return *it;
}

bool Topology::has_node(int id) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                               [](const NodeSpec& n, int v) { return n.id < v; });
    return it != nodes_.end() && it->id == id;
}

std::optional<int> Topology::parent_of(int id) const { return node(id).parent_id; }

const std::vector<int>& Topology::children_of(int id) const {
    static const std::vector<int> empty;
    auto it = children_.find(id);
    return it == children_.end() ? empty : it->second;
}

std::vector<int> Topology::node_ids() const {
    std::vector<int> ids;
    ids.reserve(nodes_.size());
    for (const auto& n : nodes_) ids.push_back(n.id);
    return ids;
}

std::vector<int> Topology::leaf_ids() const {
    std::vector<int> ids;
    for (const auto& n : nodes_)
        if (n.role == NodeRole::leaf) ids.push_back(n.id);
    return ids;
}

int Topology::depth_of(int id) const {
    int depth = 0;
    int cur = id;
    while (cur != sink_id_) {
        cur = *node(cur).parent_id;
        ++depth;
    }
    return depth;
}

Topology build_topology(std::vector<NodeSpec> spec, double d_max) {
    if (spec.empty()) throw std::invalid_argument("topology spec is empty");
    if (d_max <= 0.0) throw std::invalid_argument("d_max must be positive");

    std::sort(spec.begin(), spec.end(), [](const NodeSpec& a, const NodeSpec& b) { return a.id < b.id; });

    Topology topo;
    topo.d_max_ = d_max;

    std::set<int> ids;
    int sink_count = 0;
    for (const auto& n : spec) {
        if (n.id <= 0) throw std::invalid_argument("node ids must be positive, got " + std::to_string(n.id));
        if (!ids.insert(n.id).second)
            throw std::invalid_argument("duplicate node id " + std::to_string(n.id));
        if (n.role == NodeRole::sink) {
            ++sink_count;
            topo.sink_id_ = n.id;
            if (n.parent_id) throw std::invalid_argument("sink must not have a parent");
        } else if (!n.parent_id) {
            throw std::invalid_argument("node " + std::to_string(n.id) + " has no parent");
        }
    }
    if (sink_count != 1)
        throw std::invalid_argument("topology must have exactly one sink, found " + std::to_string(sink_count));

    topo.nodes_ = std::move(spec);

    for (const auto& n : topo.nodes_) {
        if (!n.parent_id) continue;
        if (!ids.count(*n.parent_id))
            throw std::invalid_argument("node " + std::to_string(n.id) + " references missing parent " +
                                        std::to_string(*n.parent_id));
        const NodeSpec& p = topo.node(*n.parent_id);
        const double d = node_distance(n, p);
        if (d > d_max) {
            std::ostringstream msg;
            msg << "parent edge " << n.id << "->" << p.id << " has distance " << d << " m exceeding d_max "
                << d_max << " m";
            throw std::invalid_argument(msg.str());
        }
        topo.children_[p.id].push_back(n.id);
    }
    for (auto& [id, kids] : topo.children_) std::sort(kids.begin(), kids.end());

    // Every node must reach the sink without revisiting a node.
    for (const auto& n : topo.nodes_) {
        std::set<int> seen{n.id};
        int cur = n.id;
        while (cur != topo.sink_id_) {
            cur = *topo.node(cur).parent_id;
            if (!seen.insert(cur).second)
                throw std::invalid_argument("parent cycle involving node " + std::to_string(cur));
        }
    }
    return topo;
}

namespace {

NodeSpec polar_node(int id, NodeRole role, double radius, double angle_deg, std::optional<int> parent) {
    const double rad = angle_deg * std::numbers::pi / 180.0;
    NodeSpec n;
    n.id = id;
    n.role = role;
    n.x = radius * std::cos(rad);
    n.y = radius * std::sin(rad);
    n.parent_id = parent;
    return n;
}

}  // namespace

Topology builtin_topology(const std::string& name) {
    constexpr double kRange = 60.0;
    if (name == "simple5") {
        std::vector<NodeSpec> spec{
            {1, NodeRole::sink, 0.0, 0.0, std::nullopt},
            {2, NodeRole::relay, 0.0, -20.0, 1},
            {3, NodeRole::leaf, -15.0, -35.0, 2},
            {4, NodeRole::leaf, 0.0, -40.0, 2},
            {5, NodeRole::leaf, 15.0, -35.0, 2},
        };
        return build_topology(std::move(spec), kRange);
    }
    if (name == "star22") {
        // Three first-ring relays, six second-ring relays, twelve leaves
        // placed on concentric rings so that every child sits close to its
        // parent's bearing.
        std::vector<NodeSpec> spec;
        spec.push_back({1, NodeRole::sink, 0.0, 0.0, std::nullopt});
        const double ring1 = 28.5, ring2 = 49.5, ring3 = 70.5;
        spec.push_back(polar_node(2, NodeRole::relay, ring1, 90.0, 1));
        spec.push_back(polar_node(3, NodeRole::relay, ring1, 210.0, 1));
        spec.push_back(polar_node(4, NodeRole::relay, ring1, 330.0, 1));
        spec.push_back(polar_node(5, NodeRole::relay, ring2, 70.0, 2));
        spec.push_back(polar_node(6, NodeRole::relay, ring2, 110.0, 2));
        spec.push_back(polar_node(7, NodeRole::relay, ring2, 190.0, 3));
        spec.push_back(polar_node(8, NodeRole::relay, ring2, 230.0, 3));
        spec.push_back(polar_node(9, NodeRole::relay, ring2, 310.0, 4));
        spec.push_back(polar_node(10, NodeRole::relay, ring2, 350.0, 4));
        spec.push_back(polar_node(11, NodeRole::leaf, ring3, 62.0, 5));
        spec.push_back(polar_node(12, NodeRole::leaf, ring3, 78.0, 5));
        spec.push_back(polar_node(13, NodeRole::leaf, ring3, 102.0, 6));
        spec.push_back(polar_node(14, NodeRole::leaf, ring3, 118.0, 6));
        spec.push_back(polar_node(15, NodeRole::leaf, ring3, 182.0, 7));
        spec.push_back(polar_node(16, NodeRole::leaf, ring3, 198.0, 7));
        spec.push_back(polar_node(17, NodeRole::leaf, ring3, 222.0, 8));
        spec.push_back(polar_node(18, NodeRole::leaf, ring3, 238.0, 8));
        spec.push_back(polar_node(19, NodeRole::leaf, ring3, 302.0, 9));
        spec.push_back(polar_node(20, NodeRole::leaf, ring3, 318.0, 9));
        spec.push_back(polar_node(21, NodeRole::leaf, ring3, 342.0, 10));
        spec.push_back(polar_node(22, NodeRole::leaf, ring3, 358.0, 10));
        return build_topology(std::move(spec), kRange);
    }
    throw std::invalid_argument("unknown builtin topology: " + name);
}

double next_interval(const TrafficProfile& profile, std::mt19937_64& rng) {
    if (profile.mean_interval_s <= 0.0) throw std::invalid_argument("mean_interval must be positive");
    if (!profile.jittered) return profile.mean_interval_s;
    const double sigma = profile.jitter_fraction * profile.mean_interval_s;
    NormalSampler normal;
    double v;
    do {
        v = normal(rng, profile.mean_interval_s, sigma);
    } while (v <= 0.0);
    return v;
}

std::map<int, TrafficProfile> traffic_pattern(const std::string& name, const Topology& topology) {
    std::map<int, TrafficProfile> out;
    auto assign = [&](int id, double interval_s, bool jittered) {
        if (!topology.has_node(id)) return;
        if (id == topology.sink_id()) return;
        out[id] = TrafficProfile{interval_s, 0.05, jittered};
    };

    if (name == "high") {
        for (int id : topology.leaf_ids()) assign(id, 13.0, true);
    } else if (name == "heterogeneous") {
        for (int id : {3, 11, 15, 19}) assign(id, 17.0, true);
        for (int id : {4, 12, 16, 20}) assign(id, 30.0, true);
        for (int id : {5, 6, 13, 17, 21}) assign(id, 50.0, true);
        for (int id : {18, 22}) assign(id, 73.0, true);
    } else if (name == "sparse") {
        for (int id : topology.leaf_ids()) assign(id, id % 2 == 0 ? 60.0 : 73.0, true);
    } else if (name == "periodic") {
        for (int id : {3, 11, 15, 19}) assign(id, 17.0, false);
        for (int id : {4, 12, 16, 20}) assign(id, 19.0, false);
        for (int id : {5, 13, 17, 21}) assign(id, 23.0, false);
        for (int id : {18, 22}) assign(id, 29.0, false);
    } else {
        throw std::invalid_argument("unknown traffic pattern: " + name);
    }
    return out;
}

}  // namespace aslsim
