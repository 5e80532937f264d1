#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace aslsim {

enum class NodeRole { sink, relay, leaf };

const char* to_string(NodeRole role);
NodeRole node_role_from_string(const std::string& s);

struct NodeSpec {
    int id = 0;
    NodeRole role = NodeRole::leaf;
    double x = 0.0;
    double y = 0.0;
    std::optional<int> parent_id;
};

// Validated data-collection tree. Exactly one sink, every non-sink node has a
// parent edge whose Euclidean length is within d_max.
class Topology {
  public:
    Topology() = default;

    const std::vector<NodeSpec>& nodes() const { return nodes_; }
    double max_range() const { return d_max_; }

    int sink_id() const { return sink_id_; }
    const NodeSpec& node(int id) const;
    bool has_node(int id) const;
    std::optional<int> parent_of(int id) const;
    const std::vector<int>& children_of(int id) const;
    std::vector<int> node_ids() const;
    std::vector<int> leaf_ids() const;
    std::size_t size() const { return nodes_.size(); }

    // Hop count to the sink.
    int depth_of(int id) const;

  private:
    friend Topology build_topology(std::vector<NodeSpec> spec, double d_max);

    std::vector<NodeSpec> nodes_;  // sorted by id
    double d_max_ = 0.0;
    int sink_id_ = 0;
    std::map<int, std::vector<int>> children_;
};

double node_distance(const NodeSpec& a, const NodeSpec& b);

// Throws std::invalid_argument on duplicate ids, multiple/missing sinks,
// parent cycles or out-of-range parent edges (message names the edge).
Topology build_topology(std::vector<NodeSpec> spec, double d_max);

// name is one of {simple5, star22}.
Topology builtin_topology(const std::string& name);

struct TrafficProfile {
    double mean_interval_s = 0.0;
    double jitter_fraction = 0.05;
    bool jittered = true;
};

// Draws the next packet inter-arrival in seconds. Jittered profiles sample a
// normal with sigma = jitter_fraction * mean and redraw until positive.
double next_interval(const TrafficProfile& profile, std::mt19937_64& rng);

// name is one of {high, heterogeneous, sparse, periodic}. Node ids absent
// from the topology are skipped; the sink and unlisted relays get no profile.
std::map<int, TrafficProfile> traffic_pattern(const std::string& name, const Topology& topology);

}  // namespace aslsim
