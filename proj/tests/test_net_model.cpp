#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <set>

#include "aslsim/net_model.hpp"
#include "aslsim/rng.hpp"

using namespace aslsim;

namespace {

std::vector<NodeSpec> five_node_spec() {
    return {
        {1, NodeRole::sink, 0.0, 0.0, std::nullopt},
        {2, NodeRole::relay, 0.0, 20.0, 1},
        {3, NodeRole::leaf, -10.0, 35.0, 2},
        {4, NodeRole::leaf, 0.0, 40.0, 2},
        {5, NodeRole::leaf, 10.0, 35.0, 2},
    };
}

}  // namespace

TEST_CASE("build_topology accepts a valid 5-node tree") {
    Topology t = build_topology(five_node_spec(), 60.0);
    CHECK(t.size() == 5);
    CHECK(t.sink_id() == 1);
    CHECK(t.children_of(2) == std::vector<int>{3, 4, 5});
    CHECK(t.depth_of(5) == 2);
}

TEST_CASE("build_topology accepts a single sink") {
    Topology t = build_topology({{1, NodeRole::sink, 0.0, 0.0, std::nullopt}}, 10.0);
    CHECK(t.size() == 1);
    CHECK(t.leaf_ids().empty());
}

TEST_CASE("build_topology rejects out-of-range parent edges naming the edge") {
    auto spec = five_node_spec();
    spec[2].x = -80.0;  // node 3 far from its parent
    try {
        build_topology(spec, 60.0);
        FAIL("expected range error");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("3->2") != std::string::npos);
        CHECK(msg.find("d_max") != std::string::npos);
    }
}

TEST_CASE("build_topology rejects malformed specs") {
    auto dup = five_node_spec();
    dup[4].id = 4;
    CHECK_THROWS_AS(build_topology(dup, 60.0), std::invalid_argument);

    auto two_sinks = five_node_spec();
    two_sinks[1].role = NodeRole::sink;
    two_sinks[1].parent_id.reset();
    CHECK_THROWS_AS(build_topology(two_sinks, 60.0), std::invalid_argument);

    auto cycle = five_node_spec();
    cycle[1].parent_id = 3;  // 2 -> 3 -> 2
    cycle[2].parent_id = 2;
    CHECK_THROWS_AS(build_topology(cycle, 60.0), std::invalid_argument);

    auto orphan = five_node_spec();
    orphan[3].parent_id.reset();
    CHECK_THROWS_AS(build_topology(orphan, 60.0), std::invalid_argument);
}

TEST_CASE("builtin simple5 matches the published shape") {
    Topology t = builtin_topology("simple5");
    CHECK(t.size() == 5);
    CHECK(t.sink_id() == 1);
    CHECK(*t.parent_of(2) == 1);
    for (int leaf : {3, 4, 5}) {
        CHECK(*t.parent_of(leaf) == 2);
        CHECK(t.depth_of(leaf) == 2);
    }
}

TEST_CASE("builtin star22 matches the published parent edges") {
    Topology t = builtin_topology("star22");
    CHECK(t.size() == 22);
    const std::vector<std::pair<int, int>> edges = {
        {2, 1},  {3, 1},  {4, 1},  {5, 2},  {6, 2},  {7, 3},  {8, 3},
        {9, 4},  {10, 4}, {11, 5}, {12, 5}, {13, 6}, {14, 6}, {15, 7},
        {16, 7}, {17, 8}, {18, 8}, {19, 9}, {20, 9}, {21, 10}, {22, 10}};
    for (const auto& [child, parent] : edges) CHECK(*t.parent_of(child) == parent);
    for (int leaf : {11, 22}) CHECK(t.depth_of(leaf) == 3);
    for (int id : t.node_ids()) CHECK(t.depth_of(id) >= 0);  // every node reaches the sink
}

TEST_CASE("builtin rejects unknown names") {
    CHECK_THROWS_AS(builtin_topology("mesh99"), std::invalid_argument);
}

TEST_CASE("next_interval is exact for non-jittered profiles") {
    TrafficProfile p{17.0, 0.05, false};
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) CHECK(next_interval(p, rng) == 17.0);
}

TEST_CASE("next_interval sample mean matches the profile") {
    TrafficProfile p{13.0, 0.05, true};
    std::mt19937_64 rng(42);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += next_interval(p, rng);
    CHECK(sum / n == doctest::Approx(13.0).epsilon(0.05 / 13.0));
}

TEST_CASE("jittered draws are strictly positive even at extreme jitter") {
    TrafficProfile p{1.0, 2.0, true};  // sigma far above the mean
    std::mt19937_64 rng(7);
    for (int i = 0; i < 1000000; ++i) {
        if (next_interval(p, rng) <= 0.0) FAIL("non-positive interval");
    }
}

TEST_CASE("interval sequences are deterministic per seed") {
    TrafficProfile p{13.0, 0.05, true};
    std::mt19937_64 a(9), b(9);
    for (int i = 0; i < 1000; ++i) CHECK(next_interval(p, a) == next_interval(p, b));
}

TEST_CASE("traffic_pattern high assigns 13s to all simple5 leaves") {
    Topology t = builtin_topology("simple5");
    auto m = traffic_pattern("high", t);
    CHECK(m.size() == 3);
    for (int id : {3, 4, 5}) {
        REQUIRE(m.count(id));
        CHECK(m[id].mean_interval_s == 13.0);
        CHECK(m[id].jittered);
    }
}

TEST_CASE("traffic_pattern periodic star22 assigns node 13 a 23s period") {
    Topology t = builtin_topology("star22");
    auto m = traffic_pattern("periodic", t);
    REQUIRE(m.count(13));
    CHECK(m[13].mean_interval_s == 23.0);
    CHECK_FALSE(m[13].jittered);
    CHECK_FALSE(m.count(14));  // unlisted leaf stays silent
}

TEST_CASE("traffic_pattern periodic simple5 gives sink and relay no profile") {
    Topology t = builtin_topology("simple5");
    auto m = traffic_pattern("periodic", t);
    CHECK_FALSE(m.count(1));
    CHECK_FALSE(m.count(2));
    CHECK(m.size() == 3);
}

TEST_CASE("traffic_pattern heterogeneous resolves node 4 to the 30s group") {
    Topology t = builtin_topology("star22");
    auto m = traffic_pattern("heterogeneous", t);
    CHECK(m[4].mean_interval_s == 30.0);
    CHECK(m[5].mean_interval_s == 50.0);  // relays listed in the pattern do generate
    CHECK(m[18].mean_interval_s == 73.0);
}

TEST_CASE("traffic_pattern sparse alternates by id parity") {
    Topology t = builtin_topology("star22");
    auto m = traffic_pattern("sparse", t);
    CHECK(m[12].mean_interval_s == 60.0);
    CHECK(m[11].mean_interval_s == 73.0);
    CHECK_FALSE(m.count(2));  // relays are not senders here
}

TEST_CASE("traffic_pattern rejects unknown names") {
    Topology t = builtin_topology("simple5");
    CHECK_THROWS_AS(traffic_pattern("bursty", t), std::invalid_argument);
}
