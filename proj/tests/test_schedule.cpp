#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "aslsim/schedule.hpp"

using namespace aslsim;

TEST_CASE("rx_slot_for is the node id mod L") {
    CHECK(rx_slot_for(5, 17) == 5);
    CHECK(rx_slot_for(17, 17) == 0);
    // pigeonhole: ids differing by L collide
    CHECK(rx_slot_for(3, 17) == rx_slot_for(20, 17));
}

TEST_CASE("link_slot_for hashes the ordered pair") {
    CHECK(link_slot_for(3, 2, 17) == 10);  // (3*31 + 2) mod 17
    CHECK(link_slot_for(0, 0, 17) == 0);
}

TEST_CASE("link_slot_for is directional for almost all id pairs") {
    // (a*31+b) == (b*31+a) mod 17 iff a == b mod 17, so among ordered pairs
    // a != b below 64 exactly 180 are symmetric.
    int asymmetric = 0;
    int total = 0;
    for (int a = 0; a < 64; ++a) {
        for (int b = 0; b < 64; ++b) {
            if (a == b) continue;
            ++total;
            if (link_slot_for(a, b, 17) != link_slot_for(b, a, 17)) ++asymmetric;
        }
    }
    CHECK(total == 4032);
    CHECK(asymmetric == 3852);
}

TEST_CASE("receiver-based schedule follows the identity hash") {
    Topology t = builtin_topology("simple5");
    SlotframeConfig cfg;
    Schedule s = build_schedule(t, SchedulerKind::receiver_based, cfg);

    // relay 2 listens at slot 2, the leaves transmit there
    bool relay_rx_ok = false;
    for (const Cell& c : s.at(2))
        if (c.dir == CellDir::rx) relay_rx_ok = (c.slot_offset == 2);
    CHECK(relay_rx_ok);
    for (int leaf : {3, 4, 5}) {
        bool tx_ok = false;
        for (const Cell& c : s.at(leaf))
            if (c.dir == CellDir::tx) tx_ok = (c.slot_offset == 2 && c.peer == 2);
        CHECK(tx_ok);
    }
    // sink has no tx cell
    for (const Cell& c : s.at(1)) CHECK(c.dir == CellDir::rx);
    // cells stay inside the slotframe and channel ranges
    for (const auto& [id, cells] : s) {
        for (const Cell& c : cells) {
            CHECK(c.slot_offset < cfg.length);
            CHECK(c.channel_offset < cfg.channel_offsets);
        }
    }
}

TEST_CASE("link-based schedule assigns one rx cell per child link") {
    Topology t = builtin_topology("simple5");
    SlotframeConfig cfg;
    Schedule s = build_schedule(t, SchedulerKind::link_based, cfg);
    int relay_rx = 0;
    for (const Cell& c : s.at(2))
        if (c.dir == CellDir::rx) ++relay_rx;
    CHECK(relay_rx == 3);

    // tx and rx ends of each link agree on slot and channel
    for (int leaf : {3, 4, 5}) {
        const Cell* tx = nullptr;
        for (const Cell& c : s.at(leaf))
            if (c.dir == CellDir::tx) tx = &c;
        REQUIRE(tx != nullptr);
        bool matched = false;
        for (const Cell& c : s.at(2))
            if (c.dir == CellDir::rx && c.peer == leaf)
                matched = c.slot_offset == tx->slot_offset && c.channel_offset == tx->channel_offset;
        CHECK(matched);
    }
}

TEST_CASE("slotframe config validation") {
    SlotframeConfig bad;
    bad.length = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = SlotframeConfig{};
    bad.timeslot_ms = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = SlotframeConfig{};
    bad.channel_offsets = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
