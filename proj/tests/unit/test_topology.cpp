#include <doctest.h>

#include <set>

#include "antroute/errors.hpp"
#include "antroute/oracle.hpp"
#include "antroute/topology.hpp"

using namespace antroute;

namespace {

std::set<std::pair<std::uint32_t, std::uint32_t>> edge_set(const Topology& t) {
    std::set<std::pair<std::uint32_t, std::uint32_t>> s;
    for (const auto& c : t.channels.channels()) s.emplace(std::min(c.a.value, c.b.value), std::max(c.a.value, c.b.value));
    return s;
}

const CapacityModel kAmple = CapacityModel::constant(1'000'000);

}  // namespace

TEST_CASE("line, ring and grid shapes") {
    const auto line = generate_topology(TopologyParams::line(4), kAmple, 1);
    CHECK(line.nodes == 4);
    CHECK(edge_set(line) == std::set<std::pair<std::uint32_t, std::uint32_t>>{{0, 1}, {1, 2}, {2, 3}});

    const auto ring = generate_topology(TopologyParams::ring(5), kAmple, 1);
    CHECK(ring.channels.size() == 5);
    CHECK(edge_set(ring).contains({0, 4}));

    CHECK(generate_topology(TopologyParams::grid(3, 3), kAmple, 1).channels.size() == 12);
    for (std::uint32_t w = 1; w <= 6; ++w)
        for (std::uint32_t h = 1; h <= 6; ++h) {
            if (w * h < 2) continue;
            CHECK(generate_topology(TopologyParams::grid(w, h), kAmple, 1).channels.size() == w * (h - 1) + h * (w - 1));
        }
}

TEST_CASE("degenerate parameters are rejected") {
    CHECK_THROWS_AS(generate_topology(TopologyParams::line(1), kAmple, 1), TopologyError);
    CHECK_THROWS_AS(generate_topology(TopologyParams::ring(2), kAmple, 1), TopologyError);
    CHECK_THROWS_AS(generate_topology(TopologyParams::grid(1, 1), kAmple, 1), TopologyError);
    CHECK_THROWS_AS(generate_topology(TopologyParams::erdos_renyi(10, 1.5), kAmple, 1), TopologyError);
    CHECK_THROWS_AS(generate_topology(TopologyParams::erdos_renyi(10, 0.0), kAmple, 1), TopologyError);
    CHECK_THROWS_AS(generate_topology(TopologyParams::barabasi_albert(5, 0), kAmple, 1), TopologyError);
    CHECK_THROWS_AS(generate_topology(TopologyParams::barabasi_albert(5, 5), kAmple, 1), TopologyError);
    CHECK_THROWS_AS(generate_topology(TopologyParams::line(3), CapacityModel::uniform_range(5, 4), 1), TopologyError);
}

TEST_CASE("erdos_renyi is deterministic and connected") {
    const auto a = generate_topology(TopologyParams::erdos_renyi(100, 0.08), kAmple, 42);
    const auto b = generate_topology(TopologyParams::erdos_renyi(100, 0.08), kAmple, 42);
    CHECK(edge_set(a) == edge_set(b));
    CHECK(a == b);
    const auto c = generate_topology(TopologyParams::erdos_renyi(100, 0.08), kAmple, 43);
    CHECK(edge_set(a) != edge_set(c));

    const auto sparse = generate_topology(TopologyParams::erdos_renyi(200, 0.01), kAmple, 7);
    REQUIRE(sparse.generator);
    CHECK(sparse.generator->generated_nodes == 200);
    CHECK(sparse.nodes < 200);
    for (std::uint32_t v = 1; v < sparse.nodes; ++v)
        CHECK(oracle_shortest_path(sparse.nodes, sparse.channels, NodeId{0}, NodeId{v}, 1).has_value());
}

TEST_CASE("barabasi_albert edge count and determinism") {
    const auto t = generate_topology(TopologyParams::barabasi_albert(50, 3), kAmple, 5);
    CHECK(t.nodes == 50);
    CHECK(t.channels.size() == 6 + 3 * (50 - 4));
    CHECK(t == generate_topology(TopologyParams::barabasi_albert(50, 3), kAmple, 5));
}

TEST_CASE("capacity models") {
    const auto t = generate_topology(TopologyParams::grid(5, 5), CapacityModel::uniform_range(10, 20), 3);
    std::set<Msat> seen;
    for (const auto& c : t.channels.channels()) {
        CHECK(c.capacity_ab >= 10);
        CHECK(c.capacity_ab <= 20);
        seen.insert(c.capacity_ab);
    }
    CHECK(seen.size() > 1);
    // The edge set does not depend on the capacity model.
    const auto er1 = generate_topology(TopologyParams::erdos_renyi(60, 0.1), kAmple, 9);
    const auto er2 = generate_topology(TopologyParams::erdos_renyi(60, 0.1), CapacityModel::uniform_range(1, 9), 9);
    CHECK(edge_set(er1) == edge_set(er2));

    CapacityModel uni = kAmple;
    uni.unidirectional_fraction = 1.0;
    for (const auto& c : generate_topology(TopologyParams::ring(10), uni, 3).channels.channels()) {
        CHECK(c.mode != ChannelMode::Bidirectional);
        CHECK((c.capacity_ab == 0 || c.capacity_ba == 0));
    }
}

TEST_CASE("topology json round trip and strictness") {
    const auto t = generate_topology(TopologyParams::erdos_renyi(30, 0.2), CapacityModel::uniform_range(1, 100), 8);
    CHECK(topology_from_json(topology_to_json(t)) == t);

    auto doc = topology_to_json(t);
    doc["extra"] = 1;
    CHECK_THROWS_WITH_AS(topology_from_json(doc), "unknown key 'extra'", ConfigError);
    doc = topology_to_json(t);
    doc["channels"][0]["cap"] = 1;
    CHECK_THROWS_WITH_AS(topology_from_json(doc), "unknown key 'channels[0].cap'", ConfigError);
    doc = topology_to_json(t);
    doc["channels"][0]["b"] = doc["channels"][0]["a"];
    CHECK_THROWS_AS(topology_from_json(doc), TopologyError);
}

TEST_CASE("oracle shortest path") {
    const auto line = generate_topology(TopologyParams::line(4), kAmple, 1);
    auto p = oracle_shortest_path(4, line.channels, NodeId{0}, NodeId{3}, 100);
    REQUIRE(p);
    CHECK(p->hops() == 3);
    CHECK_FALSE(oracle_shortest_path(4, line.channels, NodeId{0}, NodeId{3}, 2'000'000));

    const auto grid = generate_topology(TopologyParams::grid(5, 5), kAmple, 1);
    CHECK(oracle_shortest_path(25, grid.channels, NodeId{0}, NodeId{24}, 1)->hops() == 8);

    // Two components.
    ChannelSet split{{Channel{NodeId{0}, NodeId{1}, 9, 9, ChannelMode::Bidirectional},
                      Channel{NodeId{2}, NodeId{3}, 9, 9, ChannelMode::Bidirectional}}};
    CHECK_FALSE(oracle_shortest_path(4, split, NodeId{0}, NodeId{3}, 1));
    CHECK(oracle_shortest_path(4, split, NodeId{2}, NodeId{2}, 1)->hops() == 0);
}

TEST_CASE("oracle respects direction") {
    ChannelSet cs{{Channel{NodeId{0}, NodeId{1}, 100, 0, ChannelMode::Bidirectional}}};
    CHECK(oracle_shortest_path(2, cs, NodeId{0}, NodeId{1}, 50));
    CHECK_FALSE(oracle_shortest_path(2, cs, NodeId{1}, NodeId{0}, 50));
}

TEST_CASE("oracle cheapest path") {
    // Square 0-1-3 and 0-2-3, plus a long cheap detour 0-4-5-3.
    ChannelSet cs;
    auto add = [&](std::uint32_t a, std::uint32_t b) {
        cs.add({NodeId{a}, NodeId{b}, 1000, 1000, ChannelMode::Bidirectional});
    };
    add(0, 1), add(1, 3), add(0, 2), add(2, 3), add(0, 4), add(4, 5), add(5, 3);
    const Msat fees[] = {100, 7, 5, 100, 1, 1};
    const auto p = oracle_cheapest_path(6, cs, NodeId{0}, NodeId{3}, 10, fees);
    REQUIRE(p);
    CHECK(p->fee == 2);
    CHECK(p->hops() == 3);
    const Msat flat[] = {0, 0, 0, 0, 0, 0};
    CHECK(oracle_cheapest_path(6, cs, NodeId{0}, NodeId{3}, 10, flat)->hops() == 2);
    CHECK_FALSE(oracle_cheapest_path(6, cs, NodeId{0}, NodeId{3}, 5000, fees));
}
