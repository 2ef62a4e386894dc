#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "antroute/errors.hpp"
#include "antroute/scenario.hpp"

using namespace antroute;
using nlohmann::json;

namespace {

json minimal() {
    return json::parse(R"({
        "seed": 5,
        "topology": {"generate": {"kind": "line", "n": 3}},
        "workload": {"payments": [{"payer": 0, "payee": 2, "amount_msat": 1000}]}
    })");
}

std::string error_of(const json& doc) {
    try {
        scenario_from_json(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("minimal scenario uses defaults") {
    const auto s = scenario_from_json(minimal());
    CHECK(s.seed == 5);
    CHECK(s.topology.nodes == 3);
    CHECK(s.phases.size() == 1);
    CHECK(s.phases[0].payments.size() == 1);
    CHECK(s.offer_wait_factor == 2.0);
    const auto configs = s.node_configs();
    CHECK(configs[1].ttl == 30 * kSecond);
    CHECK(configs[1].broadcast_policy == BroadcastPolicy::flood_all());
}

TEST_CASE("unknown keys are named") {
    auto doc = minimal();
    doc["sed"] = 1;
    CHECK(error_of(doc) == "unknown key 'sed'");

    doc = minimal();
    doc["node_defaults"] = {{"fee_msat", 1}, {"ttl", 5}};
    CHECK(error_of(doc) == "unknown key 'node_defaults.ttl'");

    doc = minimal();
    doc["workload"]["payments"][0]["amount"] = 3;
    CHECK(error_of(doc) == "unknown key 'workload.payments[0].amount'");

    doc = minimal();
    doc["topology"]["generate"]["size"] = 3;
    CHECK(error_of(doc) == "unknown key 'topology.generate.size'");
}

TEST_CASE("bad values and missing keys") {
    auto doc = minimal();
    doc["seed"] = "x";
    CHECK(error_of(doc) == "bad value for key 'seed'");

    doc = minimal();
    doc.erase("topology");
    CHECK(error_of(doc) == "missing key 'topology'");

    doc = minimal();
    doc["workload"]["payments"][0]["payee"] = 9;
    CHECK(error_of(doc).find("outside topology") != std::string::npos);

    doc = minimal();
    doc["adversaries"] = json::array({{{"node", 1}, {"kind", "sleeper"}}});
    CHECK(error_of(doc).find("adversaries[0].kind") != std::string::npos);

    doc = minimal();
    doc["node_defaults"] = {{"policy", "flood_some"}};
    CHECK(error_of(doc).find("node_defaults.policy") != std::string::npos);

    doc = minimal();
    doc["phases"] = json::array();
    CHECK(error_of(doc) == "scenario needs exactly one of 'workload', 'phases'");

    doc = minimal();
    doc["audit"] = true;
    doc["node_defaults"] = {{"counter_step_max", 3}};
    CHECK(error_of(doc).find("audit requires") != std::string::npos);
}

TEST_CASE("full scenario") {
    const auto doc = json::parse(R"({
        "seed": 9,
        "horizon_us": 100000000,
        "topology": {"generate": {"kind": "grid", "width": 4, "height": 3,
                                  "capacity": {"uniform_range": [1000, 5000]}}},
        "latency": {"uniform_range_us": [1000, 3000]},
        "node_defaults": {"fee_range_msat": [1, 9], "policy": {"top_k": 2}, "ttl_us": 5000000,
                          "weights": {"failure": 3.0}},
        "node_overrides": [{"node": 4, "fee_msat": 50, "policy": {"pareto_weighted": {"alpha": 2.0, "k": 2}}}],
        "adversaries": [{"node": 2, "kind": "dropper", "p": 0.5}, {"node": 3, "kind": "fee_inflate", "delta": 4}],
        "offer_wait_factor": 3,
        "sweep_interval_us": 250000,
        "phases": [
            {"name": "warm", "policy": "flood_all", "workload": {"poisson": {"count": 7, "rate_per_s": 2,
                                                                            "amount_msat": [10, 20]}}},
            {"workload": {"spaced": {"count": 3, "gap_us": 1000, "amount_msat": 5}}}
        ]
    })");
    const auto s = scenario_from_json(doc);
    CHECK(s.topology.nodes == 12);
    CHECK(s.latency.kind == LatencyModel::Kind::UniformRange);
    CHECK(s.phases.size() == 2);
    CHECK(s.phases[0].name == "warm");
    CHECK(s.phases[1].name == "phase1");
    CHECK(s.phases[0].payments.size() == 7);
    CHECK(s.phases[1].payments[2].at == 2000);
    CHECK(s.adversaries.at(2) == Adversary::dropper(0.5));
    CHECK(s.adversaries.at(3) == Adversary::fee_inflate(4));
    const auto configs = s.node_configs();
    CHECK(configs[4].fee == 50);
    CHECK(configs[4].broadcast_policy == BroadcastPolicy::pareto_weighted(2.0, 2));
    CHECK(configs[0].broadcast_policy == BroadcastPolicy::top_k(2));
    CHECK(configs[0].weights.failure == 3.0);
    for (const auto& c : configs)
        if (&c != &configs[4]) CHECK((c.fee >= 1 && c.fee <= 9));
    CHECK(configs == scenario_from_json(doc).node_configs());
    for (const auto& p : s.phases[0].payments) {
        CHECK(p.payer != p.payee);
        CHECK((p.amount >= 10 && p.amount <= 20));
    }
}

TEST_CASE("topology from file and inline") {
    const auto dir = std::filesystem::temp_directory_path() / "antroute_scenario_test";
    std::filesystem::create_directories(dir);
    const auto topo = generate_topology(TopologyParams::ring(5), CapacityModel::constant(77), 1);
    std::ofstream(dir / "ring.json") << topology_to_json(topo).dump();

    auto doc = minimal();
    doc["topology"] = {{"file", "ring.json"}};
    CHECK(scenario_from_json(doc, dir).topology == topo);

    doc["topology"] = {{"inline", topology_to_json(topo)}};
    CHECK(scenario_from_json(doc).topology == topo);

    doc["topology"] = {{"file", "missing.json"}};
    CHECK(error_of(doc).find("cannot open") != std::string::npos);

    std::ofstream(dir / "scenario.json") << minimal().dump();
    CHECK(load_scenario(dir / "scenario.json").seed == 5);
    std::filesystem::remove_all(dir);
}

TEST_CASE("policy json round trip") {
    for (const auto& p : {BroadcastPolicy::flood_all(), BroadcastPolicy::top_k(3), BroadcastPolicy::pareto_weighted(1.5, 4)})
        CHECK(policy_from_json(policy_to_json(p)) == p);
}

TEST_CASE("poisson workload") {
    const auto w = poisson_workload({500, 10.0, 1, 100, 0}, 20, 3);
    CHECK(w.size() == 500);
    for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i].at >= w[i - 1].at);
    // 500 arrivals at 10/s take about 50 s.
    CHECK(double(w.back().at) / kSecond == doctest::Approx(50.0).epsilon(0.15));
    CHECK(w == poisson_workload({500, 10.0, 1, 100, 0}, 20, 3));
}
