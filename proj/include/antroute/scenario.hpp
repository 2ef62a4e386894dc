#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "antroute/node.hpp"
#include "antroute/topology.hpp"

namespace antroute {

struct LatencyModel {
    enum class Kind : std::uint8_t { Uniform, UniformRange };

    Kind kind = Kind::Uniform;
    SimTime lo = 10 * kMillisecond;
    SimTime hi = 10 * kMillisecond;

    static LatencyModel uniform(SimTime d) { return {Kind::Uniform, d, d}; }
    static LatencyModel uniform_range(SimTime lo, SimTime hi) { return {Kind::UniformRange, lo, hi}; }

    SimTime sample(Rng& rng) const {
        return kind == Kind::Uniform ? lo
                                     : static_cast<SimTime>(rng.uniform(static_cast<std::uint64_t>(lo),
                                                                        static_cast<std::uint64_t>(hi)));
    }
};

struct PaymentRequest {
    SimTime at = 0;  // relative to the start of its phase
    NodeId payer;
    NodeId payee;
    Msat amount = 0;
    Msat max_fee = 0;

    friend bool operator==(const PaymentRequest&, const PaymentRequest&) = default;
};

struct PoissonWorkload {
    std::size_t count = 0;
    double rate_per_s = 1.0;
    Msat amount_lo = 1000;
    Msat amount_hi = 1000;
    Msat max_fee = 0;
};

/// Payer/payee pairs drawn uniformly among distinct nodes, exponential gaps.
std::vector<PaymentRequest> poisson_workload(const PoissonWorkload& spec, std::uint32_t nodes, std::uint64_t seed);

/// Payments spaced `gap` apart, uniform distinct payer/payee pairs.
std::vector<PaymentRequest> spaced_workload(std::size_t count, SimTime gap, std::uint32_t nodes, Msat amount,
                                            Msat max_fee, std::uint64_t seed);

struct Phase {
    std::string name;
    std::optional<BroadcastPolicy> policy;  // applied to every node when the phase starts
    std::vector<PaymentRequest> payments;
};

/// Per-node settings; unset fields fall back to the defaults.
struct NodeSettings {
    std::optional<SimTime> ttl;
    std::optional<std::uint32_t> counter_start_max;
    std::optional<std::uint32_t> counter_step_max;
    std::optional<Msat> fee;
    std::optional<std::pair<Msat, Msat>> fee_range;  // drawn per node from the scenario seed
    std::optional<BroadcastPolicy> policy;
    std::optional<bool> volume_gating;
    std::optional<std::size_t> stats_window;
    std::optional<ScoreWeights> weights;
};

struct Scenario {
    std::uint64_t seed = 1;
    SimTime horizon = 3600 * kSecond;
    Topology topology;
    LatencyModel latency;
    SimTime processing_delay = 0;
    NodeSettings node_defaults;
    std::map<std::uint32_t, NodeSettings> node_overrides;
    std::map<std::uint32_t, Adversary> adversaries;
    bool audit = false;
    double offer_wait_factor = 2.0;
    SimTime sweep_interval = kSecond;
    std::vector<Phase> phases;

    /// Node configuration after applying defaults, overrides and per-node fee
    /// draws.
    std::vector<NodeConfig> node_configs() const;

    /// Throws ConfigError for inconsistent settings.
    void validate() const;
};

/// Strict loader: unknown keys are rejected and the error names the key.
/// Relative topology file paths resolve against `base_dir`.
Scenario scenario_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& file);

BroadcastPolicy policy_from_json(const nlohmann::json& j);
nlohmann::json policy_to_json(const BroadcastPolicy& policy);

}  // namespace antroute
