#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "antroute/types.hpp"

namespace antroute {

struct PaymentMetrics {
    std::size_t index = 0;
    std::size_t phase = 0;
    SimTime start = 0;
    NodeId payer;
    NodeId payee;
    Msat amount = 0;
    Msat max_fee = 0;

    bool discovered = false;  // at least one offer reached the payer
    bool success = false;     // settled
    std::string failure;      // empty on success
    std::optional<SimTime> discovery_latency;
    std::optional<SimTime> completion_latency;

    std::size_t offers = 0;  // received before the choice
    std::optional<Msat> chosen_fee;
    std::optional<Msat> min_offer_fee;
    std::vector<NodeId> path;  // nodes the confirmed seed visited, payer first
    std::optional<NodeId> matcher;
    std::optional<std::size_t> path_hops;
    std::optional<Msat> ground_truth_fee;  // sum of configured intermediary fees
    bool volume_ok = true;                 // every path edge could carry the amount at confirmation
    std::optional<std::size_t> oracle_hops;  // empty when unreachable at start

    bool fee_anomaly = false;
    bool cheat_detected = false;
    bool count_mismatch = false;
    bool route_lock_failure = false;

    std::map<std::string, std::uint64_t> messages_by_kind;
    std::uint64_t messages = 0;
};

struct PhaseMetrics {
    std::string name;
    std::size_t payments = 0;
    std::size_t successes = 0;
    std::size_t discovered = 0;
    std::uint64_t messages = 0;

    double success_rate() const { return payments ? double(successes) / double(payments) : 0.0; }
    double messages_per_payment() const { return payments ? double(messages) / double(payments) : 0.0; }
};

struct Metrics {
    std::uint64_t seed = 0;
    std::vector<PaymentMetrics> payments;
    std::vector<PhaseMetrics> phases;

    std::map<std::string, std::uint64_t> messages_by_kind;
    std::uint64_t messages = 0;
    std::vector<std::size_t> peak_mempool;  // per node

    std::uint64_t anomalies = 0;
    std::uint64_t cheats_detected = 0;
    std::uint64_t route_lock_failures = 0;
    std::uint64_t adversarial_drops = 0;
    std::uint64_t late_offers = 0;

    SimTime max_entry_age_after_sweep = 0;
    std::optional<SimTime> last_traffic;
    std::optional<SimTime> state_empty_at;  // first sweep after the last traffic that found every node empty
    SimTime end_time = 0;
    bool horizon_reached = false;

    std::vector<std::string> invariant_violations;

    std::size_t successes() const;
    double success_rate() const;
};

struct LatencySummary {
    double mean = 0.0;
    SimTime p50 = 0;
    SimTime p95 = 0;
    SimTime max = 0;
    std::size_t count = 0;
};

LatencySummary summarize(std::vector<SimTime> samples);

/// Stable serialization: object keys sorted, aggregates derived from rows.
nlohmann::json metrics_to_json(const Metrics& m);
std::string serialize_metrics(const Metrics& m);

/// Per-payment CSV. `run` is written as the first column when non-empty.
void write_payment_csv_header(std::ostream& out, bool with_run);
void write_payment_csv_rows(std::ostream& out, const nlohmann::json& metrics_doc, const std::string& run = {});

}  // namespace antroute
