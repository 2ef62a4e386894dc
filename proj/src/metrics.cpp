#include "antroute/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace antroute {

namespace {

using nlohmann::json;

template <class T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

json path_json(const std::vector<NodeId>& path) {
    auto a = json::array();
    for (auto n : path) a.push_back(n.value);
    return a;
}

json latency_json(const LatencySummary& s) {
    return {{"count", s.count}, {"mean_us", s.mean}, {"p50_us", s.p50}, {"p95_us", s.p95}, {"max_us", s.max}};
}

// Nearest-rank percentile on sorted samples.
SimTime percentile(const std::vector<SimTime>& sorted, double q) {
    if (sorted.empty()) return 0;
    const auto rank = static_cast<std::size_t>(std::ceil(q * double(sorted.size())));
    return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

std::string csv_cell(const json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    return v.dump();
}

const char* kCsvColumns[] = {"index",       "phase",           "payer",        "payee",
                             "amount_msat", "max_fee_msat",    "success",      "failure",
                             "discovered",  "discovery_us",    "completion_us", "offers",
                             "chosen_fee",  "min_offer_fee",   "ground_truth_fee", "path_hops",
                             "oracle_hops", "matcher",         "messages"};

}  // namespace

std::size_t Metrics::successes() const {
    return static_cast<std::size_t>(std::count_if(payments.begin(), payments.end(), [](const auto& p) { return p.success; }));
}

double Metrics::success_rate() const { return payments.empty() ? 0.0 : double(successes()) / double(payments.size()); }

LatencySummary summarize(std::vector<SimTime> samples) {
    LatencySummary s;
    s.count = samples.size();
    if (samples.empty()) return s;
    std::sort(samples.begin(), samples.end());
    s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / double(samples.size());
    s.p50 = percentile(samples, 0.50);
    s.p95 = percentile(samples, 0.95);
    s.max = samples.back();
    return s;
}

json metrics_to_json(const Metrics& m) {
    json payments = json::array();
    std::vector<SimTime> discovery, completion;
    std::vector<double> stretch;
    std::map<std::string, std::uint64_t> failures;
    for (const auto& p : m.payments) {
        payments.push_back({
            {"index", p.index},
            {"phase", p.phase},
            {"start_us", p.start},
            {"payer", p.payer.value},
            {"payee", p.payee.value},
            {"amount_msat", p.amount},
            {"max_fee_msat", p.max_fee},
            {"discovered", p.discovered},
            {"success", p.success},
            {"failure", p.failure.empty() ? json(nullptr) : json(p.failure)},
            {"discovery_latency_us", opt(p.discovery_latency)},
            {"completion_latency_us", opt(p.completion_latency)},
            {"offers", p.offers},
            {"chosen_fee", opt(p.chosen_fee)},
            {"min_offer_fee", opt(p.min_offer_fee)},
            {"path", path_json(p.path)},
            {"matcher", p.matcher ? json(p.matcher->value) : json(nullptr)},
            {"path_hops", opt(p.path_hops)},
            {"ground_truth_fee", opt(p.ground_truth_fee)},
            {"volume_ok", p.volume_ok},
            {"oracle_hops", opt(p.oracle_hops)},
            {"fee_anomaly", p.fee_anomaly},
            {"cheat_detected", p.cheat_detected},
            {"count_mismatch", p.count_mismatch},
            {"route_lock_failure", p.route_lock_failure},
            {"messages", p.messages},
            {"messages_by_kind", p.messages_by_kind},
        });
        if (p.discovery_latency) discovery.push_back(*p.discovery_latency);
        if (p.success && p.completion_latency) completion.push_back(*p.completion_latency);
        if (p.success && p.path_hops && p.oracle_hops && *p.oracle_hops > 0)
            stretch.push_back(double(*p.path_hops) / double(*p.oracle_hops));
        if (!p.success) failures[p.failure]++;
    }

    json phases = json::array();
    for (const auto& ph : m.phases)
        phases.push_back({{"name", ph.name},
                          {"payments", ph.payments},
                          {"successes", ph.successes},
                          {"discovered", ph.discovered},
                          {"success_rate", ph.success_rate()},
                          {"messages", ph.messages},
                          {"messages_per_payment", ph.messages_per_payment()}});

    json stretch_json = {{"count", stretch.size()}};
    if (!stretch.empty()) {
        std::sort(stretch.begin(), stretch.end());
        stretch_json["mean"] = std::accumulate(stretch.begin(), stretch.end(), 0.0) / double(stretch.size());
        stretch_json["min"] = stretch.front();
        stretch_json["max"] = stretch.back();
        stretch_json["p50"] = stretch[(stretch.size() - 1) / 2];
    }

    const std::size_t peak = m.peak_mempool.empty() ? 0 : *std::max_element(m.peak_mempool.begin(), m.peak_mempool.end());
    json aggregate = {
        {"payments", m.payments.size()},
        {"successes", m.successes()},
        {"success_rate", m.success_rate()},
        {"failures_by_reason", failures},
        {"discovery_latency", latency_json(summarize(discovery))},
        {"completion_latency", latency_json(summarize(completion))},
        {"messages", m.messages},
        {"messages_by_kind", m.messages_by_kind},
        {"messages_per_payment", m.payments.empty() ? 0.0 : double(m.messages) / double(m.payments.size())},
        {"peak_mempool_max", peak},
        {"path_stretch", stretch_json},
        {"anomalies_detected", m.anomalies},
        {"cheats_detected", m.cheats_detected},
        {"route_lock_failures", m.route_lock_failures},
        {"adversarial_drops", m.adversarial_drops},
        {"late_offers", m.late_offers},
        {"max_entry_age_after_sweep_us", m.max_entry_age_after_sweep},
        {"last_traffic_us", opt(m.last_traffic)},
        {"state_empty_at_us", opt(m.state_empty_at)},
        {"end_time_us", m.end_time},
        {"horizon_reached", m.horizon_reached},
    };

    return {{"seed", m.seed},
            {"aggregate", aggregate},
            {"phases", phases},
            {"payments", payments},
            {"peak_mempool", m.peak_mempool},
            {"invariant_violations", m.invariant_violations}};
}

std::string serialize_metrics(const Metrics& m) { return metrics_to_json(m).dump(2) + "\n"; }

void write_payment_csv_header(std::ostream& out, bool with_run) {
    if (with_run) out << "run,";
    bool first = true;
    for (const char* c : kCsvColumns) {
        out << (first ? "" : ",") << c;
        first = false;
    }
    out << "\n";
}

void write_payment_csv_rows(std::ostream& out, const json& doc, const std::string& run) {
    static const std::map<std::string, std::string> renamed{{"discovery_us", "discovery_latency_us"},
                                                            {"completion_us", "completion_latency_us"}};
    for (const auto& p : doc.at("payments")) {
        if (!run.empty()) out << run << ",";
        bool first = true;
        for (const char* c : kCsvColumns) {
            auto it = renamed.find(c);
            const std::string key = it == renamed.end() ? c : it->second;
            out << (first ? "" : ",") << (p.contains(key) ? csv_cell(p.at(key)) : "");
            first = false;
        }
        out << "\n";
    }
}

}  // namespace antroute
