#include "antroute/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "antroute/errors.hpp"

namespace antroute {

namespace {

using nlohmann::json;

constexpr std::uint64_t kFeeStream = 0xfee;
constexpr std::uint64_t kWorkloadStream = 0x3017;

// One JSON object read under a strict schema: every key must be consumed
// before finish(), otherwise the first leftover is reported by path.
class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError("expected an object at '" + (path_.empty() ? "<root>" : path_) + "'");
    }

    std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        used_.insert(key);
        return j_.at(key);
    }

    template <class T>
    std::optional<T> opt(const std::string& key) {
        if (!has(key)) return std::nullopt;
        try {
            return raw(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError("bad value for key '" + name(key) + "'");
        }
    }

    template <class T>
    T req(const std::string& key) {
        if (!has(key)) throw ConfigError("missing key '" + name(key) + "'");
        return *opt<T>(key);
    }

    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!used_.contains(key)) throw ConfigError("unknown key '" + name(key) + "'");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

std::pair<Msat, Msat> read_range(Fields& f, const std::string& key) {
    const json& v = f.raw(key);
    try {
        if (v.is_array() && v.size() == 2) {
            const auto lo = v[0].get<Msat>(), hi = v[1].get<Msat>();
            if (lo <= hi) return {lo, hi};
        } else if (v.is_number_unsigned()) {
            const auto x = v.get<Msat>();
            return {x, x};
        }
    } catch (const json::exception&) {
    }
    throw ConfigError("bad value for key '" + f.name(key) + "' (expected [lo, hi] with lo <= hi)");
}

ScoreWeights read_weights(const json& j, const std::string& path) {
    Fields f(j, path);
    ScoreWeights w;
    w.completed = f.opt<double>("completed").value_or(w.completed);
    w.volume = f.opt<double>("volume").value_or(w.volume);
    w.short_success = f.opt<double>("short_success").value_or(w.short_success);
    w.failure = f.opt<double>("failure").value_or(w.failure);
    f.finish();
    return w;
}

BroadcastPolicy read_policy(const json& j, const std::string& path) {
    try {
        return policy_from_json(j);
    } catch (const ConfigError& e) {
        throw ConfigError("bad value for key '" + path + "': " + e.what());
    }
}

void read_settings(Fields& f, NodeSettings& s) {
    if (auto v = f.opt<SimTime>("ttl_us")) s.ttl = v;
    if (auto v = f.opt<std::uint32_t>("counter_start_max")) s.counter_start_max = v;
    if (auto v = f.opt<std::uint32_t>("counter_step_max")) s.counter_step_max = v;
    if (auto v = f.opt<Msat>("fee_msat")) s.fee = v;
    if (f.has("fee_range_msat")) s.fee_range = read_range(f, "fee_range_msat");
    if (f.has("policy")) s.policy = read_policy(f.raw("policy"), f.name("policy"));
    if (auto v = f.opt<bool>("volume_gating")) s.volume_gating = v;
    if (auto v = f.opt<std::size_t>("stats_window")) s.stats_window = v;
    if (f.has("weights")) s.weights = read_weights(f.raw("weights"), f.name("weights"));
    if (s.fee && s.fee_range) throw ConfigError("keys '" + f.name("fee_msat") + "' and '" + f.name("fee_range_msat") +
                                                "' are mutually exclusive");
}

CapacityModel read_capacity(const json& j, const std::string& path) {
    Fields f(j, path);
    CapacityModel m;
    if (f.has("constant")) {
        m = CapacityModel::constant(f.req<Msat>("constant"));
    } else if (f.has("uniform_range")) {
        const auto [lo, hi] = read_range(f, "uniform_range");
        m = CapacityModel::uniform_range(lo, hi);
    } else {
        throw ConfigError("'" + path + "' needs 'constant' or 'uniform_range'");
    }
    f.finish();
    return m;
}

Topology read_topology(const json& j, const std::filesystem::path& base_dir, std::uint64_t scenario_seed) {
    Fields f(j, "topology");
    const int sources = f.has("generate") + f.has("file") + f.has("inline");
    if (sources != 1) throw ConfigError("'topology' needs exactly one of 'generate', 'file', 'inline'");
    Topology t;
    try {
        if (f.has("generate")) {
            Fields g(f.raw("generate"), "topology.generate");
            TopologyParams p;
            p.kind = topology_kind_from_string(g.req<std::string>("kind"));
            p.n = g.opt<std::uint32_t>("n").value_or(0);
            p.width = g.opt<std::uint32_t>("width").value_or(0);
            p.height = g.opt<std::uint32_t>("height").value_or(0);
            p.p = g.opt<double>("p").value_or(0.0);
            p.m = g.opt<std::uint32_t>("m").value_or(0);
            const auto seed = g.opt<std::uint64_t>("seed").value_or(scenario_seed);
            CapacityModel cap = g.has("capacity") ? read_capacity(g.raw("capacity"), "topology.generate.capacity")
                                                  : CapacityModel{};
            cap.unidirectional_fraction = g.opt<double>("unidirectional_fraction").value_or(0.0);
            g.finish();
            t = generate_topology(p, cap, seed);
        } else if (f.has("file")) {
            auto path = std::filesystem::path(f.req<std::string>("file"));
            if (path.is_relative()) path = base_dir / path;
            std::ifstream in(path);
            if (!in) throw ConfigError("cannot open topology file '" + path.string() + "'");
            json doc;
            try {
                doc = json::parse(in);
            } catch (const json::parse_error& e) {
                throw ConfigError("topology file '" + path.string() + "' is not valid JSON: " + e.what());
            }
            t = topology_from_json(doc);
        } else {
            t = topology_from_json(f.raw("inline"));
        }
    } catch (const TopologyError& e) {
        throw ConfigError(std::string("topology: ") + e.what());
    }
    f.finish();
    return t;
}

std::vector<PaymentRequest> read_workload(const json& j, const std::string& path, std::uint32_t nodes,
                                          std::uint64_t seed) {
    Fields f(j, path);
    const int kinds = f.has("payments") + f.has("poisson") + f.has("spaced");
    if (kinds != 1) throw ConfigError("'" + path + "' needs exactly one of 'payments', 'poisson', 'spaced'");
    std::vector<PaymentRequest> out;
    if (f.has("payments")) {
        const json& list = f.raw("payments");
        if (!list.is_array()) throw ConfigError("bad value for key '" + f.name("payments") + "'");
        for (std::size_t i = 0; i < list.size(); ++i) {
            Fields p(list[i], f.name("payments") + "[" + std::to_string(i) + "]");
            PaymentRequest r;
            r.at = p.opt<SimTime>("at_us").value_or(0);
            r.payer = NodeId{p.req<std::uint32_t>("payer")};
            r.payee = NodeId{p.req<std::uint32_t>("payee")};
            r.amount = p.req<Msat>("amount_msat");
            r.max_fee = p.opt<Msat>("max_fee_msat").value_or(0);
            p.finish();
            out.push_back(r);
        }
    } else if (f.has("poisson")) {
        Fields p(f.raw("poisson"), f.name("poisson"));
        PoissonWorkload w;
        w.count = p.req<std::size_t>("count");
        w.rate_per_s = p.req<double>("rate_per_s");
        std::tie(w.amount_lo, w.amount_hi) = read_range(p, "amount_msat");
        w.max_fee = p.opt<Msat>("max_fee_msat").value_or(0);
        const auto wseed = p.opt<std::uint64_t>("seed").value_or(derive_stream(seed, kWorkloadStream));
        p.finish();
        if (!(w.rate_per_s > 0.0)) throw ConfigError("bad value for key '" + p.name("rate_per_s") + "'");
        out = poisson_workload(w, nodes, wseed);
    } else {
        Fields p(f.raw("spaced"), f.name("spaced"));
        const auto count = p.req<std::size_t>("count");
        const auto gap = p.req<SimTime>("gap_us");
        const auto amount = p.req<Msat>("amount_msat");
        const auto max_fee = p.opt<Msat>("max_fee_msat").value_or(0);
        const auto wseed = p.opt<std::uint64_t>("seed").value_or(derive_stream(seed, kWorkloadStream));
        p.finish();
        out = spaced_workload(count, gap, nodes, amount, max_fee, wseed);
    }
    f.finish();
    return out;
}

Adversary read_adversary(Fields& f) {
    const auto kind = f.req<std::string>("kind");
    if (kind == "counter_cheat") return Adversary::counter_cheat(f.req<std::uint32_t>("delta"));
    if (kind == "fee_inflate") return Adversary::fee_inflate(f.req<Msat>("delta"));
    if (kind == "dropper") {
        const auto p = f.req<double>("p");
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("bad value for key '" + f.name("p") + "'");
        return Adversary::dropper(p);
    }
    if (kind == "transparent_cheat") return Adversary::transparent_cheat();
    throw ConfigError("bad value for key '" + f.name("kind") + "': unknown adversary '" + kind + "'");
}

void apply(const NodeSettings& s, NodeConfig& c) {
    if (s.ttl) c.ttl = *s.ttl;
    if (s.counter_start_max) c.counter_start_max = *s.counter_start_max;
    if (s.counter_step_max) c.counter_step_max = *s.counter_step_max;
    if (s.fee) c.fee = *s.fee;
    if (s.policy) c.broadcast_policy = *s.policy;
    if (s.volume_gating) c.volume_gating = *s.volume_gating;
    if (s.stats_window) c.stats_window = *s.stats_window;
    if (s.weights) c.weights = *s.weights;
}

}  // namespace

BroadcastPolicy policy_from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "flood_all") return BroadcastPolicy::flood_all();
        throw ConfigError("unknown policy '" + j.get<std::string>() + "'");
    }
    if (j.is_object() && j.size() == 1) {
        if (j.contains("top_k") && j.at("top_k").is_number_unsigned())
            return BroadcastPolicy::top_k(j.at("top_k").get<std::size_t>());
        if (j.contains("pareto_weighted")) {
            const json& p = j.at("pareto_weighted");
            Fields f(p, "pareto_weighted");
            const auto alpha = f.req<double>("alpha");
            const auto k = f.req<std::size_t>("k");
            f.finish();
            return BroadcastPolicy::pareto_weighted(alpha, k);
        }
    }
    throw ConfigError("expected \"flood_all\", {\"top_k\": k} or {\"pareto_weighted\": {\"alpha\", \"k\"}}");
}

json policy_to_json(const BroadcastPolicy& policy) {
    switch (policy.kind) {
    case BroadcastPolicy::Kind::FloodAll: return "flood_all";
    case BroadcastPolicy::Kind::TopK: return json{{"top_k", policy.k}};
    case BroadcastPolicy::Kind::ParetoWeighted:
        return json{{"pareto_weighted", {{"alpha", policy.alpha}, {"k", policy.k}}}};
    }
    return nullptr;
}

std::vector<PaymentRequest> poisson_workload(const PoissonWorkload& spec, std::uint32_t nodes, std::uint64_t seed) {
    if (nodes < 2) throw ConfigError("workload needs at least 2 nodes");
    Rng rng(seed);
    std::vector<PaymentRequest> out;
    double t = 0.0;
    for (std::size_t i = 0; i < spec.count; ++i) {
        t += -std::log(1.0 - rng.unit()) / spec.rate_per_s * static_cast<double>(kSecond);
        PaymentRequest r;
        r.at = static_cast<SimTime>(t);
        r.payer = NodeId{static_cast<std::uint32_t>(rng.uniform(0, nodes - 1))};
        r.payee = NodeId{static_cast<std::uint32_t>(rng.uniform(0, nodes - 2))};
        if (r.payee.value >= r.payer.value) ++r.payee.value;
        r.amount = rng.uniform(spec.amount_lo, spec.amount_hi);
        r.max_fee = spec.max_fee;
        out.push_back(r);
    }
    return out;
}

std::vector<PaymentRequest> spaced_workload(std::size_t count, SimTime gap, std::uint32_t nodes, Msat amount,
                                            Msat max_fee, std::uint64_t seed) {
    if (nodes < 2) throw ConfigError("workload needs at least 2 nodes");
    Rng rng(seed);
    std::vector<PaymentRequest> out;
    for (std::size_t i = 0; i < count; ++i) {
        PaymentRequest r;
        r.at = static_cast<SimTime>(i) * gap;
        r.payer = NodeId{static_cast<std::uint32_t>(rng.uniform(0, nodes - 1))};
        r.payee = NodeId{static_cast<std::uint32_t>(rng.uniform(0, nodes - 2))};
        if (r.payee.value >= r.payer.value) ++r.payee.value;
        r.amount = amount;
        r.max_fee = max_fee;
        out.push_back(r);
    }
    return out;
}

std::vector<NodeConfig> Scenario::node_configs() const {
    std::vector<NodeConfig> out(topology.nodes);
    for (std::uint32_t i = 0; i < topology.nodes; ++i) {
        NodeConfig& c = out[i];
        c.audit_round = audit;
        apply(node_defaults, c);
        auto fee_range = node_defaults.fee_range;
        if (auto it = node_overrides.find(i); it != node_overrides.end()) {
            apply(it->second, c);
            if (it->second.fee) fee_range.reset();
            if (it->second.fee_range) fee_range = it->second.fee_range;
        }
        if (fee_range) {
            Rng rng(derive_stream(derive_stream(seed, kFeeStream), i));
            c.fee = rng.uniform(fee_range->first, fee_range->second);
        }
    }
    return out;
}

void Scenario::validate() const {
    const auto n = topology.nodes;
    if (n < 2) throw ConfigError("topology needs at least 2 nodes");
    if (horizon <= 0) throw ConfigError("bad value for key 'horizon_us'");
    if (sweep_interval <= 0) throw ConfigError("bad value for key 'sweep_interval_us'");
    if (processing_delay < 0) throw ConfigError("bad value for key 'processing_delay_us'");
    if (latency.lo < 0 || latency.lo > latency.hi) throw ConfigError("bad value for key 'latency'");
    if (!(offer_wait_factor >= 1.0)) throw ConfigError("bad value for key 'offer_wait_factor' (must be >= 1)");
    for (const auto& [node, s] : node_overrides)
        if (node >= n) throw ConfigError("node_overrides names node " + std::to_string(node) + " outside topology");
    for (const auto& [node, a] : adversaries)
        if (node >= n) throw ConfigError("adversaries names node " + std::to_string(node) + " outside topology");
    const auto configs = node_configs();
    for (std::uint32_t i = 0; i < n; ++i) {
        try {
            configs[i].validate();
        } catch (const ConfigError& e) {
            throw ConfigError("node " + std::to_string(i) + ": " + e.what());
        }
        if (audit && (configs[i].counter_start_max != 0 || configs[i].counter_step_max != 1))
            throw ConfigError("audit requires counter_start_max = 0 and counter_step_max = 1 (node " +
                              std::to_string(i) + ")");
    }
    for (const auto& phase : phases)
        for (const auto& p : phase.payments) {
            if (p.payer.value >= n || p.payee.value >= n)
                throw ConfigError("payment endpoint outside topology in phase '" + phase.name + "'");
            if (p.payer == p.payee) throw ConfigError("payment with payer == payee in phase '" + phase.name + "'");
            if (p.at < 0) throw ConfigError("payment with negative time in phase '" + phase.name + "'");
        }
}

Scenario scenario_from_json(const json& doc, const std::filesystem::path& base_dir) {
    Fields f(doc, "");
    Scenario s;
    s.seed = f.opt<std::uint64_t>("seed").value_or(s.seed);
    s.horizon = f.opt<SimTime>("horizon_us").value_or(s.horizon);
    if (!f.has("topology")) throw ConfigError("missing key 'topology'");
    s.topology = read_topology(f.raw("topology"), base_dir, s.seed);

    if (f.has("latency")) {
        Fields l(f.raw("latency"), "latency");
        if (l.has("uniform_us") == l.has("uniform_range_us"))
            throw ConfigError("'latency' needs exactly one of 'uniform_us', 'uniform_range_us'");
        if (l.has("uniform_us")) {
            s.latency = LatencyModel::uniform(l.req<SimTime>("uniform_us"));
        } else {
            const auto [lo, hi] = read_range(l, "uniform_range_us");
            s.latency = LatencyModel::uniform_range(static_cast<SimTime>(lo), static_cast<SimTime>(hi));
        }
        l.finish();
    }
    s.processing_delay = f.opt<SimTime>("processing_delay_us").value_or(0);

    if (f.has("node_defaults")) {
        Fields d(f.raw("node_defaults"), "node_defaults");
        read_settings(d, s.node_defaults);
        d.finish();
    }
    if (f.has("node_overrides")) {
        const json& list = f.raw("node_overrides");
        if (!list.is_array()) throw ConfigError("bad value for key 'node_overrides'");
        for (std::size_t i = 0; i < list.size(); ++i) {
            Fields o(list[i], "node_overrides[" + std::to_string(i) + "]");
            const auto node = o.req<std::uint32_t>("node");
            read_settings(o, s.node_overrides[node]);
            o.finish();
        }
    }
    if (f.has("adversaries")) {
        const json& list = f.raw("adversaries");
        if (!list.is_array()) throw ConfigError("bad value for key 'adversaries'");
        for (std::size_t i = 0; i < list.size(); ++i) {
            Fields a(list[i], "adversaries[" + std::to_string(i) + "]");
            const auto node = a.req<std::uint32_t>("node");
            s.adversaries[node] = read_adversary(a);
            a.finish();
        }
    }
    s.audit = f.opt<bool>("audit").value_or(false);
    s.offer_wait_factor = f.opt<double>("offer_wait_factor").value_or(s.offer_wait_factor);
    s.sweep_interval = f.opt<SimTime>("sweep_interval_us").value_or(s.sweep_interval);

    if (f.has("workload") == f.has("phases")) throw ConfigError("scenario needs exactly one of 'workload', 'phases'");
    if (f.has("workload")) {
        s.phases.push_back({"main", std::nullopt, read_workload(f.raw("workload"), "workload", s.topology.nodes, s.seed)});
    } else {
        const json& list = f.raw("phases");
        if (!list.is_array() || list.empty()) throw ConfigError("bad value for key 'phases'");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string path = "phases[" + std::to_string(i) + "]";
            Fields p(list[i], path);
            Phase phase;
            phase.name = p.opt<std::string>("name").value_or("phase" + std::to_string(i));
            if (p.has("policy")) phase.policy = read_policy(p.raw("policy"), p.name("policy"));
            if (!p.has("workload")) throw ConfigError("missing key '" + p.name("workload") + "'");
            phase.payments =
                read_workload(p.raw("workload"), p.name("workload"), s.topology.nodes, derive_stream(s.seed, i));
            p.finish();
            s.phases.push_back(std::move(phase));
        }
    }
    f.finish();
    s.validate();
    return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open scenario file '" + file.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("scenario file '" + file.string() + "' is not valid JSON: " + e.what());
    }
    return scenario_from_json(doc, file.parent_path());
}

}  // namespace antroute
