#include "antroute/topology.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "antroute/errors.hpp"
#include "antroute/rng.hpp"

namespace antroute {

namespace {

using Edge = std::pair<std::uint32_t, std::uint32_t>;

constexpr std::uint64_t kEdgeStream = 1;
constexpr std::uint64_t kCapacityStream = 2;

std::vector<Edge> line_edges(std::uint32_t n) {
    std::vector<Edge> e;
    for (std::uint32_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return e;
}

std::vector<Edge> grid_edges(std::uint32_t w, std::uint32_t h) {
    std::vector<Edge> e;
    for (std::uint32_t y = 0; y < h; ++y)
        for (std::uint32_t x = 0; x < w; ++x) {
            const std::uint32_t v = y * w + x;
            if (x + 1 < w) e.emplace_back(v, v + 1);
            if (y + 1 < h) e.emplace_back(v, v + w);
        }
    return e;
}

std::vector<Edge> erdos_renyi_edges(std::uint32_t n, double p, Rng& rng) {
    std::vector<Edge> e;
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j)
            if (rng.bernoulli(p)) e.emplace_back(i, j);
    return e;
}

std::vector<Edge> barabasi_albert_edges(std::uint32_t n, std::uint32_t m, Rng& rng) {
    std::vector<Edge> e;
    std::vector<std::uint32_t> ends;  // each node once per incident edge
    for (std::uint32_t i = 0; i <= m; ++i)
        for (std::uint32_t j = i + 1; j <= m; ++j) {
            e.emplace_back(i, j);
            ends.push_back(i);
            ends.push_back(j);
        }
    for (std::uint32_t v = m + 1; v < n; ++v) {
        std::set<std::uint32_t> targets;
        while (targets.size() < m) targets.insert(ends[rng.uniform(0, ends.size() - 1)]);
        for (std::uint32_t t : targets) {
            e.emplace_back(t, v);
            ends.push_back(t);
            ends.push_back(v);
        }
    }
    return e;
}

// Keeps the largest connected component (lowest smallest member on ties) and
// relabels its nodes densely in ascending order.
std::uint32_t largest_component(std::uint32_t n, std::vector<Edge>& edges) {
    std::vector<std::uint32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (auto [a, b] : edges) {
        const auto ra = find(a), rb = find(b);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
    std::vector<std::uint32_t> size(n, 0);
    for (std::uint32_t v = 0; v < n; ++v) size[find(v)]++;
    std::uint32_t best = 0;
    for (std::uint32_t v = 0; v < n; ++v)
        if (size[v] > size[best]) best = v;

    std::vector<std::int64_t> label(n, -1);
    std::uint32_t next = 0;
    for (std::uint32_t v = 0; v < n; ++v)
        if (find(v) == best) label[v] = next++;
    std::vector<Edge> kept;
    for (auto [a, b] : edges)
        if (label[a] >= 0 && label[b] >= 0)
            kept.emplace_back(static_cast<std::uint32_t>(label[a]), static_cast<std::uint32_t>(label[b]));
    edges = std::move(kept);
    return next;
}

ChannelSet assign_capacities(const std::vector<Edge>& edges, const CapacityModel& model, std::uint64_t seed) {
    if (model.lo > model.hi) throw TopologyError("capacity range is empty");
    if (model.unidirectional_fraction < 0.0 || model.unidirectional_fraction > 1.0)
        throw TopologyError("unidirectional_fraction must lie in [0, 1]");
    Rng rng(derive_stream(seed, kCapacityStream));
    auto draw = [&] { return model.kind == CapacityModel::Kind::Constant ? model.lo : rng.uniform(model.lo, model.hi); };
    ChannelSet set;
    for (auto [a, b] : edges) {
        Channel c{NodeId{a}, NodeId{b}, draw(), draw(), ChannelMode::Bidirectional};
        if (model.unidirectional_fraction > 0.0 && rng.bernoulli(model.unidirectional_fraction)) {
            if (rng.bernoulli(0.5)) {
                c.mode = ChannelMode::UnidirectionalAB;
                c.capacity_ba = 0;
            } else {
                c.mode = ChannelMode::UnidirectionalBA;
                c.capacity_ab = 0;
            }
        }
        set.add(c);
    }
    return set;
}

}  // namespace

const char* to_string(TopologyKind kind) {
    switch (kind) {
    case TopologyKind::Line: return "line";
    case TopologyKind::Ring: return "ring";
    case TopologyKind::Grid: return "grid";
    case TopologyKind::ErdosRenyi: return "erdos_renyi";
    case TopologyKind::BarabasiAlbert: return "barabasi_albert";
    }
    return "?";
}

TopologyKind topology_kind_from_string(const std::string& s) {
    for (auto k : {TopologyKind::Line, TopologyKind::Ring, TopologyKind::Grid, TopologyKind::ErdosRenyi,
                   TopologyKind::BarabasiAlbert})
        if (s == to_string(k)) return k;
    throw ConfigError("unknown topology kind '" + s + "'");
}

std::vector<std::vector<NeighborRecord>> Topology::neighbor_records() const {
    std::vector<std::vector<NeighborRecord>> out(nodes);
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const Channel& c = channels[i];
        out.at(c.a.value).push_back({c.b, i, {}});
        out.at(c.b.value).push_back({c.a, i, {}});
    }
    return out;
}

Topology generate_topology(const TopologyParams& params, const CapacityModel& capacity, std::uint64_t seed) {
    Rng rng(derive_stream(seed, kEdgeStream));
    GeneratorInfo info;
    info.kind = to_string(params.kind);
    info.seed = seed;

    std::uint32_t n = params.n;
    std::vector<Edge> edges;
    switch (params.kind) {
    case TopologyKind::Line:
        if (n < 2) throw TopologyError("line needs at least 2 nodes");
        edges = line_edges(n);
        info.params["n"] = n;
        break;
    case TopologyKind::Ring:
        if (n < 3) throw TopologyError("ring needs at least 3 nodes");
        edges = line_edges(n);
        edges.emplace_back(0, n - 1);
        info.params["n"] = n;
        break;
    case TopologyKind::Grid:
        if (params.width == 0 || params.height == 0 || std::uint64_t{params.width} * params.height < 2)
            throw TopologyError("grid needs at least 2 nodes");
        n = params.width * params.height;
        edges = grid_edges(params.width, params.height);
        info.params["width"] = params.width;
        info.params["height"] = params.height;
        break;
    case TopologyKind::ErdosRenyi:
        if (n < 2) throw TopologyError("erdos_renyi needs at least 2 nodes");
        if (!(params.p >= 0.0 && params.p <= 1.0)) throw TopologyError("erdos_renyi p must lie in [0, 1]");
        edges = erdos_renyi_edges(n, params.p, rng);
        info.params["n"] = n;
        info.params["p"] = params.p;
        break;
    case TopologyKind::BarabasiAlbert:
        if (n < 2) throw TopologyError("barabasi_albert needs at least 2 nodes");
        if (params.m < 1 || params.m >= n) throw TopologyError("barabasi_albert needs 1 <= m < n");
        edges = barabasi_albert_edges(n, params.m, rng);
        info.params["n"] = n;
        info.params["m"] = params.m;
        break;
    }
    info.generated_nodes = n;
    if (params.kind == TopologyKind::ErdosRenyi) {
        n = largest_component(n, edges);
        if (n < 2) throw TopologyError("erdos_renyi largest component has fewer than 2 nodes");
    }
    info.params["capacity_lo"] = static_cast<double>(capacity.lo);
    info.params["capacity_hi"] = static_cast<double>(capacity.hi);
    if (capacity.unidirectional_fraction > 0.0) info.params["unidirectional_fraction"] = capacity.unidirectional_fraction;

    Topology t;
    t.nodes = n;
    t.channels = assign_capacities(edges, capacity, seed);
    t.generator = std::move(info);
    return t;
}

nlohmann::json topology_to_json(const Topology& topology) {
    nlohmann::json doc;
    doc["nodes"] = topology.nodes;
    auto channels = nlohmann::json::array();
    for (const auto& c : topology.channels.channels()) {
        channels.push_back({{"a", c.a.value},
                            {"b", c.b.value},
                            {"capacity_ab", c.capacity_ab},
                            {"capacity_ba", c.capacity_ba},
                            {"mode", to_string(c.mode)}});
    }
    doc["channels"] = std::move(channels);
    if (topology.generator) {
        const auto& g = *topology.generator;
        doc["generator"] = {{"kind", g.kind}, {"params", g.params}, {"seed", g.seed}, {"generated_nodes", g.generated_nodes}};
    }
    return doc;
}

namespace {

void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> known, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
            throw ConfigError("unknown key '" + where + key + "'");
    }
}

template <class T>
T required(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError("missing key '" + where + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("bad value for key '" + where + key + "'");
    }
}

}  // namespace

Topology topology_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("topology document must be an object");
    reject_unknown(doc, {"nodes", "channels", "generator"}, "");
    Topology t;
    t.nodes = required<std::uint32_t>(doc, "nodes", "");
    const auto& channels = doc.contains("channels") ? doc.at("channels") : throw ConfigError("missing key 'channels'");
    if (!channels.is_array()) throw ConfigError("bad value for key 'channels'");
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const auto& c = channels[i];
        const std::string where = "channels[" + std::to_string(i) + "].";
        if (!c.is_object()) throw ConfigError("bad value for key 'channels[" + std::to_string(i) + "]'");
        reject_unknown(c, {"a", "b", "capacity_ab", "capacity_ba", "mode"}, where);
        Channel ch{NodeId{required<std::uint32_t>(c, "a", where)}, NodeId{required<std::uint32_t>(c, "b", where)},
                   required<Msat>(c, "capacity_ab", where), required<Msat>(c, "capacity_ba", where),
                   ChannelMode::Bidirectional};
        if (c.contains("mode")) {
            try {
                ch.mode = channel_mode_from_string(required<std::string>(c, "mode", where));
            } catch (const ChannelError&) {
                throw ConfigError("bad value for key '" + where + "mode'");
            }
        }
        if (ch.a.value >= t.nodes || ch.b.value >= t.nodes)
            throw TopologyError("channel " + std::to_string(i) + " names a node outside 0.." +
                                std::to_string(t.nodes == 0 ? 0 : t.nodes - 1));
        try {
            t.channels.add(ch);
        } catch (const ChannelError& e) {
            throw TopologyError(e.what());
        }
    }
    if (doc.contains("generator")) {
        const auto& g = doc.at("generator");
        reject_unknown(g, {"kind", "params", "seed", "generated_nodes"}, "generator.");
        GeneratorInfo info;
        info.kind = required<std::string>(g, "kind", "generator.");
        if (g.contains("params")) info.params = required<std::map<std::string, double>>(g, "params", "generator.");
        if (g.contains("seed")) info.seed = required<std::uint64_t>(g, "seed", "generator.");
        if (g.contains("generated_nodes"))
            info.generated_nodes = required<std::uint32_t>(g, "generated_nodes", "generator.");
        t.generator = std::move(info);
    }
    return t;
}

}  // namespace antroute
