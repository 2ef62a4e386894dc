#include "antroute/oracle.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <queue>

#include "antroute/errors.hpp"

namespace antroute {

namespace {

std::vector<std::vector<std::uint32_t>> feasible_out_edges(std::uint32_t nodes, const ChannelSet& channels,
                                                           Msat amount) {
    std::vector<std::vector<std::uint32_t>> out(nodes);
    for (const auto& c : channels.channels()) {
        if (c.a.value >= nodes || c.b.value >= nodes) throw TopologyError("channel endpoint outside node range");
        if (can_forward(c, c.a, amount)) out[c.a.value].push_back(c.b.value);
        if (can_forward(c, c.b, amount)) out[c.b.value].push_back(c.a.value);
    }
    for (auto& v : out) std::sort(v.begin(), v.end());
    return out;
}

void check_endpoints(std::uint32_t nodes, NodeId payer, NodeId payee) {
    if (payer.value >= nodes || payee.value >= nodes) throw TopologyError("oracle endpoint outside node range");
}

OraclePath unwind(const std::vector<std::int64_t>& prev, std::uint32_t payee) {
    OraclePath path;
    for (std::int64_t v = payee; v >= 0; v = prev[static_cast<std::size_t>(v)])
        path.nodes.push_back(NodeId{static_cast<std::uint32_t>(v)});
    std::reverse(path.nodes.begin(), path.nodes.end());
    return path;
}

}  // namespace

std::optional<OraclePath> oracle_shortest_path(std::uint32_t nodes, const ChannelSet& channels, NodeId payer,
                                               NodeId payee, Msat amount) {
    check_endpoints(nodes, payer, payee);
    const auto out = feasible_out_edges(nodes, channels, amount);
    std::vector<std::int64_t> prev(nodes, -1);
    std::vector<bool> seen(nodes, false);
    std::deque<std::uint32_t> frontier{payer.value};
    seen[payer.value] = true;
    while (!frontier.empty()) {
        const auto u = frontier.front();
        frontier.pop_front();
        if (u == payee.value) return unwind(prev, u);
        for (auto v : out[u]) {
            if (seen[v]) continue;
            seen[v] = true;
            prev[v] = u;
            frontier.push_back(v);
        }
    }
    return std::nullopt;
}

std::optional<OraclePath> oracle_cheapest_path(std::uint32_t nodes, const ChannelSet& channels, NodeId payer,
                                               NodeId payee, Msat amount, std::span<const Msat> node_fees) {
    check_endpoints(nodes, payer, payee);
    if (node_fees.size() < nodes) throw TopologyError("node_fees shorter than node count");
    const auto out = feasible_out_edges(nodes, channels, amount);

    // Cost of entering v: its fee unless v is the payee. Lexicographic on
    // (fee, hops).
    using Cost = std::pair<Msat, std::size_t>;
    constexpr Cost kInf{std::numeric_limits<Msat>::max(), 0};
    std::vector<Cost> best(nodes, kInf);
    std::vector<std::int64_t> prev(nodes, -1);
    using Item = std::pair<Cost, std::uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    best[payer.value] = {0, 0};
    heap.push({best[payer.value], payer.value});
    while (!heap.empty()) {
        const auto [cost, u] = heap.top();
        heap.pop();
        if (cost != best[u]) continue;
        if (u == payee.value) break;
        for (auto v : out[u]) {
            const Msat enter = v == payee.value || v == payer.value ? 0 : node_fees[v];
            const Cost next{cost.first + enter, cost.second + 1};
            if (next < best[v]) {
                best[v] = next;
                prev[v] = u;
                heap.push({next, v});
            }
        }
    }
    if (best[payee.value] == kInf) return std::nullopt;
    OraclePath path = unwind(prev, payee.value);
    path.fee = best[payee.value].first;
    return path;
}

}  // namespace antroute
