#pragma once

// Brute-force baselines the simulator is checked against. They share no code
// with the protocol: plain BFS and Dijkstra on the volume-feasible digraph.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "antroute/channel.hpp"

namespace antroute {

struct OraclePath {
    std::vector<NodeId> nodes;  // payer first, payee last
    std::size_t hops() const { return nodes.empty() ? 0 : nodes.size() - 1; }
    Msat fee = 0;               // sum of intermediary fees (cheapest-path oracle only)
};

/// Fewest hops from payer to payee using only directed edges that can carry
/// `amount`. Empty when unreachable.
std::optional<OraclePath> oracle_shortest_path(std::uint32_t nodes, const ChannelSet& channels, NodeId payer,
                                               NodeId payee, Msat amount);

/// Lowest total intermediary fee; `node_fees` is indexed by node id. Ties go
/// to fewer hops.
std::optional<OraclePath> oracle_cheapest_path(std::uint32_t nodes, const ChannelSet& channels, NodeId payer,
                                               NodeId payee, Msat amount, std::span<const Msat> node_fees);

}  // namespace antroute
