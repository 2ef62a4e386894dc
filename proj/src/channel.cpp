#include "antroute/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace antroute {

const char* to_string(ChannelMode mode) {
    switch (mode) {
    case ChannelMode::Bidirectional: return "bidirectional";
    case ChannelMode::UnidirectionalAB: return "unidirectional_ab";
    case ChannelMode::UnidirectionalBA: return "unidirectional_ba";
    }
    return "?";
}

ChannelMode channel_mode_from_string(const std::string& s) {
    if (s == "bidirectional") return ChannelMode::Bidirectional;
    if (s == "unidirectional_ab") return ChannelMode::UnidirectionalAB;
    if (s == "unidirectional_ba") return ChannelMode::UnidirectionalBA;
    throw ConfigError("unknown channel mode '" + s + "'");
}

NodeId Channel::other(NodeId n) const {
    if (n == a) return b;
    if (n == b) return a;
    throw ChannelError("node " + std::to_string(n.value) + " is not an endpoint of this channel");
}

Msat Channel::directed_capacity(NodeId from) const {
    if (from == a) return mode == ChannelMode::UnidirectionalBA ? 0 : capacity_ab;
    if (from == b) return mode == ChannelMode::UnidirectionalAB ? 0 : capacity_ba;
    throw ChannelError("node " + std::to_string(from.value) + " is not an endpoint of this channel");
}

bool can_forward(const Channel& channel, NodeId from, Msat amount) {
    return channel.directed_capacity(from) >= amount;
}

ChannelSet::ChannelSet(std::vector<Channel> channels) {
    for (const auto& c : channels) add(c);
}

std::uint64_t ChannelSet::key(NodeId x, NodeId y) {
    const auto lo = std::min(x.value, y.value);
    const auto hi = std::max(x.value, y.value);
    return (std::uint64_t{lo} << 32) | hi;
}

std::size_t ChannelSet::add(const Channel& channel) {
    if (channel.a == channel.b) throw ChannelError("self-channel on node " + std::to_string(channel.a.value));
    const auto k = key(channel.a, channel.b);
    if (index_.contains(k))
        throw ChannelError("duplicate channel " + std::to_string(channel.a.value) + "-" +
                           std::to_string(channel.b.value));
    index_.emplace(k, channels_.size());
    channels_.push_back(channel);
    return channels_.size() - 1;
}

std::optional<std::size_t> ChannelSet::find(NodeId x, NodeId y) const {
    auto it = index_.find(key(x, y));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::vector<Msat> settle_path(ChannelSet& channels, std::span<const NodeId> path, Msat amount,
                              std::span<const Msat> hop_fees) {
    if (path.size() < 2) throw SettleError(0, "settle_path: path needs at least two nodes");
    if (hop_fees.size() != path.size() - 2)
        throw SettleError(0, "settle_path: expected one fee per intermediary");

    std::vector<std::size_t> hops;
    std::vector<Msat> moved;
    hops.reserve(path.size() - 1);
    moved.reserve(path.size() - 1);

    Msat remaining = amount;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (i > 0) {
            if (hop_fees[i - 1] > remaining)
                throw SettleError(i, "settle_path: fees exceed the payment amount at hop " + std::to_string(i));
            remaining -= hop_fees[i - 1];
        }
        auto idx = channels.find(path[i], path[i + 1]);
        if (!idx) throw SettleError(i, "settle_path: no channel at hop " + std::to_string(i));
        if (!can_forward(channels[*idx], path[i], remaining))
            throw SettleError(i, "settle_path: insufficient capacity at hop " + std::to_string(i));
        hops.push_back(*idx);
        moved.push_back(remaining);
    }

    // All hops validated; apply.
    for (std::size_t i = 0; i < hops.size(); ++i) {
        Channel& c = channels[hops[i]];
        const bool forward = path[i] == c.a;
        Msat& out = forward ? c.capacity_ab : c.capacity_ba;
        Msat& in = forward ? c.capacity_ba : c.capacity_ab;
        out -= moved[i];
        if (c.mode == ChannelMode::Bidirectional) in += moved[i];
    }
    return moved;
}

void NeighborStats::record(const RelayEvent& event) {
    auto bump = [&](const RelayEvent& e, int sign) {
        auto apply = [sign](std::uint64_t& v, std::uint64_t d) { v = sign > 0 ? v + d : v - d; };
        switch (e.kind) {
        case RelayEventKind::Pheromone: apply(short_pheromone, 1); break;
        case RelayEventKind::Matched: apply(short_matched, 1); break;
        case RelayEventKind::PaymentOk:
            apply(short_completed, 1);
            apply(short_volume, e.amount);
            break;
        case RelayEventKind::PaymentFail: apply(short_failed, 1); break;
        }
    };

    switch (event.kind) {
    case RelayEventKind::Pheromone: ++pheromone_relayed; break;
    case RelayEventKind::Matched: ++matched_relayed; break;
    case RelayEventKind::PaymentOk:
        ++payments_completed;
        volume_total += event.amount;
        break;
    case RelayEventKind::PaymentFail: ++payments_failed; break;
    }

    if (window == 0) return;
    recent.push_back(event);
    bump(event, +1);
    while (recent.size() > window) {
        bump(recent.front(), -1);
        recent.pop_front();
    }
}

double NeighborStats::short_success_ratio() const {
    if (recent.empty()) return 0.0;
    return static_cast<double>(recent.size() - short_failed) / static_cast<double>(recent.size());
}

double NeighborStats::failure_ratio() const {
    const auto total = std::max<std::uint64_t>(1, payments_completed + payments_failed);
    return static_cast<double>(payments_failed) / static_cast<double>(total);
}

NeighborStats record_relay_event(NeighborStats stats, const RelayEvent& event) {
    stats.record(event);
    return stats;
}

double neighbor_score(const NeighborStats& stats, const ScoreWeights& w) {
    const double s = w.completed * std::log1p(static_cast<double>(stats.payments_completed)) +
                     w.volume * std::log1p(static_cast<double>(stats.volume_total)) +
                     w.short_success * stats.short_success_ratio() - w.failure * stats.failure_ratio();
    return std::max(0.0, s);
}

std::string to_string(const BroadcastPolicy& policy) {
    switch (policy.kind) {
    case BroadcastPolicy::Kind::FloodAll: return "flood_all";
    case BroadcastPolicy::Kind::TopK: return "top_k(" + std::to_string(policy.k) + ")";
    case BroadcastPolicy::Kind::ParetoWeighted:
        return "pareto_weighted(" + std::to_string(policy.alpha) + ", " + std::to_string(policy.k) + ")";
    }
    return "?";
}

std::vector<NodeId> select_broadcast_set(std::span<const NeighborRecord> records, std::span<const NodeId> exclude,
                                         const BroadcastPolicy& policy, Rng& rng, const ScoreWeights& weights) {
    struct Candidate {
        NodeId id;
        double score;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(records.size());
    for (const auto& rec : records) {
        if (std::find(exclude.begin(), exclude.end(), rec.neighbor) != exclude.end()) continue;
        bool seen = false;
        for (const auto& c : candidates) seen = seen || c.id == rec.neighbor;
        if (seen) continue;
        candidates.push_back({rec.neighbor, 0.0});
        if (policy.kind != BroadcastPolicy::Kind::FloodAll)
            candidates.back().score = neighbor_score(rec.stats, weights);
    }

    std::vector<NodeId> out;
    if (policy.kind == BroadcastPolicy::Kind::FloodAll) {
        for (const auto& c : candidates) out.push_back(c.id);
        return out;
    }

    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& l, const Candidate& r) {
        if (l.score != r.score) return l.score > r.score;
        return l.id < r.id;
    });
    const std::size_t k = std::min(policy.k, candidates.size());

    if (policy.kind == BroadcastPolicy::Kind::TopK) {
        for (std::size_t i = 0; i < k; ++i) out.push_back(candidates[i].id);
        return out;
    }

    // Pareto-type rank weighting: weight(rank) = rank^-alpha, ranks from 1.
    std::vector<double> weight(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i)
        weight[i] = std::pow(static_cast<double>(i + 1), -policy.alpha);
    std::vector<bool> taken(candidates.size(), false);
    for (std::size_t draw = 0; draw < k; ++draw) {
        double total = 0.0;
        for (std::size_t i = 0; i < candidates.size(); ++i)
            if (!taken[i]) total += weight[i];
        double target = rng.unit() * total;
        std::size_t pick = candidates.size();
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (taken[i]) continue;
            pick = i;
            if (target < weight[i]) break;
            target -= weight[i];
        }
        taken[pick] = true;
        out.push_back(candidates[pick].id);
    }
    return out;
}

}  // namespace antroute
