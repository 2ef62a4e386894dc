#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "antroute/errors.hpp"
#include "antroute/rng.hpp"
#include "antroute/types.hpp"

namespace antroute {

enum class ChannelMode : std::uint8_t { Bidirectional, UnidirectionalAB, UnidirectionalBA };

const char* to_string(ChannelMode mode);
ChannelMode channel_mode_from_string(const std::string& s);

/// A payment channel with per-direction spendable balance.
struct Channel {
    NodeId a;
    NodeId b;
    Msat capacity_ab = 0;
    Msat capacity_ba = 0;
    ChannelMode mode = ChannelMode::Bidirectional;

    bool has_endpoint(NodeId n) const { return n == a || n == b; }
    NodeId other(NodeId n) const;

    /// Spendable amount from `from` toward the other endpoint, 0 when the
    /// mode forbids that direction.
    Msat directed_capacity(NodeId from) const;

    friend bool operator==(const Channel&, const Channel&) = default;
};

/// True iff `amount` may be pushed from `from` across the channel.
bool can_forward(const Channel& channel, NodeId from, Msat amount);

/// Channels indexed by unordered endpoint pair. At most one channel per pair.
class ChannelSet {
public:
    ChannelSet() = default;
    explicit ChannelSet(std::vector<Channel> channels);

    std::size_t add(const Channel& channel);
    std::optional<std::size_t> find(NodeId x, NodeId y) const;

    const Channel& operator[](std::size_t i) const { return channels_[i]; }
    Channel& operator[](std::size_t i) { return channels_[i]; }
    std::size_t size() const { return channels_.size(); }
    const std::vector<Channel>& channels() const { return channels_; }

    friend bool operator==(const ChannelSet& l, const ChannelSet& r) { return l.channels_ == r.channels_; }

private:
    static std::uint64_t key(NodeId x, NodeId y);

    std::vector<Channel> channels_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

class SettleError : public std::runtime_error {
public:
    SettleError(std::size_t hop, const std::string& what) : std::runtime_error(what), hop_(hop) {}
    std::size_t hop() const { return hop_; }

private:
    std::size_t hop_;
};

/// Moves a payment along `path`. Hop i carries the amount left after the
/// fees of the intermediaries before it; each intermediary keeps its own
/// fee. Either every hop is applied or none is.
///
/// `hop_fees` has one entry per intermediary (path.size() - 2).
/// Returns the amount transferred on each hop.
std::vector<Msat> settle_path(ChannelSet& channels, std::span<const NodeId> path, Msat amount,
                              std::span<const Msat> hop_fees);

// ---------------------------------------------------------------------------
// Neighbor performance statistics

enum class RelayEventKind : std::uint8_t { Pheromone, Matched, PaymentOk, PaymentFail };

struct RelayEvent {
    RelayEventKind kind = RelayEventKind::Pheromone;
    Msat amount = 0;

    static RelayEvent pheromone() { return {RelayEventKind::Pheromone, 0}; }
    static RelayEvent matched() { return {RelayEventKind::Matched, 0}; }
    static RelayEvent payment_ok(Msat amount) { return {RelayEventKind::PaymentOk, amount}; }
    static RelayEvent payment_fail() { return {RelayEventKind::PaymentFail, 0}; }
};

constexpr std::size_t kDefaultStatsWindow = 64;

/// Long-term counters plus the same counters over the last `window` events.
struct NeighborStats {
    std::uint64_t pheromone_relayed = 0;
    std::uint64_t matched_relayed = 0;
    std::uint64_t payments_completed = 0;
    std::uint64_t payments_failed = 0;
    Msat volume_total = 0;

    std::uint64_t short_pheromone = 0;
    std::uint64_t short_matched = 0;
    std::uint64_t short_completed = 0;
    std::uint64_t short_failed = 0;
    Msat short_volume = 0;

    std::size_t window = kDefaultStatsWindow;
    std::deque<RelayEvent> recent;

    void record(const RelayEvent& event);

    std::size_t short_events() const { return recent.size(); }

    /// Share of positive events (everything except failures) in the window;
    /// 0 when the window is empty.
    double short_success_ratio() const;

    /// payments_failed / max(1, completed + failed).
    double failure_ratio() const;
};

NeighborStats record_relay_event(NeighborStats stats, const RelayEvent& event);

struct ScoreWeights {
    double completed = 1.0;
    double volume = 0.1;
    double short_success = 1.0;
    double failure = 1.0;

    friend bool operator==(const ScoreWeights&, const ScoreWeights&) = default;
};

/// w1*log(1+completed) + w2*log(1+volume) + w3*short_success - w4*failure_ratio,
/// clamped at zero.
double neighbor_score(const NeighborStats& stats, const ScoreWeights& weights = {});

struct NeighborRecord {
    NodeId neighbor;
    std::size_t channel = 0;  // index into the node's ChannelSet
    NeighborStats stats;
};

struct BroadcastPolicy {
    enum class Kind : std::uint8_t { FloodAll, TopK, ParetoWeighted };

    Kind kind = Kind::FloodAll;
    std::size_t k = 0;
    double alpha = 1.0;

    static BroadcastPolicy flood_all() { return {}; }
    static BroadcastPolicy top_k(std::size_t k) { return {Kind::TopK, k, 1.0}; }
    static BroadcastPolicy pareto_weighted(double alpha, std::size_t k) { return {Kind::ParetoWeighted, k, alpha}; }

    friend bool operator==(const BroadcastPolicy&, const BroadcastPolicy&) = default;
};

std::string to_string(const BroadcastPolicy& policy);

/// Neighbors that should receive a broadcast. Never returns an excluded
/// neighbor or a duplicate.
std::vector<NodeId> select_broadcast_set(std::span<const NeighborRecord> records, std::span<const NodeId> exclude,
                                         const BroadcastPolicy& policy, Rng& rng,
                                         const ScoreWeights& weights = {});

}  // namespace antroute
