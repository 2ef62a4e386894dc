#pragma once

// Per-node routing state machine. Every node, payer and payee included, runs
// this same class; the endpoints differ only in calling originate() and, on
// the payer side, select_and_confirm().

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <variant>
#include <vector>

#include "antroute/audit.hpp"
#include "antroute/channel.hpp"
#include "antroute/rng.hpp"
#include "antroute/seedcraft.hpp"
#include "antroute/types.hpp"

namespace antroute {

struct NodeConfig {
    SimTime ttl = 30 * kSecond;
    std::uint32_t counter_start_max = 0;
    std::uint32_t counter_step_max = 1;
    Msat fee = 0;
    BroadcastPolicy broadcast_policy;
    bool volume_gating = true;
    bool audit_round = false;
    ScoreWeights weights;
    std::size_t stats_window = kDefaultStatsWindow;

    /// Throws ConfigError when ttl <= 0 or counter_step_max == 0.
    void validate() const;

    friend bool operator==(const NodeConfig&, const NodeConfig&) = default;
};

/// Deviations from honest behavior, each confined to one dimension.
struct Adversary {
    enum class Kind : std::uint8_t { Honest, CounterCheat, FeeInflate, Dropper, TransparentCheat };

    Kind kind = Kind::Honest;
    std::uint32_t counter_delta = 0;  // CounterCheat: under-report per relay
    Msat fee_delta = 0;               // FeeInflate: added to relayed matched seeds
    double drop_probability = 0.0;    // Dropper

    static Adversary honest() { return {}; }
    static Adversary counter_cheat(std::uint32_t delta) { return {Kind::CounterCheat, delta, 0, 0.0}; }
    static Adversary fee_inflate(Msat delta) { return {Kind::FeeInflate, 0, delta, 0.0}; }
    static Adversary dropper(double p) { return {Kind::Dropper, 0, 0, p}; }
    static Adversary transparent_cheat() { return {Kind::TransparentCheat, 0, 0, 0.0}; }

    bool is_honest() const { return kind == Kind::Honest; }

    friend bool operator==(const Adversary&, const Adversary&) = default;
};

const char* to_string(Adversary::Kind kind);

/// prev + uniform[1, counter_step_max], saturating.
std::uint32_t next_counter(std::uint32_t prev, const NodeConfig& config, Rng& rng);

struct MempoolKey {
    DerivedSeed r;
    Direction direction = Direction::A;

    friend bool operator==(const MempoolKey&, const MempoolKey&) = default;
};

struct MempoolKeyHash {
    std::size_t operator()(const MempoolKey& k) const noexcept {
        return std::hash<DerivedSeed>{}(k.r) ^ static_cast<std::size_t>(k.direction);
    }
};

struct Transmitter {
    NodeId neighbor;
    std::uint32_t counter = 0;
    Msat fee_at_receipt = 0;
    SimTime received_at = 0;
};

/// A copy this node forwarded: to whom, with what counter and fee, and which
/// transmitter's copy it was derived from (none for the originator). A node
/// sends at most one copy of a seed to each neighbor, so a send record pins
/// the whole chain of copies back to the originator.
struct SendRecord {
    NodeId neighbor;
    std::uint32_t counter = 0;
    Msat fee = 0;
    std::optional<NodeId> via;
};

/// The node's memory of one (R, direction) pheromone seed.
struct MempoolEntry {
    MempoolKey key;
    std::uint32_t min_counter_seen = 0;
    std::vector<Transmitter> transmitters;
    std::vector<SendRecord> sent;
    Msat amount = 0;
    Msat max_fee = 0;
    SimTime first_seen = 0;
    bool origin = false;        // this node started the seed
    bool matched_here = false;  // both directions met at this node

    /// Minimal-counter transmitter, ties broken by earliest receipt.
    const Transmitter* best_transmitter() const;

    /// Next hop back toward the seed's originator for traffic that arrived
    /// from `downstream`: the transmitter whose copy was forwarded to
    /// `downstream`, falling back to best_transmitter().
    std::optional<NodeId> upstream_for(NodeId downstream) const;
};

enum class MatchRole : std::uint8_t { ASide, Matcher, BSide };
enum class MatchState : std::uint8_t { MatchedSent, ConfirmedSeen, Acked };

/// Route lock for one matching id. toward_alice is empty at the payer and
/// toward_bob is empty at the payee; on the payer's side toward_bob is the
/// hop toward the matching node.
struct MatchRecord {
    MatchingId id;
    DerivedSeed r;
    MatchRole role = MatchRole::ASide;
    std::optional<NodeId> toward_alice;
    std::optional<NodeId> toward_bob;
    Msat total_fee = 0;
    std::uint32_t counter = 0;
    MatchState state = MatchState::MatchedSent;
    SimTime created_at = 0;
    std::optional<AuditToken> audit_token;
};

struct Offer {
    MatchingId id;
    Msat total_fee = 0;
    std::uint32_t counter = 0;
    NodeId via;
    SimTime received_at = 0;
    SeedMessage seed;
};

/// Lowest fee, ties to the earliest arrival. Empty when there is no offer.
std::optional<std::size_t> select_offer(std::span<const Offer> offers);

/// Endpoint bookkeeping for a request this node started.
struct OriginState {
    Direction role = Direction::A;
    SimTime started = 0;
    std::vector<Offer> offers;
    std::optional<Offer> chosen;
};

enum class PacketKind : std::uint8_t { Seed, Ack, Replay };

const char* to_string(PacketKind kind);

/// What travels between neighbors. Ack and Replay carry the confirmed seed
/// they refer to; the trail is only used by audited confirmations.
struct Packet {
    PacketKind kind = PacketKind::Seed;
    SeedMessage seed;
    bool audited = false;
    AuditTrail trail;
};

struct Outbound {
    NodeId to;
    Packet packet;
};

namespace events {
struct Matched {
    DerivedSeed r;
    MatchingId id;
    Msat total_fee = 0;
    std::uint32_t counter = 0;
};
struct OfferArrived {
    DerivedSeed r;
    Offer offer;
};
struct ConfirmSent {
    DerivedSeed r;
    Offer offer;
};
struct DeliveredToBob {
    DerivedSeed r;
    MatchingId id;
    Msat total_fee = 0;
    std::uint32_t counter = 0;
};
struct CountMismatchAtBob {
    DerivedSeed r;
    MatchingId id;
    CountMismatch mismatch;
};
/// Audited confirmation accepted by the payee; the trail goes to the payer
/// out of band.
struct TrailForAlice {
    DerivedSeed r;
    MatchingId id;
    AuditTrail trail;
};
struct CheatFound {
    DerivedSeed r;
    MatchingId id;
    NodeId at;
};
struct ReplayComplete {
    DerivedSeed r;
    MatchingId id;
};
struct AckedAtAlice {
    DerivedSeed r;
    MatchingId id;
};
struct FeeAnomaly {
    DerivedSeed r;
    MatchingId id;
    NodeId from;
};
struct RouteLockFailure {
    DerivedSeed r;
    NodeId at;
};
}  // namespace events

using NodeEvent = std::variant<events::Matched, events::OfferArrived, events::ConfirmSent, events::DeliveredToBob,
                               events::CountMismatchAtBob, events::TrailForAlice, events::CheatFound,
                               events::ReplayComplete, events::AckedAtAlice, events::FeeAnomaly,
                               events::RouteLockFailure>;

struct Reaction {
    std::vector<Outbound> out;
    std::vector<NodeEvent> events;

    void append(Reaction other);
};

struct NodeCounters {
    std::uint64_t malformed = 0;
    std::uint64_t duplicates = 0;
    std::uint64_t stale = 0;
    std::uint64_t fee_rejections = 0;
    std::uint64_t match_rejections = 0;
    std::uint64_t matches_made = 0;
    std::uint64_t anomalies = 0;
    std::uint64_t route_lock_failures = 0;
    std::uint64_t cheats_detected = 0;
    std::uint64_t adversarial_drops = 0;
    std::uint64_t late_offers = 0;
};

class Node {
public:
    using Mempool = std::unordered_map<MempoolKey, MempoolEntry, MempoolKeyHash>;
    using MatchTable = std::unordered_map<MatchingId, MatchRecord>;

    /// `channels` must outlive the node; capacities are read at decision time.
    Node(NodeId id, NodeConfig config, std::vector<NeighborRecord> neighbors, const ChannelSet& channels,
         std::uint64_t rng_seed, Adversary adversary = {});

    NodeId id() const { return id_; }

    Reaction originate(Direction role, const Nonce128& r_a, const Nonce128& r_b, Msat amount, Msat max_fee,
                       SimTime now);

    /// Entry point for anything delivered by a neighbor.
    Reaction receive(NodeId from, const Packet& packet, SimTime now);

    Reaction handle_pheromone(const SeedMessage& msg, NodeId from, SimTime now);
    /// `stored` holds the conjugate of `incoming`, which arrived from `from`.
    Reaction try_match(const SeedMessage& incoming, NodeId from, const MempoolEntry& stored, SimTime now);
    Reaction handle_matched(const SeedMessage& msg, NodeId from, SimTime now);
    Reaction select_and_confirm(const DerivedSeed& r, SimTime now);
    Reaction handle_confirmed(const Packet& packet, NodeId from, SimTime now);
    Reaction start_replay(const DerivedSeed& r, MatchingId id, const AuditTrail& trail, SimTime now);
    Reaction handle_replay(const Packet& packet, NodeId from, SimTime now);
    Reaction handle_ack(const Packet& packet, NodeId from, SimTime now);

    /// Drops mempool entries first seen more than ttl ago, acked route locks,
    /// route locks older than ttl and stale origin state. Returns the number
    /// of mempool entries and route locks removed.
    std::size_t ttl_sweep(SimTime now);

    std::uint32_t next_counter(std::uint32_t prev) { return antroute::next_counter(prev, config_, rng_); }

    void record_neighbor_event(NodeId neighbor, const RelayEvent& event);
    std::optional<double> score_of(NodeId neighbor) const;

    void set_broadcast_policy(const BroadcastPolicy& policy) { config_.broadcast_policy = policy; }

    const NodeConfig& config() const { return config_; }
    const Adversary& adversary() const { return adversary_; }
    const std::vector<NeighborRecord>& neighbors() const { return neighbors_; }
    const Mempool& mempool() const { return mempool_; }
    const MatchTable& matches() const { return matches_; }
    const std::unordered_map<DerivedSeed, OriginState>& origins() const { return origins_; }
    const NodeCounters& counters() const { return counters_; }

    /// True when this node originated either direction of `r`.
    bool is_endpoint(const DerivedSeed& r) const { return origins_.contains(r); }

private:
    const NeighborRecord* neighbor(NodeId n) const;
    std::vector<NodeId> forward_targets(Direction direction, Msat amount, std::span<const NodeId> exclude);
    Reaction rebroadcast(MempoolEntry& entry, const SeedMessage& msg, NodeId from);
    /// Capacity toward `next` can still carry `amount` (always true without
    /// volume gating).
    bool can_lock(NodeId next, Msat amount) const;
    Reaction forward_confirmed(Packet packet, MatchRecord& record, NodeId next);
    Reaction deliver_to_bob(const Packet& packet, MatchRecord& record);
    std::uint32_t under_report() const;
    std::uint32_t relay_counter(std::uint32_t received);

    NodeId id_;
    NodeConfig config_;
    std::vector<NeighborRecord> neighbors_;
    const ChannelSet* channels_;
    Rng rng_;
    Adversary adversary_;

    Mempool mempool_;
    MatchTable matches_;
    std::unordered_map<DerivedSeed, OriginState> origins_;
    NodeCounters counters_;
};

}  // namespace antroute
