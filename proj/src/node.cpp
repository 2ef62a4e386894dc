#include "antroute/node.hpp"

#include <algorithm>
#include <limits>

#include "antroute/errors.hpp"

namespace antroute {

namespace {

std::uint32_t saturating_add(std::uint32_t a, std::uint32_t b) {
    const std::uint64_t s = std::uint64_t{a} + b;
    return s > std::numeric_limits<std::uint32_t>::max() ? std::numeric_limits<std::uint32_t>::max()
                                                         : static_cast<std::uint32_t>(s);
}

std::uint32_t saturating_sub(std::uint32_t a, std::uint32_t b) { return a > b ? a - b : 0; }

}  // namespace

void NodeConfig::validate() const {
    if (ttl <= 0) throw ConfigError("ttl must be positive");
    if (counter_step_max == 0) throw ConfigError("counter_step_max must be at least 1");
}

const char* to_string(Adversary::Kind kind) {
    switch (kind) {
    case Adversary::Kind::Honest: return "honest";
    case Adversary::Kind::CounterCheat: return "counter_cheat";
    case Adversary::Kind::FeeInflate: return "fee_inflate";
    case Adversary::Kind::Dropper: return "dropper";
    case Adversary::Kind::TransparentCheat: return "transparent_cheat";
    }
    return "?";
}

const char* to_string(PacketKind kind) {
    switch (kind) {
    case PacketKind::Seed: return "seed";
    case PacketKind::Ack: return "ack";
    case PacketKind::Replay: return "replay";
    }
    return "?";
}

std::uint32_t next_counter(std::uint32_t prev, const NodeConfig& config, Rng& rng) {
    const auto step = static_cast<std::uint32_t>(rng.uniform(1, std::max<std::uint32_t>(1, config.counter_step_max)));
    return saturating_add(prev, step);
}

const Transmitter* MempoolEntry::best_transmitter() const {
    const Transmitter* best = nullptr;
    for (const auto& t : transmitters) {
        if (!best || t.counter < best->counter || (t.counter == best->counter && t.received_at < best->received_at))
            best = &t;
    }
    return best;
}

std::optional<NodeId> MempoolEntry::upstream_for(NodeId downstream) const {
    for (const auto& s : sent) {
        if (s.neighbor == downstream && s.via) return s.via;
    }
    if (const auto* best = best_transmitter()) return best->neighbor;
    return std::nullopt;
}

std::optional<std::size_t> select_offer(std::span<const Offer> offers) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < offers.size(); ++i) {
        if (!best) {
            best = i;
            continue;
        }
        const auto& b = offers[*best];
        const auto& o = offers[i];
        if (o.total_fee < b.total_fee || (o.total_fee == b.total_fee && o.received_at < b.received_at)) best = i;
    }
    return best;
}

void Reaction::append(Reaction other) {
    out.insert(out.end(), std::make_move_iterator(other.out.begin()), std::make_move_iterator(other.out.end()));
    events.insert(events.end(), std::make_move_iterator(other.events.begin()),
                  std::make_move_iterator(other.events.end()));
}

Node::Node(NodeId id, NodeConfig config, std::vector<NeighborRecord> neighbors, const ChannelSet& channels,
           std::uint64_t rng_seed, Adversary adversary)
    : id_(id),
      config_(std::move(config)),
      neighbors_(std::move(neighbors)),
      channels_(&channels),
      rng_(rng_seed),
      adversary_(adversary) {
    config_.validate();
    for (auto& n : neighbors_) {
        if (n.channel >= channels.size() || !channels[n.channel].has_endpoint(id_) ||
            channels[n.channel].other(id_) != n.neighbor)
            throw ChannelError("neighbor record " + std::to_string(n.neighbor.value) + " of node " +
                               std::to_string(id_.value) + " does not match its channel");
        n.stats.window = config_.stats_window;
    }
}

const NeighborRecord* Node::neighbor(NodeId n) const {
    for (const auto& rec : neighbors_)
        if (rec.neighbor == n) return &rec;
    return nullptr;
}

void Node::record_neighbor_event(NodeId n, const RelayEvent& event) {
    for (auto& rec : neighbors_) {
        if (rec.neighbor == n) {
            rec.stats.record(event);
            return;
        }
    }
}

std::optional<double> Node::score_of(NodeId n) const {
    if (const auto* rec = neighbor(n)) return neighbor_score(rec->stats, config_.weights);
    return std::nullopt;
}

std::vector<NodeId> Node::forward_targets(Direction direction, Msat amount, std::span<const NodeId> exclude) {
    std::vector<NodeId> blocked(exclude.begin(), exclude.end());
    if (config_.volume_gating) {
        for (const auto& rec : neighbors_) {
            const Channel& c = (*channels_)[rec.channel];
            // The payment runs with the payer's seed and against the payee's.
            const NodeId payer_side = direction == Direction::A ? id_ : rec.neighbor;
            if (!can_forward(c, payer_side, amount)) blocked.push_back(rec.neighbor);
        }
    }
    return select_broadcast_set(neighbors_, blocked, config_.broadcast_policy, rng_, config_.weights);
}

std::uint32_t Node::under_report() const {
    switch (adversary_.kind) {
    case Adversary::Kind::CounterCheat: return adversary_.counter_delta;
    case Adversary::Kind::TransparentCheat: return 1;
    default: return 0;
    }
}

std::uint32_t Node::relay_counter(std::uint32_t received) {
    return saturating_sub(next_counter(received), under_report());
}

Reaction Node::originate(Direction role, const Nonce128& r_a, const Nonce128& r_b, Msat amount, Msat max_fee,
                         SimTime now) {
    auto [seed_a, seed_b] = make_pheromone_pair(r_a, r_b, amount, max_fee);
    SeedMessage msg = role == Direction::A ? seed_a : seed_b;
    const MempoolKey key{msg.r, role};
    if (mempool_.contains(key)) throw ProtocolError("originate: request already started on this node");

    MempoolEntry entry;
    entry.key = key;
    entry.min_counter_seen = static_cast<std::uint32_t>(rng_.uniform(0, config_.counter_start_max));
    entry.amount = amount;
    entry.max_fee = max_fee;
    entry.first_seen = now;
    entry.origin = true;

    OriginState& origin = origins_[msg.r];
    origin.role = role;
    origin.started = now;

    Reaction reaction;
    msg.counter = next_counter(entry.min_counter_seen);
    for (NodeId to : forward_targets(role, amount, {})) {
        reaction.out.push_back({to, Packet{PacketKind::Seed, msg, false, {}}});
        entry.sent.push_back({to, msg.counter, msg.current_fee, std::nullopt});
    }
    mempool_.emplace(key, std::move(entry));
    return reaction;
}

Reaction Node::receive(NodeId from, const Packet& packet, SimTime now) {
    if (adversary_.kind == Adversary::Kind::Dropper && rng_.bernoulli(adversary_.drop_probability)) {
        ++counters_.adversarial_drops;
        return {};
    }
    switch (packet.kind) {
    case PacketKind::Seed:
        switch (packet.seed.kind) {
        case SeedKind::Pheromone: return handle_pheromone(packet.seed, from, now);
        case SeedKind::Matched: return handle_matched(packet.seed, from, now);
        case SeedKind::Confirmed: return handle_confirmed(packet, from, now);
        }
        break;
    case PacketKind::Ack: return handle_ack(packet, from, now);
    case PacketKind::Replay: return handle_replay(packet, from, now);
    }
    ++counters_.malformed;
    return {};
}

Reaction Node::rebroadcast(MempoolEntry& entry, const SeedMessage& msg, NodeId from) {
    if (msg.current_fee > msg.max_fee || config_.fee > msg.max_fee - msg.current_fee) {
        ++counters_.fee_rejections;
        return {};
    }
    SeedMessage fwd = msg;
    fwd.counter = relay_counter(msg.counter);
    fwd.current_fee = msg.current_fee + config_.fee;

    Reaction reaction;
    std::vector<NodeId> exclude{from};
    for (const auto& s : entry.sent) exclude.push_back(s.neighbor);
    for (NodeId to : forward_targets(entry.key.direction, entry.amount, exclude)) {
        reaction.out.push_back({to, Packet{PacketKind::Seed, fwd, false, {}}});
        entry.sent.push_back({to, fwd.counter, fwd.current_fee, from});
    }
    return reaction;
}

Reaction Node::handle_pheromone(const SeedMessage& msg, NodeId from, SimTime now) {
    if (msg.kind != SeedKind::Pheromone || msg.matching_id || !neighbor(from)) {
        ++counters_.malformed;
        return {};
    }
    record_neighbor_event(from, RelayEvent::pheromone());

    const MempoolKey key{msg.r, msg.direction};
    const Transmitter transmitter{from, msg.counter, msg.current_fee, now};

    if (auto it = mempool_.find(key); it != mempool_.end()) {
        MempoolEntry& entry = it->second;
        entry.transmitters.push_back(transmitter);
        if (msg.counter < entry.min_counter_seen) {
            entry.min_counter_seen = msg.counter;
            if (entry.origin || entry.matched_here) return {};
            return rebroadcast(entry, msg, from);
        }
        ++counters_.duplicates;
        return {};
    }

    MempoolEntry entry;
    entry.key = key;
    entry.min_counter_seen = msg.counter;
    entry.transmitters.push_back(transmitter);
    entry.amount = msg.amount;
    entry.max_fee = msg.max_fee;
    entry.first_seen = now;

    if (auto conj = mempool_.find(MempoolKey{msg.r, opposite(msg.direction)}); conj != mempool_.end()) {
        // The conjugate is already here: this node is a meeting point. Keep
        // the incoming side for routing but do not flood it further.
        MempoolEntry& stored = conj->second;
        entry.matched_here = true;
        stored.matched_here = true;
        mempool_.emplace(key, std::move(entry));
        return try_match(msg, from, stored, now);
    }

    auto [it, inserted] = mempool_.emplace(key, std::move(entry));
    return rebroadcast(it->second, msg, from);
}

Reaction Node::try_match(const SeedMessage& incoming, NodeId from, const MempoolEntry& stored, SimTime now) {
    if (incoming.kind != SeedKind::Pheromone || stored.key.r != incoming.r ||
        stored.key.direction != opposite(incoming.direction))
        throw ProtocolError("try_match: incoming seed is not the conjugate of the stored seed");

    struct Side {
        Msat fee = 0;
        std::uint32_t counter = 0;
        std::optional<NodeId> hop;
    };
    auto side_of = [&](Direction d) -> Side {
        auto it = mempool_.find(MempoolKey{incoming.r, d});
        if (it == mempool_.end()) return {incoming.current_fee, incoming.counter, from};
        const MempoolEntry& e = it->second;
        if (e.origin) return {0, e.min_counter_seen, std::nullopt};
        const Transmitter* best = e.best_transmitter();
        return {best->fee_at_receipt, best->counter, best->neighbor};
    };
    const Side a_side = side_of(Direction::A);
    const Side b_side = side_of(Direction::B);

    const Msat own_fee = is_endpoint(incoming.r) ? 0 : config_.fee;
    const Msat max_fee = incoming.max_fee;
    if (a_side.fee > max_fee || b_side.fee > max_fee - a_side.fee || own_fee > max_fee - a_side.fee - b_side.fee) {
        ++counters_.match_rejections;
        return {};
    }
    const Msat total_fee = a_side.fee + b_side.fee + own_fee;

    const MatchingId id{rng_.next()};
    MatchRecord record;
    record.id = id;
    record.r = incoming.r;
    record.role = MatchRole::Matcher;
    record.toward_alice = a_side.hop;
    record.toward_bob = b_side.hop;
    record.total_fee = total_fee;
    record.counter = saturating_sub(saturating_add(a_side.counter, b_side.counter), under_report());
    record.state = MatchState::MatchedSent;
    record.created_at = now;
    ++counters_.matches_made;

    SeedMessage base;
    base.kind = SeedKind::Pheromone;
    base.direction = Direction::A;
    base.r = incoming.r;
    base.amount = incoming.amount;
    base.max_fee = max_fee;
    base.current_fee = a_side.fee;
    SeedMessage matched = promote_to_matched(base, id, total_fee);
    matched.counter = record.counter;

    Reaction reaction;
    reaction.events.push_back(events::Matched{incoming.r, id, total_fee, record.counter});
    matches_.emplace(id, record);

    if (a_side.hop) {
        reaction.out.push_back({*a_side.hop, Packet{PacketKind::Seed, matched, false, {}}});
    } else {
        // This node is the payer: the offer is local.
        auto& origin = origins_.at(incoming.r);
        Offer offer{id, total_fee, matched.counter, id_, now, matched};
        origin.offers.push_back(offer);
        reaction.events.push_back(events::OfferArrived{incoming.r, offer});
    }
    return reaction;
}

Reaction Node::handle_matched(const SeedMessage& msg, NodeId from, SimTime now) {
    if (msg.kind != SeedKind::Matched || !msg.matching_id || !neighbor(from)) {
        ++counters_.malformed;
        return {};
    }
    record_neighbor_event(from, RelayEvent::matched());
    const MatchingId id = *msg.matching_id;

    auto entry_it = mempool_.find(MempoolKey{msg.r, Direction::A});
    if (entry_it == mempool_.end()) {
        ++counters_.stale;
        return {};
    }

    Reaction reaction;
    if (auto rec = matches_.find(id); rec != matches_.end()) {
        if (rec->second.total_fee != msg.current_fee) {
            ++counters_.anomalies;
            record_neighbor_event(from, RelayEvent::payment_fail());
            reaction.events.push_back(events::FeeAnomaly{msg.r, id, from});
        } else {
            ++counters_.duplicates;
        }
        return reaction;
    }

    const MempoolEntry& entry = entry_it->second;
    MatchRecord record;
    record.id = id;
    record.r = msg.r;
    record.role = MatchRole::ASide;
    record.toward_bob = from;
    record.total_fee = msg.current_fee;
    record.counter = msg.counter;
    record.created_at = now;

    if (entry.origin) {
        auto& origin = origins_.at(msg.r);
        if (msg.current_fee > msg.max_fee) {
            ++counters_.anomalies;
            record_neighbor_event(from, RelayEvent::payment_fail());
            reaction.events.push_back(events::FeeAnomaly{msg.r, id, from});
            return reaction;
        }
        matches_.emplace(id, record);
        if (origin.chosen) {
            ++counters_.late_offers;
            return reaction;
        }
        Offer offer{id, msg.current_fee, msg.counter, from, now, msg};
        origin.offers.push_back(offer);
        reaction.events.push_back(events::OfferArrived{msg.r, offer});
        return reaction;
    }

    const auto upstream = entry.upstream_for(from);
    if (!upstream) {
        ++counters_.stale;
        return reaction;
    }
    SeedMessage fwd = msg;
    if (adversary_.kind == Adversary::Kind::FeeInflate) {
        // The inflater stays consistent with its own lie.
        fwd.current_fee += adversary_.fee_delta;
        record.total_fee = fwd.current_fee;
    }
    record.toward_alice = upstream;
    matches_.emplace(id, record);
    reaction.out.push_back({*upstream, Packet{PacketKind::Seed, fwd, false, {}}});
    return reaction;
}

Reaction Node::select_and_confirm(const DerivedSeed& r, SimTime now) {
    auto it = origins_.find(r);
    if (it == origins_.end() || it->second.role != Direction::A || it->second.chosen) return {};
    OriginState& origin = it->second;
    const auto pick = select_offer(origin.offers);
    if (!pick) return {};
    origin.chosen = origin.offers[*pick];
    const Offer& offer = *origin.chosen;

    Packet packet{PacketKind::Seed, promote_to_confirmed(offer.seed), config_.audit_round, {}};
    Reaction reaction;
    reaction.events.push_back(events::ConfirmSent{r, offer});

    if (offer.via == id_) {
        // The payer matched the request itself.
        reaction.append(handle_confirmed(packet, id_, now));
        return reaction;
    }
    if (!can_lock(offer.via, offer.seed.amount)) {
        ++counters_.route_lock_failures;
        reaction.events.push_back(events::RouteLockFailure{r, id_});
        return reaction;
    }
    if (auto rec = matches_.find(offer.id); rec != matches_.end()) rec->second.state = MatchState::ConfirmedSeen;
    reaction.out.push_back({offer.via, std::move(packet)});
    return reaction;
}

bool Node::can_lock(NodeId next, Msat amount) const {
    if (!config_.volume_gating) return true;
    const NeighborRecord* rec = neighbor(next);
    return rec && can_forward((*channels_)[rec->channel], id_, amount);
}

Reaction Node::forward_confirmed(Packet packet, MatchRecord& record, NodeId next) {
    if (!can_lock(next, packet.seed.amount)) {
        ++counters_.route_lock_failures;
        Reaction reaction;
        reaction.events.push_back(events::RouteLockFailure{record.r, id_});
        return reaction;
    }
    if (packet.audited && !is_endpoint(record.r)) {
        switch (adversary_.kind) {
        case Adversary::Kind::TransparentCheat: break;
        case Adversary::Kind::CounterCheat: {
            // Hide the counter cut from the payee by deleting upstream tokens.
            auto& tokens = packet.trail.tokens;
            const std::size_t cut = std::min<std::size_t>(adversary_.counter_delta, tokens.size());
            tokens.resize(tokens.size() - cut);
            [[fallthrough]];
        }
        default: {
            auto [trail, token] = append_token(std::move(packet.trail), rng_);
            packet.trail = std::move(trail);
            record.audit_token = token;
        }
        }
    }
    Reaction reaction;
    reaction.out.push_back({next, std::move(packet)});
    return reaction;
}

Reaction Node::deliver_to_bob(const Packet& packet, MatchRecord& record) {
    const SeedMessage& msg = packet.seed;
    Reaction reaction;
    reaction.events.push_back(events::DeliveredToBob{msg.r, record.id, msg.current_fee, msg.counter});
    if (packet.audited) {
        // The endpoints' own first sends are not relays.
        const std::size_t span = msg.counter > 0 ? msg.counter - 1 : 0;
        const auto check = verify_count(packet.trail, span);
        if (const auto* mismatch = std::get_if<CountMismatch>(&check)) {
            ++counters_.cheats_detected;
            reaction.events.push_back(events::CountMismatchAtBob{msg.r, record.id, *mismatch});
            return reaction;
        }
        reaction.events.push_back(events::TrailForAlice{msg.r, record.id, packet.trail});
        return reaction;
    }
    record.state = MatchState::Acked;
    if (record.toward_alice) reaction.out.push_back({*record.toward_alice, Packet{PacketKind::Ack, msg, false, {}}});
    return reaction;
}

Reaction Node::handle_confirmed(const Packet& packet, NodeId from, SimTime now) {
    const SeedMessage& msg = packet.seed;
    if (msg.kind != SeedKind::Confirmed || !msg.matching_id || (from != id_ && !neighbor(from))) {
        ++counters_.malformed;
        return {};
    }
    const MatchingId id = *msg.matching_id;
    Reaction reaction;

    if (auto it = matches_.find(id); it != matches_.end()) {
        MatchRecord& record = it->second;
        if (record.total_fee != msg.current_fee) {
            ++counters_.anomalies;
            record_neighbor_event(from, RelayEvent::payment_fail());
            reaction.events.push_back(events::FeeAnomaly{msg.r, id, from});
            return reaction;
        }
        if (record.state != MatchState::MatchedSent) {
            ++counters_.duplicates;
            return reaction;
        }
        record.state = MatchState::ConfirmedSeen;
        if (!record.toward_bob) return deliver_to_bob(packet, record);
        return forward_confirmed(packet, record, *record.toward_bob);
    }

    // Payee side: no lock yet, follow the payee's pheromone trail.
    auto entry_it = mempool_.find(MempoolKey{msg.r, Direction::B});
    if (entry_it == mempool_.end()) {
        ++counters_.route_lock_failures;
        reaction.events.push_back(events::RouteLockFailure{msg.r, id_});
        return reaction;
    }
    const MempoolEntry& entry = entry_it->second;
    MatchRecord record;
    record.id = id;
    record.r = msg.r;
    record.role = MatchRole::BSide;
    record.toward_alice = from;
    record.total_fee = msg.current_fee;
    record.counter = msg.counter;
    record.state = MatchState::ConfirmedSeen;
    record.created_at = now;
    if (!entry.origin) {
        record.toward_bob = entry.upstream_for(from);
        if (!record.toward_bob) {
            ++counters_.route_lock_failures;
            reaction.events.push_back(events::RouteLockFailure{msg.r, id_});
            return reaction;
        }
    }
    auto [rec_it, inserted] = matches_.emplace(id, record);
    if (entry.origin) return deliver_to_bob(packet, rec_it->second);
    return forward_confirmed(packet, rec_it->second, *rec_it->second.toward_bob);
}

Reaction Node::start_replay(const DerivedSeed& r, MatchingId id, const AuditTrail& trail, SimTime) {
    auto it = origins_.find(r);
    if (it == origins_.end() || !it->second.chosen || it->second.chosen->id != id) return {};
    const Offer& offer = *it->second.chosen;
    std::optional<NodeId> next = offer.via;
    if (offer.via == id_) {
        auto rec = matches_.find(id);
        if (rec == matches_.end()) return {};
        next = rec->second.toward_bob;
    }
    Reaction reaction;
    if (next) {
        Packet packet{PacketKind::Replay, promote_to_confirmed(offer.seed), true, trail};
        reaction.out.push_back({*next, std::move(packet)});
    }
    return reaction;
}

Reaction Node::handle_replay(const Packet& packet, NodeId, SimTime) {
    const SeedMessage& msg = packet.seed;
    Reaction reaction;
    if (!msg.matching_id) {
        ++counters_.malformed;
        return reaction;
    }
    auto it = matches_.find(*msg.matching_id);
    if (it == matches_.end()) {
        ++counters_.route_lock_failures;
        reaction.events.push_back(events::RouteLockFailure{msg.r, id_});
        return reaction;
    }
    MatchRecord& record = it->second;
    AuditTrail trail = packet.trail;
    if (record.audit_token) {
        auto step = replay_step(trail, *record.audit_token);
        if (std::holds_alternative<CheatDetected>(step)) {
            ++counters_.cheats_detected;
            reaction.events.push_back(events::CheatFound{msg.r, record.id, id_});
            return reaction;
        }
        trail = std::get<AuditTrail>(std::move(step));
    }
    if (record.toward_bob) {
        reaction.out.push_back({*record.toward_bob, Packet{PacketKind::Replay, msg, true, std::move(trail)}});
        return reaction;
    }
    // Payee: every token must have been consumed on the way.
    if (!trail.tokens.empty()) {
        ++counters_.cheats_detected;
        reaction.events.push_back(events::CheatFound{msg.r, record.id, id_});
        return reaction;
    }
    reaction.events.push_back(events::ReplayComplete{msg.r, record.id});
    record.state = MatchState::Acked;
    if (record.toward_alice) reaction.out.push_back({*record.toward_alice, Packet{PacketKind::Ack, msg, false, {}}});
    return reaction;
}

Reaction Node::handle_ack(const Packet& packet, NodeId, SimTime) {
    const SeedMessage& msg = packet.seed;
    Reaction reaction;
    if (!msg.matching_id) {
        ++counters_.malformed;
        return reaction;
    }
    auto it = matches_.find(*msg.matching_id);
    if (it == matches_.end()) {
        ++counters_.route_lock_failures;
        reaction.events.push_back(events::RouteLockFailure{msg.r, id_});
        return reaction;
    }
    MatchRecord& record = it->second;
    record.state = MatchState::Acked;
    if (record.toward_alice) {
        reaction.out.push_back({*record.toward_alice, packet});
    } else {
        reaction.events.push_back(events::AckedAtAlice{msg.r, record.id});
    }
    return reaction;
}

std::size_t Node::ttl_sweep(SimTime now) {
    const SimTime cutoff = now - config_.ttl;
    std::size_t evicted = 0;
    evicted += std::erase_if(mempool_, [&](const auto& kv) { return kv.second.first_seen < cutoff; });
    evicted += std::erase_if(matches_, [&](const auto& kv) {
        return kv.second.state == MatchState::Acked || kv.second.created_at < cutoff;
    });
    std::erase_if(origins_, [&](const auto& kv) { return kv.second.started < cutoff; });
    return evicted;
}

}  // namespace antroute
