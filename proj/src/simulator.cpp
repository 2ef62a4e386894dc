#include "antroute/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "antroute/errors.hpp"
#include "antroute/oracle.hpp"

namespace antroute {

namespace {

constexpr std::uint64_t kNodeStream = 0x40de;
constexpr std::uint64_t kLatencyStream = 0x1a7e;
constexpr std::uint64_t kNonceStream = 0x2011ce;

const char* message_kind(const Packet& p) {
    return p.kind == PacketKind::Seed ? to_string(p.seed.kind) : to_string(p.kind);
}

Nonce128 draw_nonce(Rng& rng) {
    Nonce128 n{};
    for (std::size_t i = 0; i < n.size(); i += 8) {
        const auto x = rng.next();
        for (std::size_t j = 0; j < 8; ++j) n[i + j] = static_cast<std::uint8_t>(x >> (8 * j));
    }
    return n;
}

}  // namespace

Simulator::Simulator(Scenario scenario, std::ostream* event_log)
    : scenario_(std::move(scenario)),
      event_log_(event_log),
      channels_(scenario_.topology.channels),
      latency_rng_(derive_stream(scenario_.seed, kLatencyStream)) {
    scenario_.validate();
    configs_ = scenario_.node_configs();
    auto neighbors = scenario_.topology.neighbor_records();
    nodes_.reserve(scenario_.topology.nodes);
    for (std::uint32_t i = 0; i < scenario_.topology.nodes; ++i) {
        const auto adv = scenario_.adversaries.find(i);
        nodes_.emplace_back(NodeId{i}, configs_[i], std::move(neighbors[i]), channels_,
                            derive_stream(derive_stream(scenario_.seed, kNodeStream), i),
                            adv == scenario_.adversaries.end() ? Adversary{} : adv->second);
    }
    metrics_.seed = scenario_.seed;
    metrics_.peak_mempool.assign(nodes_.size(), 0);
}

void Simulator::schedule(Event event) {
    event.seq = next_seq_++;
    if (event.kind != EventKind::Sweep) ++pending_work_;
    queue_.push(std::move(event));
}

std::optional<std::size_t> Simulator::payment_of(const DerivedSeed& r) const {
    if (auto it = by_seed_.find(r); it != by_seed_.end()) return it->second;
    return std::nullopt;
}

void Simulator::note_peak(NodeId node) {
    auto& peak = metrics_.peak_mempool[node.value];
    peak = std::max(peak, nodes_[node.value].mempool().size());
}

void Simulator::start_phase(std::size_t phase) {
    const Phase& ph = scenario_.phases[phase];
    if (ph.policy)
        for (auto& n : nodes_) n.set_broadcast_policy(*ph.policy);
    metrics_.phases.push_back({ph.name, ph.payments.size(), 0, 0, 0});
    Rng nonces(derive_stream(scenario_.seed, kNonceStream + phase));
    for (const auto& req : ph.payments) {
        const std::size_t index = runs_.size();
        PaymentRun run;
        run.request = req;
        run.request.at = now_ + req.at;
        run.r_a = draw_nonce(nonces);
        run.r_b = draw_nonce(nonces);
        run.r = derive_seed(run.r_a, run.r_b);
        by_seed_.emplace(run.r, index);
        runs_.push_back(run);

        PaymentMetrics pm;
        pm.index = index;
        pm.phase = phase;
        pm.start = run.request.at;
        pm.payer = req.payer;
        pm.payee = req.payee;
        pm.amount = req.amount;
        pm.max_fee = req.max_fee;
        metrics_.payments.push_back(pm);

        Event e;
        e.at = run.request.at;
        e.kind = EventKind::Originate;
        e.payment = index;
        e.role = Direction::A;
        e.to = req.payer;
        schedule(e);
        e.role = Direction::B;
        e.to = req.payee;
        schedule(e);
    }
    next_phase_ = phase + 1;
}

void Simulator::absorb(NodeId self, Reaction reaction) {
    std::optional<MatchingId> confirming;
    for (const auto& ev : reaction.events)
        if (const auto* c = std::get_if<events::ConfirmSent>(&ev)) confirming = c->offer.id;
    for (auto& out : reaction.out) {
        const SeedMessage& seed = out.packet.seed;
        if (out.packet.kind == PacketKind::Seed && seed.kind == SeedKind::Confirmed) {
            const auto p = payment_of(seed.r);
            if (p && seed.matching_id && (runs_[*p].chosen == seed.matching_id || confirming == seed.matching_id)) {
                const auto ch = channels_.find(self, out.to);
                if (!ch || !can_forward(channels_[*ch], self, seed.amount)) metrics_.payments[*p].volume_ok = false;
            }
        }
        Event e;
        e.at = now_ + scenario_.processing_delay + scenario_.latency.sample(latency_rng_);
        e.kind = EventKind::Deliver;
        e.from = self;
        e.to = out.to;
        const char* kind = message_kind(out.packet);
        metrics_.messages++;
        metrics_.messages_by_kind[kind]++;
        if (auto p = payment_of(out.packet.seed.r)) {
            metrics_.payments[*p].messages++;
            metrics_.payments[*p].messages_by_kind[kind]++;
            metrics_.phases[metrics_.payments[*p].phase].messages++;
        }
        e.packet = std::move(out.packet);
        schedule(std::move(e));
    }
    for (const auto& ev : reaction.events) on_event(self, ev);
}

void Simulator::on_event(NodeId self, const NodeEvent& event) {
    std::visit(
        [&](const auto& ev) {
            using T = std::decay_t<decltype(ev)>;
            const auto p = payment_of(ev.r);
            if (!p) return;
            PaymentMetrics& pm = metrics_.payments[*p];
            PaymentRun& run = runs_[*p];
            if constexpr (std::is_same_v<T, events::Matched>) {
                matcher_of_.emplace(ev.id, self);
            } else if constexpr (std::is_same_v<T, events::OfferArrived>) {
                if (self != pm.payer || pm.discovered) return;
                pm.discovered = true;
                pm.discovery_latency = now_ - pm.start;
                const double wait = scenario_.offer_wait_factor * double(now_ - pm.start);
                Event e;
                e.at = pm.start + static_cast<SimTime>(std::ceil(wait));
                e.kind = EventKind::ConfirmTimer;
                e.payment = *p;
                e.to = pm.payer;
                schedule(e);
            } else if constexpr (std::is_same_v<T, events::ConfirmSent>) {
                run.chosen = ev.offer.id;
                pm.chosen_fee = ev.offer.total_fee;
                const auto& offers = nodes_[self.value].origins().at(ev.r).offers;
                pm.offers = offers.size();
                for (const auto& o : offers)
                    pm.min_offer_fee = std::min(pm.min_offer_fee.value_or(o.total_fee), o.total_fee);
                pm.path = {pm.payer};
                if (auto m = matcher_of_.find(ev.offer.id); m != matcher_of_.end()) pm.matcher = m->second;
            } else if constexpr (std::is_same_v<T, events::TrailForAlice>) {
                // Out of band, no delay.
                absorb(pm.payer, nodes_[pm.payer.value].start_replay(ev.r, ev.id, ev.trail, now_));
            } else if constexpr (std::is_same_v<T, events::CountMismatchAtBob>) {
                pm.count_mismatch = true;
            } else if constexpr (std::is_same_v<T, events::CheatFound>) {
                pm.cheat_detected = true;
            } else if constexpr (std::is_same_v<T, events::FeeAnomaly>) {
                pm.fee_anomaly = true;
            } else if constexpr (std::is_same_v<T, events::RouteLockFailure>) {
                pm.route_lock_failure = true;
            } else if constexpr (std::is_same_v<T, events::AckedAtAlice>) {
                if (self == pm.payer && run.chosen == ev.id) settle(*p);
            }
        },
        event);
}

void Simulator::settle(std::size_t index) {
    PaymentRun& run = runs_[index];
    PaymentMetrics& pm = metrics_.payments[index];
    if (run.settled || run.settle_failed) return;
    const std::string tag = "payment " + std::to_string(index) + ": ";
    if (pm.path.size() < 2 || pm.path.back() != pm.payee) {
        metrics_.invariant_violations.push_back(tag + "acknowledged without reaching the payee");
        run.settle_failed = true;
        return;
    }
    pm.path_hops = pm.path.size() - 1;
    std::vector<Msat> fees;
    Msat truth = 0;
    for (std::size_t i = 1; i + 1 < pm.path.size(); ++i) {
        fees.push_back(configs_[pm.path[i].value].fee);
        truth += fees.back();
    }
    pm.ground_truth_fee = truth;
    if (pm.chosen_fee != truth)
        metrics_.invariant_violations.push_back(tag + "acknowledged at fee " + std::to_string(*pm.chosen_fee) +
                                                " but path intermediaries charge " + std::to_string(truth));
    if (truth > pm.max_fee) metrics_.invariant_violations.push_back(tag + "path fee exceeds max_fee");
    if (!pm.volume_ok) metrics_.invariant_violations.push_back(tag + "confirmed over a channel lacking capacity");
    try {
        settle_path(channels_, pm.path, pm.amount + truth, fees);
    } catch (const SettleError&) {
        run.settle_failed = true;
        return;
    }
    run.settled = true;
    pm.success = true;
    pm.completion_latency = now_ - pm.start;
    for (std::size_t i = 0; i < pm.path.size(); ++i) {
        Node& n = nodes_[pm.path[i].value];
        if (i > 0) n.record_neighbor_event(pm.path[i - 1], RelayEvent::payment_ok(pm.amount));
        if (i + 1 < pm.path.size()) n.record_neighbor_event(pm.path[i + 1], RelayEvent::payment_ok(pm.amount));
    }
}

void Simulator::deliver(Event& event) {
    metrics_.last_traffic = now_;
    const Packet& packet = event.packet;
    if (event_log_) {
        const auto frame = encode(packet.seed);
        nlohmann::json line = {{"t", now_},
                               {"src", event.from.value},
                               {"dst", event.to.value},
                               {"frame_hex", to_hex(frame)},
                               {"kind", message_kind(packet)}};
        *event_log_ << line.dump() << '\n';
    }
    if (packet.kind == PacketKind::Seed && packet.seed.kind == SeedKind::Confirmed) {
        if (auto p = payment_of(packet.seed.r); p && runs_[*p].chosen == packet.seed.matching_id) {
            PaymentMetrics& pm = metrics_.payments[*p];
            if (std::find(pm.path.begin(), pm.path.end(), event.to) != pm.path.end())
                metrics_.invariant_violations.push_back("payment " + std::to_string(*p) +
                                                        ": confirmed seed revisited node " +
                                                        std::to_string(event.to.value));
            pm.path.push_back(event.to);
        }
    }
    absorb(event.to, nodes_[event.to.value].receive(event.from, packet, now_));
    note_peak(event.to);
}

void Simulator::originate(const Event& event) {
    metrics_.last_traffic = now_;
    const PaymentRun& run = runs_[event.payment];
    PaymentMetrics& pm = metrics_.payments[event.payment];
    if (event.role == Direction::A) {
        if (auto path = oracle_shortest_path(scenario_.topology.nodes, channels_, pm.payer, pm.payee, pm.amount))
            pm.oracle_hops = path->hops();
    }
    absorb(event.to, nodes_[event.to.value].originate(event.role, run.r_a, run.r_b, run.request.amount,
                                                       run.request.max_fee, now_));
    note_peak(event.to);
}

bool Simulator::all_state_empty() const {
    return std::all_of(nodes_.begin(), nodes_.end(), [](const Node& n) {
        return n.mempool().empty() && n.matches().empty() && n.origins().empty();
    });
}

void Simulator::sweep() {
    SimTime oldest = 0;
    for (auto& n : nodes_) {
        n.ttl_sweep(now_);
        for (const auto& [key, entry] : n.mempool()) oldest = std::max(oldest, now_ - entry.first_seen);
        for (const auto& [id, rec] : n.matches()) oldest = std::max(oldest, now_ - rec.created_at);
    }
    metrics_.max_entry_age_after_sweep = std::max(metrics_.max_entry_age_after_sweep, oldest);
    const bool empty = all_state_empty();
    if (empty && (!metrics_.state_empty_at || (metrics_.last_traffic && *metrics_.state_empty_at < *metrics_.last_traffic)))
        metrics_.state_empty_at = now_;
    if (pending_work_ > 0 || !empty || next_phase_ < scenario_.phases.size()) {
        Event e;
        e.at = now_ + scenario_.sweep_interval;
        e.kind = EventKind::Sweep;
        schedule(e);
    }
}

void Simulator::finalize() {
    for (std::size_t i = 0; i < runs_.size(); ++i) {
        PaymentMetrics& pm = metrics_.payments[i];
        PhaseMetrics& ph = metrics_.phases[pm.phase];
        if (pm.discovered) ph.discovered++;
        if (pm.success) {
            ph.successes++;
            continue;
        }
        if (pm.cheat_detected) pm.failure = "cheat_detected";
        else if (pm.count_mismatch) pm.failure = "count_mismatch";
        else if (pm.fee_anomaly) pm.failure = "fee_anomaly";
        else if (runs_[i].settle_failed) pm.failure = "settle_failed";
        else if (pm.route_lock_failure) pm.failure = "route_lock_failure";
        else pm.failure = "timeout";
    }
    for (const auto& n : nodes_) {
        const auto& c = n.counters();
        metrics_.anomalies += c.anomalies;
        metrics_.cheats_detected += c.cheats_detected;
        metrics_.route_lock_failures += c.route_lock_failures;
        metrics_.adversarial_drops += c.adversarial_drops;
        metrics_.late_offers += c.late_offers;
    }
    metrics_.end_time = now_;
}

Metrics Simulator::run() {
    if (!scenario_.phases.empty()) start_phase(0);
    Event first_sweep;
    first_sweep.at = scenario_.sweep_interval;
    first_sweep.kind = EventKind::Sweep;
    schedule(first_sweep);

    while (!queue_.empty()) {
        if (queue_.top().at > scenario_.horizon) {
            metrics_.horizon_reached = pending_work_ > 0 || next_phase_ < scenario_.phases.size();
            break;
        }
        Event event = queue_.top();
        queue_.pop();
        now_ = event.at;
        if (event.kind != EventKind::Sweep) --pending_work_;
        switch (event.kind) {
        case EventKind::Deliver: deliver(event); break;
        case EventKind::Originate: originate(event); break;
        case EventKind::ConfirmTimer: {
            const PaymentRun& run = runs_[event.payment];
            absorb(event.to, nodes_[event.to.value].select_and_confirm(run.r, now_));
            break;
        }
        case EventKind::Sweep: sweep(); break;
        }
        if (pending_work_ == 0 && next_phase_ < scenario_.phases.size()) start_phase(next_phase_);
    }
    finalize();
    return metrics_;
}

Metrics run_scenario(const Scenario& scenario, std::ostream* event_log) {
    Simulator sim(scenario, event_log);
    return sim.run();
}

}  // namespace antroute
