#pragma once

// Discrete-event driver. One event queue ordered by (time, sequence number);
// the sequence number is assigned at scheduling time, so equal-time events
// run in the order they were created.

#include <cstdint>
#include <optional>
#include <ostream>
#include <queue>
#include <unordered_map>
#include <vector>

#include "antroute/metrics.hpp"
#include "antroute/node.hpp"
#include "antroute/scenario.hpp"

namespace antroute {

class Simulator {
public:
    /// When `event_log` is set, every delivery is written to it as one JSON
    /// line {t, src, dst, frame_hex, kind}.
    explicit Simulator(Scenario scenario, std::ostream* event_log = nullptr);

    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    Metrics run();

    const Scenario& scenario() const { return scenario_; }
    const ChannelSet& channels() const { return channels_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    const Node& node(NodeId id) const { return nodes_.at(id.value); }
    const std::vector<NodeConfig>& configs() const { return configs_; }

private:
    enum class EventKind : std::uint8_t { Deliver, Originate, ConfirmTimer, Sweep };

    struct Event {
        SimTime at = 0;
        std::uint64_t seq = 0;
        EventKind kind = EventKind::Deliver;
        NodeId from;
        NodeId to;
        Packet packet;
        std::size_t payment = 0;
        Direction role = Direction::A;
    };
    struct Later {
        bool operator()(const Event& x, const Event& y) const {
            return x.at != y.at ? x.at > y.at : x.seq > y.seq;
        }
    };

    struct PaymentRun {
        PaymentRequest request;
        Nonce128 r_a{};
        Nonce128 r_b{};
        DerivedSeed r;
        std::optional<MatchingId> chosen;
        bool settled = false;
        bool settle_failed = false;
    };

    void schedule(Event event);
    void start_phase(std::size_t phase);
    void absorb(NodeId self, Reaction reaction);
    void on_event(NodeId self, const NodeEvent& event);
    void deliver(Event& event);
    void originate(const Event& event);
    void sweep();
    void settle(std::size_t payment);
    std::optional<std::size_t> payment_of(const DerivedSeed& r) const;
    void note_peak(NodeId node);
    bool all_state_empty() const;
    void finalize();

    Scenario scenario_;
    std::ostream* event_log_;
    ChannelSet channels_;
    std::vector<NodeConfig> configs_;
    std::vector<Node> nodes_;
    Rng latency_rng_;

    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::uint64_t next_seq_ = 0;
    std::size_t pending_work_ = 0;  // queued events other than sweeps
    std::size_t next_phase_ = 0;
    SimTime now_ = 0;

    std::vector<PaymentRun> runs_;
    std::unordered_map<DerivedSeed, std::size_t> by_seed_;
    std::unordered_map<MatchingId, NodeId> matcher_of_;
    Metrics metrics_;
};

/// Runs one scenario to completion.
Metrics run_scenario(const Scenario& scenario, std::ostream* event_log = nullptr);

}  // namespace antroute
