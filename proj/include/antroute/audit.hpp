#pragma once

// Final-round counter audit. On the confirmation pass every path node
// appends a random token; the payee compares the token count with the hop
// count implied by the counter, then the payer replays the trail down the
// path and each node must find its own token at the head.

#include <cstddef>
#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "antroute/rng.hpp"
#include "antroute/types.hpp"

namespace antroute {

using AuditToken = std::uint64_t;

struct AuditTrail {
    std::vector<AuditToken> tokens;

    friend bool operator==(const AuditTrail&, const AuditTrail&) = default;
};

std::pair<AuditTrail, AuditToken> append_token(AuditTrail trail, Rng& rng);

struct CountOk {};
struct CountMismatch {
    std::size_t expected = 0;
    std::size_t actual = 0;
};
using CountCheck = std::variant<CountOk, CountMismatch>;

/// `observed_counter_span` is the number of relay increments the counter
/// implies, i.e. the number of nodes strictly between payer and payee.
CountCheck verify_count(const AuditTrail& trail, std::size_t observed_counter_span);

struct CheatDetected {};
using ReplayResult = std::variant<AuditTrail, CheatDetected>;

ReplayResult replay_step(const AuditTrail& trail, AuditToken my_token);

}  // namespace antroute
