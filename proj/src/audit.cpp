#include "antroute/audit.hpp"

namespace antroute {

std::pair<AuditTrail, AuditToken> append_token(AuditTrail trail, Rng& rng) {
    const AuditToken token = rng.next();
    trail.tokens.push_back(token);
    return {std::move(trail), token};
}

CountCheck verify_count(const AuditTrail& trail, std::size_t observed_counter_span) {
    if (trail.tokens.size() == observed_counter_span) return CountOk{};
    return CountMismatch{observed_counter_span, trail.tokens.size()};
}

ReplayResult replay_step(const AuditTrail& trail, AuditToken my_token) {
    if (trail.tokens.empty() || trail.tokens.front() != my_token) return CheatDetected{};
    return AuditTrail{{trail.tokens.begin() + 1, trail.tokens.end()}};
}

}  // namespace antroute
