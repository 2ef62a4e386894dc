#include <doctest.h>

#include <optional>

#include "antroute/audit.hpp"

using namespace antroute;

TEST_CASE("append_token grows the trail by one") {
    Rng rng(1);
    auto [t1, tok1] = append_token({}, rng);
    CHECK(t1.tokens == std::vector<AuditToken>{tok1});
    auto [t2, tok2] = append_token(t1, rng);
    CHECK(t2.tokens.size() == 2);
    CHECK(t2.tokens.back() == tok2);
}

TEST_CASE("verify_count") {
    CHECK(std::holds_alternative<CountOk>(verify_count(AuditTrail{{1, 2, 3}}, 3)));
    const auto bad = verify_count(AuditTrail{{1, 2}}, 3);
    REQUIRE(std::holds_alternative<CountMismatch>(bad));
    CHECK(std::get<CountMismatch>(bad).expected == 3);
    CHECK(std::get<CountMismatch>(bad).actual == 2);
    CHECK(std::holds_alternative<CountOk>(verify_count(AuditTrail{}, 0)));
}

TEST_CASE("replay_step") {
    const auto ok = replay_step(AuditTrail{{1, 2, 3}}, 1);
    REQUIRE(std::holds_alternative<AuditTrail>(ok));
    CHECK(std::get<AuditTrail>(ok).tokens == std::vector<AuditToken>{2, 3});
    CHECK(std::holds_alternative<CheatDetected>(replay_step(AuditTrail{{2, 3}}, 1)));
    CHECK(std::holds_alternative<CheatDetected>(replay_step(AuditTrail{}, 1)));
}

namespace {

struct PathRun {
    bool bob_mismatch = false;
    bool replay_detected = false;
    bool replay_clean = false;
};

// Walks a path of `n` intermediaries. The cheater at `cheat_at` either
// deletes `deleted` preceding tokens (and under-reports by the same amount)
// or, when transparent, neither increments nor appends.
PathRun run_path(std::size_t n, std::optional<std::size_t> cheat_at, std::size_t deleted, bool transparent,
                 Rng& rng) {
    AuditTrail trail;
    std::vector<std::optional<AuditToken>> held(n);
    std::size_t span = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (cheat_at && *cheat_at == i) {
            if (transparent) {
                span -= 1;
                continue;
            }
            span -= deleted;
            trail.tokens.resize(trail.tokens.size() - std::min(deleted, trail.tokens.size()));
        }
        auto [next, tok] = append_token(std::move(trail), rng);
        trail = std::move(next);
        held[i] = tok;
    }
    PathRun run;
    if (std::holds_alternative<CountMismatch>(verify_count(trail, span))) {
        run.bob_mismatch = true;
        return run;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!held[i]) continue;
        auto step = replay_step(trail, *held[i]);
        if (std::holds_alternative<CheatDetected>(step)) {
            run.replay_detected = true;
            return run;
        }
        trail = std::get<AuditTrail>(step);
    }
    run.replay_clean = trail.tokens.empty();
    return run;
}

}  // namespace

TEST_CASE("honest path replays cleanly") {
    Rng rng(4);
    for (std::size_t n = 0; n < 10; ++n) {
        const auto run = run_path(n, std::nullopt, 0, false, rng);
        CHECK_FALSE(run.bob_mismatch);
        CHECK_FALSE(run.replay_detected);
        CHECK(run.replay_clean);
    }
}

TEST_CASE("non-transparent cheater is always caught") {
    Rng rng(5);
    for (std::size_t n = 1; n < 10; ++n)
        for (std::size_t at = 0; at < n; ++at)
            for (std::size_t k = 1; k <= 4; ++k) {
                const auto run = run_path(n, at, k, false, rng);
                CHECK((run.bob_mismatch || run.replay_detected));
            }
}

TEST_CASE("transparent cheater passes") {
    Rng rng(6);
    for (std::size_t n = 1; n < 10; ++n)
        for (std::size_t at = 0; at < n; ++at) {
            const auto run = run_path(n, at, 0, true, rng);
            CHECK_FALSE(run.bob_mismatch);
            CHECK_FALSE(run.replay_detected);
            CHECK(run.replay_clean);
        }
}
