#pragma once

// Seed messages: construction, kind transitions and the canonical wire frame.
//
// Frame layout (all integers big-endian):
//
//   offset  size  field
//        0     1  tag (kind, direction) -- see tag_of()
//        1    32  derived seed R
//       33     4  counter
//       37     8  amount
//       45     8  max_fee
//       53     8  current_fee
//       61     8  matching id (matched and confirmed frames only)
//
// A frame never carries a node identifier.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "antroute/types.hpp"

namespace antroute {

/// One endpoint's 128-bit secret.
using Nonce128 = std::array<std::uint8_t, 16>;

/// The 256-bit hash shared by both endpoints' seeds; the matching key.
struct DerivedSeed {
    std::array<std::uint8_t, 32> bytes{};

    friend auto operator<=>(const DerivedSeed&, const DerivedSeed&) = default;

    std::string hex() const;
};

enum class Direction : std::uint8_t { A = 0, B = 1 };

constexpr Direction opposite(Direction d) { return d == Direction::A ? Direction::B : Direction::A; }

enum class SeedKind : std::uint8_t { Pheromone = 0, Matched = 1, Confirmed = 2 };

/// Logical prefix length of each kind: a matched seed is one bit longer than
/// the pheromone seed it came from, a confirmed seed one bit longer again.
constexpr int prefix_bits(SeedKind kind) { return static_cast<int>(kind) + 1; }

const char* to_string(SeedKind kind);
const char* to_string(Direction d);

struct MatchingId {
    std::uint64_t value{};

    friend constexpr auto operator<=>(MatchingId, MatchingId) = default;
};

struct SeedMessage {
    SeedKind kind = SeedKind::Pheromone;
    Direction direction = Direction::A;
    DerivedSeed r;
    std::uint32_t counter = 0;
    Msat amount = 0;
    Msat max_fee = 0;
    Msat current_fee = 0;
    std::optional<MatchingId> matching_id;

    friend bool operator==(const SeedMessage&, const SeedMessage&) = default;
};

constexpr std::size_t kPheromoneFrameSize = 61;
constexpr std::size_t kLinkedFrameSize = kPheromoneFrameSize + 8;

/// R = SHA-256(rA || rB).
DerivedSeed derive_seed(const Nonce128& r_a, const Nonce128& r_b);

/// The two pheromone seeds of one payment request. Counters start at 0;
/// the originating node applies its own counter policy.
std::pair<SeedMessage, SeedMessage> make_pheromone_pair(const Nonce128& r_a, const Nonce128& r_b, Msat amount,
                                                        Msat max_fee);

SeedMessage conjugate(const SeedMessage& m);
SeedMessage promote_to_matched(const SeedMessage& m, MatchingId id, Msat total_fee);
SeedMessage promote_to_confirmed(const SeedMessage& m);

std::uint8_t tag_of(SeedKind kind, Direction direction);

std::vector<std::uint8_t> encode(const SeedMessage& m);
SeedMessage decode(std::span<const std::uint8_t> frame);

std::string to_hex(std::span<const std::uint8_t> bytes);

}  // namespace antroute

template <>
struct std::hash<antroute::DerivedSeed> {
    std::size_t operator()(const antroute::DerivedSeed& s) const noexcept {
        std::size_t h = 0;
        for (std::size_t i = 0; i < sizeof(std::size_t); ++i) h = (h << 8) | s.bytes[i];
        return h;
    }
};

template <>
struct std::hash<antroute::MatchingId> {
    std::size_t operator()(antroute::MatchingId id) const noexcept { return std::hash<std::uint64_t>{}(id.value); }
};
