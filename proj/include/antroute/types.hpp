#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>

namespace antroute {

/// Amounts and fees, in milli-satoshi.
using Msat = std::uint64_t;

/// Virtual simulation time in microseconds.
using SimTime = std::int64_t;

constexpr SimTime kMillisecond = 1000;
constexpr SimTime kSecond = 1000 * kMillisecond;

struct NodeId {
    std::uint32_t value{};

    friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

inline std::ostream& operator<<(std::ostream& os, NodeId id) { return os << id.value; }

}  // namespace antroute

template <>
struct std::hash<antroute::NodeId> {
    std::size_t operator()(antroute::NodeId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
