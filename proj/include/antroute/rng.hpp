#pragma once

#include <cstdint>
#include <random>

namespace antroute {

/// Stable 64-bit mix (splitmix64 finalizer). Used to derive independent
/// streams from a scenario seed without depending on event interleaving.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream);

/// Deterministic generator. The bounded draws are implemented here rather
/// than with <random> distributions, whose output is library-specific.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [lo, hi] (inclusive).
    std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);

    /// Uniform double in [0, 1).
    double unit();

    bool bernoulli(double p) { return p >= 1.0 || (p > 0.0 && unit() < p); }

private:
    std::mt19937_64 engine_;
};

}  // namespace antroute
