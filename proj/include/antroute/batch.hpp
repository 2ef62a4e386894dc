#pragma once

// Independent scenario runs. Each run is single-threaded and shares nothing
// with the others, so results do not depend on how the batch is split.

#include <vector>

#include "antroute/metrics.hpp"
#include "antroute/scenario.hpp"

namespace antroute {

/// OpenMP parallel over scenarios. `threads` <= 0 uses the OpenMP default.
std::vector<Metrics> run_batch(const std::vector<Scenario>& scenarios, int threads = 0);

/// Reference implementation: one scenario after another.
std::vector<Metrics> run_batch_serial(const std::vector<Scenario>& scenarios);

/// Copies of `base` with seeds base.seed, base.seed + 1, ...; the topology and
/// workload are kept as loaded.
std::vector<Scenario> repeat_with_seeds(const Scenario& base, std::size_t count);

}  // namespace antroute
