#include "antroute/batch.hpp"

#include <exception>

#include <omp.h>

#include "antroute/simulator.hpp"

namespace antroute {

std::vector<Metrics> run_batch(const std::vector<Scenario>& scenarios, int threads) {
    std::vector<Metrics> out(scenarios.size());
    std::vector<std::exception_ptr> errors(scenarios.size());
    const int n = static_cast<int>(scenarios.size());
    const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(team)
    for (int i = 0; i < n; ++i) {
        try {
            out[i] = run_scenario(scenarios[i]);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

std::vector<Metrics> run_batch_serial(const std::vector<Scenario>& scenarios) {
    std::vector<Metrics> out;
    out.reserve(scenarios.size());
    for (const auto& s : scenarios) out.push_back(run_scenario(s));
    return out;
}

std::vector<Scenario> repeat_with_seeds(const Scenario& base, std::size_t count) {
    std::vector<Scenario> out(count, base);
    for (std::size_t i = 0; i < count; ++i) out[i].seed = base.seed + i;
    return out;
}

}  // namespace antroute
