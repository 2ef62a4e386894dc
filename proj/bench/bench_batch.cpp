#include <benchmark/benchmark.h>

#include <omp.h>

#include "antroute/batch.hpp"
#include "antroute/topology.hpp"

using namespace antroute;

namespace {

// Sixteen seeds of a 60-node random graph carrying 40 Poisson payments each.
std::vector<Scenario> workload() {
    Scenario s;
    s.seed = 100;
    s.topology = generate_topology(TopologyParams::erdos_renyi(60, 0.1), CapacityModel::constant(1'000'000'000), 9);
    s.latency = LatencyModel::uniform_range(5 * kMillisecond, 25 * kMillisecond);
    s.node_defaults.fee_range = std::pair<Msat, Msat>{0, 10};
    s.phases.push_back({"main", std::nullopt, poisson_workload({40, 20.0, 1000, 20'000, 100}, 60, 3)});
    return repeat_with_seeds(s, 16);
}

const std::vector<Scenario>& scenarios() {
    static const auto cached = workload();
    return cached;
}

void BM_serial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(run_batch_serial(scenarios()));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(scenarios().size()));
}

void BM_openmp(benchmark::State& state) {
    const int threads = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_batch(scenarios(), threads));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(scenarios().size()));
}

void thread_counts(benchmark::internal::Benchmark* b) {
    const int max = omp_get_max_threads();
    for (int t = 1; t < max; t *= 2) b->Arg(t);
    b->Arg(max);
}

}  // namespace

BENCHMARK(BM_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_openmp)->Apply(thread_counts)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
