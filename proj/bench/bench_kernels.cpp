#include <benchmark/benchmark.h>

#include "qvpn/kernels.hpp"
#include "qvpn/random.hpp"

using namespace qvpn;

namespace {

const ProblemContext& context() {
  static const ProblemContext ctx = [] {
    const auto raw = load_topology_file(QVPN_DATA_DIR "/topologies/synthetic_surfnet50.topo");
    WorkloadParams p;
    p.num_orgs = 3;
    p.pairs_per_org = 50;
    auto workload = generate_workload(raw, p, 7);
    return ProblemContext(engineer_repeaters(raw, 20.0, 10.0), std::move(workload),
                          ContextOptions{});
  }();
  return ctx;
}

std::vector<std::vector<CandidatePath>> all_candidates(const ProblemContext& ctx) {
  std::vector<std::vector<CandidatePath>> out;
  for (std::size_t u = 0; u < ctx.pair_count(); ++u) out.push_back(ctx.candidates(u));
  return out;
}

std::vector<Selection> random_batch(const ProblemContext& ctx, std::size_t n) {
  Rng rng(3);
  std::vector<Selection> batch;
  for (std::size_t i = 0; i < n; ++i) {
    Selection sel(ctx.pair_count());
    for (auto u : ctx.active_pairs())
      for (std::size_t k = 0; k < ctx.max_paths_per_pair(); ++k)
        sel[u].push_back({rng.index(ctx.candidates(u).size()), rng.index(ctx.catalog().size())});
    batch.push_back(ProblemContext::canonical(std::move(sel)));
  }
  return batch;
}

void overhead_table(benchmark::State& state, Execution execution) {
  const auto& ctx = context();
  const auto cands = all_candidates(ctx);
  for (auto _ : state)
    benchmark::DoNotOptimize(compute_overhead_table(ctx.graph(), ctx.workload(), cands,
                                                    ctx.catalog(), ctx.options().noise,
                                                    execution));
}

void wegr_batch(benchmark::State& state, Execution execution) {
  const auto& ctx = context();
  const auto batch = random_batch(ctx, 16);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_wegr_batch(ctx, batch, execution));
}

}  // namespace

BENCHMARK_CAPTURE(overhead_table, serial, Execution::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(overhead_table, parallel, Execution::Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(wegr_batch, serial, Execution::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(wegr_batch, parallel, Execution::Parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
