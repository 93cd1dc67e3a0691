#include <benchmark/benchmark.h>

#include "p2ps/batch.hpp"
#include "p2ps/kernels.hpp"
#include "p2ps/simulator.hpp"

using namespace p2ps;

namespace {

// Network with objects and power peers but no routing tables yet.
Network bare(std::uint32_t nodes) {
  Network net = generate_topology(nodes, 3.5, nodes / 200, 1);
  Rng rng = make_rng(1, Stream::Objects);
  distribute_objects(net, PlacementParams{}, rng);
  assign_initial_power_peers(net, 0.1);
  return net;
}

void BM_InitTables(benchmark::State& state, Exec exec) {
  const Network base = bare(static_cast<std::uint32_t>(state.range(0)));
  const Thresholds t;
  for (auto _ : state) {
    state.PauseTiming();
    Network net = base;
    state.ResumeTiming();
    init_tables(net, t, 4, exec);
    benchmark::DoNotOptimize(net.peers.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

SimConfig small_run(std::uint64_t seed) {
  SimConfig cfg;
  cfg.nodes = 500;
  cfg.free_riders = 5;
  cfg.placement.n_objects = 10;
  cfg.placement.keyword_pool = 500;
  cfg.queries_per_node = 10;
  cfg.metric_interval = 1000;
  cfg.seed = seed;
  return cfg;
}

void BM_Batch(benchmark::State& state, Exec exec) {
  std::vector<SimConfig> cfgs;
  for (std::uint64_t s = 1; s <= 4; ++s) cfgs.push_back(small_run(s));
  for (auto _ : state) benchmark::DoNotOptimize(run_batch(cfgs, exec));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfgs.size()));
}

void BM_MergeTopK(benchmark::State& state) {
  NeighbourQTable nq;
  PowerPeerQTable pq;
  for (std::uint32_t i = 0; i < 8; ++i) nq.set(peer(i), 100.0 + i * 37 % 11);
  for (std::uint32_t i = 8; i < 40; ++i) pq.set(peer(i), 90.0 + i * 53 % 17);
  auto all = [](PeerId) { return true; };
  for (auto _ : state) benchmark::DoNotOptimize(merge_top_k(nq, pq, 6, all));
}

}  // namespace

BENCHMARK_CAPTURE(BM_InitTables, serial, Exec::Serial)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_InitTables, parallel, Exec::Parallel)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Batch, serial, Exec::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Batch, parallel, Exec::Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MergeTopK);

BENCHMARK_MAIN();
