#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "p2ps/batch.hpp"
#include "p2ps/kernels.hpp"
#include "p2ps/simulator.hpp"

using namespace p2ps;
using namespace p2ps::test;

namespace {

SimConfig small(Algo algo, std::uint64_t seed) {
  SimConfig cfg;
  cfg.nodes = 400;
  cfg.free_riders = 8;
  cfg.placement.n_objects = 10;
  cfg.placement.keyword_pool = 400;
  cfg.queries_per_node = 6;
  cfg.metric_interval = 400;
  cfg.churn_interval_queries = 500;
  cfg.algo = algo;
  cfg.seed = seed;
  return cfg;
}

std::string csv_of(const RunResult& r) {
  std::ostringstream out;
  write_metrics_csv(r.series, out);
  return out.str();
}

}  // namespace

TEST_CASE("workload arithmetic: one query per node") {
  SimConfig cfg = small(Algo::Rw, 1);
  cfg.nodes = 100;
  cfg.queries_per_node = 1;
  cfg.up_fraction = 1.0;
  cfg.free_riders = 0;
  cfg.metric_interval = 1000;
  auto r = run_experiment(cfg);
  std::uint64_t issued = 0;
  for (const auto& rec : r.series) issued += rec.queries_issued;
  CHECK(issued == 100);
  CHECK(r.queries_scheduled == 100);
  CHECK(r.queries_skipped == 0);
}

TEST_CASE("identical config and seed give identical bytes") {
  for (Algo a : {Algo::Dst, Algo::Aps, Algo::Rw}) {
    auto x = run_experiment(small(a, 3)), y = run_experiment(small(a, 3));
    CHECK(csv_of(x) == csv_of(y));
    CHECK(x.walkers == y.walkers);
    CHECK(x.topology_hash == y.topology_hash);
  }
  CHECK(csv_of(run_experiment(small(Algo::Dst, 3))) != csv_of(run_experiment(small(Algo::Dst, 4))));
}

TEST_CASE("algorithms share topology and workload for a seed") {
  auto d = run_experiment(small(Algo::Dst, 5)), a = run_experiment(small(Algo::Aps, 5)), w = run_experiment(small(Algo::Rw, 5));
  CHECK(d.topology_hash == a.topology_hash);
  CHECK(d.topology_hash == w.topology_hash);
  CHECK(d.queries_scheduled == w.queries_scheduled);
  CHECK(d.queries_skipped == w.queries_skipped);
}

TEST_CASE("run invariants for every algorithm") {
  for (Algo a : {Algo::Dst, Algo::Aps, Algo::Rw})
    for (std::uint64_t seed : {1, 2}) {
      SimConfig cfg = small(a, seed);
      auto r = run_experiment(cfg);
      INFO("algo " << to_string(a) << " seed " << seed);
      // every launched walker ends exactly once
      CHECK(r.walkers.launched > 0);
      CHECK(r.walkers.terminated() == r.walkers.launched);
      CHECK(r.max_hops <= t_max(cfg.ttl));
      if (a != Algo::Dst) CHECK(r.max_hops <= cfg.ttl);
      for (const auto& rec : r.series) {
        CHECK(rec.hits <= rec.queries_issued);
        CHECK(rec.duplicates_forwarded + rec.duplicates_dropped <= rec.duplicates_generated);
        CHECK(rec.hits_by_ordinary + rec.hits_by_power <= rec.hits);
        CHECK(rec.coverage_fraction >= 0);
        CHECK(rec.coverage_fraction <= 1);
        if (a == Algo::Dst) CHECK(rec.free_rider_msgs_received == 0);
        if (a != Algo::Dst) CHECK(rec.ttl_enhancements_used == 0);
      }
      // churn swaps equal numbers, so the alive count never moves
      const auto expect_up = static_cast<std::uint32_t>(round_half_away(cfg.up_fraction * cfg.nodes));
      for (auto u : r.up_count) REQUIRE(u == expect_up);
      CHECK_FALSE(r.churn.empty());
      for (const auto& c : r.churn) CHECK(c.went_up == c.went_down);
      CHECK(r.peers == cfg.nodes);
    }
}

TEST_CASE("baselines do reach free riders") {
  SimConfig cfg = small(Algo::Rw, 2);
  cfg.free_riders = 60;
  std::uint64_t total = 0;
  for (const auto& rec : run_experiment(cfg).series) total += rec.free_rider_msgs_received;
  CHECK(total > 0);
}

TEST_CASE("dst learns: later quartiles do not fall far behind the first") {
  auto r = run_experiment(small(Algo::Dst, 7));
  CHECK(r.series.size() >= 4);
  CHECK(quartile(r.series, 3).success_rate >= quartile(r.series, 0).success_rate - 0.02);
}

TEST_CASE("invalid configs fail with the field named") {
  SimConfig cfg = small(Algo::Dst, 1);
  cfg.walkers = 0;
  try {
    run_experiment(cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "search.walkers");
  }
}

TEST_CASE("coverage denominators") {
  SimConfig cfg = small(Algo::Dst, 1);
  // every other peer down: vacuous full coverage
  Network net = make_graph(4, {{0, 1}, {1, 2}, {2, 3}});
  for (unsigned p = 0; p < 4; ++p) give_objects(net, p, 1);
  for (unsigned p = 1; p < 4; ++p) net.at(P(p)).alive = false;
  std::vector<SampleQuery> one{{P(0), K(5)}};
  CHECK(measure_coverage(net, cfg, one) == 1.0);

  // complete graph: the merged ranking reaches everyone with enough walkers
  Network full = make_graph(6, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {1, 2}, {1, 3}, {1, 4}, {1, 5},
                                {2, 3}, {2, 4}, {2, 5}, {3, 4}, {3, 5}, {4, 5}});
  for (unsigned p = 0; p < 6; ++p) give_objects(full, p, 1);
  init_neighbour_tables(full, cfg.thresholds);
  SimConfig wide = cfg;
  wide.walkers = 6;
  const Network before = full;
  CHECK(measure_coverage(full, wide, one) == 1.0);
  CHECK(full.at(P(0)).nq == before.at(P(0)).nq);  // routed on a copy
}

TEST_CASE("parallel table initialisation matches the serial reference") {
  for (std::uint64_t seed : {1, 2, 3}) {
    SimConfig cfg = small(Algo::Dst, seed);
    cfg.nodes = 1500;
    Network a = generate_topology(cfg.nodes, cfg.avg_degree, cfg.free_riders, seed);
    Rng rng = make_rng(seed, Stream::Objects);
    distribute_objects(a, cfg.placement, rng);
    assign_initial_power_peers(a, cfg.power_init_fraction);
    Network b = a;
    init_tables(a, cfg.thresholds, cfg.broadcast_hops, Exec::Serial);
    init_tables(b, cfg.thresholds, cfg.broadcast_hops, Exec::Parallel);
    for (std::size_t i = 0; i < a.size(); ++i) {
      REQUIRE(a.peers[i].nq == b.peers[i].nq);
      REQUIRE(a.peers[i].pq == b.peers[i].pq);
    }
  }
}

TEST_CASE("batch runs match serial runs in order") {
  std::vector<SimConfig> cfgs;
  for (Algo a : {Algo::Dst, Algo::Rw})
    for (std::uint64_t s : {1, 2}) cfgs.push_back(small(a, s));
  auto serial = run_batch(cfgs, Exec::Serial);
  auto parallel = run_batch(cfgs, Exec::Parallel, 2);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) CHECK(csv_of(serial[i]) == csv_of(parallel[i]));

  auto bad = cfgs;
  bad[1].walkers = 0;
  CHECK_THROWS_AS(run_batch(bad, Exec::Parallel, 2), ConfigError);
}

TEST_CASE("load snapshots and trace output") {
  SimConfig cfg = small(Algo::Dst, 2);
  std::ostringstream trace;
  RunOptions opts;
  opts.trace = &trace;
  auto r = run_experiment(cfg, opts);
  CHECK_FALSE(r.load_snapshots.empty());
  for (const auto& s : r.load_snapshots) CHECK(s.capacity > 0);
  std::ostringstream loads;
  write_loads_csv(r.load_snapshots, loads);
  CHECK(loads.str().rfind("tick,peer_id,queue_len,capacity\n", 0) == 0);
  const auto t = trace.str();
  CHECK(t.find("tick,query_id") == std::string::npos);  // the CLI writes the header
  CHECK(t.find(",launch,") != std::string::npos);
  CHECK(t.find(",hit,") != std::string::npos);
}
