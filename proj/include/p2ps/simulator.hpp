#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "p2ps/config.hpp"
#include "p2ps/dst.hpp"
#include "p2ps/metrics.hpp"
#include "p2ps/network.hpp"

namespace p2ps {

// Every launched walker ends in exactly one of these.
struct WalkerTotals {
  std::uint64_t launched = 0;
  std::uint64_t hit = 0;
  std::uint64_t ttl_expired = 0;
  std::uint64_t dead_end = 0;
  std::uint64_t duplicate_drop = 0;

  std::uint64_t terminated() const { return hit + ttl_expired + dead_end + duplicate_drop; }
  friend bool operator==(const WalkerTotals&, const WalkerTotals&) = default;
};

struct PowerPeerLoad {
  PeerId peer{};
  std::uint32_t capacity = 0;
  std::uint32_t peak_len = 0;
  double peak_utilization = 0.0;
};

struct LoadSnapshot {
  Tick tick = 0;
  PeerId peer{};
  std::uint32_t queue_len = 0;
  std::uint32_t capacity = 0;
};

struct ChurnEvent {
  Tick tick = 0;
  std::uint32_t went_up = 0;
  std::uint32_t went_down = 0;
};

struct RunResult {
  MetricsSeries series;
  std::array<double, 4> quartile_coverage{};  // union of reach over each quartile's intervals
  WalkerTotals walkers;
  std::uint32_t max_hops = 0;                 // longest walk observed
  std::vector<PowerPeerLoad> power_loads;     // every peer that was ever a power peer, by id
  std::vector<double> max_utilization;        // per tick, highest queue utilisation over power peers
  std::vector<LoadSnapshot> load_snapshots;   // taken when each metrics interval closes
  std::vector<ChurnEvent> churn;
  std::vector<std::uint32_t> up_count;        // alive peers at the end of each tick
  std::uint64_t topology_hash = 0;
  std::uint64_t queries_scheduled = 0;
  std::uint64_t queries_skipped = 0;          // source was down at its slot
  std::size_t peers = 0;
};

struct RunOptions {
  std::ostream* trace = nullptr;        // tick,query_id,message_id,peer,action,next,ttl_remaining
  std::ostream* qtable_dump = nullptr;  // final tables, see dump_qtables
};

// Topology, objects, power peers, routing tables and liveness for cfg.
Network build_network(const SimConfig& cfg);

RunResult run_experiment(const SimConfig& cfg, const RunOptions& opts = {});

// Result of routing one query to completion outside the event loop.
struct QueryTrace {
  Launch launch;
  std::vector<std::vector<PeerId>> paths;  // per walker, source first
  std::vector<Termination> ends;
  std::vector<HitReport> hits;
  std::vector<PeerId> reached;             // distinct peers that received a walker, sorted
  std::uint32_t duplicates = 0;
  bool success = false;
};

// Routes one query hop-synchronously with the learning updates of the
// configured algorithm applied to `net`.
QueryTrace route_query(Network& net, PeerId source, Keyword kw, const SimConfig& cfg, Tick tick = 0,
                       std::ostream* trace = nullptr);

struct SampleQuery {
  PeerId source{};
  Keyword keyword{};
};

// Fraction of alive non-free-riders (excluding the sample sources) reached by
// at least one walker of the samples; 1.0 when that set is empty. Queries are
// routed on a copy, `net` is left untouched.
double measure_coverage(const Network& net, const SimConfig& cfg, std::span<const SampleQuery> samples);

void write_loads_csv(const std::vector<LoadSnapshot>& snapshots, std::ostream& out);

// One line per entry: table_kind,owner_id,key,peer_id,qvalue_int where
// table_kind is nq, pq or qt and key is the keyword (empty for nq/pq).
void dump_qtables(const Network& net, std::ostream& out);

}  // namespace p2ps
