#include "p2ps/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "p2ps/baselines.hpp"
#include "p2ps/kernels.hpp"
#include "p2ps/load_balancer.hpp"

namespace p2ps {

namespace {

DstParams dst_params(const SimConfig& cfg) {
  DstParams p;
  p.ttl0 = cfg.ttl;
  p.walkers = cfg.walkers;
  p.reward = cfg.reward;
  p.thresholds = cfg.thresholds;
  p.broadcast_hops = cfg.broadcast_hops;
  return p;
}

struct QueryState {
  QueryId id = 0;
  PeerId source{};
  Keyword kw{};
  std::size_t interval = 0;
  Launch launch;
  std::unordered_set<PeerId> seen;
  std::vector<WalkerOutcome> outcomes;
  std::uint32_t live = 0;
  bool resolved = false;
  bool done = false;
};

// Per-walker routing shared by the event loop and the synchronous router.
class Router {
 public:
  Router(Network& net, const SimConfig& cfg, Rng rng, std::ostream* trace)
      : net_(net), cfg_(cfg), params_(dst_params(cfg)), aps_(net.size(), cfg.aps), rng_(rng), trace_(trace) {}

  MetricsSeries records;
  std::vector<std::vector<char>> reached;  // per interval
  WalkerTotals totals;
  std::uint32_t max_hops = 0;
  std::function<void(PeerId)> on_promote;  // a cached object turned the source into a power peer

  MetricsRecord& record(std::size_t interval) {
    while (records.size() <= interval) {
      records.emplace_back();
      reached.emplace_back(net_.size(), 0);
    }
    return records[interval];
  }

  // Launches a query; returns the walkers heading to their first hop.
  std::vector<WalkerMessage> issue(QueryState& q, Tick now) {
    MetricsRecord& m = record(q.interval);
    ++m.queries_issued;
    q.seen.insert(q.source);

    std::vector<PeerId> targets;
    std::vector<Selection> via;
    if (const auto nr = net_.matching_objects(q.source, q.kw); nr > 0) {
      q.launch.mode = LaunchMode::Local;
      q.launch.local_nr = nr;
    } else if (cfg_.algo == Algo::Dst) {
      q.launch = launch_query(net_, q.source, q.kw, cfg_.walkers, now);
    } else {
      targets = cfg_.algo == Algo::Rw ? random_walk_launch(net_, q.source, cfg_.walkers, rng_)
                                      : aps_launch(aps_, net_, q.source, q.kw, cfg_.walkers, rng_);
      q.launch.mode = targets.empty() ? LaunchMode::NoTargets : LaunchMode::Merged;
      q.launch.targets = targets;
      q.launch.via.assign(targets.size(), Selection::Random);
    }

    if (q.launch.mode == LaunchMode::Local) {
      ++m.hit_reports;
      ++m.hits;
      ++(net_.at(q.source).is_power() ? m.hits_by_power : m.hits_by_ordinary);
      q.resolved = true;
      q.done = true;
      log(now, q, q.source, "local_hit", std::nullopt, cfg_.ttl);
      return {};
    }
    if (q.launch.mode == LaunchMode::NoTargets) {
      q.done = true;
      log(now, q, q.source, "no_targets", std::nullopt, cfg_.ttl);
      return {};
    }

    auto walkers = make_walkers(q.launch, q.id, q.id, q.source, q.kw, cfg_.ttl);
    q.live = static_cast<std::uint32_t>(walkers.size());
    totals.launched += walkers.size();
    for (const auto& w : walkers) {
      q.outcomes.push_back({w.next, w.next_via, false});
      if (cfg_.algo == Algo::Aps) aps_on_forward(q.source, q.kw, w.next);
      log(now, q, q.source, "launch", w.next, w.ttl_remaining);
    }
    return walkers;
  }

  // A walker reaches msg.next. Forwarded walkers are appended to `out`.
  void arrive(QueryState& q, WalkerMessage msg, Tick now, std::vector<WalkerMessage>& out) {
    const PeerId at = msg.next;
    Peer& p = net_.at(at);
    MetricsRecord& m = record(q.interval);
    if (!p.alive) {
      end(q, msg, Termination::DeadEnd, now, at);
      return;
    }
    msg.via.push_back(msg.next_via);
    msg.path.push_back(at);
    ++msg.hops_visited;
    max_hops = std::max(max_hops, msg.hops_visited);
    reached[q.interval][idx(at)] = 1;
    if (p.is_free_rider()) ++m.free_rider_msgs_received;

    if (q.seen.count(at) != 0) {
      duplicate(q, std::move(msg), now, out);
      return;
    }
    q.seen.insert(at);

    RoutingAction act;
    if (cfg_.algo == Algo::Dst) {
      act = handle_query(net_, at, msg, now);
    } else {
      ++p.queries_received;
      if (const auto nr = net_.matching_objects(at, msg.keyword); nr > 0) {
        ++p.hits_produced;
        act = RoutingAction::hit(nr);
      } else if (msg.ttl_remaining == 0) {
        act = RoutingAction::stop(Termination::TtlExpired);
      } else if (cfg_.algo == Algo::Rw) {
        act = random_walk_step(net_, at, msg, rng_);
      } else {
        act = aps_step(at, msg);
      }
    }

    switch (act.kind) {
      case RoutingAction::Kind::LocalHit: hit(q, msg, act.nr, now); break;
      case RoutingAction::Kind::Forward:
        if (act.enhance) {
          msg.ttl_remaining += t_max(cfg_.ttl) - cfg_.ttl;
          msg.enhanced = true;
          ++m.ttl_enhancements_used;
          log(now, q, at, "enhance", std::nullopt, msg.ttl_remaining);
        }
        forward(q, std::move(msg), act.next, act.via, now, "forward", out);
        break;
      case RoutingAction::Kind::Terminate: end(q, msg, act.reason, now, at); break;
    }
  }

  // Walker lost without reaching its destination (destination queue drained by churn).
  void drop(QueryState& q, const WalkerMessage& msg, Tick now) { end(q, msg, Termination::DeadEnd, now, msg.next); }

  void log(Tick now, const QueryState& q, PeerId at, const char* action, std::optional<PeerId> next,
           std::uint32_t ttl) {
    if (!trace_) return;
    *trace_ << now << ',' << q.id << ',' << q.id << ',' << raw(at) << ',' << action << ',';
    if (next) *trace_ << raw(*next);
    *trace_ << ',' << ttl << '\n';
  }

 private:
  void duplicate(QueryState& q, WalkerMessage msg, Tick now, std::vector<WalkerMessage>& out) {
    MetricsRecord& m = record(q.interval);
    ++m.duplicates_generated;
    const PeerId at = msg.current();
    RoutingAction act = RoutingAction::stop(Termination::DuplicateDrop);
    if (cfg_.algo == Algo::Dst) {
      const PeerId sender = msg.path[msg.path.size() - 2];
      act = forward_duplicate(net_, at, msg, net_.at(sender).cls, q.seen);
    } else if (msg.ttl_remaining > 0) {
      act = cfg_.algo == Algo::Rw ? random_walk_step(net_, at, msg, rng_) : aps_step(at, msg);
    }
    if (act.kind != RoutingAction::Kind::Forward) {
      ++m.duplicates_dropped;
      end(q, msg, Termination::DuplicateDrop, now, at);
      return;
    }
    ++m.duplicates_forwarded;
    if (act.via == Selection::Duplicate) msg.primary = false;
    forward(q, std::move(msg), act.next, act.via, now, "dup_forward", out);
  }

  void forward(QueryState& q, WalkerMessage msg, PeerId next, Selection via, Tick now, const char* action,
               std::vector<WalkerMessage>& out) {
    --msg.ttl_remaining;
    msg.next = next;
    msg.next_via = via;
    if (cfg_.algo == Algo::Aps) aps_on_forward(msg.current(), msg.keyword, next);
    log(now, q, msg.current(), action, next, msg.ttl_remaining);
    out.push_back(std::move(msg));
  }

  void hit(QueryState& q, const WalkerMessage& msg, std::uint32_t nr, Tick now) {
    MetricsRecord& m = record(q.interval);
    const PeerId at = msg.current();
    ++m.hit_reports;
    log(now, q, at, "hit", std::nullopt, msg.ttl_remaining);

    if (cfg_.algo == Algo::Dst) {
      const HitReport report = make_hit_report(net_, msg, nr, cfg_.thresholds);
      apply_hit_reverse_updates(net_, report, params_, now);
      hits_.push_back(report);
    } else if (cfg_.algo == Algo::Aps && cfg_.aps.pessimistic) {
      aps_along_path(msg, Outcome::Hit);
    }
    q.outcomes[msg.walker].hit = true;

    if (!q.resolved) {
      q.resolved = true;
      ++m.hits;
      m.sum_hops_on_hits += msg.hops_visited;
      ++(net_.at(at).is_power() ? m.hits_by_power : m.hits_by_ordinary);
      if (msg.enhanced) ++m.hits_via_enhancement;
      if (q.launch.mode == LaunchMode::QueryTable) ++m.hits_via_query_table;
      if (q.launch.mode == LaunchMode::Merged && cfg_.algo == Algo::Dst) ++m.hits_via_parallel_routing;
      if (cfg_.algo == Algo::Dst && cfg_.cache_at_source) {
        if (auto obj = net_.first_match(at, q.kw)) {
          const auto res = cache_object_at_source(net_, q.source, *obj, cfg_.thresholds, cfg_.broadcast_hops);
          if (res.promoted && on_promote) on_promote(q.source);
        }
      }
    }
    terminate(q, Termination::Hit, now);
  }

  void end(QueryState& q, const WalkerMessage& msg, Termination why, Tick now, PeerId at) {
    const char* name = why == Termination::TtlExpired  ? "ttl_expired"
                       : why == Termination::DeadEnd   ? "dead_end"
                                                       : "dup_drop";
    log(now, q, at, name, std::nullopt, msg.ttl_remaining);
    if (cfg_.algo == Algo::Aps && !cfg_.aps.pessimistic) aps_along_path(msg, Outcome::Miss);
    terminate(q, why, now);
  }

  void terminate(QueryState& q, Termination why, Tick now) {
    switch (why) {
      case Termination::Hit: ++totals.hit; break;
      case Termination::TtlExpired: ++totals.ttl_expired; break;
      case Termination::DeadEnd: ++totals.dead_end; break;
      case Termination::DuplicateDrop: ++totals.duplicate_drop; break;
      case Termination::None: throw InternalError("walker terminated without a reason");
    }
    if (q.live == 0) throw InternalError("walker count underflow");
    if (--q.live > 0) return;
    if (cfg_.algo == Algo::Dst) finalize_query(net_, q.source, q.kw, q.launch, q.outcomes, params_);
    q.done = true;
    (void)now;
  }

  RoutingAction aps_step(PeerId at, const WalkerMessage& msg) {
    auto pick = aps_select(aps_, net_, at, msg.keyword, 1, rng_, msg.path[msg.path.size() - 2]);
    return pick.empty() ? RoutingAction::stop(Termination::DeadEnd)
                        : RoutingAction::forward(pick.front(), Selection::Random);
  }

  // pessimistic APS charges every forward up front and refunds on success;
  // optimistic APS does the reverse
  void aps_on_forward(PeerId at, Keyword kw, PeerId next) {
    aps_update(aps_, at, kw, next, cfg_.aps.pessimistic ? Outcome::Miss : Outcome::Hit);
  }

  void aps_along_path(const WalkerMessage& msg, Outcome o) {
    for (std::size_t i = 0; i + 1 < msg.path.size(); ++i) aps_update(aps_, msg.path[i], msg.keyword, msg.path[i + 1], o);
  }

  Network& net_;
  const SimConfig& cfg_;
  DstParams params_;
  ApsIndex aps_;
  Rng rng_;
  std::ostream* trace_;

 public:
  std::vector<HitReport> hits_;  // DST hit reports, collected for route_query
};

std::uint32_t draw_capacity(const SimConfig& cfg, Rng& rng) {
  std::uniform_int_distribution<std::uint32_t> d(cfg.queue_capacity_min, cfg.queue_capacity_max);
  return d(rng);
}

// Zipf keyword popularity over the catalogue's keywords, ranks shuffled so
// popularity is unrelated to keyword id or object.
struct KeywordSampler {
  std::vector<Keyword> ranked;
  std::discrete_distribution<std::size_t> dist;

  KeywordSampler(const Network& net, double zipf, Rng& rng) : ranked(net.query_keywords) {
    std::shuffle(ranked.begin(), ranked.end(), rng);
    std::vector<double> w(ranked.size());
    for (std::size_t r = 0; r < w.size(); ++r) w[r] = std::pow(static_cast<double>(r + 1), -zipf);
    dist = std::discrete_distribution<std::size_t>(w.begin(), w.end());
  }
  Keyword operator()(Rng& rng) { return ranked[dist(rng)]; }
};

}  // namespace

Network build_network(const SimConfig& cfg) {
  cfg.validate();
  Network net = generate_topology(cfg.nodes, cfg.avg_degree, cfg.free_riders, cfg.seed);
  Rng obj_rng = make_rng(cfg.seed, Stream::Objects);
  distribute_objects(net, cfg.placement, obj_rng);
  for (auto& p : net.peers) p.qt = QueryQTable(cfg.query_table_capacity);
  assign_initial_power_peers(net, cfg.power_init_fraction);
  Rng cap_rng = make_rng(cfg.seed, Stream::Capacity);
  for (auto& p : net.peers)
    if (p.is_power()) p.queue_capacity = draw_capacity(cfg, cap_rng);
  if (cfg.algo == Algo::Dst) init_tables(net, cfg.thresholds, cfg.broadcast_hops, Exec::Serial);
  Rng live_rng = make_rng(cfg.seed, Stream::Liveness);
  assign_liveness(net, cfg.up_fraction, live_rng);
  return net;
}

RunResult run_experiment(const SimConfig& cfg, const RunOptions& opts) {
  Network net = build_network(cfg);
  RunResult res;
  res.topology_hash = net.topology_hash();
  res.peers = net.size();

  Rng work_rng = make_rng(cfg.seed, Stream::Workload);
  Rng churn_rng = make_rng(cfg.seed, Stream::Churn);
  Rng cap_rng = make_rng(cfg.seed, Stream::Queues);
  KeywordSampler keywords(net, cfg.query_zipf, work_rng);
  Router router(net, cfg, make_rng(cfg.seed, Stream::Routing), opts.trace);

  // each node issues at a random slot within the query period, then every period
  std::vector<std::vector<PeerId>> slots(cfg.query_interval_ticks);
  {
    std::uniform_int_distribution<std::uint32_t> slot(0, cfg.query_interval_ticks - 1);
    for (const auto& p : net.peers) slots[slot(work_rng)].push_back(p.id);
  }
  const Tick issue_end = static_cast<Tick>(cfg.queries_per_node) * cfg.query_interval_ticks;

  const bool queues = cfg.algo == Algo::Dst;
  std::vector<std::deque<WalkerMessage>> queue(net.size());
  std::map<PeerId, PowerPeerLoad> loads;
  auto track = [&](PeerId p) {
    Peer& pp = net.at(p);
    auto [it, fresh] = loads.try_emplace(p, PowerPeerLoad{p, pp.queue_capacity, 0, 0.0});
    it->second.peak_len = std::max(it->second.peak_len, pp.queue_len);
    it->second.peak_utilization = std::max(it->second.peak_utilization, load_of(pp).utilization);
  };
  if (queues)
    for (const auto& p : net.peers)
      if (p.is_power()) track(p.id);

  router.on_promote = [&](PeerId p) {
    Peer& pp = net.at(p);
    if (pp.queue_capacity == 0) pp.queue_capacity = draw_capacity(cfg, cap_rng);
    if (queues) track(p);
  };

  std::unordered_map<QueryId, QueryState> active;
  std::vector<WalkerMessage> inbox, outbox;
  std::vector<std::vector<char>> masks;  // alive sharers when each interval closed
  std::uint64_t issued = 0;
  std::uint64_t next_churn = cfg.churn_interval_queries;
  QueryId next_id = 0;

  auto sharers_alive = [&] {
    std::vector<char> m(net.size(), 0);
    for (const auto& p : net.peers) m[idx(p.id)] = p.alive && !p.is_free_rider();
    return m;
  };
  auto close_interval = [&](Tick now) {
    masks.push_back(sharers_alive());
    for (const auto& p : net.peers)
      if (queues && p.is_power()) res.load_snapshots.push_back({now, p.id, p.queue_len, p.queue_capacity});
  };
  auto settle = [&](QueryState& q) {
    if (q.done) active.erase(q.id);
  };

  auto enqueue = [&](WalkerMessage msg, Tick now) {
    const PeerId dest = msg.next;
    Peer& d = net.at(dest);
    queue[idx(dest)].push_back(std::move(msg));
    ++d.queue_len;
    track(dest);
    if (!cfg.load_balancing || !check_load(d, cfg.lb_threshold)) return;
    const auto reports = collect_load(net, dest);
    const bool room = std::any_of(reports.begin(), reports.end(), [&](const LoadReport& r) {
      return static_cast<double>(r.queue_len + 1) < cfg.lb_threshold * r.queue_capacity;
    });
    if (!room) return;
    auto& dq = queue[idx(dest)];
    std::vector<PendingMessage> pending;
    pending.reserve(dq.size());
    for (std::size_t i = 0; i < dq.size(); ++i) pending.push_back({i, dq[i].path});
    const auto moved = redistribute(load_of(d), reports, pending, cfg.lb_threshold);
    if (moved.empty()) return;
    std::deque<WalkerMessage> keep;
    for (std::size_t i = 0; i < dq.size(); ++i) {
      auto it = moved.find(i);
      if (it == moved.end()) {
        keep.push_back(std::move(dq[i]));
        continue;
      }
      WalkerMessage m = std::move(dq[i]);
      m.next = it->second;
      router.log(now, active.at(m.query_id), dest, "redirect", it->second, m.ttl_remaining);
      queue[idx(it->second)].push_back(std::move(m));
      ++net.at(it->second).queue_len;
      track(it->second);
    }
    dq = std::move(keep);
    d.queue_len = static_cast<std::uint32_t>(dq.size());
  };

  for (Tick now = 0; now < issue_end || !active.empty(); ++now) {
    // 1. deliver walkers sent last tick
    inbox.swap(outbox);
    outbox.clear();
    for (auto& msg : inbox) {
      QueryState& q = active.at(msg.query_id);
      const Peer& dest = net.at(msg.next);
      if (queues && dest.is_power() && dest.alive) {
        enqueue(std::move(msg), now);
      } else {
        router.arrive(q, std::move(msg), now, outbox);
        settle(q);
      }
    }
    inbox.clear();

    if (queues) {
      double peak = 0.0;
      for (const auto& p : net.peers)
        if (p.is_power() && p.queue_capacity > 0) peak = std::max(peak, load_of(p).utilization);
      res.max_utilization.push_back(peak);
    }

    // 2. power peers work through their queues
    if (queues) {
      for (auto& p : net.peers) {
        auto& dq = queue[idx(p.id)];
        for (std::uint32_t served = 0; served < cfg.service_rate && !dq.empty(); ++served) {
          WalkerMessage msg = std::move(dq.front());
          dq.pop_front();
          --p.queue_len;
          QueryState& q = active.at(msg.query_id);
          router.arrive(q, std::move(msg), now, outbox);
          settle(q);
        }
      }
    }

    // 3. new queries
    if (now < issue_end) {
      for (PeerId src : slots[now % cfg.query_interval_ticks]) {
        const Keyword kw = keywords(work_rng);
        ++res.queries_scheduled;
        if (!net.at(src).alive) {
          ++res.queries_skipped;
          continue;
        }
        const std::size_t interval = issued / cfg.metric_interval;
        if (interval > 0 && issued % cfg.metric_interval == 0) close_interval(now);
        QueryState q;
        q.id = next_id++;
        q.source = src;
        q.kw = kw;
        q.interval = interval;
        ++issued;
        auto walkers = router.issue(q, now);
        for (auto& w : walkers) outbox.push_back(std::move(w));
        if (!q.done) active.emplace(q.id, std::move(q));
      }
    }

    // 4. churn once enough queries have been issued
    while (issued >= next_churn) {
      next_churn += cfg.churn_interval_queries;
      const auto ch = apply_churn(net, churn_rng);
      res.churn.push_back({now, static_cast<std::uint32_t>(ch.went_up.size()),
                           static_cast<std::uint32_t>(ch.went_down.size())});
      for (PeerId p : ch.went_down) {
        auto& dq = queue[idx(p)];
        while (!dq.empty()) {
          WalkerMessage msg = std::move(dq.front());
          dq.pop_front();
          QueryState& q = active.at(msg.query_id);
          router.drop(q, msg, now);
          settle(q);
        }
        net.at(p).queue_len = 0;
      }
    }

    std::uint32_t up = 0;
    for (const auto& p : net.peers) up += p.alive ? 1 : 0;
    res.up_count.push_back(up);

    if (now > issue_end + 100000) throw InternalError("event loop failed to drain");
  }
  close_interval(res.up_count.empty() ? 0 : res.up_count.size() - 1);

  // coverage: reach of each interval's queries over the sharers alive when it closed
  res.series = router.records;
  auto coverage = [&](std::size_t b, std::size_t e) {
    if (b >= e) return 0.0;
    std::size_t denom = 0, hit = 0;
    const auto& mask = masks[e - 1];
    for (std::size_t i = 0; i < net.size(); ++i) {
      if (!mask[i]) continue;
      ++denom;
      for (std::size_t k = b; k < e; ++k)
        if (router.reached[k][i]) {
          ++hit;
          break;
        }
    }
    return denom == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(denom);
  };
  for (std::size_t i = 0; i < res.series.size(); ++i) {
    res.series[i].coverage_fraction = coverage(i, i + 1);
    res.series[i].finish();
  }
  for (int qi = 0; qi < 4; ++qi) {
    auto [b, e] = quartile_range(res.series.size(), qi);
    res.quartile_coverage[static_cast<std::size_t>(qi)] = coverage(b, e);
  }
  res.walkers = router.totals;
  res.max_hops = router.max_hops;
  for (auto& [p, l] : loads) {
    l.capacity = net.at(p).queue_capacity;
    res.power_loads.push_back(l);
  }
  if (opts.qtable_dump) dump_qtables(net, *opts.qtable_dump);
  return res;
}

QueryTrace route_query(Network& net, PeerId source, Keyword kw, const SimConfig& cfg, Tick tick,
                       std::ostream* trace) {
  Router router(net, cfg, make_rng(cfg.seed, Stream::Routing), trace);
  QueryState q;
  q.source = source;
  q.kw = kw;
  QueryTrace out;
  std::vector<WalkerMessage> wave = router.issue(q, tick);
  out.launch = q.launch;
  out.paths.assign(wave.size(), {source});
  out.ends.assign(wave.size(), Termination::None);

  std::unordered_set<PeerId> reached;
  std::vector<WalkerMessage> next;
  while (!wave.empty()) {
    ++tick;
    next.clear();
    for (auto& msg : wave) {
      const std::uint32_t w = msg.walker;
      const PeerId dest = msg.next;
      const auto before = router.totals;
      if (net.at(dest).alive) reached.insert(dest);
      std::vector<WalkerMessage> fwd;
      router.arrive(q, std::move(msg), tick, fwd);
      if (net.at(dest).alive) out.paths[w].push_back(dest);
      if (!fwd.empty()) {
        for (auto& f : fwd) next.push_back(std::move(f));
        continue;
      }
      const auto& a = router.totals;
      out.ends[w] = a.hit > before.hit                   ? Termination::Hit
                    : a.ttl_expired > before.ttl_expired ? Termination::TtlExpired
                    : a.dead_end > before.dead_end       ? Termination::DeadEnd
                                                         : Termination::DuplicateDrop;
    }
    wave.swap(next);
  }
  out.hits = router.hits_;
  out.success = q.resolved;
  out.reached.assign(reached.begin(), reached.end());
  std::sort(out.reached.begin(), out.reached.end());
  if (!router.records.empty()) out.duplicates = static_cast<std::uint32_t>(router.records[0].duplicates_generated);
  return out;
}

double measure_coverage(const Network& net, const SimConfig& cfg, std::span<const SampleQuery> samples) {
  Network copy = net;
  std::vector<char> reached(net.size(), 0), source(net.size(), 0);
  Tick tick = 0;
  for (const auto& s : samples) {
    source[idx(s.source)] = 1;
    if (!copy.at(s.source).alive) continue;
    const auto t = route_query(copy, s.source, s.keyword, cfg, tick);
    for (PeerId p : t.reached) reached[idx(p)] = 1;
    tick += 2 * t_max(cfg.ttl);
  }
  std::size_t denom = 0, hit = 0;
  for (const auto& p : net.peers) {
    if (!p.alive || p.is_free_rider() || source[idx(p.id)]) continue;
    ++denom;
    hit += reached[idx(p.id)] ? 1 : 0;
  }
  return denom == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(denom);
}

void write_loads_csv(const std::vector<LoadSnapshot>& snapshots, std::ostream& out) {
  out << "tick,peer_id,queue_len,capacity\n";
  for (const auto& s : snapshots) out << s.tick << ',' << raw(s.peer) << ',' << s.queue_len << ',' << s.capacity << '\n';
}

void dump_qtables(const Network& net, std::ostream& out) {
  out << "table_kind,owner_id,key,peer_id,qvalue_int\n";
  for (const auto& p : net.peers) {
    for (const auto& e : p.nq.entries()) out << "nq," << raw(p.id) << ",," << raw(e.peer) << ',' << serialize_q(e.q) << '\n';
    for (const auto& e : p.pq.entries()) out << "pq," << raw(p.id) << ",," << raw(e.peer) << ',' << serialize_q(e.q) << '\n';
    auto kws = p.qt.keywords_by_recency();
    std::sort(kws.begin(), kws.end());
    for (Keyword kw : kws)
      for (const auto& e : p.qt.row(kw)->entries())
        out << "qt," << raw(p.id) << ',' << raw(kw) << ',' << raw(e.peer) << ',' << serialize_q(e.q) << '\n';
  }
}

}  // namespace p2ps
