#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "p2ps/config.hpp"
#include "p2ps/dst.hpp"
#include "p2ps/simulator.hpp"

using namespace p2ps;
using namespace p2ps::test;

namespace {

WalkerMessage at_peer(std::vector<PeerId> path, Keyword kw, std::uint32_t ttl) {
  WalkerMessage m;
  m.message_id = 1;
  m.source = path.front();
  m.keyword = kw;
  m.ttl_remaining = ttl;
  m.hops_visited = static_cast<std::uint32_t>(path.size() - 1);
  m.path = std::move(path);
  m.via.assign(m.path.size() - 1, Selection::Merged);
  return m;
}

}  // namespace

TEST_CASE("local match wins over forwarding and counts the matching objects") {
  Network net = make_graph(3, {{0, 1}, {1, 2}});
  for (unsigned p = 0; p < 3; ++p) give_objects(net, p, 1);
  DataObject extra;
  extra.id = O(3);
  extra.keywords = {K(7)};
  net.objects.push_back(extra);
  DataObject extra2 = extra;
  extra2.id = O(4);
  net.objects.push_back(extra2);
  net.at(P(1)).shared = {O(1), O(3), O(4)};
  net.at(P(1)).nq.set(P(2), 500);

  auto act = handle_query(net, P(1), at_peer({P(0), P(1)}, K(7), 3), 0);
  CHECK(act.kind == RoutingAction::Kind::LocalHit);
  CHECK(act.nr == 2);
  CHECK(net.at(P(1)).queries_received == 1);
  CHECK(net.at(P(1)).hits_produced == 1);

  Launch l = launch_query(net, P(1), K(7), 3, 0);
  CHECK(l.mode == LaunchMode::Local);
  CHECK(l.local_nr == 2);
  CHECK(l.targets.empty());
}

TEST_CASE("ordinary peers prefer the keyword row, then the merged ranking") {
  Network net = make_graph(4, {{0, 1}, {1, 2}, {1, 3}});
  for (unsigned p = 0; p < 4; ++p) give_objects(net, p, 1);
  auto& self = net.at(P(1));
  self.nq.set(P(0), 900);
  self.nq.set(P(2), 300);
  self.pq.set(P(3), 400);

  auto act = handle_query(net, P(1), at_peer({P(0), P(1)}, K(9), 3), 0);
  CHECK(act.kind == RoutingAction::Kind::Forward);
  CHECK(act.next == P(3));  // the sender is on the path
  CHECK(act.via == Selection::Merged);

  NeighbourQTable row;
  row.set(P(2), 50);
  row.set(P(0), 10);
  self.qt.insert_keyword(K(9), row, 0);
  act = handle_query(net, P(1), at_peer({P(0), P(1)}, K(9), 3), 5);
  CHECK(act.next == P(2));
  CHECK(act.via == Selection::QueryTable);
  CHECK(*self.qt.last_used(K(9)) == 5);

  // nothing left off the path
  net.at(P(2)).alive = false;
  act = handle_query(net, P(1), at_peer({P(3), P(0), P(1)}, K(9), 3), 6);
  CHECK(act.kind == RoutingAction::Kind::Terminate);
  CHECK(act.reason == Termination::DeadEnd);
}

TEST_CASE("power peers only route through their power table") {
  Network net = make_graph(4, {{0, 1}, {1, 2}});
  for (unsigned p = 0; p < 4; ++p) give_objects(net, p, 1);
  auto& self = net.at(P(1));
  self.cls = PeerClass::Power;
  self.nq.set(P(2), 5000);
  self.pq.set(P(3), 10);
  auto act = handle_query(net, P(1), at_peer({P(0), P(1)}, K(9), 2), 0);
  CHECK(act.next == P(3));
  CHECK(act.via == Selection::PowerTable);
  self.pq.erase(P(3));
  act = handle_query(net, P(1), at_peer({P(0), P(1)}, K(9), 2), 0);
  CHECK(act.reason == Termination::DeadEnd);
}

TEST_CASE("launch: capped by availability, distinct targets in merged order") {
  Network net = make_graph(8, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  for (unsigned p = 0; p < 8; ++p) give_objects(net, p, 1);
  auto& src = net.at(P(0));
  src.nq.set(P(1), 100);
  src.pq.set(P(5), 300);
  Launch two = launch_query(net, P(0), K(42), 3, 1);
  CHECK(two.mode == LaunchMode::Merged);
  CHECK(two.targets == std::vector<PeerId>{P(5), P(1)});
  CHECK(two.row_inserted);
  CHECK(src.qt.contains(K(42)));

  // disjoint NQ(4) + PQ(3), k = 6: brute-force sort of the union
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    Network n2 = make_graph(8, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    for (unsigned p = 0; p < 8; ++p) give_objects(n2, p, 1);
    std::vector<std::pair<double, unsigned>> all;
    for (unsigned p = 1; p <= 7; ++p) {
      const double q = 100.0 + static_cast<double>(rng() % 6) * 50;
      (p <= 4 ? static_cast<ScoreRow&>(n2.at(P(0)).nq) : static_cast<ScoreRow&>(n2.at(P(0)).pq)).set(P(p), q);
      all.push_back({-q, p});
    }
    std::sort(all.begin(), all.end());
    std::vector<PeerId> want;
    for (std::size_t i = 0; i < 6; ++i) want.push_back(P(all[i].second));
    REQUIRE(launch_query(n2, P(0), K(42), 6, 0).targets == want);
  }

  Network lonely = make_graph(2, {{0, 1}});
  give_objects(lonely, 0, 1);
  Launch none = launch_query(lonely, P(0), K(42), 3, 0);
  CHECK(none.mode == LaunchMode::NoTargets);
  CHECK_FALSE(lonely.at(P(0)).qt.contains(K(42)));
  CHECK_THROWS_AS(launch_query(lonely, P(0), K(42), 0, 0), ConfigError);
}

TEST_CASE("launch uses the keyword row when present") {
  Network net = make_graph(4, {{0, 1}, {0, 2}, {0, 3}});
  for (unsigned p = 0; p < 4; ++p) give_objects(net, p, 1);
  auto& src = net.at(P(0));
  src.nq.set(P(1), 900);
  NeighbourQTable row;
  row.set(P(1), 100);
  row.set(P(2), 700);
  row.set(P(3), 300);
  src.qt.insert_keyword(K(8), row, 0);
  Launch l = launch_query(net, P(0), K(8), 1, 4);
  CHECK(l.mode == LaunchMode::QueryTable);
  CHECK(l.targets == std::vector<PeerId>{P(2)});
  CHECK_FALSE(l.row_inserted);

  const auto walkers = make_walkers(launch_query(net, P(0), K(8), 2, 5), 77, 3, P(0), K(8), 6);
  REQUIRE(walkers.size() == 2);
  for (const auto& w : walkers) {
    CHECK(w.message_id == 77);
    CHECK(w.ttl_remaining == 5);
    CHECK(w.path == std::vector<PeerId>{P(0)});
  }
}

TEST_CASE("duplicates: ranked by the sender's class, never to a peer that carried the message") {
  Network net = make_graph(5, {{0, 1}, {0, 2}, {0, 3}});
  for (unsigned p = 0; p < 5; ++p) give_objects(net, p, 1);
  auto& self = net.at(P(0));
  self.nq.set(P(1), 900);
  self.nq.set(P(2), 500);
  self.pq.set(P(4), 50);
  auto msg = at_peer({P(3), P(0)}, K(1), 3);

  std::unordered_set<PeerId> seen{P(0), P(3)};
  auto act = forward_duplicate(net, P(0), msg, PeerClass::Ordinary, seen);
  CHECK(act.next == P(1));
  CHECK(act.via == Selection::Duplicate);
  seen.insert(P(1));
  CHECK(forward_duplicate(net, P(0), msg, PeerClass::Ordinary, seen).next == P(2));
  seen.insert(P(2));
  CHECK(forward_duplicate(net, P(0), msg, PeerClass::Ordinary, seen).reason == Termination::DuplicateDrop);

  std::unordered_set<PeerId> fresh{P(0)};
  CHECK(forward_duplicate(net, P(0), msg, PeerClass::Power, fresh).next == P(4));
  fresh.insert(P(4));
  CHECK(forward_duplicate(net, P(0), msg, PeerClass::Power, fresh).reason == Termination::DuplicateDrop);

  // brute force: the choice is the best-ranked NQ entry outside the seen set
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    std::unordered_set<PeerId> s{P(0)};
    for (unsigned p = 1; p < 5; ++p)
      if (rng() % 2) s.insert(P(p));
    std::optional<PeerId> want;
    double best = -1;
    for (const auto& e : self.nq.entries())
      if (!s.count(e.peer) && (e.q > best || (e.q == best && e.peer < *want))) {
        best = e.q;
        want = e.peer;
      }
    auto got = forward_duplicate(net, P(0), msg, PeerClass::Ordinary, s);
    if (want) {
      REQUIRE(got.kind == RoutingAction::Kind::Forward);
      REQUIRE(got.next == *want);
    } else {
      REQUIRE(got.reason == Termination::DuplicateDrop);
    }
  }
}

TEST_CASE("TTL enhancement happens once, at a power peer, on exhaustion") {
  Network net = make_graph(3, {{0, 1}, {1, 2}});
  for (unsigned p = 0; p < 3; ++p) give_objects(net, p, 1);
  net.at(P(1)).cls = PeerClass::Power;
  auto msg = at_peer({P(0), P(1)}, K(5), 0);
  auto e = maybe_enhance_ttl(net, P(1), msg, 6);
  CHECK(e.enhanced);
  CHECK(e.ttl_remaining == 3);
  CHECK(e.hops_visited + e.ttl_remaining <= t_max(6));
  auto again = e;
  again.ttl_remaining = 0;
  CHECK(maybe_enhance_ttl(net, P(1), again, 6).enhanced);
  CHECK(maybe_enhance_ttl(net, P(1), again, 6).ttl_remaining == 0);
  CHECK_FALSE(maybe_enhance_ttl(net, P(0), msg, 6).enhanced);
  auto not_dry = at_peer({P(0), P(1)}, K(5), 2);
  CHECK(maybe_enhance_ttl(net, P(1), not_dry, 6).ttl_remaining == 2);
  auto dup = msg;
  dup.primary = false;
  CHECK_FALSE(maybe_enhance_ttl(net, P(1), dup, 6).enhanced);
}

TEST_CASE("caching at the source") {
  Network net = make_graph(8, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {0, 6}, {0, 7}});
  for (unsigned p = 0; p < 8; ++p) give_objects(net, p, 1);
  Thresholds t;
  t.f_th = 2;
  t.s_th = 2;
  net.at(P(0)).storage_capacity = 3;
  init_neighbour_tables(net, t);

  auto r = cache_object_at_source(net, P(0), O(3), t, 1);
  CHECK(r.cached);
  CHECK(net.at(P(0)).shared_count() == 2);
  CHECK(net.objects[3].popularity == 1);
  // two objects, storage 3, degree 7: the cache pushed the source over every threshold
  CHECK(r.promoted);
  CHECK(net.at(P(0)).is_power());

  auto again = cache_object_at_source(net, P(0), O(3), t, 1);
  CHECK_FALSE(again.cached);
  CHECK(net.at(P(0)).shared_count() == 2);
  CHECK(net.objects[3].popularity == 2);

  net.at(P(0)).storage_capacity = 2;
  auto full = cache_object_at_source(net, P(0), O(5), t, 1);
  CHECK_FALSE(full.cached);
  CHECK(net.objects[5].popularity == 1);
}

TEST_CASE("a reverse update on a zero-length path changes nothing") {
  Network net = make_graph(2, {{0, 1}});
  give_objects(net, 0, 1);
  give_objects(net, 1, 1);
  net.at(P(0)).nq.set(P(1), 100);
  const Network before = net;
  HitReport r;
  r.path = {P(0)};
  r.nr = 1;
  apply_hit_reverse_updates(net, r, DstParams{}, 0);
  CHECK(net.at(P(0)).nq == before.at(P(0)).nq);
  CHECK(net.at(P(0)).qt == before.at(P(0)).qt);
}

TEST_CASE("routing fuzz: hop budget, free riders untouched, duplicate discipline") {
  SimConfig cfg;
  cfg.nodes = 600;
  cfg.free_riders = 20;
  cfg.placement.n_objects = 20;
  cfg.placement.keyword_pool = 400;
  cfg.power_init_fraction = 0.1;
  cfg.walkers = 6;
  cfg.ttl = 6;
  cfg.seed = 4;
  Network net = build_network(cfg);
  std::mt19937_64 rng(1);
  for (int q = 0; q < 3000; ++q) {
    PeerId src = peer(rng() % net.size());
    if (!net.at(src).alive) continue;
    Keyword kw = net.query_keywords[rng() % net.query_keywords.size()];
    auto t = route_query(net, src, kw, cfg, static_cast<Tick>(q) * 20);
    for (const auto& path : t.paths) REQUIRE(path.size() - 1 <= t_max(cfg.ttl));
    for (PeerId p : t.reached) REQUIRE_FALSE(net.at(p).is_free_rider());
    for (const auto& h : t.hits) {
      REQUIRE(h.nr >= 1);
      REQUIRE(h.q_p.has_value() == (h.responder_class == PeerClass::Power));
      for (std::size_t i = 0; i + 1 < h.path.size(); ++i) {
        const Peer& a = net.at(h.path[i]);
        const bool link = net.adjacent(h.path[i], h.path[i + 1]) || a.pq.contains(h.path[i + 1]);
        REQUIRE(link);
      }
    }
  }
  for (const auto& p : net.peers)
    if (p.is_free_rider()) REQUIRE(p.queries_received == 0);
  for (const auto& p : net.peers) {
    REQUIRE(p.hits_produced <= p.queries_received);
    for (const auto& e : p.nq.entries()) REQUIRE_FALSE(net.at(e.peer).is_free_rider());
    for (const auto& e : p.nq.entries()) REQUIRE(e.q >= 0);
    for (const auto& e : p.pq.entries()) REQUIRE_FALSE(p.nq.contains(e.peer));
  }
}
