#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "fixtures.hpp"
#include "p2ps/load_balancer.hpp"

using namespace p2ps;
using namespace p2ps::test;

namespace {

Peer power(std::uint32_t len, std::uint32_t cap) {
  Peer p;
  p.cls = PeerClass::Power;
  p.queue_len = len;
  p.queue_capacity = cap;
  return p;
}

LoadReport report(unsigned id, std::uint32_t len, std::uint32_t cap) {
  LoadReport r;
  r.peer = P(id);
  r.queue_len = len;
  r.queue_capacity = cap;
  r.utilization = double(len) / cap;
  return r;
}

std::vector<PendingMessage> pending(std::size_t n) {
  std::vector<PendingMessage> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i].handle = i;
  return out;
}

}  // namespace

TEST_CASE("check_load boundary") {
  CHECK(check_load(power(60, 100)));
  CHECK_FALSE(check_load(power(59, 100)));
  CHECK(check_load(power(6, 10)));
  CHECK_FALSE(check_load(power(5, 10)));
  CHECK_THROWS_AS(check_load(power(0, 0)), ConfigError);
  Peer ordinary;
  ordinary.queue_capacity = 10;
  CHECK_THROWS_AS(check_load(ordinary), InternalError);
}

TEST_CASE("collect_load reports alive power peers from the power table") {
  Network net = make_graph(5, {});
  for (unsigned i = 0; i < 5; ++i) {
    net.at(P(i)).cls = PeerClass::Power;
    net.at(P(i)).queue_capacity = 10;
    net.at(P(i)).queue_len = i;
  }
  for (unsigned i = 1; i < 4; ++i) net.at(P(0)).pq.set(P(i), 100);
  auto r = collect_load(net, P(0));
  REQUIRE(r.size() == 3);
  for (const auto& x : r) {
    CHECK(x.queue_len == net.at(x.peer).queue_len);
    CHECK(x.utilization == doctest::Approx(x.queue_len / 10.0));
  }
  for (unsigned i = 1; i < 4; ++i) net.at(P(i)).alive = false;
  CHECK(collect_load(net, P(0)).empty());
  CHECK(collect_load(net, P(4)).empty());
}

TEST_CASE("redistribute examples") {
  // 10 messages beyond the watermark, one idle peer with room
  const LoadReport self = report(0, 15, 10);
  auto moved = redistribute(self, {report(1, 0, 100)}, pending(15));
  CHECK(moved.size() == 10);
  for (auto& [h, to] : moved) {
    CHECK(h >= 5);
    CHECK(to == P(1));
  }

  CHECK(redistribute(self, {report(1, 60, 100), report(2, 7, 10)}, pending(15)).empty());
  CHECK(redistribute(self, {}, pending(15)).empty());
  CHECK(redistribute(report(0, 5, 10), {report(1, 0, 100)}, pending(5)).empty());

  // equal utilisation: the lower id is served first, then re-ranking alternates
  auto tie = redistribute(report(0, 7, 10), {report(3, 0, 100), report(2, 0, 100)}, pending(7));
  REQUIRE(tie.size() == 2);
  CHECK(tie.at(5) == P(2));
  CHECK(tie.at(6) == P(3));

  // messages never go back to a peer already on their path
  std::vector<PeerId> path{P(1)};
  auto msgs = pending(7);
  for (auto& m : msgs) m.path = path;
  CHECK(redistribute(report(0, 7, 10), {report(1, 0, 100)}, msgs).empty());
}

TEST_CASE("redistribute conserves messages and respects the threshold") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::uint32_t cap = 5 + rng() % 100;
    const std::uint32_t len = rng() % (2 * cap);
    std::vector<LoadReport> reps;
    const unsigned n = rng() % 5;
    for (unsigned i = 1; i <= n; ++i) {
      const std::uint32_t c = 5 + rng() % 100;
      reps.push_back(report(i, rng() % c, c));
    }
    auto moved = redistribute(report(0, len, cap), reps, pending(len));
    std::map<PeerId, std::uint32_t> extra;
    for (auto& [h, to] : moved) {
      REQUIRE(h < len);
      ++extra[to];
    }
    // conservation: what leaves self arrives somewhere
    std::size_t arrived = 0;
    for (auto& [p, c] : extra) arrived += c;
    REQUIRE(arrived == moved.size());
    // self never drops below the watermark
    REQUIRE(len - moved.size() >= std::min<std::size_t>(len, static_cast<std::size_t>(std::ceil(0.6 * cap)) - 1));
    for (const auto& r : reps) {
      const auto after = r.queue_len + extra[r.peer];
      if (extra[r.peer] > 0) REQUIRE(double(after) < 0.6 * r.queue_capacity);
    }
  }
}
