#include "p2ps/load_balancer.hpp"

#include <algorithm>
#include <cmath>

namespace p2ps {

LoadReport load_of(const Peer& p) {
  LoadReport r;
  r.peer = p.id;
  r.queue_len = p.queue_len;
  r.queue_capacity = p.queue_capacity;
  r.utilization = p.queue_capacity == 0 ? 0.0 : static_cast<double>(p.queue_len) / p.queue_capacity;
  return r;
}

bool check_load(const Peer& p, double threshold) {
  if (!p.is_power()) throw InternalError("check_load: only power peers keep a query queue");
  if (p.queue_capacity == 0) throw ConfigError("load.capacity_min", "power peer queue capacity must be positive");
  return static_cast<double>(p.queue_len) >= threshold * p.queue_capacity;
}

std::vector<LoadReport> collect_load(const Network& net, PeerId p) {
  std::vector<LoadReport> out;
  for (const auto& e : net.at(p).pq.entries()) {
    const Peer& other = net.at(e.peer);
    if (e.peer == p || !other.alive || !other.is_power() || other.queue_capacity == 0) continue;
    out.push_back(load_of(other));
  }
  return out;
}

namespace {

// Longest queue that is still strictly below threshold * capacity.
std::uint32_t watermark(std::uint32_t capacity, double threshold) {
  const double limit = threshold * capacity;
  const auto w = static_cast<std::int64_t>(std::ceil(limit)) - 1;
  return static_cast<std::uint32_t>(std::max<std::int64_t>(w, 0));
}

}  // namespace

std::map<std::size_t, PeerId> redistribute(const LoadReport& self, const std::vector<LoadReport>& reports,
                                           std::span<const PendingMessage> pending, double threshold) {
  std::map<std::size_t, PeerId> moved;
  if (reports.empty() || pending.empty()) return moved;

  const std::uint32_t keep = watermark(self.queue_capacity, threshold);
  if (self.queue_len <= keep) return moved;
  const std::size_t excess = std::min<std::size_t>(self.queue_len - keep, pending.size());

  struct Target {
    PeerId peer;
    std::uint32_t len;
    std::uint32_t cap;
  };
  std::vector<Target> targets;
  for (const auto& r : reports)
    if (r.peer != self.peer && r.queue_capacity > 0) targets.push_back({r.peer, r.queue_len, r.queue_capacity});

  for (std::size_t i = pending.size() - excess; i < pending.size(); ++i) {
    const auto& msg = pending[i];
    Target* best = nullptr;
    for (auto& t : targets) {
      if (static_cast<double>(t.len + 1) >= threshold * t.cap) continue;
      if (std::find(msg.path.begin(), msg.path.end(), t.peer) != msg.path.end()) continue;
      if (best == nullptr) {
        best = &t;
        continue;
      }
      // compare t.len / t.cap against best->len / best->cap without rounding error
      const auto lhs = static_cast<std::uint64_t>(t.len) * best->cap;
      const auto rhs = static_cast<std::uint64_t>(best->len) * t.cap;
      if (lhs < rhs || (lhs == rhs && t.peer < best->peer)) best = &t;
    }
    if (best == nullptr) continue;
    ++best->len;
    moved.emplace(msg.handle, best->peer);
  }
  return moved;
}

}  // namespace p2ps
