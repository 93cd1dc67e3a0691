#include "p2ps/baselines.hpp"

#include <algorithm>

namespace p2ps {

namespace {

std::vector<PeerId> alive_neighbours(const Network& net, PeerId at) {
  std::vector<PeerId> out;
  for (PeerId nb : net.neighbours(at))
    if (net.at(nb).alive) out.push_back(nb);
  return out;
}

void drop_sender(std::vector<PeerId>& cands, std::optional<PeerId> sender) {
  if (!sender || cands.size() < 2) return;
  auto it = std::find(cands.begin(), cands.end(), *sender);
  if (it != cands.end()) cands.erase(it);
}

std::optional<PeerId> sender_of(const WalkerMessage& msg) {
  if (msg.path.size() < 2) return std::nullopt;
  return msg.path[msg.path.size() - 2];
}

}  // namespace

RoutingAction random_walk_step(const Network& net, PeerId at, const WalkerMessage& msg, Rng& rng) {
  if (msg.ttl_remaining == 0) return RoutingAction::stop(Termination::TtlExpired);
  auto cands = alive_neighbours(net, at);
  if (cands.empty()) return RoutingAction::stop(Termination::DeadEnd);
  drop_sender(cands, sender_of(msg));
  std::uniform_int_distribution<std::size_t> pick(0, cands.size() - 1);
  return RoutingAction::forward(cands[pick(rng)], Selection::Random);
}

std::vector<PeerId> random_walk_launch(const Network& net, PeerId source, std::uint32_t k, Rng& rng) {
  auto cands = alive_neighbours(net, source);
  std::vector<PeerId> out;
  if (cands.empty()) return out;
  std::uniform_int_distribution<std::size_t> pick(0, cands.size() - 1);
  for (std::uint32_t i = 0; i < k; ++i) out.push_back(cands[pick(rng)]);
  return out;
}

void ApsParams::validate() const {
  if (!(init > 0.0)) throw ConfigError("aps.init", "must be positive");
  if (!(floor > 0.0)) throw ConfigError("aps.floor", "must be positive");
  if (!(init >= floor)) throw ConfigError("aps.init", "must not be below aps.floor");
  if (!(reward > 0.0)) throw ConfigError("aps.reward", "must be positive");
  if (!(penalty > 0.0)) throw ConfigError("aps.penalty", "must be positive");
}

double ApsIndex::value(PeerId owner, PeerId neighbour, Keyword kw) const {
  const auto& t = tables_[idx(owner)];
  auto it = t.find(key(neighbour, kw));
  return it == t.end() ? params_.init : it->second;
}

void ApsIndex::set(PeerId owner, PeerId neighbour, Keyword kw, double v) {
  tables_[idx(owner)][key(neighbour, kw)] = std::max(v, params_.floor);
}

std::vector<PeerId> aps_select(const ApsIndex& index, const Network& net, PeerId at, Keyword kw, std::uint32_t k,
                               Rng& rng, std::optional<PeerId> exclude) {
  if (k == 0) throw ConfigError("search.walkers", "need at least one walker");
  auto cands = alive_neighbours(net, at);
  drop_sender(cands, exclude);
  if (cands.size() <= k) return cands;

  std::vector<double> w;
  w.reserve(cands.size());
  for (PeerId c : cands) w.push_back(index.value(at, c, kw));
  std::vector<PeerId> out;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (out.size() < k) {
    double total = 0.0;
    for (double x : w) total += x;
    double r = u(rng) * total;
    std::size_t chosen = w.size() - 1;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] <= 0.0) continue;
      if (r < w[i]) {
        chosen = i;
        break;
      }
      r -= w[i];
    }
    while (w[chosen] <= 0.0) --chosen;  // guards the floating-point tail
    out.push_back(cands[chosen]);
    w[chosen] = 0.0;
  }
  return out;
}

std::vector<PeerId> aps_launch(const ApsIndex& index, const Network& net, PeerId source, Keyword kw, std::uint32_t k,
                               Rng& rng) {
  auto out = aps_select(index, net, source, kw, k, rng);
  if (out.empty() || out.size() >= k) return out;
  const auto base = out;
  std::vector<double> w;
  for (PeerId c : base) w.push_back(index.value(source, c, kw));
  std::discrete_distribution<std::size_t> draw(w.begin(), w.end());
  while (out.size() < k) out.push_back(base[draw(rng)]);
  return out;
}

void aps_update(ApsIndex& index, PeerId at, Keyword kw, PeerId neighbour, Outcome outcome) {
  const double v = index.value(at, neighbour, kw);
  switch (outcome) {
    case Outcome::Hit: index.set(at, neighbour, kw, v + index.params().reward); break;
    case Outcome::Miss: index.set(at, neighbour, kw, v - index.params().penalty); break;
    case Outcome::NotAsked: break;
  }
}

}  // namespace p2ps
