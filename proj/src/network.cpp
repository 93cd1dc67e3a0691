#include "p2ps/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <unordered_set>

namespace p2ps {

bool DataObject::has_keyword(Keyword kw) const { return std::binary_search(keywords.begin(), keywords.end(), kw); }

bool Peer::holds(ObjectId o) const { return std::binary_search(shared.begin(), shared.end(), o); }

void Thresholds::validate() const {
  if (f_th < 1) throw ConfigError("thresholds.f_th", "must be at least 1");
  if (s_th < 1) throw ConfigError("thresholds.s_th", "must be at least 1");
  if (d_th < 1) throw ConfigError("thresholds.d_th", "must be at least 1");
  if (k != 100.0) throw ConfigError("thresholds.k", "normalising constant is fixed at 100");
  for (auto [name, w] : {std::pair{"thresholds.w1", w1}, {"thresholds.w2", w2}, {"thresholds.w3", w3}})
    if (!(w > 0.0 && w < 1.0)) throw ConfigError(name, "weight must lie in (0, 1)");
  if (std::abs(w1 + w2 + w3 - 1.0) > 1e-9) throw ConfigError("thresholds.w3", "w1 + w2 + w3 must equal 1");
}

// --- Network queries ---------------------------------------------------------

bool Network::adjacent(PeerId a, PeerId b) const {
  const auto& row = adjacency[idx(a)];
  return std::binary_search(row.begin(), row.end(), b);
}

std::size_t Network::edge_count() const {
  std::size_t twice = 0;
  for (const auto& row : adjacency) twice += row.size();
  return twice / 2;
}

double Network::mean_degree() const {
  return peers.empty() ? 0.0 : 2.0 * static_cast<double>(edge_count()) / static_cast<double>(peers.size());
}

std::uint32_t Network::matching_objects(PeerId p, Keyword kw) const {
  std::uint32_t n = 0;
  for (ObjectId o : at(p).shared)
    if (objects[raw(o)].has_keyword(kw)) ++n;
  return n;
}

std::optional<ObjectId> Network::first_match(PeerId p, Keyword kw) const {
  for (ObjectId o : at(p).shared)
    if (objects[raw(o)].has_keyword(kw)) return o;
  return std::nullopt;
}

std::uint64_t Network::topology_hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(peers.size());
  for (std::size_t i = 0; i < peers.size(); ++i) {
    mix(adjacency[i].size());
    for (PeerId q : adjacency[i]) mix(raw(q));
    mix(peers[i].storage_capacity);
  }
  return h;
}

// --- generation --------------------------------------------------------------

Network generate_topology(std::uint32_t n, double avg_degree, std::uint32_t free_riders, std::uint64_t seed) {
  if (n < 2) throw ConfigError("topology.nodes", "need at least 2 peers");
  if (!(avg_degree >= 1.0)) throw ConfigError("topology.avg_degree", "must be at least 1");
  if (avg_degree > static_cast<double>(n - 1))
    throw ConfigError("topology.avg_degree", "exceeds the complete-graph degree n - 1");
  if (free_riders >= n) throw ConfigError("topology.free_riders", "must be smaller than the peer count");

  const auto target_edges = static_cast<std::uint64_t>(round_half_away(n * avg_degree / 2.0));
  const std::uint64_t max_edges = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  if (target_edges < n - 1u)
    throw ConfigError("topology.avg_degree", "too small for a connected graph (needs n - 1 edges)");
  if (target_edges > max_edges) throw ConfigError("topology.avg_degree", "more edges than a complete graph");

  Network net;
  net.rng_seed = seed;
  net.peers.resize(n);
  net.adjacency.assign(n, {});

  Rng rng = make_rng(seed, Stream::Topology);
  std::unordered_set<std::uint64_t> edges;
  edges.reserve(target_edges * 2);
  auto add_edge = [&](std::uint32_t a, std::uint32_t b) {
    if (a == b) return false;
    if (a > b) std::swap(a, b);
    if (!edges.insert((static_cast<std::uint64_t>(a) << 32) | b).second) return false;
    net.adjacency[a].push_back(peer(b));
    net.adjacency[b].push_back(peer(a));
    return true;
  };

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0U);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::uint32_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::uint32_t> pick(0, i - 1);
    add_edge(order[i], order[pick(rng)]);
  }
  std::uniform_int_distribution<std::uint32_t> any(0, n - 1);
  while (edges.size() < target_edges) add_edge(any(rng), any(rng));

  for (auto& row : net.adjacency) std::sort(row.begin(), row.end());

  Rng fr_rng = make_rng(seed, Stream::FreeRiders);
  std::vector<std::uint32_t> ids(n);
  std::iota(ids.begin(), ids.end(), 0U);
  std::shuffle(ids.begin(), ids.end(), fr_rng);
  for (std::uint32_t i = 0; i < n; ++i) {
    net.peers[i].id = peer(i);
    net.peers[i].storage_capacity = 1;
  }
  for (std::uint32_t i = 0; i < free_riders; ++i) net.peers[ids[i]].storage_capacity = 0;
  return net;
}

void distribute_objects(Network& net, const PlacementParams& params, Rng& rng) {
  if (params.n_objects < 1) throw ConfigError("objects.count", "need at least one object");
  if (params.keyword_pool < params.n_objects) throw ConfigError("objects.keyword_pool", "must be >= objects.count");
  if (params.storage_min < 1 || params.storage_max < params.storage_min)
    throw ConfigError("objects.storage_max", "storage range must satisfy 1 <= min <= max");
  if (!(params.initial_fill >= 0.0 && params.initial_fill <= 1.0))
    throw ConfigError("objects.initial_fill", "must lie in [0, 1]");

  const std::uint32_t max_kw =
      params.max_keywords > 0 ? params.max_keywords : std::max<std::uint32_t>(1, 2 * params.keyword_pool / params.n_objects);

  net.objects.clear();
  net.objects.resize(params.n_objects);
  std::uniform_int_distribution<std::uint32_t> kw_count(1, max_kw);
  std::uniform_int_distribution<std::uint32_t> kw_pick(0, params.keyword_pool - 1);
  std::vector<Keyword> universe;
  for (std::uint32_t j = 0; j < params.n_objects; ++j) {
    auto& obj = net.objects[j];
    obj.id = static_cast<ObjectId>(j);
    const std::uint32_t c = kw_count(rng);
    for (std::uint32_t i = 0; i < c; ++i) obj.keywords.push_back(static_cast<Keyword>(kw_pick(rng)));
    std::sort(obj.keywords.begin(), obj.keywords.end());
    obj.keywords.erase(std::unique(obj.keywords.begin(), obj.keywords.end()), obj.keywords.end());
    universe.insert(universe.end(), obj.keywords.begin(), obj.keywords.end());
  }
  std::sort(universe.begin(), universe.end());
  universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
  net.query_keywords = std::move(universe);

  std::vector<PeerId> sharers;
  for (auto& p : net.peers) {
    p.shared.clear();
    if (p.storage_capacity > 0) sharers.push_back(p.id);
  }
  if (sharers.empty()) throw ConfigError("topology.free_riders", "no sharing peers left to hold objects");

  // storage capacities, heavy towards small values, never above the catalogue size
  const std::uint32_t cap_hi = std::min(params.storage_max, params.n_objects);
  const std::uint32_t cap_lo = std::min(params.storage_min, cap_hi);
  std::vector<double> cap_weights;
  for (std::uint32_t s = cap_lo; s <= cap_hi; ++s) cap_weights.push_back(std::pow(static_cast<double>(s), -params.storage_skew));
  std::discrete_distribution<std::uint32_t> cap_dist(cap_weights.begin(), cap_weights.end());
  std::uint64_t total_capacity = 0;
  for (PeerId s : sharers) {
    net.at(s).storage_capacity = cap_lo + cap_dist(rng);
    total_capacity += net.at(s).storage_capacity;
  }
  if (total_capacity < params.n_objects)
    throw ConfigError("objects.count", "not enough storage capacity to place every object once");

  auto place = [&](PeerId p, ObjectId o) {
    auto& sh = net.at(p).shared;
    sh.insert(std::lower_bound(sh.begin(), sh.end(), o), o);
  };
  auto headroom = [&](PeerId p) { return net.at(p).shared.size() < net.at(p).storage_capacity; };

  // one origin replica per object on a random sharer with room
  std::uniform_int_distribution<std::size_t> pick_sharer(0, sharers.size() - 1);
  for (std::uint32_t j = 0; j < params.n_objects; ++j) {
    PeerId target = sharers[pick_sharer(rng)];
    for (int tries = 0; tries < 64 && !headroom(target); ++tries) target = sharers[pick_sharer(rng)];
    if (!headroom(target)) {
      auto it = std::find_if(sharers.begin(), sharers.end(), headroom);
      target = *it;  // total capacity >= n_objects guarantees a slot
    }
    place(target, static_cast<ObjectId>(j));
  }

  // fill each sharer up to its initial level with popularity-skewed replicas
  std::vector<double> obj_weights(params.n_objects);
  for (std::uint32_t j = 0; j < params.n_objects; ++j)
    obj_weights[j] = std::pow(static_cast<double>(j + 1), -params.placement_zipf);
  std::discrete_distribution<std::uint32_t> obj_dist(obj_weights.begin(), obj_weights.end());
  for (PeerId s : sharers) {
    auto& p = net.at(s);
    const auto wanted = std::max<std::uint32_t>(
        1, static_cast<std::uint32_t>(round_half_away(params.initial_fill * p.storage_capacity)));
    const auto goal = std::min(wanted, p.storage_capacity);
    for (int guard = 0; p.shared.size() < goal && guard < 64 * static_cast<int>(goal); ++guard) {
      auto o = static_cast<ObjectId>(obj_dist(rng));
      if (!p.holds(o)) place(s, o);
    }
    // rejection can stall when the few remaining objects are all rare
    for (std::uint32_t j = 0; p.shared.size() < goal && j < params.n_objects; ++j)
      if (!p.holds(static_cast<ObjectId>(j))) place(s, static_cast<ObjectId>(j));
  }
}

// --- neighbour selection and power peers -------------------------------------

std::uint32_t effective_f_th(const Peer& selector, std::uint32_t f_th) {
  return std::max<std::uint32_t>(1, std::min(f_th, selector.shared_count()));
}

bool eligible_neighbour(const Peer& selector, const Peer& candidate, std::uint32_t f_th) {
  if (candidate.is_power()) return true;
  return candidate.shared_count() >= effective_f_th(selector, f_th);
}

double compute_qp(double s_s, double s_th, double d_d, double d_th, double f_i, double f_th, double w1, double w2,
                  double w3, double k) {
  if (s_th <= 0.0) throw ConfigError("thresholds.s_th", "must be positive");
  if (d_th <= 0.0) throw ConfigError("thresholds.d_th", "must be positive");
  if (f_th <= 0.0) throw ConfigError("thresholds.f_th", "must be positive");
  return round_half_away((w1 * (s_s / s_th) + w2 * (d_d / d_th) + w3 * (f_i / f_th)) * k);
}

double peer_qp(const Network& net, PeerId p, const Thresholds& t) {
  const Peer& pr = net.at(p);
  return compute_qp(pr.storage_capacity, t.s_th, net.degree(p), t.d_th, pr.shared_count(), t.f_th, t.w1, t.w2, t.w3,
                    t.k);
}

namespace {

double neighbour_initial_q(const Peer& selector, const Peer& candidate, const Thresholds& t) {
  const std::uint32_t eff = effective_f_th(selector, t.f_th);
  // power peers bypass the object threshold; they start from the minimum score
  const std::uint32_t f = std::max(candidate.shared_count(), candidate.is_power() ? eff : 0U);
  return init_neighbour_q(f, eff, t.k);
}

}  // namespace

void init_neighbour_tables(Network& net, const Thresholds& t) {
  for (auto& p : net.peers) {
    p.nq = NeighbourQTable{};
    for (PeerId c : net.neighbours(p.id)) {
      const Peer& cand = net.at(c);
      if (eligible_neighbour(p, cand, t.f_th)) p.nq.set(c, neighbour_initial_q(p, cand, t));
    }
  }
}

std::vector<PeerId> assign_initial_power_peers(Network& net, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("power.init_fraction", "must lie in [0, 1]");
  std::vector<PeerId> candidates;
  for (const auto& p : net.peers)
    if (!p.is_free_rider()) candidates.push_back(p.id);
  std::sort(candidates.begin(), candidates.end(), [&](PeerId a, PeerId b) {
    const auto da = net.degree(a), db = net.degree(b);
    if (da != db) return da > db;
    const auto sa = net.at(a).shared_count(), sb = net.at(b).shared_count();
    if (sa != sb) return sa > sb;
    return a < b;
  });
  const auto want = static_cast<std::size_t>(round_half_away(fraction * static_cast<double>(net.size())));
  candidates.resize(std::min(want, candidates.size()));
  for (PeerId p : candidates) net.at(p).cls = PeerClass::Power;
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

std::vector<PeerId> broadcast_power_peer(Network& net, PeerId p, std::uint32_t n_hops, const Thresholds& t) {
  if (!net.at(p).is_power()) throw InternalError("broadcast_power_peer: sender is not a power peer");
  std::vector<PeerId> notified;
  if (n_hops == 0) return notified;
  const double qp = peer_qp(net, p, t);

  std::vector<std::uint32_t> depth(net.size(), UINT32_MAX);
  std::deque<PeerId> frontier{p};
  depth[idx(p)] = 0;
  while (!frontier.empty()) {
    PeerId cur = frontier.front();
    frontier.pop_front();
    if (depth[idx(cur)] == n_hops) continue;
    for (PeerId nb : net.neighbours(cur)) {
      if (depth[idx(nb)] != UINT32_MAX || !net.at(nb).alive) continue;
      depth[idx(nb)] = depth[idx(cur)] + 1;
      frontier.push_back(nb);
      notified.push_back(nb);
    }
  }
  std::sort(notified.begin(), notified.end());
  for (PeerId r : notified) {
    Peer& recv = net.at(r);
    if (!recv.nq.contains(p) && !recv.pq.contains(p)) recv.pq.set(p, qp);
  }
  return notified;
}

bool promote_power_peer(Network& net, PeerId p, const Thresholds& t, std::uint32_t n_hops) {
  Peer& pr = net.at(p);
  if (pr.is_power() || !pr.alive) return false;
  if (net.degree(p) < t.d_th || pr.shared_count() < t.f_th || pr.storage_capacity < t.s_th) return false;
  pr.cls = PeerClass::Power;
  broadcast_power_peer(net, p, n_hops, t);
  return true;
}

void refresh_eligibility(Network& net, PeerId p, const Thresholds& t) {
  const Peer& cand = net.at(p);
  for (PeerId n : net.neighbours(p)) {
    Peer& sel = net.at(n);
    if (sel.nq.contains(p) || !eligible_neighbour(sel, cand, t.f_th)) continue;
    sel.nq.set(p, neighbour_initial_q(sel, cand, t));
    sel.pq.erase(p);
  }
}

// --- liveness ------------------------------------------------------------------

namespace {

// First `m` entries of `v` after a partial Fisher-Yates shuffle.
std::vector<PeerId> choose(std::vector<PeerId> v, std::size_t m, Rng& rng) {
  m = std::min(m, v.size());
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> d(i, v.size() - 1);
    std::swap(v[i], v[d(rng)]);
  }
  v.resize(m);
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

ChurnResult apply_churn(Network& net, Rng& rng) {
  std::vector<PeerId> down, up;
  for (const auto& p : net.peers) (p.alive ? up : down).push_back(p.id);
  const std::size_t m = std::min((down.size() + 1) / 2, up.size());
  ChurnResult res;
  res.went_up = choose(std::move(down), m, rng);
  res.went_down = choose(std::move(up), m, rng);
  for (PeerId p : res.went_up) net.at(p).alive = true;
  for (PeerId p : res.went_down) net.at(p).alive = false;
  return res;
}

void assign_liveness(Network& net, double up_fraction, Rng& rng) {
  if (!(up_fraction >= 0.0 && up_fraction <= 1.0)) throw ConfigError("churn.up_fraction", "must lie in [0, 1]");
  std::vector<PeerId> all;
  for (const auto& p : net.peers) all.push_back(p.id);
  const auto n_up = static_cast<std::size_t>(round_half_away(up_fraction * static_cast<double>(net.size())));
  for (auto& p : net.peers) p.alive = false;
  for (PeerId p : choose(std::move(all), n_up, rng)) net.at(p).alive = true;
}

}  // namespace p2ps
