#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "p2ps/qtable.hpp"
#include "p2ps/rng.hpp"
#include "p2ps/types.hpp"

namespace p2ps {

struct DataObject {
  ObjectId id{};
  std::vector<Keyword> keywords;  // sorted, non-empty
  std::uint64_t popularity = 0;   // completed downloads

  bool has_keyword(Keyword kw) const;
};

struct Peer {
  PeerId id{};
  PeerClass cls = PeerClass::Ordinary;
  bool alive = true;
  std::vector<ObjectId> shared;         // sorted
  std::uint32_t storage_capacity = 0;   // object slots; 0 for free riders
  std::uint64_t queries_received = 0;
  std::uint64_t hits_produced = 0;
  std::uint32_t queue_capacity = 0;     // power peers only
  std::uint32_t queue_len = 0;

  NeighbourQTable nq;
  PowerPeerQTable pq;
  QueryQTable qt;

  bool is_power() const { return cls == PeerClass::Power; }
  bool is_free_rider() const { return shared.empty(); }
  bool holds(ObjectId o) const;
  std::uint32_t shared_count() const { return static_cast<std::uint32_t>(shared.size()); }
};

struct Thresholds {
  std::uint32_t f_th = 1;  // objects
  std::uint32_t s_th = 1;  // storage slots
  std::uint32_t d_th = 7;  // links
  double k = 100.0;
  double w1 = 0.3, w2 = 0.4, w3 = 0.3;  // storage, degree, files

  void validate() const;
};

struct Network {
  std::vector<Peer> peers;
  std::vector<std::vector<PeerId>> adjacency;  // sorted, symmetric
  std::vector<DataObject> objects;
  std::vector<Keyword> query_keywords;         // keywords carried by at least one object, sorted
  std::uint64_t rng_seed = 0;

  std::size_t size() const { return peers.size(); }
  Peer& at(PeerId p) { return peers[idx(p)]; }
  const Peer& at(PeerId p) const { return peers[idx(p)]; }
  std::span<const PeerId> neighbours(PeerId p) const { return adjacency[idx(p)]; }
  std::uint32_t degree(PeerId p) const { return static_cast<std::uint32_t>(adjacency[idx(p)].size()); }
  bool adjacent(PeerId a, PeerId b) const;
  std::size_t edge_count() const;
  double mean_degree() const;

  // Number of `p`'s shared objects carrying `kw`.
  std::uint32_t matching_objects(PeerId p, Keyword kw) const;
  // Lowest-id shared object of `p` carrying `kw`, if any.
  std::optional<ObjectId> first_match(PeerId p, Keyword kw) const;

  // FNV-1a over adjacency, free-rider set and initial placement.
  std::uint64_t topology_hash() const;
};

// Connected random graph: random recursive spanning tree, then uniform random
// extra edges up to round(n * avg_degree / 2). `free_riders` peers are chosen
// uniformly and given zero storage so they never hold objects.
Network generate_topology(std::uint32_t n, double avg_degree, std::uint32_t free_riders, std::uint64_t seed);

struct PlacementParams {
  std::uint32_t n_objects = 100;
  std::uint32_t keyword_pool = 30000;
  std::uint32_t max_keywords = 0;      // 0 -> 2 * keyword_pool / n_objects
  std::uint32_t storage_min = 1;
  std::uint32_t storage_max = 20;
  double storage_skew = 2.0;           // P(s) ~ s^-skew on [storage_min, storage_max]
  double initial_fill = 0.5;           // fraction of capacity filled at start (at least one object)
  double placement_zipf = 1.0;         // replica choice P(object j) ~ (j+1)^-zipf
};

// Creates the object catalogue and places replicas on sharers (peers with
// non-zero storage). Every object is placed at least once, every sharer holds
// at least one object, and capacities are never exceeded.
void distribute_objects(Network& net, const PlacementParams& params, Rng& rng);

bool eligible_neighbour(const Peer& selector, const Peer& candidate, std::uint32_t f_th);
std::uint32_t effective_f_th(const Peer& selector, std::uint32_t f_th);

double compute_qp(double s_s, double s_th, double d_d, double d_th, double f_i, double f_th, double w1, double w2,
                  double w3, double k = 100.0);
double peer_qp(const Network& net, PeerId p, const Thresholds& t);

// Builds every peer's neighbour table from adjacency and eligibility.
void init_neighbour_tables(Network& net, const Thresholds& t);

// Top `fraction` of sharers by (degree, |shared|) become power peers. Returns them ascending.
std::vector<PeerId> assign_initial_power_peers(Network& net, double fraction);

// Every alive peer within n_hops of `p` (BFS over alive peers) learns (p, Q_p)
// unless p already sits in its neighbour or power table. Returns notified peers.
std::vector<PeerId> broadcast_power_peer(Network& net, PeerId p, std::uint32_t n_hops, const Thresholds& t);

// Promotes p iff it meets the degree, object and storage thresholds and is not
// already a power peer; a promotion broadcasts. Returns whether it happened.
bool promote_power_peer(Network& net, PeerId p, const Thresholds& t, std::uint32_t n_hops);

// After p's object count grew: neighbours that now accept p add it to their
// neighbour table (and drop it from their power table).
void refresh_eligibility(Network& net, PeerId p, const Thresholds& t);

struct ChurnResult {
  std::vector<PeerId> went_up;
  std::vector<PeerId> went_down;
};

// Half of the DOWN peers (rounded half up) come up and as many UP peers go down.
ChurnResult apply_churn(Network& net, Rng& rng);

// Marks round(fraction * n) peers alive, the rest down.
void assign_liveness(Network& net, double up_fraction, Rng& rng);

}  // namespace p2ps
