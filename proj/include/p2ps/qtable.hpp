#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <list>
#include <optional>
#include <ostream>
#include <unordered_map>
#include <utility>
#include <vector>

#include "p2ps/types.hpp"

namespace p2ps {

// Q-values are non-negative reals internally and integers only when written out.
inline double clamp_q(double q) { return q < 0.0 ? 0.0 : q; }
inline std::int64_t serialize_q(double q) { return static_cast<std::int64_t>(round_half_away(q)); }

enum class Outcome : std::uint8_t { Hit, Miss, NotAsked };

struct RewardParams {
  double alpha = 0.2;
  double qr_w1 = 0.4;  // hop weight of the query reward
  double qr_w2 = 0.6;  // result-count weight of the query reward
  double nb_w1 = 0.8;  // neighbour reward divisor on hits
  double nb_w2 = 0.4;  // neighbour penalty divisor on misses
  double pp_w1 = 0.5;  // power-peer reward divisor
  double k = 100.0;

  // Throws ConfigError naming the first field outside its documented range.
  void validate() const;
};

// --- initialisation and reward formulas -------------------------------------

// round((f_i / f_th) * k); the candidate must already satisfy f_i >= f_th.
double init_neighbour_q(std::uint32_t f_i, std::uint32_t f_th, double k = 100.0);

// ((ttl0 / (w1 * hp)) + (nr / w2)) * 100
double reward_query(std::uint32_t ttl0, std::uint32_t hp, std::uint32_t nr, double qr_w1, double qr_w2);

// Hit moves Q toward r by alpha, Miss decays by (1 - alpha), NotAsked is identity.
double update_query_q(double q, double r, double alpha, Outcome outcome);

// k * hits/queries; zero queries means no evidence and yields 0.
double reward_neighbour(std::uint64_t hits_produced, std::uint64_t queries_received, double k = 100.0);

double update_neighbour_q(double q, double r_n, double nb_w1, double nb_w2, bool hit);

// ttl0 + round(ttl0 / 2)
std::uint32_t t_max(std::uint32_t ttl0);

// (T_max / (hp * w1)) * k
double reward_power(std::uint32_t ttl0, std::uint32_t hp, double pp_w1, double k = 100.0);

inline double update_power_q(double q, double r, double alpha, Outcome outcome) {
  return update_query_q(q, r, alpha, outcome);
}

// --- tables -------------------------------------------------------------------

struct ScoredPeer {
  PeerId peer;
  double q;
  friend bool operator==(const ScoredPeer&, const ScoredPeer&) = default;
};

// Small flat map PeerId -> Q-value kept sorted by PeerId so that iteration
// order (and therefore every tie-break) is deterministic.
class ScoreRow {
 public:
  bool contains(PeerId p) const { return find(p) != entries_.end(); }
  std::optional<double> get(PeerId p) const {
    auto it = find(p);
    if (it == entries_.end()) return std::nullopt;
    return it->q;
  }
  void set(PeerId p, double q);
  bool erase(PeerId p);
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<ScoredPeer>& entries() const { return entries_; }
  friend bool operator==(const ScoreRow&, const ScoreRow&) = default;

  // Highest Q among entries accepted by `allow`; ties go to the lower PeerId.
  std::optional<PeerId> best(const std::function<bool(PeerId)>& allow) const;

 private:
  std::vector<ScoredPeer>::const_iterator find(PeerId p) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), p,
                               [](const ScoredPeer& e, PeerId id) { return e.peer < id; });
    return (it != entries_.end() && it->peer == p) ? it : entries_.end();
  }
  std::vector<ScoredPeer> entries_;
};

template <class Tag>
class ScoreTable : public ScoreRow {};

using NeighbourQTable = ScoreTable<struct NeighbourTag>;
using PowerPeerQTable = ScoreTable<struct PowerPeerTag>;

// Keyword -> per-neighbour Q-values, bounded by `capacity` with LRU eviction.
class QueryQTable {
 public:
  explicit QueryQTable(std::size_t capacity = 512);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return rows_.size(); }
  bool contains(Keyword kw) const { return rows_.count(kw) != 0; }
  const ScoreRow* row(Keyword kw) const;
  ScoreRow* row(Keyword kw);
  std::optional<Tick> last_used(Keyword kw) const;

  // New row initialised from the neighbour table. Existing keyword: values are
  // kept and only recency is refreshed. Returns true if a row was created.
  bool insert_keyword(Keyword kw, const NeighbourQTable& nq_snapshot, Tick tick);

  // New row whose value for each neighbour column is the mean of that column
  // over all existing rows; an empty table falls back to the NQ snapshot, as
  // does any neighbour that has no column yet.
  bool insert_keyword_from_column_averages(Keyword kw, const NeighbourQTable& nq_snapshot, Tick tick);

  bool delete_keyword(Keyword kw);
  void touch(Keyword kw, Tick tick);

  // Keywords from most to least recently used.
  std::vector<Keyword> keywords_by_recency() const;

  friend bool operator==(const QueryQTable& a, const QueryQTable& b);

 private:
  struct Slot {
    ScoreRow values;
    Tick last_used;
    std::list<Keyword>::iterator lru_pos;
  };
  void emplace_row(Keyword kw, ScoreRow values, Tick tick);

  std::size_t capacity_;
  std::unordered_map<Keyword, Slot> rows_;
  std::list<Keyword> lru_;  // front = most recent
};

// Union of NQ and PQ entries accepted by `allow`, sorted by Q descending with
// ascending PeerId tie-break, truncated to k.
std::vector<PeerId> merge_top_k(const NeighbourQTable& nq, const PowerPeerQTable& pq, std::size_t k,
                                const std::function<bool(PeerId)>& allow);

// Top-k entries of a single row with the same ordering rule.
std::vector<PeerId> row_top_k(const ScoreRow& row, std::size_t k, const std::function<bool(PeerId)>& allow);

}  // namespace p2ps
