#include "p2ps/qtable.hpp"

#include <cmath>
#include <map>

namespace p2ps {

void RewardParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("reward.alpha", "must lie in (0, 1]");
  if (!(qr_w1 > 0.0 && qr_w1 < 1.0)) throw ConfigError("reward.qr_w1", "must lie in (0, 1)");
  if (!(qr_w2 > 0.0 && qr_w2 < 1.0)) throw ConfigError("reward.qr_w2", "must lie in (0, 1)");
  if (!(qr_w1 < qr_w2)) throw ConfigError("reward.qr_w1", "must be smaller than reward.qr_w2");
  if (std::abs(qr_w1 + qr_w2 - 1.0) > 1e-9) throw ConfigError("reward.qr_w2", "qr_w1 + qr_w2 must equal 1");
  if (!(nb_w1 >= 0.1 && nb_w1 <= 1.0)) throw ConfigError("reward.nb_w1", "must lie in [0.1, 1]");
  if (!(nb_w2 >= 0.1 && nb_w2 <= 1.0)) throw ConfigError("reward.nb_w2", "must lie in [0.1, 1]");
  if (!(nb_w1 > nb_w2)) throw ConfigError("reward.nb_w1", "must be greater than reward.nb_w2");
  if (!(pp_w1 > 0.0 && pp_w1 < 1.0)) throw ConfigError("reward.pp_w1", "must lie in (0, 1)");
  if (k != 100.0) throw ConfigError("reward.k", "normalising constant is fixed at 100");
}

double init_neighbour_q(std::uint32_t f_i, std::uint32_t f_th, double k) {
  if (f_th == 0) throw ConfigError("f_th", "threshold must be at least 1");
  if (f_i < f_th) throw InternalError("init_neighbour_q: candidate below object threshold (eligibility violation)");
  return round_half_away(static_cast<double>(f_i) * k / f_th);  // multiply first so exact halves stay exact
}

double reward_query(std::uint32_t ttl0, std::uint32_t hp, std::uint32_t nr, double qr_w1, double qr_w2) {
  if (hp == 0) throw InternalError("reward_query: a rewarded hit needs at least one hop");
  if (nr == 0) throw InternalError("reward_query: a hit returns at least one result");
  return (static_cast<double>(ttl0) / (qr_w1 * hp) + static_cast<double>(nr) / qr_w2) * 100.0;
}

double update_query_q(double q, double r, double alpha, Outcome outcome) {
  switch (outcome) {
    case Outcome::Hit: return clamp_q(q + alpha * (r - q));
    case Outcome::Miss: return clamp_q(q * (1.0 - alpha));
    case Outcome::NotAsked: return q;
  }
  return q;
}

double reward_neighbour(std::uint64_t hits_produced, std::uint64_t queries_received, double k) {
  if (queries_received == 0) return 0.0;
  return k * static_cast<double>(hits_produced) / static_cast<double>(queries_received);
}

double update_neighbour_q(double q, double r_n, double nb_w1, double nb_w2, bool hit) {
  return clamp_q(hit ? q + r_n / nb_w1 : q - r_n / nb_w2);
}

std::uint32_t t_max(std::uint32_t ttl0) {
  return ttl0 + static_cast<std::uint32_t>(round_half_away(static_cast<double>(ttl0) / 2.0));
}

double reward_power(std::uint32_t ttl0, std::uint32_t hp, double pp_w1, double k) {
  if (hp == 0) throw InternalError("reward_power: a rewarded hit needs at least one hop");
  return (static_cast<double>(t_max(ttl0)) / (hp * pp_w1)) * k;
}

// --- ScoreRow -------------------------------------------------------------------

void ScoreRow::set(PeerId p, double q) {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), p,
                             [](const ScoredPeer& e, PeerId id) { return e.peer < id; });
  if (it != entries_.end() && it->peer == p) {
    it->q = q;
  } else {
    entries_.insert(it, ScoredPeer{p, q});
  }
}

bool ScoreRow::erase(PeerId p) {
  auto it = find(p);
  if (it == entries_.end()) return false;
  entries_.erase(it);
  return true;
}

std::optional<PeerId> ScoreRow::best(const std::function<bool(PeerId)>& allow) const {
  std::optional<ScoredPeer> top;
  for (const auto& e : entries_) {
    if (!allow(e.peer)) continue;
    // entries_ ascends by id, so strict > keeps the lowest id on ties
    if (!top || e.q > top->q) top = e;
  }
  if (!top) return std::nullopt;
  return top->peer;
}

// --- QueryQTable ----------------------------------------------------------------

QueryQTable::QueryQTable(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("qtable.query_capacity", "must be at least 1");
}

const ScoreRow* QueryQTable::row(Keyword kw) const {
  auto it = rows_.find(kw);
  return it == rows_.end() ? nullptr : &it->second.values;
}

ScoreRow* QueryQTable::row(Keyword kw) {
  auto it = rows_.find(kw);
  return it == rows_.end() ? nullptr : &it->second.values;
}

std::optional<Tick> QueryQTable::last_used(Keyword kw) const {
  auto it = rows_.find(kw);
  if (it == rows_.end()) return std::nullopt;
  return it->second.last_used;
}

void QueryQTable::touch(Keyword kw, Tick tick) {
  auto it = rows_.find(kw);
  if (it == rows_.end()) return;
  it->second.last_used = std::max(it->second.last_used, tick);
  lru_.splice(lru_.begin(), lru_, it->second.lru_pos);
}

void QueryQTable::emplace_row(Keyword kw, ScoreRow values, Tick tick) {
  if (rows_.size() >= capacity_) {
    Keyword victim = lru_.back();
    lru_.pop_back();
    rows_.erase(victim);
  }
  lru_.push_front(kw);
  rows_.emplace(kw, Slot{std::move(values), tick, lru_.begin()});
}

bool QueryQTable::insert_keyword(Keyword kw, const NeighbourQTable& nq_snapshot, Tick tick) {
  if (contains(kw)) {
    touch(kw, tick);
    return false;
  }
  emplace_row(kw, static_cast<const ScoreRow&>(nq_snapshot), tick);
  return true;
}

bool QueryQTable::insert_keyword_from_column_averages(Keyword kw, const NeighbourQTable& nq_snapshot, Tick tick) {
  if (contains(kw)) {
    touch(kw, tick);
    return false;
  }
  if (rows_.empty()) return insert_keyword(kw, nq_snapshot, tick);

  std::map<PeerId, std::pair<double, std::size_t>> columns;
  for (const auto& [key, slot] : rows_) {
    for (const auto& e : slot.values.entries()) {
      auto& [sum, n] = columns[e.peer];
      sum += e.q;
      ++n;
    }
  }
  ScoreRow values;
  for (const auto& [p, acc] : columns) values.set(p, acc.first / static_cast<double>(acc.second));
  // a neighbour with no column yet starts from its neighbour-table value
  for (const auto& e : nq_snapshot.entries())
    if (!values.contains(e.peer)) values.set(e.peer, e.q);
  emplace_row(kw, std::move(values), tick);
  return true;
}

bool QueryQTable::delete_keyword(Keyword kw) {
  auto it = rows_.find(kw);
  if (it == rows_.end()) return false;
  lru_.erase(it->second.lru_pos);
  rows_.erase(it);
  return true;
}

std::vector<Keyword> QueryQTable::keywords_by_recency() const { return {lru_.begin(), lru_.end()}; }

bool operator==(const QueryQTable& a, const QueryQTable& b) {
  if (a.capacity_ != b.capacity_ || a.rows_.size() != b.rows_.size()) return false;
  if (a.lru_ != b.lru_) return false;
  for (const auto& [kw, slot] : a.rows_) {
    auto it = b.rows_.find(kw);
    if (it == b.rows_.end()) return false;
    if (!(slot.values == it->second.values) || slot.last_used != it->second.last_used) return false;
  }
  return true;
}

// --- selection ------------------------------------------------------------------

namespace {

bool ranks_before(const ScoredPeer& a, const ScoredPeer& b) {
  if (a.q != b.q) return a.q > b.q;
  return a.peer < b.peer;
}

std::vector<PeerId> take_top(std::vector<ScoredPeer>& pool, std::size_t k) {
  std::sort(pool.begin(), pool.end(), ranks_before);
  std::vector<PeerId> out;
  out.reserve(std::min(k, pool.size()));
  for (std::size_t i = 0; i < pool.size() && out.size() < k; ++i) out.push_back(pool[i].peer);
  return out;
}

}  // namespace

std::vector<PeerId> merge_top_k(const NeighbourQTable& nq, const PowerPeerQTable& pq, std::size_t k,
                                const std::function<bool(PeerId)>& allow) {
  if (k == 0) return {};
  std::vector<ScoredPeer> pool;
  pool.reserve(nq.size() + pq.size());
  for (const auto& e : nq.entries())
    if (allow(e.peer)) pool.push_back(e);
  for (const auto& e : pq.entries()) {
    if (!allow(e.peer)) continue;
    // the tables are kept disjoint; tolerate overlap by keeping the larger score
    auto dup = std::find_if(pool.begin(), pool.end(), [&](const ScoredPeer& s) { return s.peer == e.peer; });
    if (dup == pool.end()) {
      pool.push_back(e);
    } else {
      dup->q = std::max(dup->q, e.q);
    }
  }
  return take_top(pool, k);
}

std::vector<PeerId> row_top_k(const ScoreRow& row, std::size_t k, const std::function<bool(PeerId)>& allow) {
  if (k == 0) return {};
  std::vector<ScoredPeer> pool;
  for (const auto& e : row.entries())
    if (allow(e.peer)) pool.push_back(e);
  return take_top(pool, k);
}

}  // namespace p2ps
