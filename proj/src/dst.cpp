#include "p2ps/dst.hpp"

#include <algorithm>

namespace p2ps {

bool WalkerMessage::on_path(PeerId p) const { return std::find(path.begin(), path.end(), p) != path.end(); }

Launch launch_query(Network& net, PeerId source, Keyword kw, std::uint32_t k_walkers, Tick tick) {
  if (k_walkers == 0) throw ConfigError("search.walkers", "need at least one walker");
  Launch out;
  Peer& src = net.at(source);
  if (const auto nr = net.matching_objects(source, kw); nr > 0) {
    out.mode = LaunchMode::Local;
    out.local_nr = nr;
    return out;
  }
  auto allow = [&](PeerId p) { return p != source && net.at(p).alive; };

  if (const ScoreRow* row = src.qt.row(kw)) {
    src.qt.touch(kw, tick);
    out.targets = row_top_k(*row, k_walkers, allow);
    if (!out.targets.empty()) {
      out.mode = LaunchMode::QueryTable;
      out.via.assign(out.targets.size(), Selection::QueryTable);
      return out;
    }
  }
  out.targets = merge_top_k(src.nq, src.pq, k_walkers, allow);
  if (out.targets.empty()) {
    out.mode = LaunchMode::NoTargets;
    return out;
  }
  out.mode = LaunchMode::Merged;
  out.via.assign(out.targets.size(), Selection::Merged);
  out.row_inserted = src.qt.insert_keyword(kw, src.nq, tick);
  return out;
}

std::vector<WalkerMessage> make_walkers(const Launch& launch, MessageId message_id, QueryId query_id, PeerId source,
                                        Keyword kw, std::uint32_t ttl0) {
  std::vector<WalkerMessage> out;
  out.reserve(launch.targets.size());
  for (std::size_t i = 0; i < launch.targets.size(); ++i) {
    WalkerMessage m;
    m.message_id = message_id;
    m.query_id = query_id;
    m.walker = static_cast<std::uint32_t>(i);
    m.source = source;
    m.keyword = kw;
    m.ttl_remaining = ttl0 - 1;
    m.path = {source};
    m.next = launch.targets[i];
    m.next_via = launch.via[i];
    out.push_back(std::move(m));
  }
  return out;
}

bool enhancement_applies(const Network& net, PeerId at, const WalkerMessage& msg) {
  return msg.ttl_remaining == 0 && net.at(at).is_power() && msg.primary && !msg.enhanced;
}

WalkerMessage maybe_enhance_ttl(const Network& net, PeerId at, WalkerMessage msg, std::uint32_t ttl0) {
  if (enhancement_applies(net, at, msg)) {
    msg.ttl_remaining += t_max(ttl0) - ttl0;
    msg.enhanced = true;
  }
  return msg;
}

RoutingAction handle_query(Network& net, PeerId at, const WalkerMessage& msg, Tick tick) {
  Peer& self = net.at(at);
  ++self.queries_received;
  if (const auto nr = net.matching_objects(at, msg.keyword); nr > 0) {
    ++self.hits_produced;
    return RoutingAction::hit(nr);
  }
  const bool enhance = enhancement_applies(net, at, msg);
  if (msg.ttl_remaining == 0 && !enhance) return RoutingAction::stop(Termination::TtlExpired);

  auto allow = [&](PeerId p) { return p != at && net.at(p).alive && !msg.on_path(p); };
  RoutingAction act = RoutingAction::stop(Termination::DeadEnd);
  if (self.is_power()) {
    // power peers only hand queries on to other power peers
    if (auto best = self.pq.best(allow)) act = RoutingAction::forward(*best, Selection::PowerTable);
  } else {
    std::optional<PeerId> best;
    if (const ScoreRow* row = self.qt.row(msg.keyword)) {
      self.qt.touch(msg.keyword, tick);
      best = row->best(allow);
      if (best) act = RoutingAction::forward(*best, Selection::QueryTable);
    }
    if (!best) {
      auto top = merge_top_k(self.nq, self.pq, 1, allow);
      if (!top.empty()) act = RoutingAction::forward(top.front(), Selection::Merged);
    }
  }
  act.enhance = enhance && act.kind == RoutingAction::Kind::Forward;
  return act;
}

RoutingAction forward_duplicate(const Network& net, PeerId at, const WalkerMessage& msg, PeerClass sender_class,
                                const std::unordered_set<PeerId>& seen) {
  if (msg.ttl_remaining == 0) return RoutingAction::stop(Termination::DuplicateDrop);
  const Peer& self = net.at(at);
  auto allow = [&](PeerId p) { return p != at && net.at(p).alive && seen.count(p) == 0; };
  const ScoreRow& ranks = sender_class == PeerClass::Power ? static_cast<const ScoreRow&>(self.pq)
                                                           : static_cast<const ScoreRow&>(self.nq);
  if (auto best = ranks.best(allow)) return RoutingAction::forward(*best, Selection::Duplicate);
  return RoutingAction::stop(Termination::DuplicateDrop);
}

HitReport make_hit_report(const Network& net, const WalkerMessage& msg, std::uint32_t nr, const Thresholds& t) {
  HitReport r;
  r.query_id = msg.query_id;
  r.message_id = msg.message_id;
  r.source = msg.source;
  r.keyword = msg.keyword;
  r.responder = msg.current();
  r.responder_class = net.at(r.responder).cls;
  if (r.responder_class == PeerClass::Power) r.q_p = peer_qp(net, r.responder, t);
  r.nr = nr;
  r.hp = msg.hops_visited;
  r.path = msg.path;
  r.via = msg.via;
  r.enhanced = msg.enhanced;
  return r;
}

namespace {

void reinforce_neighbour(Network& net, Peer& node, PeerId next, const RewardParams& rp) {
  const Peer& nb = net.at(next);
  const double r_n = reward_neighbour(nb.hits_produced, nb.queries_received, rp.k);
  node.nq.set(next, update_neighbour_q(*node.nq.get(next), r_n, rp.nb_w1, rp.nb_w2, true));
}

void reinforce_power(Peer& node, PeerId next, std::uint32_t ttl0, std::uint32_t hp, const RewardParams& rp) {
  const double r = reward_power(ttl0, hp, rp.pp_w1, rp.k);
  node.pq.set(next, update_power_q(*node.pq.get(next), r, rp.alpha, Outcome::Hit));
}

void reinforce_row(ScoreRow& row, PeerId next, std::uint32_t ttl0, std::uint32_t hp, std::uint32_t nr,
                   const RewardParams& rp) {
  const double r = reward_query(ttl0, hp, nr, rp.qr_w1, rp.qr_w2);
  row.set(next, update_query_q(*row.get(next), r, rp.alpha, Outcome::Hit));
}

}  // namespace

void apply_hit_reverse_updates(Network& net, const HitReport& report, const DstParams& params, Tick tick) {
  if (report.path.size() < 2) return;
  const RewardParams& rp = params.reward;
  const std::size_t last = report.path.size() - 1;
  for (std::size_t i = last; i-- > 0;) {
    const PeerId at = report.path[i];
    const PeerId next = report.path[i + 1];
    // reward by the distance still to go from this node to the responder
    const auto hp = static_cast<std::uint32_t>(last - i);
    Peer& node = net.at(at);

    switch (report.via[i]) {
      case Selection::QueryTable:
        if (ScoreRow* row = node.qt.row(report.keyword); row && row->contains(next)) {
          reinforce_row(*row, next, params.ttl0, hp, report.nr, rp);
          node.qt.touch(report.keyword, tick);
        }
        break;
      case Selection::Merged:
        if (node.nq.contains(next)) {
          reinforce_neighbour(net, node, next, rp);
          node.qt.insert_keyword_from_column_averages(report.keyword, node.nq, tick);
          if (ScoreRow* row = node.qt.row(report.keyword); row && row->contains(next))
            reinforce_row(*row, next, params.ttl0, hp, report.nr, rp);
        } else if (node.pq.contains(next)) {
          reinforce_power(node, next, params.ttl0, hp, rp);
        }
        break;
      case Selection::PowerTable:
        if (node.pq.contains(next)) reinforce_power(node, next, params.ttl0, hp, rp);
        break;
      case Selection::Duplicate:
        if (node.nq.contains(next)) {
          reinforce_neighbour(net, node, next, rp);
        } else if (node.pq.contains(next)) {
          reinforce_power(node, next, params.ttl0, hp, rp);
        }
        break;
      case Selection::Random:
        break;
    }

    // nodes on the reply path learn about a power-peer responder they did not know
    if (report.responder_class == PeerClass::Power && report.q_p && at != report.responder &&
        !node.pq.contains(report.responder) && !node.nq.contains(report.responder)) {
      node.pq.set(report.responder, *report.q_p);
    }
  }
}

void finalize_query(Network& net, PeerId source, Keyword kw, const Launch& launch,
                    const std::vector<WalkerOutcome>& outcomes, const DstParams& params) {
  if (launch.mode != LaunchMode::QueryTable && launch.mode != LaunchMode::Merged) return;
  Peer& src = net.at(source);
  const RewardParams& rp = params.reward;
  bool neighbour_hit = false;
  for (const auto& o : outcomes) {
    if (o.hit) {
      if (src.nq.contains(o.first_hop)) neighbour_hit = true;
      continue;
    }
    if (ScoreRow* row = src.qt.row(kw); row && row->contains(o.first_hop))
      row->set(o.first_hop, update_query_q(*row->get(o.first_hop), 0.0, rp.alpha, Outcome::Miss));
    if (o.first_via != Selection::Merged) continue;
    if (src.nq.contains(o.first_hop)) {
      const Peer& nb = net.at(o.first_hop);
      const double r_n = reward_neighbour(nb.hits_produced, nb.queries_received, rp.k);
      src.nq.set(o.first_hop, update_neighbour_q(*src.nq.get(o.first_hop), r_n, rp.nb_w1, rp.nb_w2, false));
    } else if (src.pq.contains(o.first_hop)) {
      src.pq.set(o.first_hop, update_power_q(*src.pq.get(o.first_hop), 0.0, rp.alpha, Outcome::Miss));
    }
  }
  if (launch.row_inserted && !neighbour_hit) src.qt.delete_keyword(kw);
}

CacheResult cache_object_at_source(Network& net, PeerId source, ObjectId object, const Thresholds& t,
                                   std::uint32_t broadcast_hops) {
  CacheResult res;
  ++net.objects[raw(object)].popularity;
  Peer& src = net.at(source);
  if (src.holds(object) || src.shared_count() >= src.storage_capacity) return res;
  src.shared.insert(std::lower_bound(src.shared.begin(), src.shared.end(), object), object);
  res.cached = true;
  refresh_eligibility(net, source, t);
  res.promoted = promote_power_peer(net, source, t, broadcast_hops);
  return res;
}

}  // namespace p2ps
