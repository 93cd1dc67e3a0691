#include "p2ps/kernels.hpp"

#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace p2ps {

void init_neighbour_tables_parallel(Network& net, const Thresholds& t) {
  const auto n = static_cast<std::int64_t>(net.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    Peer& p = net.peers[static_cast<std::size_t>(i)];
    NeighbourQTable nq;
    const std::uint32_t eff = effective_f_th(p, t.f_th);
    for (PeerId c : net.neighbours(p.id)) {
      const Peer& cand = net.at(c);
      if (!eligible_neighbour(p, cand, t.f_th)) continue;
      const std::uint32_t f = std::max(cand.shared_count(), cand.is_power() ? eff : 0U);
      nq.set(c, init_neighbour_q(f, eff, t.k));
    }
    p.nq = std::move(nq);
  }
}

void init_power_tables_serial(Network& net, const Thresholds& t, std::uint32_t broadcast_hops) {
  for (auto& p : net.peers) p.pq = PowerPeerQTable{};
  for (std::size_t i = 0; i < net.size(); ++i)
    if (net.peers[i].is_power()) broadcast_power_peer(net, peer(i), broadcast_hops, t);
}

void init_power_tables_parallel(Network& net, const Thresholds& t, std::uint32_t broadcast_hops) {
  const auto n = static_cast<std::int64_t>(net.size());
  std::vector<double> qp(net.size(), 0.0);
  for (std::size_t i = 0; i < net.size(); ++i)
    if (net.peers[i].is_power()) qp[i] = peer_qp(net, peer(i), t);

#pragma omp parallel
  {
    std::vector<std::uint32_t> depth(net.size(), UINT32_MAX);
    std::vector<PeerId> touched, frontier, next;
#pragma omp for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < n; ++i) {
      Peer& recv = net.peers[static_cast<std::size_t>(i)];
      PowerPeerQTable pq;
      if (recv.alive && broadcast_hops > 0) {
        // reverse BFS: paths relay only through alive peers, the sender itself may be down
        frontier.assign(1, recv.id);
        depth[static_cast<std::size_t>(i)] = 0;
        touched.assign(1, recv.id);
        for (std::uint32_t d = 1; d <= broadcast_hops && !frontier.empty(); ++d) {
          next.clear();
          for (PeerId cur : frontier) {
            for (PeerId nb : net.neighbours(cur)) {
              if (depth[idx(nb)] != UINT32_MAX) continue;
              depth[idx(nb)] = d;
              touched.push_back(nb);
              const Peer& other = net.at(nb);
              if (other.is_power() && !recv.nq.contains(nb)) pq.set(nb, qp[idx(nb)]);
              if (other.alive) next.push_back(nb);
            }
          }
          frontier.swap(next);
        }
        for (PeerId p : touched) depth[idx(p)] = UINT32_MAX;
      }
      recv.pq = std::move(pq);
    }
  }
}

void init_tables(Network& net, const Thresholds& t, std::uint32_t broadcast_hops, Exec exec) {
  if (exec == Exec::Parallel) {
    init_neighbour_tables_parallel(net, t);
    init_power_tables_parallel(net, t, broadcast_hops);
  } else {
    init_neighbour_tables(net, t);
    init_power_tables_serial(net, t, broadcast_hops);
  }
}

}  // namespace p2ps
