#pragma once

#include <algorithm>
#include <initializer_list>
#include <utility>
#include <vector>

#include "p2ps/network.hpp"

namespace p2ps::test {

inline PeerId P(unsigned i) { return static_cast<PeerId>(i); }
inline Keyword K(unsigned i) { return static_cast<Keyword>(i); }
inline ObjectId O(unsigned i) { return static_cast<ObjectId>(i); }

// Hand-built network: n peers, the listed undirected edges, storage 1 each.
inline Network make_graph(unsigned n, std::initializer_list<std::pair<unsigned, unsigned>> edges) {
  Network net;
  net.peers.resize(n);
  net.adjacency.assign(n, {});
  for (unsigned i = 0; i < n; ++i) {
    net.peers[i].id = P(i);
    net.peers[i].storage_capacity = 1;
  }
  for (auto [a, b] : edges) {
    net.adjacency[a].push_back(P(b));
    net.adjacency[b].push_back(P(a));
  }
  for (auto& row : net.adjacency) std::sort(row.begin(), row.end());
  return net;
}

// Gives peer p `count` fresh single-keyword objects (keyword = object id + 1000).
inline void give_objects(Network& net, unsigned p, unsigned count) {
  for (unsigned i = 0; i < count; ++i) {
    DataObject o;
    o.id = O(static_cast<unsigned>(net.objects.size()));
    o.keywords = {K(1000 + raw(o.id))};
    net.at(P(p)).shared.push_back(o.id);
    net.objects.push_back(o);
  }
  auto& s = net.at(P(p)).shared;
  std::sort(s.begin(), s.end());
  net.at(P(p)).storage_capacity = std::max<std::uint32_t>(net.at(P(p)).storage_capacity, net.at(P(p)).shared_count());
}

inline bool symmetric(const Network& net) {
  for (std::size_t a = 0; a < net.size(); ++a)
    for (PeerId b : net.adjacency[a]) {
      if (idx(b) == a) return false;
      if (!net.adjacent(b, peer(a))) return false;
    }
  for (const auto& row : net.adjacency)
    if (std::adjacent_find(row.begin(), row.end()) != row.end()) return false;
  return true;
}

}  // namespace p2ps::test
