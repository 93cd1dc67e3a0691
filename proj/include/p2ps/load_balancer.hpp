#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "p2ps/network.hpp"

namespace p2ps {

struct LoadReport {
  PeerId peer{};
  std::uint32_t queue_len = 0;
  std::uint32_t queue_capacity = 0;
  double utilization = 0.0;  // queue_len / queue_capacity
};

LoadReport load_of(const Peer& p);

// True iff the power peer's queue has reached `threshold` of its capacity.
bool check_load(const Peer& p, double threshold = 0.6);

// One report per alive power peer listed in p's power-peer table.
std::vector<LoadReport> collect_load(const Network& net, PeerId p);

// A queued message that may be handed to another power peer. Peers on
// `path` never receive it, so redistribution cannot create a loop.
struct PendingMessage {
  std::size_t handle = 0;
  std::span<const PeerId> path;
};

// Messages queued beyond the watermark (the longest queue still below the
// threshold) move to the least-utilised reporting peer, re-ranking after every
// assignment, ties to the lower PeerId. A target only accepts a message while
// it stays below the threshold. `pending` is in queue order; the newest
// messages move first. Returns handle -> new owner.
std::map<std::size_t, PeerId> redistribute(const LoadReport& self, const std::vector<LoadReport>& reports,
                                           std::span<const PendingMessage> pending, double threshold = 0.6);

}  // namespace p2ps
