#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "p2ps/dst.hpp"
#include "p2ps/network.hpp"
#include "p2ps/rng.hpp"

namespace p2ps {

// k-random walk: uniform choice among alive neighbours, avoiding the peer the
// message came from whenever another candidate exists.
RoutingAction random_walk_step(const Network& net, PeerId at, const WalkerMessage& msg, Rng& rng);

// Source fan-out of a k-random walk: each walker independently picks a uniform alive neighbour.
std::vector<PeerId> random_walk_launch(const Network& net, PeerId source, std::uint32_t k, Rng& rng);

struct ApsParams {
  double init = 30.0;
  double reward = 10.0;   // added on success
  double penalty = 5.0;   // removed on failure
  double floor = 1.0;
  bool pessimistic = true;

  void validate() const;
};

// Adaptive probabilistic search indices: (owner, neighbour, keyword) -> value.
class ApsIndex {
 public:
  explicit ApsIndex(std::size_t peers = 0, ApsParams params = {}) : tables_(peers), params_(params) {}

  double value(PeerId owner, PeerId neighbour, Keyword kw) const;
  void set(PeerId owner, PeerId neighbour, Keyword kw, double v);
  const ApsParams& params() const { return params_; }

 private:
  static std::uint64_t key(PeerId nb, Keyword kw) { return (std::uint64_t{raw(nb)} << 32) | raw(kw); }
  std::vector<std::unordered_map<std::uint64_t, double>> tables_;
  ApsParams params_;
};

// k distinct alive neighbours drawn without replacement with probability
// proportional to their index for `kw`; all of them when fewer than k exist.
// `exclude` (the sender) is dropped when at least two candidates remain.
std::vector<PeerId> aps_select(const ApsIndex& index, const Network& net, PeerId at, Keyword kw, std::uint32_t k,
                               Rng& rng, std::optional<PeerId> exclude = std::nullopt);

// Source fan-out keeping the walker count at k: the distinct draw above, topped
// up with independent index-proportional draws when the peer has fewer than k neighbours.
std::vector<PeerId> aps_launch(const ApsIndex& index, const Network& net, PeerId source, Keyword kw, std::uint32_t k,
                               Rng& rng);

void aps_update(ApsIndex& index, PeerId at, Keyword kw, PeerId neighbour, Outcome outcome);

}  // namespace p2ps
