#pragma once

#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

#include "p2ps/network.hpp"
#include "p2ps/qtable.hpp"

namespace p2ps {

// How a hop's next peer was chosen. Reverse-path reinforcement only touches
// the table that actually produced the decision.
enum class Selection : std::uint8_t {
  QueryTable,   // keyword row of the query Q-table
  Merged,       // merged neighbour + power-peer ranking
  PowerTable,   // power peer routing through its power-peer table
  Duplicate,    // duplicate rerouting
  Random,       // baseline walkers
};

enum class LaunchMode : std::uint8_t { Local, QueryTable, Merged, NoTargets };

// One walker of a query. All walkers of one query share the message id, which
// is what duplicate detection keys on.
struct WalkerMessage {
  MessageId message_id = 0;
  QueryId query_id = 0;
  std::uint32_t walker = 0;  // index within the query
  PeerId source{};
  Keyword keyword{};
  std::uint32_t ttl_remaining = 0;
  std::uint32_t hops_visited = 0;
  std::vector<PeerId> path;      // source first, current peer last
  std::vector<Selection> via;    // via[i] chose path[i + 1]
  PeerId next{};                 // peer the message is travelling to
  Selection next_via = Selection::Merged;
  bool enhanced = false;
  bool primary = true;           // false once rerouted as a duplicate

  PeerId current() const { return path.back(); }
  bool on_path(PeerId p) const;
};

struct HitReport {
  QueryId query_id = 0;
  MessageId message_id = 0;
  PeerId source{};
  Keyword keyword{};
  PeerId responder{};
  PeerClass responder_class = PeerClass::Ordinary;
  std::optional<double> q_p;     // present iff the responder is a power peer
  std::uint32_t nr = 0;
  std::uint32_t hp = 0;
  std::vector<PeerId> path;      // source .. responder
  std::vector<Selection> via;
  bool enhanced = false;
};

enum class Termination : std::uint8_t { None, Hit, TtlExpired, DeadEnd, DuplicateDrop };

struct RoutingAction {
  enum class Kind : std::uint8_t { LocalHit, Forward, Terminate } kind = Kind::Terminate;
  std::uint32_t nr = 0;                 // LocalHit
  PeerId next{};                        // Forward
  Selection via = Selection::Merged;    // Forward
  Termination reason = Termination::None;  // Terminate
  bool enhance = false;                 // TTL enhancement granted before forwarding

  static RoutingAction hit(std::uint32_t nr) { return {Kind::LocalHit, nr, {}, {}, Termination::Hit, false}; }
  static RoutingAction forward(PeerId to, Selection s) { return {Kind::Forward, 0, to, s, Termination::None, false}; }
  static RoutingAction stop(Termination why) { return {Kind::Terminate, 0, {}, {}, why, false}; }
};

struct DstParams {
  std::uint32_t ttl0 = 6;
  std::uint32_t walkers = 6;
  RewardParams reward;
  Thresholds thresholds;
  std::uint32_t broadcast_hops = 4;
};

struct Launch {
  LaunchMode mode = LaunchMode::NoTargets;
  bool row_inserted = false;
  std::uint32_t local_nr = 0;
  std::vector<PeerId> targets;
  std::vector<Selection> via;
};

// Source-side decision: a local match, the keyword's query-table row, or the
// merged neighbour + power-peer ranking (inserting a fresh keyword row).
Launch launch_query(Network& net, PeerId source, Keyword kw, std::uint32_t k_walkers, Tick tick);

// Builds the walker messages for a launch; they start with full TTL.
std::vector<WalkerMessage> make_walkers(const Launch& launch, MessageId message_id, QueryId query_id, PeerId source,
                                        Keyword kw, std::uint32_t ttl0);

// First visit of a walker at `at` (already appended to msg.path).
RoutingAction handle_query(Network& net, PeerId at, const WalkerMessage& msg, Tick tick);

// A walker arriving at a peer that already carried its message id.
RoutingAction forward_duplicate(const Network& net, PeerId at, const WalkerMessage& msg, PeerClass sender_class,
                                const std::unordered_set<PeerId>& seen);

// Grants the one-off TTL extension when a primary walker runs dry at a power peer.
WalkerMessage maybe_enhance_ttl(const Network& net, PeerId at, WalkerMessage msg, std::uint32_t ttl0);
bool enhancement_applies(const Network& net, PeerId at, const WalkerMessage& msg);

HitReport make_hit_report(const Network& net, const WalkerMessage& msg, std::uint32_t nr, const Thresholds& t);

// Reverse-path reinforcement for one hit.
void apply_hit_reverse_updates(Network& net, const HitReport& report, const DstParams& params, Tick tick);

struct WalkerOutcome {
  PeerId first_hop{};
  Selection first_via = Selection::Merged;
  bool hit = false;
};

// Once every walker of a query is done: miss decay at the source for the first
// hops of walkers that never hit, and removal of a freshly inserted keyword
// row that no neighbour walker answered.
void finalize_query(Network& net, PeerId source, Keyword kw, const Launch& launch,
                    const std::vector<WalkerOutcome>& outcomes, const DstParams& params);

struct CacheResult {
  bool cached = false;
  bool promoted = false;
};

// The source keeps a copy of the downloaded object when it has room.
CacheResult cache_object_at_source(Network& net, PeerId source, ObjectId object, const Thresholds& t,
                                   std::uint32_t broadcast_hops);

}  // namespace p2ps
