#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "p2ps/baselines.hpp"
#include "p2ps/network.hpp"
#include "p2ps/qtable.hpp"

namespace p2ps {

enum class Algo : std::uint8_t { Dst, Aps, Rw };

std::string to_string(Algo a);
Algo parse_algo(const std::string& s);

// Every experiment setting. Defaults reproduce the full-scale setup; see
// configs/desk.ini for the laptop-sized profile.
struct SimConfig {
  // topology
  std::uint32_t nodes = 10000;
  double avg_degree = 3.5;
  std::uint32_t free_riders = 50;

  // objects and storage
  PlacementParams placement{};

  // workload
  std::uint32_t queries_per_node = 100;
  std::uint32_t query_interval_ticks = 20;
  double query_zipf = 1.0;                 // keyword popularity P(rank r) ~ r^-zipf
  std::uint32_t metric_interval = 5000;    // queries per metrics record

  // search
  Algo algo = Algo::Dst;
  std::uint32_t walkers = 6;
  std::uint32_t ttl = 6;
  bool cache_at_source = true;

  RewardParams reward{};
  Thresholds thresholds{};
  double power_init_fraction = 0.1;
  std::uint32_t broadcast_hops = 4;
  std::uint32_t query_table_capacity = 512;

  // churn
  double up_fraction = 0.8;
  std::uint32_t churn_interval_queries = 50000;

  // power-peer queues and balancing
  bool load_balancing = true;
  double lb_threshold = 0.6;
  std::uint32_t queue_capacity_min = 50;
  std::uint32_t queue_capacity_max = 200;
  std::uint32_t service_rate = 48;         // messages a power peer handles per tick

  ApsParams aps{};

  std::uint64_t seed = 1;

  // Throws ConfigError naming the first invalid field.
  void validate() const;
};

// Canonical dotted keys in declaration order ("topology.nodes", ...).
std::vector<std::string> config_keys();

// Resolves a full dotted key or an unambiguous bare suffix ("walkers").
std::string resolve_key(const std::string& key);

void set_field(SimConfig& cfg, const std::string& key, const std::string& value);
std::string get_field(const SimConfig& cfg, const std::string& key);

// key = value pairs in canonical order; the manifest body.
std::vector<std::pair<std::string, std::string>> config_entries(const SimConfig& cfg);

// INI text: `[section]` headers prefix following keys as `section.key`;
// `#` and `;` start comments.
SimConfig parse_config(const std::string& text, SimConfig base = {});
SimConfig load_config(const std::string& path);

// Applies "key=value" overrides.
void apply_overrides(SimConfig& cfg, const std::vector<std::string>& overrides);

// INI text that parse_config reads back to an identical config.
std::string format_config(const SimConfig& cfg);

std::string format_double(double v);

}  // namespace p2ps
