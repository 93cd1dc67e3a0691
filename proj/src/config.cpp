#include "p2ps/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace p2ps {

std::string to_string(Algo a) {
  switch (a) {
    case Algo::Dst: return "dst";
    case Algo::Aps: return "aps";
    case Algo::Rw: return "rw";
  }
  return "dst";
}

Algo parse_algo(const std::string& s) {
  if (s == "dst") return Algo::Dst;
  if (s == "aps") return Algo::Aps;
  if (s == "rw") return Algo::Rw;
  throw ConfigError("search.algo", "expected one of dst, aps, rw; got '" + s + "'");
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) throw ConfigError(key, "cannot parse '" + text + "'");
  return v;
}

bool parse_bool(const std::string& key, std::string text) {
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(key, "expected a boolean, got '" + text + "'");
}

struct Field {
  std::string name;
  std::function<void(SimConfig&, const std::string&)> set;
  std::function<std::string(const SimConfig&)> get;
};

template <class Access>
Field make_field(std::string name, Access access) {
  using T = std::remove_reference_t<decltype(access(std::declval<SimConfig&>()))>;
  Field f;
  f.name = name;
  f.set = [name, access](SimConfig& c, const std::string& v) {
    if constexpr (std::is_same_v<T, bool>) {
      access(c) = parse_bool(name, v);
    } else {
      access(c) = parse_number<T>(name, v);
    }
  };
  f.get = [access](const SimConfig& c) -> std::string {
    const T& v = access(const_cast<SimConfig&>(c));
    if constexpr (std::is_same_v<T, bool>) {
      return v ? "true" : "false";
    } else if constexpr (std::is_floating_point_v<T>) {
      return format_double(v);
    } else {
      return std::to_string(v);
    }
  };
  return f;
}

#define P2PS_FIELD(name, expr) make_field(name, [](SimConfig& c) -> auto& { return expr; })

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> t{
        P2PS_FIELD("topology.nodes", c.nodes),
        P2PS_FIELD("topology.avg_degree", c.avg_degree),
        P2PS_FIELD("topology.free_riders", c.free_riders),
        P2PS_FIELD("objects.count", c.placement.n_objects),
        P2PS_FIELD("objects.keyword_pool", c.placement.keyword_pool),
        P2PS_FIELD("objects.max_keywords", c.placement.max_keywords),
        P2PS_FIELD("objects.storage_min", c.placement.storage_min),
        P2PS_FIELD("objects.storage_max", c.placement.storage_max),
        P2PS_FIELD("objects.storage_skew", c.placement.storage_skew),
        P2PS_FIELD("objects.initial_fill", c.placement.initial_fill),
        P2PS_FIELD("objects.placement_zipf", c.placement.placement_zipf),
        P2PS_FIELD("workload.queries_per_node", c.queries_per_node),
        P2PS_FIELD("workload.query_interval_ticks", c.query_interval_ticks),
        P2PS_FIELD("workload.query_zipf", c.query_zipf),
        P2PS_FIELD("workload.metric_interval", c.metric_interval),
    };
    Field algo;
    algo.name = "search.algo";
    algo.set = [](SimConfig& c, const std::string& v) { c.algo = parse_algo(v); };
    algo.get = [](const SimConfig& c) { return to_string(c.algo); };
    t.push_back(algo);
    for (Field f : {
             P2PS_FIELD("search.walkers", c.walkers),
             P2PS_FIELD("search.ttl", c.ttl),
             P2PS_FIELD("search.cache_at_source", c.cache_at_source),
             P2PS_FIELD("reward.alpha", c.reward.alpha),
             P2PS_FIELD("reward.qr_w1", c.reward.qr_w1),
             P2PS_FIELD("reward.qr_w2", c.reward.qr_w2),
             P2PS_FIELD("reward.nb_w1", c.reward.nb_w1),
             P2PS_FIELD("reward.nb_w2", c.reward.nb_w2),
             P2PS_FIELD("reward.pp_w1", c.reward.pp_w1),
             P2PS_FIELD("reward.k", c.reward.k),
             P2PS_FIELD("thresholds.f_th", c.thresholds.f_th),
             P2PS_FIELD("thresholds.s_th", c.thresholds.s_th),
             P2PS_FIELD("thresholds.d_th", c.thresholds.d_th),
             P2PS_FIELD("thresholds.w1", c.thresholds.w1),
             P2PS_FIELD("thresholds.w2", c.thresholds.w2),
             P2PS_FIELD("thresholds.w3", c.thresholds.w3),
             P2PS_FIELD("power.init_fraction", c.power_init_fraction),
             P2PS_FIELD("power.broadcast_hops", c.broadcast_hops),
             P2PS_FIELD("qtable.query_capacity", c.query_table_capacity),
             P2PS_FIELD("churn.up_fraction", c.up_fraction),
             P2PS_FIELD("churn.interval_queries", c.churn_interval_queries),
             P2PS_FIELD("load.enabled", c.load_balancing),
             P2PS_FIELD("load.threshold", c.lb_threshold),
             P2PS_FIELD("load.capacity_min", c.queue_capacity_min),
             P2PS_FIELD("load.capacity_max", c.queue_capacity_max),
             P2PS_FIELD("load.service_rate", c.service_rate),
             P2PS_FIELD("aps.init", c.aps.init),
             P2PS_FIELD("aps.reward", c.aps.reward),
             P2PS_FIELD("aps.penalty", c.aps.penalty),
             P2PS_FIELD("aps.floor", c.aps.floor),
             P2PS_FIELD("aps.pessimistic", c.aps.pessimistic),
             P2PS_FIELD("run.seed", c.seed),
         })
      t.push_back(std::move(f));
    return t;
  }();
  return table;
}

#undef P2PS_FIELD

const Field& field(const std::string& key) {
  const std::string name = resolve_key(key);
  for (const auto& f : fields())
    if (f.name == name) return f;
  throw ConfigError(key, "unknown configuration key");
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.push_back(f.name);
  return out;
}

std::string resolve_key(const std::string& key) {
  std::string match;
  for (const auto& f : fields()) {
    if (f.name == key) return key;
    const auto dot = f.name.find('.');
    if (f.name.substr(dot + 1) == key) {
      if (!match.empty()) throw ConfigError(key, "ambiguous key; use the dotted form");
      match = f.name;
    }
  }
  if (match.empty()) throw ConfigError(key, "unknown configuration key");
  return match;
}

void set_field(SimConfig& cfg, const std::string& key, const std::string& value) { field(key).set(cfg, value); }

std::string get_field(const SimConfig& cfg, const std::string& key) { return field(key).get(cfg); }

std::vector<std::pair<std::string, std::string>> config_entries(const SimConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.name, f.get(cfg));
  return out;
}

SimConfig parse_config(const std::string& text, SimConfig base) {
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto c = line.find_first_of("#;"); c != std::string::npos) line.erase(c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno), "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!section.empty()) key = section + "." + key;
    set_field(base, key, value);
  }
  return base;
}

std::string format_config(const SimConfig& cfg) {
  std::string out, section;
  for (const auto& [key, value] : config_entries(cfg)) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out += '\n';
      out += "[" + sec + "]\n";
      section = sec;
    }
    out += key.substr(dot + 1) + " = " + value + "\n";
  }
  return out;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_overrides(SimConfig& cfg, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError(o, "override must look like key=value");
    set_field(cfg, trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
  }
}

void SimConfig::validate() const {
  if (nodes < 2) throw ConfigError("topology.nodes", "need at least 2 peers");
  if (!(avg_degree >= 1.0 && avg_degree <= nodes - 1.0))
    throw ConfigError("topology.avg_degree", "must lie in [1, nodes - 1]");
  if (free_riders >= nodes) throw ConfigError("topology.free_riders", "must be smaller than topology.nodes");
  if (placement.n_objects < 1) throw ConfigError("objects.count", "need at least one object");
  if (placement.keyword_pool < placement.n_objects)
    throw ConfigError("objects.keyword_pool", "must be >= objects.count");
  if (placement.storage_min < 1) throw ConfigError("objects.storage_min", "must be at least 1");
  if (placement.storage_max < placement.storage_min)
    throw ConfigError("objects.storage_max", "must be >= objects.storage_min");
  if (!(placement.storage_skew >= 0.0)) throw ConfigError("objects.storage_skew", "must be non-negative");
  if (!(placement.initial_fill >= 0.0 && placement.initial_fill <= 1.0))
    throw ConfigError("objects.initial_fill", "must lie in [0, 1]");
  if (!(placement.placement_zipf >= 0.0)) throw ConfigError("objects.placement_zipf", "must be non-negative");
  if (queries_per_node < 1) throw ConfigError("workload.queries_per_node", "must be at least 1");
  if (query_interval_ticks < 1) throw ConfigError("workload.query_interval_ticks", "must be at least 1");
  if (!(query_zipf >= 0.0)) throw ConfigError("workload.query_zipf", "must be non-negative");
  if (metric_interval < 1) throw ConfigError("workload.metric_interval", "must be at least 1");
  if (walkers < 1 || walkers > 64) throw ConfigError("search.walkers", "must lie in [1, 64]");
  if (ttl < 1 || ttl > 64) throw ConfigError("search.ttl", "must lie in [1, 64]");
  reward.validate();
  thresholds.validate();
  aps.validate();
  if (!(power_init_fraction >= 0.0 && power_init_fraction <= 1.0))
    throw ConfigError("power.init_fraction", "must lie in [0, 1]");
  if (broadcast_hops > 64) throw ConfigError("power.broadcast_hops", "must be at most 64");
  if (query_table_capacity < 1) throw ConfigError("qtable.query_capacity", "must be at least 1");
  if (!(up_fraction > 0.0 && up_fraction <= 1.0)) throw ConfigError("churn.up_fraction", "must lie in (0, 1]");
  if (churn_interval_queries < 1) throw ConfigError("churn.interval_queries", "must be at least 1");
  if (!(lb_threshold > 0.0 && lb_threshold <= 1.0)) throw ConfigError("load.threshold", "must lie in (0, 1]");
  if (queue_capacity_min < 1) throw ConfigError("load.capacity_min", "must be at least 1");
  if (queue_capacity_max < queue_capacity_min) throw ConfigError("load.capacity_max", "must be >= load.capacity_min");
  if (service_rate < 1) throw ConfigError("load.service_rate", "must be at least 1");
}

}  // namespace p2ps
