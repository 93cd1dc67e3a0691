#include "p2ps/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "p2ps/batch.hpp"
#include "p2ps/config.hpp"
#include "p2ps/simulator.hpp"

namespace fs = std::filesystem;

namespace p2ps {

namespace {

struct Options {
  std::string config;
  std::vector<std::string> sets;
  std::vector<std::string> algos;
  std::vector<std::uint64_t> seeds;
  std::uint32_t reps = 0;
  std::uint64_t seed_stride = 1;
  int jobs = 1;
  std::string out = "out";
  bool trace = false;
  bool dump_tables = false;
  std::string axis;
};

SimConfig base_config(const Options& o) {
  SimConfig cfg = o.config.empty() ? SimConfig{} : load_config(o.config);
  apply_overrides(cfg, o.sets);
  cfg.validate();
  return cfg;
}

std::vector<std::uint64_t> seed_list(const Options& o, const SimConfig& cfg) {
  if (!o.seeds.empty()) return o.seeds;
  if (o.reps == 0) return {cfg.seed};
  std::vector<std::uint64_t> s;
  for (std::uint32_t i = 0; i < o.reps; ++i) s.push_back(cfg.seed + i * o.seed_stride);
  return s;
}

std::vector<Algo> algo_list(const Options& o, const SimConfig& cfg) {
  std::vector<Algo> out;
  for (const auto& a : o.algos) out.push_back(parse_algo(a));
  if (out.empty()) out.push_back(cfg.algo);
  return out;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
  if (!f) throw std::runtime_error("write failed: " + p.string());
}

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << "0x" << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::string manifest(const SimConfig& cfg, const RunResult& r) {
  std::ostringstream s;
  s << "# seed = " << cfg.seed << '\n';
  s << "# topology_hash = " << hex(r.topology_hash) << '\n';
  s << "# queries_scheduled = " << r.queries_scheduled << '\n';
  s << "# queries_skipped = " << r.queries_skipped << '\n';
  s << format_config(cfg);
  return s.str();
}

// Writes metrics.csv, loads.csv (dst) and manifest for one run.
void write_run(const fs::path& dir, const SimConfig& cfg, const RunResult& r) {
  fs::create_directories(dir);
  emit_csv(r.series, (dir / "metrics.csv").string());
  if (cfg.algo == Algo::Dst) {
    std::ostringstream loads;
    write_loads_csv(r.load_snapshots, loads);
    write_file(dir / "loads.csv", loads.str());
  }
  write_file(dir / "manifest", manifest(cfg, r));
}

// Rows keyed by (extra columns, algo, seed, interval).
void append_joined(std::ostream& out, const std::string& prefix, const SimConfig& cfg, const RunResult& r) {
  std::ostringstream body;
  write_metrics_csv(r.series, body);
  std::istringstream in(body.str());
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) out << prefix << to_string(cfg.algo) << ',' << cfg.seed << ',' << line << '\n';
}

std::string joined_header(const std::string& prefix) {
  std::string h = prefix + "algo,seed";
  for (const auto& c : metrics_columns()) h += "," + c;
  return h + "\n";
}

std::string run_name(const SimConfig& cfg) { return to_string(cfg.algo) + "-seed" + std::to_string(cfg.seed); }

int cmd_run(const Options& o, std::ostream& out) {
  const SimConfig base = base_config(o);
  const auto seeds = seed_list(o, base);
  const auto algos = algo_list(o, base);
  const bool single = seeds.size() == 1 && algos.size() == 1;
  for (Algo a : algos)
    for (auto seed : seeds) {
      SimConfig cfg = base;
      cfg.algo = a;
      cfg.seed = seed;
      const fs::path dir = single ? fs::path(o.out) : fs::path(o.out) / run_name(cfg);
      fs::create_directories(dir);
      std::ofstream trace, tables;
      RunOptions ro;
      if (o.trace) {
        trace.open(dir / "trace.csv", std::ios::binary);
        trace << "tick,query_id,message_id,peer,action,next,ttl_remaining\n";
        ro.trace = &trace;
      }
      if (o.dump_tables) {
        tables.open(dir / "qtables.csv", std::ios::binary);
        ro.qtable_dump = &tables;
      }
      const RunResult r = run_experiment(cfg, ro);
      write_run(dir, cfg, r);
      const auto total = aggregate(r.series);
      out << run_name(cfg) << ": " << total.queries_issued << " queries, success " << format_real(total.success_rate)
          << ", avg hops " << format_real(total.avg_hops) << " -> " << dir.string() << '\n';
    }
  return 0;
}

// Runs every (config) in parallel and writes per-run outputs plus one joined CSV.
int run_grid(const Options& o, const std::vector<SimConfig>& configs, const std::vector<std::string>& prefixes,
             const std::string& prefix_header, const std::string& joined_name, std::ostream& out) {
  const auto results = run_batch(configs, o.jobs > 1 ? Exec::Parallel : Exec::Serial, o.jobs);
  fs::create_directories(o.out);
  std::ofstream joined(fs::path(o.out) / joined_name, std::ios::binary);
  if (!joined) throw std::runtime_error("cannot write " + (fs::path(o.out) / joined_name).string());
  joined << joined_header(prefix_header);
  std::map<std::pair<std::string, std::uint64_t>, std::uint64_t> hashes;
  int status = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto& cfg = configs[i];
    const auto& r = results[i];
    fs::path dir = fs::path(o.out) / run_name(cfg);
    if (!prefixes[i].empty()) dir = fs::path(o.out) / (prefixes[i].substr(0, prefixes[i].size() - 1)) / run_name(cfg);
    write_run(dir, cfg, r);
    append_joined(joined, prefixes[i], cfg, r);
    auto [it, fresh] = hashes.try_emplace({prefixes[i], cfg.seed}, r.topology_hash);
    if (!fresh && it->second != r.topology_hash) {
      out << "topology mismatch for seed " << cfg.seed << '\n';
      status = 1;
    }
    const auto total = aggregate(r.series);
    out << prefixes[i] << run_name(cfg) << ": success " << format_real(total.success_rate) << ", avg hops "
        << format_real(total.avg_hops) << ", duplicates " << total.duplicates_generated << '\n';
  }
  return status;
}

int cmd_compare(const Options& o, std::ostream& out) {
  const SimConfig base = base_config(o);
  Options opt = o;
  if (opt.algos.empty()) opt.algos = {"dst", "aps", "rw"};
  const auto algos = algo_list(opt, base);
  if (algos.size() < 2) throw ConfigError("algo", "compare needs at least two algorithms");
  std::vector<SimConfig> configs;
  for (auto seed : seed_list(o, base))
    for (Algo a : algos) {
      SimConfig cfg = base;
      cfg.algo = a;
      cfg.seed = seed;
      configs.push_back(cfg);
    }
  return run_grid(o, configs, std::vector<std::string>(configs.size()), "", "compare.csv", out);
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const SimConfig base = base_config(o);
  const SweepAxis axis = parse_axis(o.axis);
  const std::string key = resolve_key(axis.key);
  std::vector<SimConfig> configs;
  std::vector<std::string> prefixes;
  for (const auto& v : axis.values)
    for (auto seed : seed_list(o, base))
      for (Algo a : algo_list(o, base)) {
        SimConfig cfg = base;
        set_field(cfg, key, v);
        cfg.algo = a;
        cfg.seed = seed;
        cfg.validate();
        configs.push_back(cfg);
        prefixes.push_back(v + ",");
      }
  return run_grid(o, configs, prefixes, key + ",", "sweep.csv", out);
}

}  // namespace

SweepAxis parse_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size())
    throw ConfigError("axis", "expected key=v1,v2,... or key=lo..hi");
  SweepAxis a;
  a.key = text.substr(0, eq);
  const std::string rhs = text.substr(eq + 1);
  if (const auto dots = rhs.find(".."); dots != std::string::npos) {
    long lo = 0, hi = 0;
    try {
      lo = std::stol(rhs.substr(0, dots));
      hi = std::stol(rhs.substr(dots + 2));
    } catch (const std::exception&) {
      throw ConfigError("axis", "range bounds must be integers");
    }
    if (hi < lo) throw ConfigError("axis", "empty range");
    for (long v = lo; v <= hi; ++v) a.values.push_back(std::to_string(v));
    return a;
  }
  std::stringstream ss(rhs);
  std::string v;
  while (std::getline(ss, v, ','))
    if (!v.empty()) a.values.push_back(v);
  if (a.values.empty()) throw ConfigError("axis", "no values");
  return a;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"unstructured peer-to-peer search simulator", "p2psim"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "INI config file")->check(CLI::ExistingFile);
    sub->add_option("--set", o.sets, "override, key=value (repeatable)");
    sub->add_option("--algo,--algos", o.algos, "dst, aps or rw (comma list)")->delimiter(',');
    sub->add_option("--seeds", o.seeds, "seed list")->delimiter(',');
    sub->add_option("--reps", o.reps, "repetitions when --seeds is absent");
    sub->add_option("--seed-stride", o.seed_stride, "seed step between repetitions");
    sub->add_option("--jobs", o.jobs, "concurrent runs")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "output directory");
  };
  auto* run = app.add_subcommand("run", "run one experiment");
  common(run);
  run->add_flag("--trace", o.trace, "write trace.csv with every routing action");
  run->add_flag("--dump-tables", o.dump_tables, "write the final Q-tables to qtables.csv");
  auto* compare = app.add_subcommand("compare", "run several algorithms on identical seeds");
  common(compare);
  auto* sweep = app.add_subcommand("sweep", "vary one setting");
  common(sweep);
  sweep->add_option("--axis", o.axis, "key=v1,v2,... or key=lo..hi")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(o, out);
    if (compare->parsed()) return cmd_compare(o, out);
    return cmd_sweep(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace p2ps
