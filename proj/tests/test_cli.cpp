#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "p2ps/cli.hpp"
#include "p2ps/config.hpp"
#include "p2ps/metrics.hpp"

using namespace p2ps;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("p2ps_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

const char* kSmall =
    "[topology]\nnodes = 200\nfree_riders = 4\n"
    "[objects]\ncount = 8\nkeyword_pool = 200\n"
    "[workload]\nqueries_per_node = 3\nmetric_interval = 200\n"
    "[churn]\ninterval_queries = 300\n";

std::string write_config(const TempDir& d) {
  const auto p = (d.path / "small.ini").string();
  std::ofstream(p) << kSmall;
  return p;
}

int cli(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int rc = run_cli(args, out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return rc;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("run: happy path writes metrics, loads and manifest") {
  TempDir d("run");
  const auto cfg = write_config(d);
  const auto out = (d.path / "out").string();
  CHECK(cli({"run", "--config", cfg, "--out", out, "--trace", "--dump-tables"}) == 0);
  CHECK(fs::exists(fs::path(out) / "metrics.csv"));
  CHECK(fs::exists(fs::path(out) / "loads.csv"));
  CHECK(fs::exists(fs::path(out) / "manifest"));
  CHECK(slurp(fs::path(out) / "trace.csv").rfind("tick,query_id,message_id,peer,action,next,ttl_remaining\n", 0) == 0);
  CHECK(slurp(fs::path(out) / "qtables.csv").rfind("table_kind,owner_id,key,peer_id,qvalue_int\n", 0) == 0);

  // the manifest reproduces the run
  const auto manifest = slurp(fs::path(out) / "manifest");
  const SimConfig back = parse_config(manifest);
  CHECK(back.nodes == 200);
  const auto again = (d.path / "again").string();
  CHECK(cli({"run", "--config", (fs::path(out) / "manifest").string(), "--out", again}) == 0);
  CHECK(slurp(fs::path(out) / "metrics.csv") == slurp(fs::path(again) / "metrics.csv"));
}

TEST_CASE("run: manifest records overrides") {
  TempDir d("set");
  const auto cfg = write_config(d);
  const auto out = (d.path / "out").string();
  CHECK(cli({"run", "--config", cfg, "--out", out, "--set", "walkers=4", "--set", "algo=rw"}) == 0);
  const auto m = slurp(fs::path(out) / "manifest");
  CHECK(m.find("walkers = 4") != std::string::npos);
  CHECK(m.find("algo = rw") != std::string::npos);
  CHECK_FALSE(fs::exists(fs::path(out) / "loads.csv"));
  // the input file is left alone
  CHECK(slurp(cfg) == kSmall);
}

TEST_CASE("exit codes for bad input") {
  TempDir d("bad");
  const auto cfg = write_config(d);
  const auto out = (d.path / "out").string();
  std::string err;
  CHECK(cli({"run", "--config", cfg, "--out", out, "--set", "bogus=1"}, nullptr, &err) == 2);
  CHECK(err.find("bogus") != std::string::npos);
  CHECK(cli({"run", "--config", cfg, "--out", out, "--set", "walkers=0"}) == 2);
  CHECK(cli({"run", "--config", (d.path / "missing.ini").string(), "--out", out}) == 2);
  CHECK(cli({"frobnicate"}) == 2);
  CHECK(cli({"compare", "--config", cfg, "--out", out, "--algos", "dst"}) == 2);
  std::ofstream(d.path / "broken.ini") << "[search]\nwalkers = many\n";
  CHECK(cli({"run", "--config", (d.path / "broken.ini").string(), "--out", out}) == 2);
  // an output path that cannot be created is a runtime failure
  std::ofstream(d.path / "file") << "x";
  CHECK(cli({"run", "--config", cfg, "--out", (d.path / "file" / "sub").string()}) == 1);
}

TEST_CASE("compare: algorithms by seeds, one joined csv, equal topologies") {
  TempDir d("compare");
  const auto cfg = write_config(d);
  const auto out = (d.path / "out").string();
  std::string text;
  CHECK(cli({"compare", "--config", cfg, "--out", out, "--seeds", "1,2,3", "--jobs", "2"}, &text) == 0);
  CHECK(text.find("topology mismatch") == std::string::npos);
  std::ifstream in(fs::path(out) / "compare.csv");
  auto rows = parse_csv(in);
  REQUIRE_FALSE(rows.empty());
  CHECK(rows[0][0] == "algo");
  CHECK(rows[0][1] == "seed");
  CHECK(rows[0][2] == "interval");
  std::set<std::pair<std::string, std::string>> runs;
  for (std::size_t i = 1; i < rows.size(); ++i) runs.insert({rows[i][0], rows[i][1]});
  CHECK(runs.size() == 9);
  std::set<std::string> hashes;
  for (const char* a : {"dst", "aps", "rw"}) {
    const auto m = slurp(fs::path(out) / (std::string(a) + "-seed2") / "manifest");
    hashes.insert(m.substr(m.find("topology_hash"), 40));
  }
  CHECK(hashes.size() == 1);
}

TEST_CASE("sweep axis parsing and sweep output") {
  auto a = parse_axis("walkers=1..4");
  CHECK(a.key == "walkers");
  CHECK(a.values == std::vector<std::string>{"1", "2", "3", "4"});
  auto b = parse_axis("reward.alpha=0.1,0.2");
  CHECK(b.values == std::vector<std::string>{"0.1", "0.2"});
  CHECK_THROWS(parse_axis("walkers"));

  TempDir d("sweep");
  const auto cfg = write_config(d);
  const auto out = (d.path / "out").string();
  CHECK(cli({"sweep", "--config", cfg, "--out", out, "--axis", "walkers=1..2", "--algos", "dst,rw"}) == 0);
  std::ifstream in(fs::path(out) / "sweep.csv");
  auto rows = parse_csv(in);
  REQUIRE_FALSE(rows.empty());
  CHECK(rows[0][0] == "search.walkers");
  std::set<std::string> values;
  for (std::size_t i = 1; i < rows.size(); ++i) values.insert(rows[i][0] + rows[i][1]);
  CHECK(values == std::set<std::string>{"1dst", "1rw", "2dst", "2rw"});
  CHECK(cli({"sweep", "--config", cfg, "--out", out, "--axis", "walkers=0,1"}) == 2);
}
