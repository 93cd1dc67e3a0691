#include <doctest.h>

#include "p2ps/config.hpp"

using namespace p2ps;

TEST_CASE("defaults validate and mirror the full-scale setup") {
  SimConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.nodes == 10000);
  CHECK(cfg.ttl == 6);
  CHECK(cfg.walkers == 6);
  CHECK(cfg.reward.alpha == 0.2);
  CHECK(cfg.up_fraction == 0.8);
  CHECK(cfg.churn_interval_queries == 50000);
  CHECK(cfg.queries_per_node == 100);
  CHECK(cfg.query_interval_ticks == 20);
  CHECK(cfg.placement.n_objects == 100);
  CHECK(cfg.placement.keyword_pool == 30000);
  CHECK(cfg.thresholds.d_th == 7);
  CHECK(cfg.lb_threshold == 0.6);
}

TEST_CASE("INI parsing with sections, comments and bare keys") {
  auto cfg = parse_config(
      "# comment\n"
      "[topology]\n"
      "nodes = 123 ; trailing\n"
      "[search]\n"
      "algo = rw\n"
      "walkers=3\n"
      "cache_at_source = off\n"
      "[reward]\n"
      "alpha = 0.5\n");
  CHECK(cfg.nodes == 123);
  CHECK(cfg.algo == Algo::Rw);
  CHECK(cfg.walkers == 3);
  CHECK_FALSE(cfg.cache_at_source);
  CHECK(cfg.reward.alpha == 0.5);
}

TEST_CASE("key resolution") {
  CHECK(resolve_key("walkers") == "search.walkers");
  CHECK(resolve_key("search.ttl") == "search.ttl");
  CHECK_THROWS_AS(resolve_key("bogus"), ConfigError);
  CHECK(resolve_key("w1") == "thresholds.w1");
  CHECK(resolve_key("qr_w1") == "reward.qr_w1");
  CHECK_THROWS_AS(resolve_key("search.bogus"), ConfigError);
}

TEST_CASE("bad values name their field") {
  SimConfig cfg;
  auto expect_field = [&](const std::string& key, const std::string& value, const std::string& field) {
    SimConfig c;
    try {
      set_field(c, key, value);
      c.validate();
      FAIL("no error for " << key << "=" << value);
    } catch (const ConfigError& e) {
      CHECK(e.field() == field);
    }
  };
  expect_field("search.walkers", "0", "search.walkers");
  expect_field("search.ttl", "abc", "search.ttl");
  expect_field("search.algo", "flood", "search.algo");
  expect_field("reward.alpha", "1.5", "reward.alpha");
  expect_field("load.threshold", "0", "load.threshold");
  CHECK_THROWS_AS(apply_overrides(cfg, {"nodes"}), ConfigError);
}

TEST_CASE("format_config round-trips every field") {
  SimConfig cfg;
  cfg.nodes = 777;
  cfg.algo = Algo::Aps;
  cfg.reward.alpha = 0.1234567890123;
  cfg.aps.pessimistic = false;
  cfg.seed = 0xFFFFFFFFFFULL;
  const auto text = format_config(cfg);
  const auto back = parse_config(text);
  CHECK(config_entries(back) == config_entries(cfg));
  CHECK(back.reward.alpha == cfg.reward.alpha);
  for (const auto& key : config_keys()) CHECK(get_field(back, key) == get_field(cfg, key));
}

TEST_CASE("overrides apply in order") {
  SimConfig cfg;
  apply_overrides(cfg, {"walkers=6", "algo=dst", "walkers=9"});
  CHECK(cfg.walkers == 9);
  CHECK(cfg.algo == Algo::Dst);
}
