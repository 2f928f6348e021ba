#include <catch2/catch_amalgamated.hpp>

#include "asizer/checkpoint.hpp"
#include "asizer/config.hpp"

using namespace asizer;

namespace {

RunConfig dummy_config() {
  RunConfig c;
  c.circuit = CircuitId::Dummy;
  c.output_dir = "runs/dummy";
  c.default_ranges = {{12.0, 19.0}};
  c.calibrated = SpecRanges{{12.0, 19.0}};
  c.reward.r_floor = -2.0;
  c.train.steps_per_update = 400;
  c.train.max_env_steps = 5000;
  c.train.minibatch = 128;
  c.train.workers = 2;
  return c;
}

}  // namespace

TEST_CASE("config round-trips through serialization") {
  const RunConfig c = dummy_config();
  const nlohmann::json j = config_json(c);
  const RunConfig back = parse_config(j);
  CHECK(config_json(back) == j);
  CHECK(config_hash(back) == config_hash(c));
}

TEST_CASE("unknown keys are rejected at every level") {
  const nlohmann::json base = config_json(dummy_config());
  {
    nlohmann::json j = base;
    j["extra_key"] = 1;
    CHECK_THROWS_WITH(parse_config(j), Catch::Matchers::ContainsSubstring("extra_key"));
  }
  {
    nlohmann::json j = base;
    j["train"]["learning_rate"] = 0.1;  // typo for lr
    CHECK_THROWS_WITH(parse_config(j), Catch::Matchers::ContainsSubstring("learning_rate"));
  }
  {
    nlohmann::json j = base;
    j["spec_ranges"]["defaults"]["gain"] = {1.0, 2.0};  // not a dummy spec
    CHECK_THROWS_AS(parse_config(j), ConfigError);
  }
}

TEST_CASE("missing keys are rejected") {
  nlohmann::json j = config_json(dummy_config());
  j["reward"].erase("epsilon");
  CHECK_THROWS_WITH(parse_config(j), Catch::Matchers::ContainsSubstring("epsilon"));
}

TEST_CASE("type and value errors are config errors") {
  nlohmann::json j = config_json(dummy_config());
  j["train"]["gamma"] = "fast";
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  j = config_json(dummy_config());
  j["train"]["gamma"] = 1.5;
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  j = config_json(dummy_config());
  j["circuit"] = "inverter";
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  j = config_json(dummy_config());
  j["spec_ranges"]["calibrated"]["pos"] = {19.0, 12.0};  // hi < lo
  CHECK_THROWS_AS(parse_config(j), ConfigError);
}

TEST_CASE("config hash changes iff a field changes") {
  const RunConfig c = dummy_config();
  RunConfig d = c;
  CHECK(config_hash(c) == config_hash(d));
  d.train.lr *= 2.0;
  CHECK(config_hash(c) != config_hash(d));
  d.train.lr = c.train.lr;
  CHECK(config_hash(c) == config_hash(d));
  d.output_dir = "elsewhere";
  CHECK(config_hash(c) != config_hash(d));
}

TEST_CASE("calibrated ranges take precedence, defaults otherwise") {
  RunConfig c = dummy_config();
  c.calibrated = SpecRanges{{13.0, 18.0}};
  CHECK(c.active_ranges()[0].lo == 13.0);
  c.calibrated.reset();
  CHECK(c.active_ranges()[0].lo == 12.0);
}

TEST_CASE("checkpoints round-trip bit for bit") {
  Checkpoint ck;
  ck.fingerprint = {"dummy", "0011", "2233", 1, 1};
  ck.train.seed = 17;
  ck.net = PolicyNet(3, 1, {5, 4});
  ck.net.init(3);

  const std::string text = serialize_checkpoint(ck);
  const Checkpoint back = parse_checkpoint(text);
  CHECK(back.fingerprint == ck.fingerprint);
  CHECK(back.net.theta == ck.net.theta);
  CHECK(back.net.in_dim() == 3);
  CHECK(back.net.hidden() == std::vector<int>{5, 4});
  CHECK(back.train.seed == 17);
  CHECK(serialize_checkpoint(back) == text);
}

TEST_CASE("malformed checkpoints are rejected") {
  CHECK_THROWS_AS(parse_checkpoint("not json"), ConfigError);
  Checkpoint ck;
  ck.fingerprint = {"dummy", "0011", "2233", 1, 1};
  ck.net = PolicyNet(3, 1, {5});
  ck.net.init(3);
  nlohmann::json j = nlohmann::json::parse(serialize_checkpoint(ck));
  j["net"]["theta"] = {1.0, 2.0};  // wrong parameter count
  CHECK_THROWS_AS(parse_checkpoint(j.dump()), ConfigError);
  j = nlohmann::json::parse(serialize_checkpoint(ck));
  j["format_version"] = 9;
  CHECK_THROWS_AS(parse_checkpoint(j.dump()), ConfigError);
}

TEST_CASE("environment fingerprints hash the pieces that matter") {
  RunConfig c = dummy_config();
  const EnvFingerprint clean = make_fingerprint(c, false);
  CHECK(clean.circuit == "dummy");
  CHECK(clean.num_specs == 1);
  CHECK(clean.num_params == 1);

  RunConfig par = c;
  par.parasitics.cap_per_width = 1e-9;
  par.parasitics.routing_cap = 5e-14;
  par.parasitics.scale = 1.0;
  const EnvFingerprint dirty = make_fingerprint(par, true);
  CHECK(clean.parasitics_hash != dirty.parasitics_hash);
  CHECK(clean.ranges_hash == dirty.ranges_hash);

  RunConfig other = c;
  other.calibrated = SpecRanges{{13.0, 18.0}};
  CHECK(make_fingerprint(other, false).ranges_hash != clean.ranges_hash);
}
