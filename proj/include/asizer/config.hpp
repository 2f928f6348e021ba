#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "asizer/circuits.hpp"
#include "asizer/env.hpp"
#include "asizer/ga.hpp"
#include "asizer/ppo.hpp"
#include "asizer/util.hpp"

namespace asizer {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One experiment = one config file. Every knob a run depends on lives here;
// artifacts are reproducible from (config, seed, worker count) alone.
struct RunConfig {
  CircuitId circuit = CircuitId::Opamp;
  std::string output_dir = "runs/out";
  TechConstants tech;
  TiaConstants tia;
  OpampConstants opamp;
  ParasiticConfig parasitics;
  SweepConfig sweep;
  SpecRanges default_ranges;                // published starting ranges
  std::optional<SpecRanges> calibrated;     // written by the calibrate verb
  RewardConfig reward;
  int horizon = 30;
  int train_targets = 50;
  TrainConfig train;
  GaConfig ga;
  std::uint64_t target_seed = 2024;  // training target sampling
  std::uint64_t deploy_seed = 7;     // deployment/baseline target sampling

  const SpecRanges& active_ranges() const {
    return calibrated.has_value() ? *calibrated : default_ranges;
  }
};

namespace detail {

using json = nlohmann::json;

inline void require_keys(const json& obj, const char* where,
                         const std::vector<std::string>& keys) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [k, v] : obj.items()) {
    bool known = false;
    for (const std::string& key : keys) {
      if (k == key) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError(std::string("unknown key '") + k + "' in " + where);
  }
  for (const std::string& key : keys) {
    if (!obj.contains(key)) {
      throw ConfigError(std::string("missing key '") + key + "' in " + where);
    }
  }
}

inline double num(const json& v, const char* where) {
  if (!v.is_number()) throw ConfigError(std::string(where) + " must be a number");
  return v.get<double>();
}

inline int integer(const json& v, const char* where) {
  if (!v.is_number_integer()) throw ConfigError(std::string(where) + " must be an integer");
  return v.get<int>();
}

inline std::uint64_t seed_value(const json& v, const char* where) {
  if (!v.is_number_unsigned() && !v.is_number_integer()) {
    throw ConfigError(std::string(where) + " must be an integer seed");
  }
  return v.get<std::uint64_t>();
}

inline SpecRanges parse_ranges(const json& obj, const std::vector<SpecDef>& defs,
                               const char* where) {
  std::vector<std::string> names;
  names.reserve(defs.size());
  for (const SpecDef& d : defs) names.push_back(d.name);
  require_keys(obj, where, names);
  SpecRanges out;
  for (const SpecDef& d : defs) {
    const json& arr = obj.at(d.name);
    if (!arr.is_array() || arr.size() != 2) {
      throw ConfigError("range for '" + d.name + "' must be [lo, hi]");
    }
    out.push_back({num(arr[0], d.name.c_str()), num(arr[1], d.name.c_str())});
  }
  return out;
}

inline json ranges_json(const SpecRanges& ranges, const std::vector<SpecDef>& defs) {
  json out = json::object();
  for (std::size_t i = 0; i < defs.size(); ++i) {
    out[defs[i].name] = json::array({ranges[i].lo, ranges[i].hi});
  }
  return out;
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  using detail::integer;
  using detail::num;
  using detail::require_keys;
  using detail::seed_value;

  require_keys(j, "config",
               {"circuit", "output_dir", "tech", "tia", "opamp", "parasitics", "sweep",
                "spec_ranges", "reward", "env", "train", "ga", "seeds"});
  RunConfig c;
  try {
    c.circuit = circuit_id_from_string(j.at("circuit").get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!j.at("output_dir").is_string()) throw ConfigError("output_dir must be a string");
  c.output_dir = j.at("output_dir").get<std::string>();

  const auto& tech = j.at("tech");
  require_keys(tech, "tech", {"mu_cox", "lambda", "cox", "cov", "four_kt_gamma"});
  c.tech.mu_cox = num(tech.at("mu_cox"), "tech.mu_cox");
  c.tech.lambda = num(tech.at("lambda"), "tech.lambda");
  c.tech.cox = num(tech.at("cox"), "tech.cox");
  c.tech.cov = num(tech.at("cov"), "tech.cov");
  c.tech.four_kt_gamma = num(tech.at("four_kt_gamma"), "tech.four_kt_gamma");

  const auto& tia = j.at("tia");
  require_keys(tia, "tia",
               {"unit_resistance", "bias_current_density", "channel_length", "load_cap"});
  c.tia.unit_resistance = num(tia.at("unit_resistance"), "tia.unit_resistance");
  c.tia.bias_current_density = num(tia.at("bias_current_density"), "tia.bias_current_density");
  c.tia.channel_length = num(tia.at("channel_length"), "tia.channel_length");
  c.tia.load_cap = num(tia.at("load_cap"), "tia.load_cap");

  const auto& op = j.at("opamp");
  require_keys(op, "opamp", {"i_ref", "load_cap", "channel_length"});
  c.opamp.i_ref = num(op.at("i_ref"), "opamp.i_ref");
  c.opamp.load_cap = num(op.at("load_cap"), "opamp.load_cap");
  c.opamp.channel_length = num(op.at("channel_length"), "opamp.channel_length");

  const auto& par = j.at("parasitics");
  require_keys(par, "parasitics", {"cap_per_width", "routing_cap", "scale"});
  c.parasitics.cap_per_width = num(par.at("cap_per_width"), "parasitics.cap_per_width");
  c.parasitics.routing_cap = num(par.at("routing_cap"), "parasitics.routing_cap");
  c.parasitics.scale = num(par.at("scale"), "parasitics.scale");

  const auto& sw = j.at("sweep");
  require_keys(sw, "sweep", {"f_start", "f_stop", "points_per_decade"});
  c.sweep.f_start = num(sw.at("f_start"), "sweep.f_start");
  c.sweep.f_stop = num(sw.at("f_stop"), "sweep.f_stop");
  c.sweep.points_per_decade = integer(sw.at("points_per_decade"), "sweep.points_per_decade");

  // spec names depend on the circuit
  const std::unique_ptr<Circuit> circuit =
      make_circuit(c.circuit, TechConstants{}, TiaConstants{}, OpampConstants{}, SweepConfig{});
  const auto& defs = circuit->spec_defs();

  const auto& sr = j.at("spec_ranges");
  require_keys(sr, "spec_ranges", {"defaults", "calibrated"});
  c.default_ranges = detail::parse_ranges(sr.at("defaults"), defs, "spec_ranges.defaults");
  if (sr.at("calibrated").is_null()) {
    c.calibrated.reset();
  } else {
    c.calibrated = detail::parse_ranges(sr.at("calibrated"), defs, "spec_ranges.calibrated");
  }

  const auto& rw = j.at("reward");
  require_keys(rw, "reward",
               {"epsilon", "success_threshold", "bonus", "r_floor", "infeasible_obs"});
  c.reward.epsilon = num(rw.at("epsilon"), "reward.epsilon");
  c.reward.success_threshold = num(rw.at("success_threshold"), "reward.success_threshold");
  c.reward.bonus = num(rw.at("bonus"), "reward.bonus");
  c.reward.r_floor = num(rw.at("r_floor"), "reward.r_floor");
  c.reward.infeasible_obs = num(rw.at("infeasible_obs"), "reward.infeasible_obs");

  const auto& env = j.at("env");
  require_keys(env, "env", {"horizon", "train_targets"});
  c.horizon = integer(env.at("horizon"), "env.horizon");
  c.train_targets = integer(env.at("train_targets"), "env.train_targets");

  const auto& tr = j.at("train");
  require_keys(tr, "train",
               {"gamma", "lam", "clip", "lr", "epochs_per_update", "minibatch",
                "steps_per_update", "entropy_coef", "value_coef", "target_mean_reward",
                "max_env_steps", "workers", "seed"});
  c.train.gamma = num(tr.at("gamma"), "train.gamma");
  c.train.lam = num(tr.at("lam"), "train.lam");
  c.train.clip = num(tr.at("clip"), "train.clip");
  c.train.lr = num(tr.at("lr"), "train.lr");
  c.train.epochs_per_update = integer(tr.at("epochs_per_update"), "train.epochs_per_update");
  c.train.minibatch = integer(tr.at("minibatch"), "train.minibatch");
  c.train.steps_per_update = integer(tr.at("steps_per_update"), "train.steps_per_update");
  c.train.entropy_coef = num(tr.at("entropy_coef"), "train.entropy_coef");
  c.train.value_coef = num(tr.at("value_coef"), "train.value_coef");
  c.train.target_mean_reward = num(tr.at("target_mean_reward"), "train.target_mean_reward");
  c.train.max_env_steps = static_cast<long>(num(tr.at("max_env_steps"), "train.max_env_steps"));
  c.train.workers = integer(tr.at("workers"), "train.workers");
  c.train.seed = seed_value(tr.at("seed"), "train.seed");

  const auto& ga = j.at("ga");
  require_keys(ga, "ga",
               {"population", "tournament_k", "crossover_rate", "mutation_rate", "max_evals",
                "uniform_resample", "seed"});
  c.ga.population = integer(ga.at("population"), "ga.population");
  c.ga.tournament_k = integer(ga.at("tournament_k"), "ga.tournament_k");
  c.ga.crossover_rate = num(ga.at("crossover_rate"), "ga.crossover_rate");
  c.ga.mutation_rate = num(ga.at("mutation_rate"), "ga.mutation_rate");
  c.ga.max_evals = static_cast<long>(num(ga.at("max_evals"), "ga.max_evals"));
  if (!ga.at("uniform_resample").is_boolean()) {
    throw ConfigError("ga.uniform_resample must be a boolean");
  }
  c.ga.uniform_resample = ga.at("uniform_resample").get<bool>();
  c.ga.seed = seed_value(ga.at("seed"), "ga.seed");

  const auto& seeds = j.at("seeds");
  require_keys(seeds, "seeds", {"target_seed", "deploy_seed"});
  c.target_seed = seed_value(seeds.at("target_seed"), "seeds.target_seed");
  c.deploy_seed = seed_value(seeds.at("deploy_seed"), "seeds.deploy_seed");

  // structural validation beyond types
  try {
    c.tech.validate();
    c.parasitics.validate();
    c.reward.validate();
    c.train.validate();
    c.ga.validate();
    for (const SpecRange& r : c.default_ranges) {
      if (r.hi < r.lo) throw std::invalid_argument("range with hi < lo");
    }
    if (c.calibrated.has_value()) {
      for (const SpecRange& r : *c.calibrated) {
        if (r.degenerate()) throw std::invalid_argument("degenerate calibrated range");
      }
    }
    if (c.horizon < 1 || c.train_targets < 1) {
      throw std::invalid_argument("env.horizon and env.train_targets must be positive");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

inline nlohmann::json config_json(const RunConfig& c) {
  using nlohmann::json;
  const std::unique_ptr<Circuit> circuit =
      make_circuit(c.circuit, TechConstants{}, TiaConstants{}, OpampConstants{}, SweepConfig{});
  const auto& defs = circuit->spec_defs();

  json j;
  j["circuit"] = to_string(c.circuit);
  j["output_dir"] = c.output_dir;
  j["tech"] = {{"mu_cox", c.tech.mu_cox},
               {"lambda", c.tech.lambda},
               {"cox", c.tech.cox},
               {"cov", c.tech.cov},
               {"four_kt_gamma", c.tech.four_kt_gamma}};
  j["tia"] = {{"unit_resistance", c.tia.unit_resistance},
              {"bias_current_density", c.tia.bias_current_density},
              {"channel_length", c.tia.channel_length},
              {"load_cap", c.tia.load_cap}};
  j["opamp"] = {{"i_ref", c.opamp.i_ref},
                {"load_cap", c.opamp.load_cap},
                {"channel_length", c.opamp.channel_length}};
  j["parasitics"] = {{"cap_per_width", c.parasitics.cap_per_width},
                     {"routing_cap", c.parasitics.routing_cap},
                     {"scale", c.parasitics.scale}};
  j["sweep"] = {{"f_start", c.sweep.f_start},
                {"f_stop", c.sweep.f_stop},
                {"points_per_decade", c.sweep.points_per_decade}};
  j["spec_ranges"]["defaults"] = detail::ranges_json(c.default_ranges, defs);
  j["spec_ranges"]["calibrated"] =
      c.calibrated.has_value() ? detail::ranges_json(*c.calibrated, defs) : nlohmann::json();
  j["reward"] = {{"epsilon", c.reward.epsilon},
                 {"success_threshold", c.reward.success_threshold},
                 {"bonus", c.reward.bonus},
                 {"r_floor", c.reward.r_floor},
                 {"infeasible_obs", c.reward.infeasible_obs}};
  j["env"] = {{"horizon", c.horizon}, {"train_targets", c.train_targets}};
  j["train"] = {{"gamma", c.train.gamma},
                {"lam", c.train.lam},
                {"clip", c.train.clip},
                {"lr", c.train.lr},
                {"epochs_per_update", c.train.epochs_per_update},
                {"minibatch", c.train.minibatch},
                {"steps_per_update", c.train.steps_per_update},
                {"entropy_coef", c.train.entropy_coef},
                {"value_coef", c.train.value_coef},
                {"target_mean_reward", c.train.target_mean_reward},
                {"max_env_steps", c.train.max_env_steps},
                {"workers", c.train.workers},
                {"seed", c.train.seed}};
  j["ga"] = {{"population", c.ga.population},
             {"tournament_k", c.ga.tournament_k},
             {"crossover_rate", c.ga.crossover_rate},
             {"mutation_rate", c.ga.mutation_rate},
             {"max_evals", c.ga.max_evals},
             {"uniform_resample", c.ga.uniform_resample},
             {"seed", c.ga.seed}};
  j["seeds"] = {{"target_seed", c.target_seed}, {"deploy_seed", c.deploy_seed}};
  return j;
}

inline std::string serialize_config(const RunConfig& c) { return config_json(c).dump(2) + "\n"; }

inline RunConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  try {
    return parse_config(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config error in " + path + ": " + e.what());
  }
}

inline std::uint64_t config_hash(const RunConfig& c) { return fnv1a64(config_json(c).dump()); }

inline std::unique_ptr<Circuit> make_circuit(const RunConfig& c) {
  return make_circuit(c.circuit, c.tech, c.tia, c.opamp, c.sweep);
}

// Environment definition for this config; parasitics only when requested
// (the transfer path), training and plain deployment run clean.
inline EnvConfig make_env_config(const RunConfig& c, bool with_parasitics) {
  EnvConfig e;
  e.ranges = c.active_ranges();
  e.horizon = c.horizon;
  e.reward = c.reward;
  e.parasitics = with_parasitics ? c.parasitics : ParasiticConfig{};
  return e;
}

}  // namespace asizer
