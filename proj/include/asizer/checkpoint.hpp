#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "asizer/config.hpp"
#include "asizer/net.hpp"
#include "asizer/util.hpp"

namespace asizer {

class FingerprintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Identifies the environment a policy was trained on. Plain deployment
// refuses any mismatch; transfer deployment only requires the circuit to
// match (the whole point is a changed simulation environment).
struct EnvFingerprint {
  std::string circuit;
  std::string ranges_hash;
  std::string parasitics_hash;
  int num_specs = 0;
  int num_params = 0;

  bool operator==(const EnvFingerprint&) const = default;
};

inline std::string hash_ranges(const SpecRanges& ranges) {
  std::string s;
  for (const SpecRange& r : ranges) {
    s += fmt_double(r.lo);
    s += ",";
    s += fmt_double(r.hi);
    s += ";";
  }
  return hex64(fnv1a64(s));
}

inline std::string hash_parasitics(const ParasiticConfig& p) {
  if (!p.active()) return hex64(fnv1a64(std::string("clean")));
  const std::string s =
      fmt_double(p.cap_per_width) + "," + fmt_double(p.routing_cap) + "," + fmt_double(p.scale);
  return hex64(fnv1a64(s));
}

inline EnvFingerprint make_fingerprint(const RunConfig& cfg, bool with_parasitics) {
  const auto circuit = make_circuit(cfg);
  EnvFingerprint fp;
  fp.circuit = circuit->name();
  fp.ranges_hash = hash_ranges(cfg.active_ranges());
  fp.parasitics_hash =
      hash_parasitics(with_parasitics ? cfg.parasitics : ParasiticConfig{});
  fp.num_specs = circuit->num_specs();
  fp.num_params = circuit->num_params();
  return fp;
}

inline void check_fingerprint(const EnvFingerprint& checkpoint_fp, const EnvFingerprint& env_fp,
                              bool transfer_mode) {
  if (checkpoint_fp.circuit != env_fp.circuit) {
    throw FingerprintError("checkpoint was trained on circuit '" + checkpoint_fp.circuit +
                           "', environment is '" + env_fp.circuit + "'");
  }
  if (transfer_mode) return;
  if (!(checkpoint_fp == env_fp)) {
    throw FingerprintError(
        "checkpoint fingerprint does not match the deployment environment "
        "(use transfer mode only for a deliberately changed environment)");
  }
}

struct Checkpoint {
  int format_version = 1;
  EnvFingerprint fingerprint;
  TrainConfig train;
  PolicyNet net;
};

inline std::string serialize_checkpoint(const Checkpoint& ck) {
  nlohmann::json j;
  j["format_version"] = ck.format_version;
  j["fingerprint"] = {{"circuit", ck.fingerprint.circuit},
                      {"ranges_hash", ck.fingerprint.ranges_hash},
                      {"parasitics_hash", ck.fingerprint.parasitics_hash},
                      {"num_specs", ck.fingerprint.num_specs},
                      {"num_params", ck.fingerprint.num_params}};
  j["train"] = {{"gamma", ck.train.gamma},
                {"lam", ck.train.lam},
                {"clip", ck.train.clip},
                {"lr", ck.train.lr},
                {"epochs_per_update", ck.train.epochs_per_update},
                {"minibatch", ck.train.minibatch},
                {"steps_per_update", ck.train.steps_per_update},
                {"entropy_coef", ck.train.entropy_coef},
                {"value_coef", ck.train.value_coef},
                {"target_mean_reward", ck.train.target_mean_reward},
                {"max_env_steps", ck.train.max_env_steps},
                {"workers", ck.train.workers},
                {"seed", ck.train.seed}};
  j["net"] = {{"in_dim", ck.net.in_dim()},
              {"num_heads", ck.net.num_heads()},
              {"hidden", ck.net.hidden()},
              {"theta", ck.net.theta}};
  return j.dump() + "\n";
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  write_file(path, serialize_checkpoint(ck));
}

inline Checkpoint parse_checkpoint(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("checkpoint parse error: ") + e.what());
  }
  try {
    Checkpoint ck;
    ck.format_version = j.at("format_version").get<int>();
    if (ck.format_version != 1) {
      throw ConfigError("unsupported checkpoint format version " +
                        std::to_string(ck.format_version));
    }
    const auto& fp = j.at("fingerprint");
    ck.fingerprint.circuit = fp.at("circuit").get<std::string>();
    ck.fingerprint.ranges_hash = fp.at("ranges_hash").get<std::string>();
    ck.fingerprint.parasitics_hash = fp.at("parasitics_hash").get<std::string>();
    ck.fingerprint.num_specs = fp.at("num_specs").get<int>();
    ck.fingerprint.num_params = fp.at("num_params").get<int>();
    const auto& tr = j.at("train");
    ck.train.gamma = tr.at("gamma").get<double>();
    ck.train.lam = tr.at("lam").get<double>();
    ck.train.clip = tr.at("clip").get<double>();
    ck.train.lr = tr.at("lr").get<double>();
    ck.train.epochs_per_update = tr.at("epochs_per_update").get<int>();
    ck.train.minibatch = tr.at("minibatch").get<int>();
    ck.train.steps_per_update = tr.at("steps_per_update").get<int>();
    ck.train.entropy_coef = tr.at("entropy_coef").get<double>();
    ck.train.value_coef = tr.at("value_coef").get<double>();
    ck.train.target_mean_reward = tr.at("target_mean_reward").get<double>();
    ck.train.max_env_steps = tr.at("max_env_steps").get<long>();
    ck.train.workers = tr.at("workers").get<int>();
    ck.train.seed = tr.at("seed").get<std::uint64_t>();
    const auto& net = j.at("net");
    ck.net = PolicyNet(net.at("in_dim").get<int>(), net.at("num_heads").get<int>(),
                       net.at("hidden").get<std::vector<int>>());
    const auto theta = net.at("theta").get<std::vector<double>>();
    if (theta.size() != ck.net.param_count()) {
      throw ConfigError("checkpoint parameter count does not match its shape");
    }
    ck.net.theta = theta;
    ck.net.check_finite();
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
}

inline Checkpoint load_checkpoint(const std::string& path) {
  try {
    return parse_checkpoint(read_file(path));
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const ConfigError*>(&e) != nullptr) throw;
    throw ConfigError(e.what());
  }
}

}  // namespace asizer
