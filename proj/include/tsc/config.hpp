#pragma once

// Run configuration: one INI file (key = value, [sections]) shared by every
// subcommand. Values start from a preset and are overridden by the file, then
// by command-line flags.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tsc/ppo.hpp"
#include "tsc/sim.hpp"

namespace tsc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalSettings {
  std::int64_t duration = 600;
  int episodes = 10;
  std::uint64_t seed = 2024;
};

struct Settings {
  std::string preset = "desk";
  SimParams sim{};
  PpoConfig ppo = PpoConfig::desk();
  EvalSettings eval{};
  std::int64_t budget = 2000;  // learner steps for train / ablate
  int eval_every = 20;

  void validate() const {
    try {
      sim.validate();
      ppo.validate();
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    if (eval.duration <= 0 || eval.episodes < 1) throw ConfigError("eval: duration and episodes must be positive");
    if (budget < 1 || eval_every < 1) throw ConfigError("train: budget and eval_every must be positive");
  }
};

inline Settings preset_settings(const std::string& name) {
  Settings s;
  s.preset = name;
  if (name == "desk") {
    s.ppo = PpoConfig::desk();
    s.eval.duration = 600;
  } else if (name == "paper") {
    s.ppo = PpoConfig::paper();
    s.eval.duration = 3600;
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected desk or paper)");
  }
  return s;
}

namespace detail {

inline std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("bad integer list '" + text + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty integer list");
  return out;
}

inline std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

template <typename T>
void read(const boost::property_tree::ptree& pt, const std::string& key, T& value) {
  if (auto opt = pt.get_optional<std::string>(key)) {
    try {
      value = pt.get<T>(key);
    } catch (const boost::property_tree::ptree_error&) {
      throw ConfigError("bad value for " + key + ": '" + *opt + "'");
    }
  }
}

}  // namespace detail

/// Known keys per section; anything else is rejected so typos surface early.
inline const std::vector<std::pair<std::string, std::vector<std::string>>>& known_keys() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> keys{
      {"run", {"preset", "seed", "budget", "eval_every"}},
      {"sim", {"v_max", "acceleration", "spacing", "headway"}},
      {"reward", {"eta", "gamma", "adaptive_discounting"}},
      {"ppo",
       {"hidden", "lambda", "segment_length", "actors", "threads", "epochs", "minibatch_size", "learning_rate",
        "weight_decay", "clip", "beta_entropy", "beta_value", "normalize_advantages", "reward_scale",
        "episode_duration", "flow_min", "flow_max"}},
      {"eval", {"duration", "episodes", "seed"}},
  };
  return keys;
}

inline void apply_ptree(Settings& s, const boost::property_tree::ptree& pt) {
  for (const auto& [section, body] : pt) {
    const auto& keys = known_keys();
    auto it = std::find_if(keys.begin(), keys.end(), [&](const auto& k) { return k.first == section; });
    if (it == keys.end()) throw ConfigError("unknown config section [" + section + "]");
    for (const auto& [key, _] : body)
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
        throw ConfigError("unknown config key " + section + "." + key);
  }
  using detail::read;
  read(pt, "run.seed", s.ppo.seed);
  read(pt, "run.budget", s.budget);
  read(pt, "run.eval_every", s.eval_every);
  read(pt, "sim.v_max", s.sim.v_max);
  read(pt, "sim.acceleration", s.sim.acceleration);
  read(pt, "sim.spacing", s.sim.spacing);
  read(pt, "sim.headway", s.sim.headway);
  read(pt, "reward.eta", s.ppo.eta);
  read(pt, "reward.gamma", s.ppo.gamma);
  read(pt, "reward.adaptive_discounting", s.ppo.adaptive_discounting);
  if (auto h = pt.get_optional<std::string>("ppo.hidden")) s.ppo.hidden = detail::parse_int_list(*h);
  read(pt, "ppo.lambda", s.ppo.lambda);
  read(pt, "ppo.segment_length", s.ppo.segment_length);
  read(pt, "ppo.actors", s.ppo.actors);
  read(pt, "ppo.threads", s.ppo.threads);
  read(pt, "ppo.epochs", s.ppo.epochs);
  read(pt, "ppo.minibatch_size", s.ppo.minibatch_size);
  read(pt, "ppo.learning_rate", s.ppo.learning_rate);
  read(pt, "ppo.weight_decay", s.ppo.weight_decay);
  read(pt, "ppo.clip", s.ppo.coeffs.clip);
  read(pt, "ppo.beta_entropy", s.ppo.coeffs.beta_entropy);
  read(pt, "ppo.beta_value", s.ppo.coeffs.beta_value);
  read(pt, "ppo.normalize_advantages", s.ppo.normalize_advantages);
  read(pt, "ppo.reward_scale", s.ppo.reward_scale);
  read(pt, "ppo.episode_duration", s.ppo.episode_duration);
  read(pt, "ppo.flow_min", s.ppo.flow_min);
  read(pt, "ppo.flow_max", s.ppo.flow_max);
  read(pt, "eval.duration", s.eval.duration);
  read(pt, "eval.episodes", s.eval.episodes);
  read(pt, "eval.seed", s.eval.seed);
}

inline boost::property_tree::ptree parse_ini(std::istream& in) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  return pt;
}

/// Preset named by `preset_override`, else by [run] preset in the file, else desk.
inline Settings load_settings(std::istream& in, const std::string& preset_override = {}) {
  const auto pt = parse_ini(in);
  std::string preset = preset_override;
  if (preset.empty()) preset = pt.get<std::string>("run.preset", "desk");
  Settings s = preset_settings(preset);
  apply_ptree(s, pt);
  return s;
}

inline Settings load_settings_file(const std::string& path, const std::string& preset_override = {}) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  return load_settings(f, preset_override);
}

/// Canonical INI text; identical settings give identical text.
inline std::string to_ini(const Settings& s) {
  boost::property_tree::ptree pt;
  pt.put("run.preset", s.preset);
  pt.put("run.seed", s.ppo.seed);
  pt.put("run.budget", s.budget);
  pt.put("run.eval_every", s.eval_every);
  pt.put("sim.v_max", s.sim.v_max);
  pt.put("sim.acceleration", s.sim.acceleration);
  pt.put("sim.spacing", s.sim.spacing);
  pt.put("sim.headway", s.sim.headway);
  pt.put("reward.eta", s.ppo.eta);
  pt.put("reward.gamma", s.ppo.gamma);
  pt.put("reward.adaptive_discounting", s.ppo.adaptive_discounting);
  pt.put("ppo.hidden", detail::join(s.ppo.hidden));
  pt.put("ppo.lambda", s.ppo.lambda);
  pt.put("ppo.segment_length", s.ppo.segment_length);
  pt.put("ppo.actors", s.ppo.actors);
  pt.put("ppo.threads", s.ppo.threads);
  pt.put("ppo.epochs", s.ppo.epochs);
  pt.put("ppo.minibatch_size", s.ppo.minibatch_size);
  pt.put("ppo.learning_rate", s.ppo.learning_rate);
  pt.put("ppo.weight_decay", s.ppo.weight_decay);
  pt.put("ppo.clip", s.ppo.coeffs.clip);
  pt.put("ppo.beta_entropy", s.ppo.coeffs.beta_entropy);
  pt.put("ppo.beta_value", s.ppo.coeffs.beta_value);
  pt.put("ppo.normalize_advantages", s.ppo.normalize_advantages);
  pt.put("ppo.reward_scale", s.ppo.reward_scale);
  pt.put("ppo.episode_duration", s.ppo.episode_duration);
  pt.put("ppo.flow_min", s.ppo.flow_min);
  pt.put("ppo.flow_max", s.ppo.flow_max);
  pt.put("eval.duration", s.eval.duration);
  pt.put("eval.episodes", s.eval.episodes);
  pt.put("eval.seed", s.eval.seed);
  std::ostringstream os;
  boost::property_tree::write_ini(os, pt);
  return os.str();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace tsc
