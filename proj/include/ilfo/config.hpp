#pragma once

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ilfo/common.hpp"
#include "ilfo/cost.hpp"

namespace ilfo {

// Every tunable of the training pipeline, the OT solver, the agent and the
// environment. Serialized as flat `key = value` lines; the keys are exactly
// the field names below.
struct ExperimentConfig {
  long seed = 0;
  std::string env = "carry";          // carry | switch
  int horizon = 64;                   // T
  int demo_count = 5;                 // N
  std::string cost_kind = "euclidean";
  std::string schedule_mode = "ads";  // ads | fixed | exponential
  double lambda = 0.9;                // recognizer strictness
  double alpha = 0.2;                 // f_gamma(k) = alpha^(1/k)
  double gamma0 = 0.2;                // discount at k = 0
  double fixed_gamma = 0.99;
  double exp_gamma_start = 0.9;
  double exp_gamma_end = 0.99;
  long exp_frames = 75000;            // exponential schedule ramp length
  double sinkhorn_eps_scale = 0.05;   // epsilon = scale * mean cost entry
  int sinkhorn_max_iters = 500;
  double sinkhorn_tol = 1e-4;
  double reward_scale = 0;            // 0 selects the horizon T
  long replay_capacity = 20000;       // transitions
  int batch_size = 128;
  int nstep = 5;
  double learning_rate = 3e-4;
  double soft_update_tau = 0.01;
  int hidden_dim = 32;
  double exploration_noise = 0.35;
  double policy_noise = 0.1;
  double policy_noise_clip = 0.3;
  int policy_delay = 2;
  double updates_per_step = 0.5;
  long warmup_frames = 2000;          // uniform-random actions before this
  long total_frames = 150000;
  int eval_every = 5;                 // episodes between evaluations
  int eval_episodes = 20;
  double init_jitter = 0.05;
  bool log_wallclock = false;         // true forfeits byte-identical metrics

  bool operator==(const ExperimentConfig&) const = default;

  double resolved_reward_scale() const {
    return reward_scale == 0.0 ? static_cast<double>(horizon) : reward_scale;
  }

  void validate() const;
};

namespace detail {

struct ConfigField {
  std::string name;
  std::variant<long ExperimentConfig::*, int ExperimentConfig::*, double ExperimentConfig::*,
               bool ExperimentConfig::*, std::string ExperimentConfig::*>
      member;
  std::string doc;
};

inline const std::vector<ConfigField>& config_fields() {
  using C = ExperimentConfig;
  static const std::vector<ConfigField> fields = {
      {"seed", &C::seed, "master seed for all random streams"},
      {"env", &C::env, "task: carry | switch"},
      {"horizon", &C::horizon, "episode length T"},
      {"demo_count", &C::demo_count, "number of expert demonstrations N"},
      {"cost_kind", &C::cost_kind, "euclidean | squared_euclidean | cosine"},
      {"schedule_mode", &C::schedule_mode, "ads | fixed | exponential"},
      {"lambda", &C::lambda, "progress recognizer strictness in [0,1]"},
      {"alpha", &C::alpha, "discount mapping base in (0,1)"},
      {"gamma0", &C::gamma0, "discount used while progress k = 0"},
      {"fixed_gamma", &C::fixed_gamma, "discount for schedule_mode = fixed"},
      {"exp_gamma_start", &C::exp_gamma_start, "exponential schedule start"},
      {"exp_gamma_end", &C::exp_gamma_end, "exponential schedule end"},
      {"exp_frames", &C::exp_frames, "frames to ramp the exponential schedule over"},
      {"sinkhorn_eps_scale", &C::sinkhorn_eps_scale, "entropic eps = scale * mean cost"},
      {"sinkhorn_max_iters", &C::sinkhorn_max_iters, "sinkhorn iteration cap"},
      {"sinkhorn_tol", &C::sinkhorn_tol, "sinkhorn marginal tolerance"},
      {"reward_scale", &C::reward_scale, "proxy reward multiplier; 0 = horizon T"},
      {"replay_capacity", &C::replay_capacity, "replay buffer capacity in transitions"},
      {"batch_size", &C::batch_size, "mini-batch size"},
      {"nstep", &C::nstep, "n-step return length"},
      {"learning_rate", &C::learning_rate, "optimizer learning rate"},
      {"soft_update_tau", &C::soft_update_tau, "target network soft-update rate"},
      {"hidden_dim", &C::hidden_dim, "MLP hidden width"},
      {"exploration_noise", &C::exploration_noise, "exploration noise stddev"},
      {"policy_noise", &C::policy_noise, "target policy smoothing noise stddev"},
      {"policy_noise_clip", &C::policy_noise_clip, "policy noise clip bound"},
      {"policy_delay", &C::policy_delay, "critic updates per actor update"},
      {"updates_per_step", &C::updates_per_step, "gradient updates per environment step"},
      {"warmup_frames", &C::warmup_frames, "frames of uniform-random exploration"},
      {"total_frames", &C::total_frames, "training budget in environment frames"},
      {"eval_every", &C::eval_every, "episodes between evaluations"},
      {"eval_episodes", &C::eval_episodes, "episodes per evaluation"},
      {"init_jitter", &C::init_jitter, "initial-state jitter scale"},
      {"log_wallclock", &C::log_wallclock, "record wall-clock seconds in metrics"},
  };
  return fields;
}

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline std::string get_config_value(const ExperimentConfig& cfg, const detail::ConfigField& f) {
  return std::visit(
      [&](auto member) -> std::string {
        const auto& v = cfg.*member;
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else {
          return std::to_string(v);
        }
      },
      f.member);
}

inline void set_config_value(ExperimentConfig& cfg, const detail::ConfigField& f,
                             const std::string& value) {
  std::visit(
      [&](auto member) {
        auto& v = cfg.*member;
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          v = value;
        } else if constexpr (std::is_same_v<T, bool>) {
          if (value == "true" || value == "1") {
            v = true;
          } else if (value == "false" || value == "0") {
            v = false;
          } else {
            throw std::invalid_argument("config key '" + f.name + "': expected true/false, got '" +
                                        value + "'");
          }
        } else if constexpr (std::is_same_v<T, double>) {
          v = parse_double(value);
        } else {
          v = static_cast<T>(parse_long(value));
        }
      },
      f.member);
}

inline const detail::ConfigField& find_config_field(const std::string& name) {
  for (const auto& f : detail::config_fields()) {
    if (f.name == name) return f;
  }
  throw std::invalid_argument("unknown config key '" + name + "'");
}

inline void set_config_value(ExperimentConfig& cfg, const std::string& name,
                             const std::string& value) {
  set_config_value(cfg, find_config_field(name), value);
}

// Parses `key = value` lines. Blank lines and lines starting with '#' are
// skipped. Unknown and duplicate keys are hard errors.
inline ExperimentConfig parse_config(const std::string& text,
                                     const ExperimentConfig& base = ExperimentConfig{}) {
  ExperimentConfig cfg = base;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = detail::trim(line);
    if (s.empty() || s[0] == '#') continue;
    auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value', got '" + s + "'");
    }
    std::string key = detail::trim(s.substr(0, eq));
    std::string value = detail::trim(s.substr(eq + 1));
    const detail::ConfigField* field = nullptr;
    for (const auto& f : detail::config_fields()) {
      if (f.name == key) { field = &f; break; }
    }
    if (!field) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key '" +
                                  key + "'");
    }
    if (!seen.insert(key).second) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": duplicate key '" +
                                  key + "'");
    }
    try {
      set_config_value(cfg, *field, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& f : detail::config_fields()) {
    out += f.name;
    out += " = ";
    out += get_config_value(cfg, f);
    out += "\n";
  }
  return out;
}

inline void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (env != "carry" && env != "switch") fail("env must be carry or switch");
  if (schedule_mode != "ads" && schedule_mode != "fixed" && schedule_mode != "exponential") {
    fail("schedule_mode must be ads, fixed or exponential");
  }
  cost_kind_from_string(cost_kind);  // throws on unknown kind
  if (horizon < 2) fail("horizon must be >= 2");
  if (demo_count < 1) fail("demo_count must be >= 1");
  if (lambda < 0.0 || lambda > 1.0) fail("lambda must be in [0,1]");
  if (alpha <= 0.0 || alpha >= 1.0) fail("alpha must be in (0,1)");
  for (auto [g, name] : {std::pair{gamma0, "gamma0"}, {fixed_gamma, "fixed_gamma"},
                         {exp_gamma_start, "exp_gamma_start"}, {exp_gamma_end, "exp_gamma_end"}}) {
    if (g <= 0.0 || g >= 1.0) fail(std::string(name) + " must be in (0,1)");
  }
  if (exp_frames <= 0) fail("exp_frames must be positive");
  if (sinkhorn_eps_scale <= 0.0) fail("sinkhorn_eps_scale must be positive");
  if (sinkhorn_max_iters <= 0) fail("sinkhorn_max_iters must be positive");
  if (sinkhorn_tol <= 0.0) fail("sinkhorn_tol must be positive");
  if (reward_scale < 0.0) fail("reward_scale must be >= 0");
  if (replay_capacity <= 0) fail("replay_capacity must be positive");
  if (replay_capacity < horizon) fail("replay_capacity must hold at least one episode");
  if (batch_size <= 0) fail("batch_size must be positive");
  if (nstep <= 0) fail("nstep must be positive");
  if (learning_rate <= 0.0) fail("learning_rate must be positive");
  if (soft_update_tau <= 0.0 || soft_update_tau > 1.0) fail("soft_update_tau must be in (0,1]");
  if (hidden_dim <= 0) fail("hidden_dim must be positive");
  if (exploration_noise < 0.0) fail("exploration_noise must be >= 0");
  if (policy_noise < 0.0) fail("policy_noise must be >= 0");
  if (policy_noise_clip < 0.0) fail("policy_noise_clip must be >= 0");
  if (policy_delay < 1) fail("policy_delay must be >= 1");
  if (updates_per_step < 0.0) fail("updates_per_step must be >= 0");
  if (warmup_frames < 0) fail("warmup_frames must be >= 0");
  if (total_frames <= 0) fail("total_frames must be positive");
  if (eval_every <= 0) fail("eval_every must be positive");
  if (eval_episodes <= 0) fail("eval_episodes must be positive");
  if (init_jitter < 0.0) fail("init_jitter must be >= 0");
}

}  // namespace ilfo
