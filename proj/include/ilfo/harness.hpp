#pragma once

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ilfo/config.hpp"
#include "ilfo/env.hpp"
#include "ilfo/ot.hpp"
#include "ilfo/progress.hpp"
#include "ilfo/td3.hpp"
#include "ilfo/types.hpp"

namespace ilfo {

inline constexpr const char* kMetricsHeader =
    "frames,episode,success_rate,mean_reward_sum,progress_k,gamma,wall_clock_seconds";

struct MetricsRow {
  long frames = 0;
  long episode = 0;
  double success_rate = 0.0;
  double mean_reward_sum = 0.0;
  int progress_k = 0;
  double gamma = 0.0;
  double wall_clock_seconds = 0.0;
};

inline std::string format_metrics_row(const MetricsRow& r) {
  std::string s;
  s += std::to_string(r.frames);
  s += ',';
  s += std::to_string(r.episode);
  s += ',';
  s += format_double(r.success_rate);
  s += ',';
  s += format_double(r.mean_reward_sum);
  s += ',';
  s += std::to_string(r.progress_k);
  s += ',';
  s += format_double(r.gamma);
  s += ',';
  s += format_double(r.wall_clock_seconds);
  return s;
}

inline std::vector<MetricsRow> parse_metrics(std::istream& in, const std::string& source) {
  auto fail = [&](long line, const std::string& what) {
    throw std::runtime_error("metrics " + source + ": row " + std::to_string(line) + ": " + what);
  };
  std::string line;
  if (!std::getline(in, line)) fail(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsHeader) fail(1, "unexpected header '" + line + "'");
  std::vector<MetricsRow> rows;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos ? comma : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 7) fail(lineno, "expected 7 fields, got " + std::to_string(fields.size()));
    MetricsRow r;
    try {
      r.frames = parse_long(fields[0]);
      r.episode = parse_long(fields[1]);
      r.success_rate = parse_double(fields[2]);
      r.mean_reward_sum = parse_double(fields[3]);
      r.progress_k = static_cast<int>(parse_long(fields[4]));
      r.gamma = parse_double(fields[5]);
      r.wall_clock_seconds = parse_double(fields[6]);
    } catch (const std::exception& e) {
      fail(lineno, e.what());
    }
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<MetricsRow> load_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("metrics " + path + ": cannot open");
  return parse_metrics(in, path);
}

// Discount used by the exponential baseline: anneal 1-gamma geometrically
// from (1-start) to (1-end) over `budget` frames, then hold.
inline double exponential_gamma(double gamma_start, double gamma_end, double frame, double budget) {
  if (budget <= 0) throw std::invalid_argument("exponential_gamma: budget must be positive");
  double u = std::min(std::max(frame, 0.0) / budget, 1.0);
  return 1.0 - (1.0 - gamma_start) * std::pow((1.0 - gamma_end) / (1.0 - gamma_start), u);
}

struct EvalStats {
  double success_rate = 0.0;
  double stage_rate = 0.0;  // task-specific precondition (e.g. ever grasped)
};

using Policy = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Success is read here and only here; the training loop sees TrainingEnv.
inline EvalStats evaluate(const Policy& policy, Env& env, int episodes, Rng& rng) {
  if (episodes < 1) throw std::invalid_argument("evaluate: episodes must be positive");
  EvalStats stats;
  for (int e = 0; e < episodes; ++e) {
    Eigen::VectorXd obs = env.reset(rng);
    bool done = false;
    while (!done) {
      StepResult r = env.step(policy(obs));
      obs = r.obs;
      done = r.done;
    }
    EvalInfo info = env.eval_info();
    stats.success_rate += info.success ? 1.0 : 0.0;
    stats.stage_rate += info.stage_reached ? 1.0 : 0.0;
  }
  stats.success_rate /= episodes;
  stats.stage_rate /= episodes;
  return stats;
}

inline EvalStats evaluate(const Td3Agent& agent, Env& env, int episodes, Rng& rng) {
  return evaluate([&](const Eigen::VectorXd& obs) { return agent.act(obs); }, env, episodes, rng);
}

struct TrainResult {
  std::vector<MetricsRow> rows;
  bool aborted = false;
  std::string abort_reason;
  long frames = 0;
  EvalStats final_eval;
  std::optional<Td3Agent> agent;
};

// One training run per the schedule in `cfg`: collect an episode, label it
// with transport rewards against the demo set, do replay updates at the
// current discount, advance the progress recognizer, then move gamma.
inline TrainResult train(const ExperimentConfig& cfg, const DemoSet& demos,
                         TrainingEnv& train_env, Env& eval_env,
                         std::ostream* metrics_out = nullptr) {
  cfg.validate();
  demos.validate();
  const int T = train_env.horizon();
  if (T != cfg.horizon) throw std::invalid_argument("train: env horizon differs from config");
  if (demos.horizon != T) throw std::invalid_argument("train: demo horizon differs from env");
  if (demos.obs_dim != train_env.obs_dim()) throw std::invalid_argument("train: demo obs_dim differs from env");

  Rng master(cfg.seed);
  Rng init_rng = master.fork(0);
  Rng env_rng = master.fork(1);
  Rng action_rng = master.fork(2);
  Rng update_rng = master.fork(3);
  Rng eval_rng = master.fork(4);

  Td3Params tp;
  tp.obs_dim = train_env.obs_dim();
  tp.action_dim = train_env.action_dim();
  tp.hidden_dim = cfg.hidden_dim;
  tp.learning_rate = cfg.learning_rate;
  tp.soft_update_tau = cfg.soft_update_tau;
  tp.policy_noise = cfg.policy_noise;
  tp.policy_noise_clip = cfg.policy_noise_clip;
  tp.policy_delay = cfg.policy_delay;
  Td3Agent agent(tp, init_rng);

  CostFunction cost{cost_kind_from_string(cfg.cost_kind)};
  OtParams ot;
  ot.solver = OtSolver::Sinkhorn;
  ot.eps_scale = cfg.sinkhorn_eps_scale;
  ot.max_iters = cfg.sinkhorn_max_iters;
  ot.tol = cfg.sinkhorn_tol;
  const double reward_scale = cfg.resolved_reward_scale();

  ProgressRecognizer recognizer(demos, cost, cfg.lambda);
  ReplayBuffer buffer(cfg.replay_capacity);

  double gamma = 0.0;
  auto scheduled_gamma = [&](long frames_now) {
    if (cfg.schedule_mode == "ads") return map_discount(recognizer.k(), cfg.alpha, cfg.gamma0);
    if (cfg.schedule_mode == "fixed") return cfg.fixed_gamma;
    return exponential_gamma(cfg.exp_gamma_start, cfg.exp_gamma_end,
                             static_cast<double>(frames_now), static_cast<double>(cfg.exp_frames));
  };
  gamma = scheduled_gamma(0);

  const long total_episodes = (cfg.total_frames + T - 1) / T;
  const auto t0 = std::chrono::steady_clock::now();
  auto wall = [&] {
    if (!cfg.log_wallclock) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  TrainResult result;
  long frames = 0;
  double update_credit = 0.0;
  double window_reward_sum = 0.0;
  long window_episodes = 0;
  EvalStats last_eval;
  bool header_written = false;

  auto emit = [&](const MetricsRow& row) {
    if (metrics_out) {
      if (!header_written) {
        *metrics_out << kMetricsHeader << '\n';
        header_written = true;
      }
      *metrics_out << format_metrics_row(row) << '\n';
      metrics_out->flush();
    }
    result.rows.push_back(row);
  };
  auto abort_run = [&](long episode, const std::string& reason) {
    MetricsRow row{frames, episode, last_eval.success_rate,
                   window_episodes > 0 ? window_reward_sum / window_episodes : 0.0,
                   recognizer.k(), gamma, wall()};
    emit(row);
    result.aborted = true;
    result.abort_reason = reason;
    result.frames = frames;
    result.final_eval = last_eval;
    result.agent.emplace(std::move(agent));
  };

  for (long episode = 1; episode <= total_episodes; ++episode) {
    const bool warmup = frames < cfg.warmup_frames;
    Trajectory tau;
    Episode transitions;
    Eigen::VectorXd obs = train_env.reset(env_rng);
    tau.observations.push_back(obs);
    for (int t = 1; t < T; ++t) {
      Eigen::VectorXd action;
      if (warmup) {
        action.resize(train_env.action_dim());
        for (int i = 0; i < action.size(); ++i) action[i] = action_rng.uniform(-1.0, 1.0);
      } else {
        action = agent.act_noisy(obs, cfg.exploration_noise, action_rng);
      }
      StepResult r = train_env.step(action);
      Transition tr;
      tr.obs = obs;
      tr.action = action;
      tr.next_obs = r.obs;
      tr.done = r.done;
      tr.step_index = t;
      transitions.push_back(std::move(tr));
      obs = r.obs;
      tau.observations.push_back(obs);
    }
    frames += T;

    for (const auto& o : tau.observations) {
      if (!o.allFinite()) {
        abort_run(episode, "non-finite observation");
        return result;
      }
    }
    std::vector<double> rewards = label_rewards(tau, demos, cost, ot, reward_scale);
    double reward_sum = 0.0;
    for (int t = 0; t < T - 1; ++t) {
      transitions[t].reward = rewards[t];
      reward_sum += rewards[t];
    }
    if (!std::isfinite(reward_sum)) {
      abort_run(episode, "non-finite proxy reward");
      return result;
    }
    window_reward_sum += reward_sum;
    ++window_episodes;
    buffer.add_episode(std::move(transitions));

    // Updates start once a full batch exists; credit does not accrue before
    // that, so the first learnable episode is not followed by a burst.
    if (buffer.size() >= cfg.batch_size) {
      update_credit += (T - 1) * cfg.updates_per_step;
      while (update_credit >= 1.0) {
        Td3Agent::Diag diag = agent.update(buffer, cfg.batch_size, cfg.nstep, gamma, update_rng);
        update_credit -= 1.0;
        if (diag.updated && !std::isfinite(diag.critic_loss)) {
          abort_run(episode, "non-finite critic loss");
          return result;
        }
      }
    }

    recognizer.update(tau);
    gamma = scheduled_gamma(frames);

    if (episode % cfg.eval_every == 0 || episode == total_episodes) {
      last_eval = evaluate(agent, eval_env, cfg.eval_episodes, eval_rng);
      MetricsRow row{frames, episode, last_eval.success_rate,
                     window_reward_sum / window_episodes, recognizer.k(), gamma, wall()};
      emit(row);
      window_reward_sum = 0.0;
      window_episodes = 0;
    }
  }

  result.frames = frames;
  result.final_eval = last_eval;
  result.agent.emplace(std::move(agent));
  return result;
}

}  // namespace ilfo
