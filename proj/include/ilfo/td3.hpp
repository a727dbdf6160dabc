#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <stdexcept>

#include "ilfo/common.hpp"
#include "ilfo/mlp.hpp"
#include "ilfo/replay.hpp"

namespace ilfo {

struct Td3Params {
  int obs_dim = 0;
  int action_dim = 0;
  int hidden_dim = 64;
  double learning_rate = 1e-4;
  double soft_update_tau = 0.005;
  double policy_noise = 0.1;      // target policy smoothing sd
  double policy_noise_clip = 0.3; // smoothing noise clip
  int policy_delay = 1;

  void validate() const {
    if (obs_dim < 1 || action_dim < 1) throw std::invalid_argument("Td3Params: bad dims");
    if (hidden_dim < 1) throw std::invalid_argument("Td3Params: bad hidden_dim");
    if (learning_rate <= 0) throw std::invalid_argument("Td3Params: bad learning_rate");
    if (soft_update_tau <= 0 || soft_update_tau > 1) throw std::invalid_argument("Td3Params: bad tau");
    if (policy_noise < 0 || policy_noise_clip < 0) throw std::invalid_argument("Td3Params: bad noise");
    if (policy_delay < 1) throw std::invalid_argument("Td3Params: bad policy_delay");
  }
};

// Deterministic-policy actor-critic with clipped double Q learning, delayed
// policy updates, and target policy smoothing. Targets use n-step returns
// discounted with the gamma supplied per update call, so a schedule can move
// gamma between updates without touching stored experience.
class Td3Agent {
 public:
  struct Diag {
    bool updated = false;
    bool actor_updated = false;
    double critic_loss = 0.0;  // sum of both critic MSE losses
    double actor_loss = 0.0;   // -mean Q1 under current policy
    double mean_target = 0.0;
  };

  Td3Agent(const Td3Params& params, Rng& rng) : params_(params) {
    params_.validate();
    const int d = params_.obs_dim;
    const int a = params_.action_dim;
    const int h = params_.hidden_dim;
    actor_ = Mlp::make({d, h, h, a}, OutputActivation::Tanh, rng);
    critic1_ = Mlp::make({d + a, h, h, 1}, OutputActivation::Identity, rng);
    critic2_ = Mlp::make({d + a, h, h, 1}, OutputActivation::Identity, rng);
    target_actor_ = actor_;
    target_critic1_ = critic1_;
    target_critic2_ = critic2_;
    actor_opt_ = Adam::make(actor_, params_.learning_rate);
    critic1_opt_ = Adam::make(critic1_, params_.learning_rate);
    critic2_opt_ = Adam::make(critic2_, params_.learning_rate);
  }

  const Td3Params& params() const { return params_; }
  long update_count() const { return update_count_; }

  Eigen::VectorXd act(const Eigen::VectorXd& obs) const {
    if (obs.size() != params_.obs_dim) throw std::invalid_argument("Td3Agent::act: bad obs dim");
    return actor_.forward(obs);
  }

  Eigen::VectorXd act_noisy(const Eigen::VectorXd& obs, double noise_sd, Rng& rng) const {
    Eigen::VectorXd a = act(obs);
    for (int i = 0; i < a.size(); ++i) a[i] += rng.normal(0.0, noise_sd);
    return a.cwiseMax(-1.0).cwiseMin(1.0);
  }

  Diag update(const ReplayBuffer& buffer, int batch, int nstep, double gamma, Rng& rng) {
    Diag diag;
    if (buffer.size() == 0) return diag;
    if (!(gamma > 0.0) || gamma >= 1.0) throw std::invalid_argument("Td3Agent::update: gamma must be in (0,1)");

    NStepBatch nb = buffer.sample(batch, nstep, rng);
    const int B = nb.size;
    const int a = params_.action_dim;

    // Smoothed target actions at the bootstrap observation.
    Eigen::MatrixXd next_actions = target_actor_.forward(nb.bootstrap_obs);
    for (int b = 0; b < B; ++b) {
      for (int i = 0; i < a; ++i) {
        double eps = std::clamp(rng.normal(0.0, params_.policy_noise),
                                -params_.policy_noise_clip, params_.policy_noise_clip);
        next_actions(i, b) += eps;
      }
    }
    next_actions = next_actions.cwiseMax(-1.0).cwiseMin(1.0);

    Eigen::MatrixXd next_input(params_.obs_dim + a, B);
    next_input.topRows(params_.obs_dim) = nb.bootstrap_obs;
    next_input.bottomRows(a) = next_actions;
    Eigen::RowVectorXd q_next = target_critic1_.forward(next_input)
                                    .cwiseMin(target_critic2_.forward(next_input))
                                    .row(0);

    // n-step return with the caller's gamma; no bootstrap past a terminal.
    Eigen::RowVectorXd y(B);
    for (int b = 0; b < B; ++b) {
      double acc = 0.0;
      double g = 1.0;
      for (int i = 0; i < nb.window[b]; ++i) {
        acc += g * nb.rewards(i, b);
        g *= gamma;
      }
      if (nb.terminal[b] == 0.0) acc += g * q_next[b];
      y[b] = acc;
    }

    Eigen::MatrixXd critic_input(params_.obs_dim + a, B);
    critic_input.topRows(params_.obs_dim) = nb.obs;
    critic_input.bottomRows(a) = nb.actions;

    auto critic_step = [&](Mlp& critic, Adam& opt) {
      MlpCache cache;
      Eigen::RowVectorXd q = critic.forward(critic_input, cache).row(0);
      Eigen::RowVectorXd err = q - y;
      double loss = err.squaredNorm() / B;
      Eigen::MatrixXd dq = (2.0 / B) * err;
      MlpGrads grads;
      critic.backward(cache, dq, grads);
      opt.step(critic, grads);
      return loss;
    };
    diag.critic_loss = critic_step(critic1_, critic1_opt_) + critic_step(critic2_, critic2_opt_);
    diag.mean_target = y.mean();
    diag.updated = true;
    ++update_count_;

    if (update_count_ % params_.policy_delay == 0) {
      // Deterministic policy gradient through critic1.
      MlpCache actor_cache;
      Eigen::MatrixXd pi = actor_.forward(nb.obs, actor_cache);
      Eigen::MatrixXd q_input(params_.obs_dim + a, B);
      q_input.topRows(params_.obs_dim) = nb.obs;
      q_input.bottomRows(a) = pi;
      MlpCache critic_cache;
      Eigen::RowVectorXd q = critic1_.forward(q_input, critic_cache).row(0);
      diag.actor_loss = -q.mean();
      Eigen::MatrixXd dq = Eigen::MatrixXd::Constant(1, B, -1.0 / B);
      MlpGrads unused;
      Eigen::MatrixXd dinput;
      critic1_.backward(critic_cache, dq, unused, &dinput);
      MlpGrads actor_grads;
      actor_.backward(actor_cache, dinput.bottomRows(a), actor_grads);
      actor_opt_.step(actor_, actor_grads);

      soft_update(target_actor_, actor_);
      soft_update(target_critic1_, critic1_);
      soft_update(target_critic2_, critic2_);
      diag.actor_updated = true;
    }
    return diag;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["params"] = {{"obs_dim", params_.obs_dim},
                   {"action_dim", params_.action_dim},
                   {"hidden_dim", params_.hidden_dim},
                   {"learning_rate", params_.learning_rate},
                   {"soft_update_tau", params_.soft_update_tau},
                   {"policy_noise", params_.policy_noise},
                   {"policy_noise_clip", params_.policy_noise_clip},
                   {"policy_delay", params_.policy_delay}};
    j["update_count"] = update_count_;
    j["actor"] = actor_.to_json();
    j["critic1"] = critic1_.to_json();
    j["critic2"] = critic2_.to_json();
    j["target_actor"] = target_actor_.to_json();
    j["target_critic1"] = target_critic1_.to_json();
    j["target_critic2"] = target_critic2_.to_json();
    j["actor_opt"] = actor_opt_.to_json();
    j["critic1_opt"] = critic1_opt_.to_json();
    j["critic2_opt"] = critic2_opt_.to_json();
    return j;
  }

  static Td3Agent from_json(const nlohmann::json& j) {
    Td3Params p;
    const auto& jp = j.at("params");
    p.obs_dim = jp.at("obs_dim").get<int>();
    p.action_dim = jp.at("action_dim").get<int>();
    p.hidden_dim = jp.at("hidden_dim").get<int>();
    p.learning_rate = jp.at("learning_rate").get<double>();
    p.soft_update_tau = jp.at("soft_update_tau").get<double>();
    p.policy_noise = jp.at("policy_noise").get<double>();
    p.policy_noise_clip = jp.at("policy_noise_clip").get<double>();
    p.policy_delay = jp.at("policy_delay").get<int>();
    Rng scratch(0);
    Td3Agent agent(p, scratch);
    agent.update_count_ = j.at("update_count").get<long>();
    agent.actor_ = Mlp::from_json(j.at("actor"));
    agent.critic1_ = Mlp::from_json(j.at("critic1"));
    agent.critic2_ = Mlp::from_json(j.at("critic2"));
    agent.target_actor_ = Mlp::from_json(j.at("target_actor"));
    agent.target_critic1_ = Mlp::from_json(j.at("target_critic1"));
    agent.target_critic2_ = Mlp::from_json(j.at("target_critic2"));
    agent.actor_opt_ = Adam::from_json(j.at("actor_opt"));
    agent.critic1_opt_ = Adam::from_json(j.at("critic1_opt"));
    agent.critic2_opt_ = Adam::from_json(j.at("critic2_opt"));
    return agent;
  }

  // Exposed for gradient and soft-update tests.
  const Mlp& actor() const { return actor_; }
  const Mlp& critic1() const { return critic1_; }
  const Mlp& critic2() const { return critic2_; }
  const Mlp& target_actor() const { return target_actor_; }
  const Mlp& target_critic1() const { return target_critic1_; }
  const Mlp& target_critic2() const { return target_critic2_; }

 private:
  void soft_update(Mlp& target, const Mlp& source) const {
    const double tau = params_.soft_update_tau;
    for (std::size_t l = 0; l < source.w.size(); ++l) {
      target.w[l] = tau * source.w[l] + (1.0 - tau) * target.w[l];
      target.b[l] = tau * source.b[l] + (1.0 - tau) * target.b[l];
    }
  }

  Td3Params params_;
  Mlp actor_, critic1_, critic2_;
  Mlp target_actor_, target_critic1_, target_critic2_;
  Adam actor_opt_, critic1_opt_, critic2_opt_;
  long update_count_ = 0;
};

}  // namespace ilfo
