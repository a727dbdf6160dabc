#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "ilfo/common.hpp"
#include "ilfo/types.hpp"

namespace ilfo {

struct StepResult {
  Eigen::VectorXd obs;
  bool done = false;
};

// The only surface the training loop sees: no task success, no stage flags.
// Success lives behind Env::eval_info(), which only evaluation touches.
class TrainingEnv {
 public:
  virtual ~TrainingEnv() = default;
  virtual int obs_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual int horizon() const = 0;
  virtual Eigen::VectorXd reset(Rng& rng) = 0;
  virtual StepResult step(const Eigen::VectorXd& action) = 0;
};

struct EvalInfo {
  bool success = false;
  bool stage_reached = false;  // carry: ever held; switch: switch toggled
};

class Env : public TrainingEnv {
 public:
  virtual EvalInfo eval_info() const = 0;
  virtual std::string name() const = 0;
};

// Planar pick-and-place. The agent must reach the object, grasp it with a
// dedicated action channel, and carry it to the goal; while held, the object
// rides along. Episodes run a fixed horizon; success is object-at-goal on the
// final frame. The point: frames late in a demo are only reachable in state
// space via the grasp, so skipping early progress looks cheap under a
// trajectory-matching reward but never produces success.
class CarryEnv final : public Env {
 public:
  struct Config {
    int horizon = 64;
    double max_step = 0.05;       // per-step displacement at full throttle
    double held_speed = 0.5;      // speed factor while carrying (the object is heavy)
    double grasp_radius = 0.10;   // agent-object distance allowing a grasp
    double goal_radius = 0.20;    // success tolerance
    double grasp_gate = 0.5;      // grasp channel threshold to close
    double release_gate = -0.2;   // grasp channel threshold to open
    double held_feature = 1.0;    // observation value of the held flag
    double init_jitter = 0.05;    // uniform jitter on start positions
    Eigen::Vector2d agent_start{0.10, 0.50};
    Eigen::Vector2d object_start{0.45, 0.80};
    Eigen::Vector2d goal{0.70, 0.35};  // mid-arena: walls are not resting spots
  };

  CarryEnv() : CarryEnv(Config()) {}
  explicit CarryEnv(const Config& cfg) : cfg_(cfg) {
    if (cfg_.horizon < 2) throw std::invalid_argument("CarryEnv: horizon must be >= 2");
  }

  int obs_dim() const override { return 10; }
  int action_dim() const override { return 3; }
  int horizon() const override { return cfg_.horizon; }
  std::string name() const override { return "carry"; }
  const Config& config() const { return cfg_; }

  Eigen::VectorXd reset(Rng& rng) override {
    auto jitter2 = [&](const Eigen::Vector2d& base) {
      Eigen::Vector2d p;
      p.x() = base.x() + rng.uniform(-cfg_.init_jitter, cfg_.init_jitter);
      p.y() = base.y() + rng.uniform(-cfg_.init_jitter, cfg_.init_jitter);
      return clamp_arena(p);
    };
    agent_ = jitter2(cfg_.agent_start);
    object_ = jitter2(cfg_.object_start);
    vel_.setZero();
    held_ = false;
    ever_held_ = false;
    steps_ = 0;
    done_ = false;
    started_ = true;
    return observe();
  }

  StepResult step(const Eigen::VectorXd& action) override {
    if (!started_) throw std::logic_error("CarryEnv: step before reset");
    if (done_) throw std::logic_error("CarryEnv: step after episode end");
    if (action.size() != 3) throw std::invalid_argument("CarryEnv: action must have 3 components");
    Eigen::Vector3d a = action.cwiseMax(-1.0).cwiseMin(1.0);

    const double step_cap = cfg_.max_step * (held_ ? cfg_.held_speed : 1.0);
    vel_ = step_cap * a.head<2>();  // world units, so it prices like position
    agent_ = clamp_arena(agent_ + vel_);
    if (!held_) {
      if ((agent_ - object_).norm() < cfg_.grasp_radius && a[2] > cfg_.grasp_gate) {
        held_ = true;
        ever_held_ = true;
      }
    } else if (a[2] < cfg_.release_gate) {
      held_ = false;
    }
    if (held_) object_ = agent_;

    ++steps_;
    done_ = steps_ >= cfg_.horizon - 1;
    return {observe(), done_};
  }

  EvalInfo eval_info() const override {
    EvalInfo info;
    info.success = (object_ - cfg_.goal).norm() < cfg_.goal_radius;
    info.stage_reached = ever_held_;
    return info;
  }

 private:
  Eigen::Vector2d clamp_arena(Eigen::Vector2d p) const {
    p.x() = std::clamp(p.x(), 0.0, 1.0);
    p.y() = std::clamp(p.y(), 0.0, 1.0);
    return p;
  }

  Eigen::VectorXd observe() const {
    Eigen::VectorXd o(10);
    o << agent_.x(), agent_.y(), vel_.x(), vel_.y(), object_.x(), object_.y(),
        cfg_.goal.x(), cfg_.goal.y(), held_ ? cfg_.held_feature : 0.0,
        static_cast<double>(steps_) / cfg_.horizon;
    return o;
  }

  Config cfg_;
  Eigen::Vector2d agent_{0.0, 0.0};
  Eigen::Vector2d object_{0.0, 0.0};
  Eigen::Vector2d vel_{0.0, 0.0};
  bool held_ = false;
  bool ever_held_ = false;
  int steps_ = 0;
  bool done_ = false;
  bool started_ = false;
};

// Two-waypoint task with a hidden latch: touching the switch arms the door,
// and success requires being at the door with the switch armed on the final
// frame. Visiting the door first does nothing.
class TwoStageSwitchEnv final : public Env {
 public:
  struct Config {
    int horizon = 64;
    double max_step = 0.05;
    double switch_radius = 0.07;
    double door_radius = 0.10;
    double init_jitter = 0.05;
    Eigen::Vector2d agent_start{0.50, 0.10};
    Eigen::Vector2d switch_pos{0.15, 0.80};
    Eigen::Vector2d door_pos{0.85, 0.80};
  };

  TwoStageSwitchEnv() : TwoStageSwitchEnv(Config()) {}
  explicit TwoStageSwitchEnv(const Config& cfg) : cfg_(cfg) {
    if (cfg_.horizon < 2) throw std::invalid_argument("TwoStageSwitchEnv: horizon must be >= 2");
  }

  int obs_dim() const override { return 6; }
  int action_dim() const override { return 2; }
  int horizon() const override { return cfg_.horizon; }
  std::string name() const override { return "switch"; }
  const Config& config() const { return cfg_; }

  Eigen::VectorXd reset(Rng& rng) override {
    agent_.x() = cfg_.agent_start.x() + rng.uniform(-cfg_.init_jitter, cfg_.init_jitter);
    agent_.y() = cfg_.agent_start.y() + rng.uniform(-cfg_.init_jitter, cfg_.init_jitter);
    agent_ = clamp_arena(agent_);
    vel_.setZero();
    switch_on_ = false;
    steps_ = 0;
    done_ = false;
    started_ = true;
    return observe();
  }

  StepResult step(const Eigen::VectorXd& action) override {
    if (!started_) throw std::logic_error("TwoStageSwitchEnv: step before reset");
    if (done_) throw std::logic_error("TwoStageSwitchEnv: step after episode end");
    if (action.size() != 2) throw std::invalid_argument("TwoStageSwitchEnv: action must have 2 components");
    Eigen::Vector2d a = action.cwiseMax(-1.0).cwiseMin(1.0);
    vel_ = cfg_.max_step * a;  // world units, so it prices like position
    agent_ = clamp_arena(agent_ + vel_);
    if ((agent_ - cfg_.switch_pos).norm() < cfg_.switch_radius) switch_on_ = true;
    ++steps_;
    done_ = steps_ >= cfg_.horizon - 1;
    return {observe(), done_};
  }

  EvalInfo eval_info() const override {
    EvalInfo info;
    info.success = switch_on_ && (agent_ - cfg_.door_pos).norm() < cfg_.door_radius;
    info.stage_reached = switch_on_;
    return info;
  }

 private:
  Eigen::Vector2d clamp_arena(Eigen::Vector2d p) const {
    p.x() = std::clamp(p.x(), 0.0, 1.0);
    p.y() = std::clamp(p.y(), 0.0, 1.0);
    return p;
  }

  Eigen::VectorXd observe() const {
    Eigen::VectorXd o(6);
    o << agent_.x(), agent_.y(), vel_.x(), vel_.y(), switch_on_ ? 1.0 : 0.0,
        static_cast<double>(steps_) / cfg_.horizon;
    return o;
  }

  Config cfg_;
  Eigen::Vector2d agent_{0.0, 0.0};
  Eigen::Vector2d vel_{0.0, 0.0};
  bool switch_on_ = false;
  int steps_ = 0;
  bool done_ = false;
  bool started_ = false;
};

namespace detail {

inline Eigen::Vector2d toward(const Eigen::Vector2d& from, const Eigen::Vector2d& to,
                              double max_step) {
  Eigen::Vector2d cmd = (to - from) / max_step;
  cmd.x() = std::clamp(cmd.x(), -1.0, 1.0);
  cmd.y() = std::clamp(cmd.y(), -1.0, 1.0);
  return cmd;
}

}  // namespace detail

// Drives one episode with a hand-written controller and keeps only the
// observations (demonstrators expose no actions). Throws if the script does
// not end in success, which would poison every downstream reward.
inline Trajectory scripted_expert(Env& env, Rng& rng) {
  Trajectory tau;
  Eigen::VectorXd obs = env.reset(rng);
  tau.observations.push_back(obs);
  bool done = false;
  if (env.name() == "carry") {
    const auto& cfg = static_cast<const CarryEnv&>(env).config();
    while (!done) {
      Eigen::Vector2d agent(obs[0], obs[1]);
      Eigen::Vector2d object(obs[4], obs[5]);
      bool held = obs[8] > 0.0;
      Eigen::Vector2d target = held ? cfg.goal : object;
      Eigen::VectorXd a(3);
      a.head<2>() = detail::toward(agent, target, cfg.max_step * (held ? cfg.held_speed : 1.0));
      a[2] = 1.0;
      StepResult r = env.step(a);
      obs = r.obs;
      done = r.done;
      tau.observations.push_back(obs);
    }
  } else if (env.name() == "switch") {
    const auto& cfg = static_cast<const TwoStageSwitchEnv&>(env).config();
    while (!done) {
      Eigen::Vector2d agent(obs[0], obs[1]);
      bool armed = obs[4] > 0.5;
      Eigen::Vector2d target = armed ? cfg.door_pos : cfg.switch_pos;
      Eigen::VectorXd a(2);
      a = detail::toward(agent, target, cfg.max_step);
      StepResult r = env.step(a);
      obs = r.obs;
      done = r.done;
      tau.observations.push_back(obs);
    }
  } else {
    throw std::invalid_argument("scripted_expert: no script for env '" + env.name() + "'");
  }
  if (!env.eval_info().success) {
    throw std::runtime_error("scripted_expert: script failed to solve '" + env.name() + "'");
  }
  return tau;
}

inline std::unique_ptr<Env> make_env(const std::string& name, int horizon, double init_jitter) {
  if (name == "carry") {
    CarryEnv::Config c;
    c.horizon = horizon;
    c.init_jitter = init_jitter;
    return std::make_unique<CarryEnv>(c);
  }
  if (name == "switch") {
    TwoStageSwitchEnv::Config c;
    c.horizon = horizon;
    c.init_jitter = init_jitter;
    return std::make_unique<TwoStageSwitchEnv>(c);
  }
  throw std::invalid_argument("make_env: unknown env '" + name + "'");
}

inline DemoSet generate_demos(Env& env, int count, Rng& rng) {
  if (count < 1) throw std::invalid_argument("generate_demos: count must be positive");
  DemoSet demos;
  demos.horizon = env.horizon();
  demos.obs_dim = env.obs_dim();
  for (int i = 0; i < count; ++i) {
    Rng demo_rng = rng.fork(static_cast<unsigned long long>(i));
    demos.trajectories.push_back(scripted_expert(env, demo_rng));
  }
  demos.validate();
  return demos;
}

}  // namespace ilfo
