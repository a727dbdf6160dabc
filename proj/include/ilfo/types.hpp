#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace ilfo {

using Observation = Eigen::VectorXd;
using Action = Eigen::VectorXd;

// A fixed-length sequence of observations. Agent rollouts additionally carry
// the executed actions (length T-1); demonstrations are observation-only.
struct Trajectory {
  std::vector<Observation> observations;
  std::vector<Action> actions;  // empty for demonstrations

  int length() const { return static_cast<int>(observations.size()); }

  int obs_dim() const {
    return observations.empty() ? 0 : static_cast<int>(observations.front().size());
  }

  bool has_actions() const { return !actions.empty(); }

  void validate(int horizon, int dim) const {
    if (length() != horizon) {
      throw std::invalid_argument("trajectory length " + std::to_string(length()) +
                                  " != horizon " + std::to_string(horizon));
    }
    for (const auto& o : observations) {
      if (static_cast<int>(o.size()) != dim) {
        throw std::invalid_argument("observation dimension " + std::to_string(o.size()) +
                                    " != obs_dim " + std::to_string(dim));
      }
      if (!o.allFinite()) throw std::invalid_argument("non-finite observation entry");
    }
    if (has_actions() && static_cast<int>(actions.size()) != horizon - 1) {
      throw std::invalid_argument("action sequence must have length T-1");
    }
  }
};

struct DemoSet {
  std::vector<Trajectory> trajectories;
  int horizon = 0;
  int obs_dim = 0;

  int count() const { return static_cast<int>(trajectories.size()); }

  void validate() const {
    if (trajectories.empty()) throw std::invalid_argument("demo set is empty");
    for (const auto& tau : trajectories) {
      tau.validate(horizon, obs_dim);
      if (tau.has_actions()) {
        throw std::invalid_argument("demonstrations must be observation-only");
      }
    }
  }
};

}  // namespace ilfo
