#pragma once

#include <Eigen/Dense>
#include <deque>
#include <stdexcept>
#include <vector>

#include "ilfo/common.hpp"
#include "ilfo/types.hpp"

namespace ilfo {

// One step of agent experience. Proxy rewards are nonpositive by
// construction; step_index is the 1-based position t within the episode.
struct Transition {
  Eigen::VectorXd obs;
  Eigen::VectorXd action;
  double reward = 0.0;
  Eigen::VectorXd next_obs;
  bool done = false;
  int step_index = 0;
};

using Episode = std::vector<Transition>;

// Mini-batch of n-step windows, batch entries as columns. Raw per-step
// rewards are kept so targets can be re-discounted with whatever gamma is
// current at update time.
struct NStepBatch {
  Eigen::MatrixXd obs;            // d x B
  Eigen::MatrixXd actions;        // a x B
  Eigen::MatrixXd rewards;        // nstep x B, zero-padded
  std::vector<int> window;        // valid reward count per column
  Eigen::MatrixXd bootstrap_obs;  // d x B, observation after the window
  Eigen::VectorXd terminal;       // 1 if the window ends at the terminal step
  int size = 0;
};

// Bounded FIFO store of whole episodes. Eviction drops the oldest episode
// first; an n-step window never crosses an episode boundary.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(long capacity) : capacity_(capacity) {
    if (capacity < 1) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  }

  long size() const { return total_; }
  long capacity() const { return capacity_; }
  std::size_t episode_count() const { return episodes_.size(); }

  void add_episode(Episode episode) {
    if (episode.empty()) throw std::invalid_argument("ReplayBuffer: empty episode");
    if (static_cast<long>(episode.size()) > capacity_) {
      throw std::invalid_argument("ReplayBuffer: episode longer than capacity");
    }
    for (std::size_t i = 0; i < episode.size(); ++i) {
      const auto& tr = episode[i];
      if (tr.reward > 0.0) throw std::invalid_argument("ReplayBuffer: positive proxy reward");
      if (tr.done != (i + 1 == episode.size())) {
        throw std::invalid_argument("ReplayBuffer: done must be set exactly at the final step");
      }
    }
    total_ += static_cast<long>(episode.size());
    episodes_.push_back(std::move(episode));
    while (total_ > capacity_) {
      total_ -= static_cast<long>(episodes_.front().size());
      episodes_.pop_front();
    }
  }

  // Uniform sampling over stored transitions, with replacement.
  NStepBatch sample(int batch, int nstep, Rng& rng) const {
    if (total_ == 0) throw std::logic_error("ReplayBuffer: sample from empty buffer");
    if (batch < 1 || nstep < 1) throw std::invalid_argument("ReplayBuffer: bad batch/nstep");

    std::vector<long> cumulative;
    cumulative.reserve(episodes_.size());
    long acc = 0;
    for (const auto& ep : episodes_) {
      acc += static_cast<long>(ep.size());
      cumulative.push_back(acc);
    }

    const auto& first = episodes_.front().front();
    const int d = static_cast<int>(first.obs.size());
    const int a = static_cast<int>(first.action.size());
    NStepBatch out;
    out.size = batch;
    out.obs.resize(d, batch);
    out.actions.resize(a, batch);
    out.rewards = Eigen::MatrixXd::Zero(nstep, batch);
    out.window.resize(batch);
    out.bootstrap_obs.resize(d, batch);
    out.terminal.resize(batch);

    for (int b = 0; b < batch; ++b) {
      long flat = rng.uniform_int(0, static_cast<int>(total_ - 1));
      std::size_t e = 0;
      while (cumulative[e] <= flat) ++e;
      long offset = flat - (e == 0 ? 0 : cumulative[e - 1]);
      const Episode& ep = episodes_[e];
      const int t = static_cast<int>(offset);
      const int len = static_cast<int>(ep.size());
      const int m = std::min(nstep, len - t);
      out.obs.col(b) = ep[t].obs;
      out.actions.col(b) = ep[t].action;
      for (int i = 0; i < m; ++i) out.rewards(i, b) = ep[t + i].reward;
      out.window[b] = m;
      out.bootstrap_obs.col(b) = ep[t + m - 1].next_obs;
      out.terminal[b] = ep[t + m - 1].done ? 1.0 : 0.0;
    }
    return out;
  }

  const std::deque<Episode>& episodes() const { return episodes_; }

 private:
  long capacity_;
  std::deque<Episode> episodes_;
  long total_ = 0;
};

}  // namespace ilfo
