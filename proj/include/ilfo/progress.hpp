#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ilfo/cost.hpp"
#include "ilfo/types.hpp"

namespace ilfo {

// 1-based positions into the reference prefix; entry i is the index of the
// nearest reference frame to frame i of the query prefix.
using NnIndexSequence = std::vector<int>;

// Nearest-neighbor index sequence over the first n steps of both
// trajectories. The search is restricted to the reference prefix; ties break
// to the smallest index.
inline NnIndexSequence nn_indices(const Trajectory& tau, const Trajectory& ref, int n,
                                  const CostFunction& cost) {
  if (n < 1) throw std::invalid_argument("nn_indices: prefix length must be >= 1");
  if (tau.length() < n || ref.length() < n) {
    throw std::invalid_argument("nn_indices: prefix longer than trajectory");
  }
  NnIndexSequence p(n);
  for (int i = 0; i < n; ++i) {
    int best_j = 0;
    double best = cost(tau.observations[i], ref.observations[0]);
    for (int j = 1; j < n; ++j) {
      double c = cost(tau.observations[i], ref.observations[j]);
      if (c < best) { best = c; best_j = j; }
    }
    p[i] = best_j + 1;
  }
  return p;
}

// Length of the longest strictly increasing subsequence, via patience
// sorting on the tails array. O(n log n).
inline int lis_length(const NnIndexSequence& p) {
  if (p.empty()) throw std::invalid_argument("lis_length: empty sequence");
  std::vector<int> tails;
  tails.reserve(p.size());
  for (int x : p) {
    auto it = std::lower_bound(tails.begin(), tails.end(), x);
    if (it == tails.end()) tails.push_back(x);
    else *it = x;
  }
  return static_cast<int>(tails.size());
}

// Progress alignment of the two length-n prefixes.
inline int alignment(const Trajectory& tau, const Trajectory& ref, int n,
                     const CostFunction& cost) {
  return lis_length(nn_indices(tau, ref, n, cost));
}

// B[k] = min over ordered pairs of distinct demos of the alignment of their
// length-(k+1) prefixes, for k = 0..T-1. With a single demo the
// self-alignment upper bound k+1 is used.
inline std::vector<int> build_expert_baseline(const DemoSet& demos, const CostFunction& cost) {
  if (demos.trajectories.empty()) throw std::invalid_argument("expert baseline: empty demo set");
  const int T = demos.horizon;
  const int N = demos.count();
  std::vector<int> B(T);
  if (N == 1) {
    for (int k = 0; k < T; ++k) B[k] = k + 1;
    return B;
  }
  for (int k = 0; k < T; ++k) {
    int best = k + 2;
    for (int a = 0; a < N; ++a) {
      for (int b = 0; b < N; ++b) {
        if (a == b) continue;
        best = std::min(best,
                        alignment(demos.trajectories[a], demos.trajectories[b], k + 1, cost));
      }
    }
    B[k] = best;
  }
  return B;
}

// Discount mapping f(k) = alpha^(1/k); the formula leaves k = 0 undefined,
// where gamma0 is returned instead.
inline double map_discount(int k, double alpha, double gamma0) {
  if (k < 0) throw std::invalid_argument("map_discount: k must be >= 0");
  if (alpha <= 0.0 || alpha >= 1.0) throw std::invalid_argument("map_discount: alpha in (0,1)");
  if (k == 0) return gamma0;
  return std::pow(alpha, 1.0 / static_cast<double>(k));
}

// Tracks how many demonstration steps the agent's rollouts can follow.
// k only ever moves forward; one rollout may advance it by several steps.
class ProgressRecognizer {
 public:
  ProgressRecognizer(const DemoSet& demos, CostFunction cost, double lambda)
      : demos_(&demos),
        cost_(cost),
        lambda_(lambda),
        horizon_(demos.horizon),
        baseline_(build_expert_baseline(demos, cost)) {
    if (lambda < 0.0 || lambda > 1.0) {
      throw std::invalid_argument("ProgressRecognizer: lambda must be in [0,1]");
    }
  }

  int k() const { return k_; }
  const std::vector<int>& baseline() const { return baseline_; }

  // Advances k while the agent's best prefix alignment stays at or above
  // lambda times the expert baseline, then returns the new k.
  int update(const Trajectory& tau) {
    tau.validate(horizon_, demos_->obs_dim);
    while (k_ < horizon_) {
      int best = 0;
      for (const auto& demo : demos_->trajectories) {
        best = std::max(best, alignment(tau, demo, k_ + 1, cost_));
      }
      if (static_cast<double>(best) >= lambda_ * baseline_[k_]) ++k_;
      else break;
    }
    return k_;
  }

 private:
  const DemoSet* demos_;
  CostFunction cost_;
  double lambda_;
  int horizon_;
  std::vector<int> baseline_;
  int k_ = 0;
};

}  // namespace ilfo
