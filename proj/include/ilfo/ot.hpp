#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ilfo/cost.hpp"
#include "ilfo/types.hpp"

namespace ilfo {

// Entry (i,j) is the cost between agent frame i and expert frame j.
using CostMatrix = Eigen::MatrixXd;

// Nonnegative T x T coupling whose rows and columns each sum to 1/T.
using TransportPlan = Eigen::MatrixXd;

struct OtSolution {
  TransportPlan plan;
  double objective = 0.0;
  int iterations = 0;
  bool converged = true;
};

enum class OtSolver { Sinkhorn, Exact };

struct OtParams {
  OtSolver solver = OtSolver::Sinkhorn;
  double eps_scale = 0.01;  // epsilon = eps_scale * mean cost entry
  int max_iters = 500;
  double tol = 1e-6;        // marginal violation tolerance
};

inline CostMatrix cost_matrix(const Trajectory& tau, const Trajectory& tau_e,
                              const CostFunction& cost) {
  if (tau.length() != tau_e.length()) {
    throw std::invalid_argument("cost_matrix: trajectory lengths differ");
  }
  if (tau.obs_dim() != tau_e.obs_dim()) {
    throw std::invalid_argument("cost_matrix: observation dimensions differ");
  }
  const int n = tau.length();
  CostMatrix C(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) C(i, j) = cost(tau.observations[i], tau_e.observations[j]);
  }
  return C;
}

// Exact uniform-marginal OT. With equal uniform marginals the optimum is
// attained at a permutation coupling (a Birkhoff vertex), so the problem
// reduces to a linear assignment solved by shortest augmenting paths with
// dual potentials. Oracle scale only: refuses T > 16.
inline OtSolution solve_exact(const CostMatrix& C) {
  const int n = static_cast<int>(C.rows());
  if (C.cols() != n) throw std::invalid_argument("solve_exact: cost matrix must be square");
  if (n < 1) throw std::invalid_argument("solve_exact: empty cost matrix");
  if (n > 16) throw std::invalid_argument("solve_exact: oracle limited to T <= 16");

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);  // match[j] = row assigned to column j
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      int i0 = match[j0], j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = C(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) { minv[j] = cur; way[j] = j0; }
        if (minv[j] < delta) { delta = minv[j]; j1 = j; }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) { u[match[j]] += delta; v[j] -= delta; }
        else minv[j] -= delta;
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  OtSolution sol;
  sol.plan = TransportPlan::Zero(n, n);
  double total = 0.0;
  for (int j = 1; j <= n; ++j) {
    sol.plan(match[j] - 1, j - 1) = 1.0 / n;
    total += C(match[j] - 1, j - 1);
  }
  sol.objective = total / n;
  return sol;
}

namespace detail {

// Row-wise log-sum-exp.
inline Eigen::VectorXd lse_rows(const Eigen::MatrixXd& m) {
  Eigen::VectorXd mx = m.rowwise().maxCoeff();
  return mx.array() + (m.colwise() - mx).array().exp().rowwise().sum().log();
}

}  // namespace detail

// Entropic OT via log-domain Sinkhorn with epsilon scaling: the temperature
// starts at max(C) and halves down to the target, two dual sweeps per level,
// then iterates at the target until the marginal violation drops below tol.
// The final plan is rounded onto the uniform-marginal polytope, so the
// returned marginals hold to machine precision.
inline OtSolution solve_sinkhorn(const CostMatrix& C, double eps, int max_iters, double tol) {
  const int n = static_cast<int>(C.rows());
  if (C.cols() != n) throw std::invalid_argument("solve_sinkhorn: cost matrix must be square");
  if (n < 1) throw std::invalid_argument("solve_sinkhorn: empty cost matrix");
  if (eps <= 0.0) throw std::invalid_argument("solve_sinkhorn: eps must be positive");
  if (tol <= 0.0) throw std::invalid_argument("solve_sinkhorn: tol must be positive");

  const double mass = 1.0 / n;
  OtSolution sol;
  if (C.maxCoeff() <= 0.0) {
    // All-zero cost: every feasible plan is optimal.
    sol.plan = TransportPlan::Constant(n, n, mass / n);
    return sol;
  }

  const double log_a = -std::log(static_cast<double>(n));
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n), g = Eigen::VectorXd::Zero(n);

  std::vector<double> levels;
  for (double e = std::max(C.maxCoeff(), eps); e > eps; e *= 0.5) levels.push_back(e);
  levels.push_back(eps);

  Eigen::MatrixXd plan(n, n);
  auto dual_sweep = [&](double e) {
    f = e * (log_a - detail::lse_rows((g.transpose().replicate(n, 1) - C) / e).array());
    g = e * (log_a - detail::lse_rows((f.transpose().replicate(n, 1) - C.transpose()) / e).array());
  };
  auto build_plan = [&](double e) {
    plan = (((-C).colwise() + f).rowwise() + g.transpose()).array() / e;
    plan = plan.array().exp();
  };

  int iters = 0;
  bool converged = false;
  double best_err = std::numeric_limits<double>::infinity();
  int since_improvement = 0;
  for (std::size_t level = 0; level < levels.size() && iters < max_iters; ++level) {
    const double e = levels[level];
    const bool final_level = (level + 1 == levels.size());
    const int cap = final_level ? max_iters : std::min(max_iters, iters + 2);
    while (iters < cap) {
      dual_sweep(e);
      ++iters;
      if (final_level) {
        build_plan(e);
        // Columns are exact after the g sweep; rows carry the residual.
        double err = (plan.rowwise().sum().array() - mass).abs().maxCoeff();
        if (err < tol) { converged = true; break; }
        // At small eps the violation can plateau at its numerical fixed
        // point far above tol; further sweeps are no-ops, so treat a long
        // stall as converged and let the rounding below restore feasibility.
        if (err < 0.99 * best_err) {
          best_err = err;
          since_improvement = 0;
        } else if (++since_improvement >= 50) {
          converged = true;
          break;
        }
      }
    }
    if (converged) break;
  }
  build_plan(eps);
  if (!plan.allFinite()) {
    throw std::runtime_error("solve_sinkhorn: non-finite transport plan");
  }

  // Round onto the feasible polytope: scale overfull rows/columns down, then
  // distribute the remaining deficit as a rank-one correction.
  Eigen::VectorXd r = plan.rowwise().sum();
  for (int i = 0; i < n; ++i) {
    if (r[i] > mass) plan.row(i) *= mass / r[i];
  }
  Eigen::VectorXd c = plan.colwise().sum();
  for (int j = 0; j < n; ++j) {
    if (c[j] > mass) plan.col(j) *= mass / c[j];
  }
  Eigen::VectorXd er = (Eigen::VectorXd::Constant(n, mass) - plan.rowwise().sum()).cwiseMax(0.0);
  Eigen::VectorXd ec =
      (Eigen::VectorXd::Constant(n, mass) - plan.colwise().sum().transpose()).cwiseMax(0.0);
  const double deficit = er.sum();
  if (deficit > 0.0) plan.noalias() += er * (ec.transpose() / deficit);

  sol.plan = std::move(plan);
  sol.objective = (C.array() * sol.plan.array()).sum();
  sol.iterations = iters;
  sol.converged = converged;
  return sol;
}

inline OtSolution solve_ot(const CostMatrix& C, const OtParams& params) {
  if (params.solver == OtSolver::Exact) return solve_exact(C);
  const double mean = C.mean();
  if (mean <= 0.0) return solve_sinkhorn(C, 1.0, params.max_iters, params.tol);
  return solve_sinkhorn(C, params.eps_scale * mean, params.max_iters, params.tol);
}

inline double wasserstein(const Trajectory& tau, const Trajectory& tau_e, const CostFunction& cost,
                          const OtParams& params) {
  return solve_ot(cost_matrix(tau, tau_e, cost), params).objective;
}

// Proxy rewards against the closest demonstration: picks the demo with the
// minimal transport objective (ties to the lowest index), then assigns
// r_t = -reward_scale * sum_j C(t,j) plan(t,j) for t = 1..T-1.
inline std::vector<double> label_rewards(const Trajectory& tau, const DemoSet& demos,
                                         const CostFunction& cost, const OtParams& params,
                                         double reward_scale) {
  if (demos.trajectories.empty()) throw std::invalid_argument("label_rewards: empty demo set");
  tau.validate(demos.horizon, demos.obs_dim);

  CostMatrix best_cost;
  OtSolution best;
  bool have_best = false;
  for (const auto& demo : demos.trajectories) {
    CostMatrix C = cost_matrix(tau, demo, cost);
    OtSolution sol = solve_ot(C, params);
    if (!have_best || sol.objective < best.objective) {
      best = std::move(sol);
      best_cost = std::move(C);
      have_best = true;
    }
  }

  const int T = demos.horizon;
  std::vector<double> rewards(T - 1);
  for (int i = 0; i < T - 1; ++i) {
    rewards[i] = -reward_scale * best_cost.row(i).dot(best.plan.row(i));
  }
  return rewards;
}

}  // namespace ilfo
