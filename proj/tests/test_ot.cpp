#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>

#include "ilfo/common.hpp"
#include "ilfo/ot.hpp"

using namespace ilfo;

namespace {

Trajectory traj1d(std::initializer_list<double> xs) {
  Trajectory tau;
  for (double x : xs) tau.observations.push_back(Eigen::VectorXd::Constant(1, x));
  return tau;
}

CostMatrix random_cost(int n, Rng& rng) {
  CostMatrix C(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) C(i, j) = rng.uniform(0.0, 2.0);
  return C;
}

// Independent oracle: minimize over all permutation couplings directly.
double brute_force_objective(const CostMatrix& C) {
  const int n = static_cast<int>(C.rows());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += C(i, perm[i]);
    best = std::min(best, v);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / n;
}

void check_marginals(const TransportPlan& plan, double tol) {
  const int n = static_cast<int>(plan.rows());
  const double mass = 1.0 / n;
  REQUIRE(plan.minCoeff() >= 0.0);
  for (int i = 0; i < n; ++i) {
    REQUIRE(plan.row(i).sum() == Catch::Approx(mass).margin(tol));
    REQUIRE(plan.col(i).sum() == Catch::Approx(mass).margin(tol));
  }
}

}  // namespace

TEST_CASE("cost_matrix matches pairwise costs") {
  Trajectory tau = traj1d({0.0, 1.0, 2.0});
  Trajectory demo = traj1d({0.2, 0.9, 2.2});
  CostMatrix C = cost_matrix(tau, demo, CostFunction{CostKind::Euclidean});
  // frozen oracle: |tau_i - demo_j|
  CostMatrix expected(3, 3);
  expected << 0.2, 0.9, 2.2, 0.8, 0.1, 1.2, 1.8, 1.1, 0.2;
  CHECK((C - expected).cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(cost_matrix(tau, traj1d({0.0, 1.0}), CostFunction{CostKind::Euclidean}),
                  std::invalid_argument);
}

TEST_CASE("exact solver equals permutation enumeration and yields exact marginals") {
  Rng rng(101);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 5;  // T in {2..6}
    CostMatrix C = random_cost(n, rng);
    OtSolution sol = solve_exact(C);
    CHECK(sol.objective == Catch::Approx(brute_force_objective(C)).margin(1e-12));
    check_marginals(sol.plan, 1e-15);
    // plan is a scaled permutation: every entry 0 or 1/n
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        REQUIRE((sol.plan(i, j) == 0.0 || sol.plan(i, j) == Catch::Approx(1.0 / n).margin(1e-15)));
  }
}

TEST_CASE("exact solver frozen 4x4 oracle") {
  CostMatrix C(4, 4);
  C << 0.31, 0.80, 0.55, 0.99,
       0.27, 0.12, 0.71, 0.43,
       0.90, 0.64, 0.22, 0.58,
       0.45, 0.38, 0.77, 0.16;
  CHECK(solve_exact(C).objective == Catch::Approx(0.2025).margin(1e-15));
}

TEST_CASE("exact solver input guards") {
  CHECK_THROWS_AS(solve_exact(CostMatrix::Zero(2, 3)), std::invalid_argument);
  CHECK_THROWS_AS(solve_exact(CostMatrix::Zero(17, 17)), std::invalid_argument);
  OtSolution one = solve_exact(CostMatrix::Constant(1, 1, 0.7));
  CHECK(one.objective == Catch::Approx(0.7));
  CHECK(one.plan(0, 0) == Catch::Approx(1.0));
}

TEST_CASE("sinkhorn objective tracks exact and marginals hold to 1e-6") {
  Rng rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 7;  // up to 8x8
    CostMatrix C = random_cost(n, rng);
    const double eps = 0.01 * C.mean();
    OtSolution sk = solve_sinkhorn(C, eps, 100000, 1e-6);
    OtSolution ex = solve_exact(C);
    check_marginals(sk.plan, 1e-6);
    REQUIRE(sk.converged);
    double tol = std::max(1e-3, 0.02 * ex.objective);
    REQUIRE(sk.objective >= ex.objective - 1e-9);  // entropic plan cannot beat the LP
    REQUIRE(sk.objective - ex.objective <= tol);
  }
}

TEST_CASE("sinkhorn handles degenerate inputs") {
  // all-zero costs: any feasible plan is optimal
  OtSolution z = solve_sinkhorn(CostMatrix::Zero(5, 5), 0.01, 1000, 1e-6);
  CHECK(z.objective == 0.0);
  check_marginals(z.plan, 1e-12);

  CHECK_THROWS_AS(solve_sinkhorn(CostMatrix::Zero(2, 2), -1.0, 10, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(solve_sinkhorn(CostMatrix::Zero(2, 3), 0.1, 10, 1e-6), std::invalid_argument);

  // iteration budget is respected and reported
  Rng rng(8);
  CostMatrix C = random_cost(6, rng);
  OtSolution starved = solve_sinkhorn(C, 0.001 * C.mean(), 3, 1e-12);
  CHECK(starved.iterations <= 3);
  CHECK_FALSE(starved.converged);
  check_marginals(starved.plan, 1e-9);  // rounding repairs feasibility regardless
}

TEST_CASE("solve_ot dispatches on solver kind") {
  Rng rng(77);
  CostMatrix C = random_cost(4, rng);
  OtParams exact;
  exact.solver = OtSolver::Exact;
  OtParams sink;
  sink.solver = OtSolver::Sinkhorn;
  sink.eps_scale = 0.01;
  sink.max_iters = 100000;
  CHECK(solve_ot(C, exact).objective == Catch::Approx(brute_force_objective(C)).margin(1e-12));
  CHECK(solve_ot(C, sink).objective ==
        Catch::Approx(solve_ot(C, exact).objective).margin(std::max(1e-3, 0.02 * C.mean())));
}

TEST_CASE("wasserstein identity and frozen cross value") {
  OtParams exact;
  exact.solver = OtSolver::Exact;
  Trajectory tau = traj1d({0.0, 1.0, 2.0});
  Trajectory demo = traj1d({0.2, 0.9, 2.2});
  CostFunction cost{CostKind::Euclidean};
  CHECK(wasserstein(tau, tau, cost, exact) == Catch::Approx(0.0).margin(1e-12));
  // frozen oracle: identity assignment is optimal, mean cost 0.5/3
  CHECK(wasserstein(tau, demo, cost, exact) ==
        Catch::Approx(0.16666666666666674).margin(1e-12));

  OtParams sink;
  CHECK(wasserstein(tau, demo, cost, sink) ==
        Catch::Approx(0.16666666666666674).margin(1e-3));
}

TEST_CASE("label_rewards hand-solved instance") {
  DemoSet demos;
  demos.horizon = 3;
  demos.obs_dim = 1;
  demos.trajectories.push_back(traj1d({0.2, 0.9, 2.2}));
  Trajectory tau = traj1d({0.0, 1.0, 2.0});
  OtParams exact;
  exact.solver = OtSolver::Exact;
  // frozen oracle: optimal coupling is the identity permutation, plan weight
  // 1/3 per row, costs (0.2, 0.1); reward_scale = T = 3
  auto r = label_rewards(tau, demos, CostFunction{CostKind::Euclidean}, exact, 3.0);
  REQUIRE(r.size() == 2);
  CHECK(r[0] == Catch::Approx(-0.2).margin(1e-12));
  CHECK(r[1] == Catch::Approx(-0.1).margin(1e-12));

  // literal per-step rewards with reward_scale = 1
  auto r1 = label_rewards(tau, demos, CostFunction{CostKind::Euclidean}, exact, 1.0);
  CHECK(r1[0] == Catch::Approx(r[0] / 3.0).margin(1e-12));
}

TEST_CASE("label_rewards sign, zero, and bound properties") {
  Rng rng(31);
  DemoSet demos;
  demos.horizon = 6;
  demos.obs_dim = 2;
  for (int d = 0; d < 3; ++d) {
    Trajectory tau;
    for (int t = 0; t < 6; ++t) {
      Eigen::VectorXd o(2);
      o << rng.uniform(0, 1), rng.uniform(0, 1);
      tau.observations.push_back(o);
    }
    demos.trajectories.push_back(tau);
  }
  CostFunction cost{CostKind::Euclidean};
  OtParams params;  // sinkhorn

  // identical to a demo: all rewards ~ 0 under the exact solver
  OtParams exact;
  exact.solver = OtSolver::Exact;
  auto zero = label_rewards(demos.trajectories[1], demos, cost, exact, 6.0);
  for (double r : zero) CHECK(r == Catch::Approx(0.0).margin(1e-12));

  Trajectory tau;
  for (int t = 0; t < 6; ++t) {
    Eigen::VectorXd o(2);
    o << rng.uniform(0, 1), rng.uniform(0, 1);
    tau.observations.push_back(o);
  }
  auto rewards = label_rewards(tau, demos, cost, params, 6.0);
  REQUIRE(rewards.size() == 5);
  double cmax = 0.0;
  for (const auto& demo : demos.trajectories) {
    cmax = std::max(cmax, cost_matrix(tau, demo, cost).maxCoeff());
  }
  for (double r : rewards) {
    CHECK(r <= 0.0);
    CHECK(r >= -6.0 * cmax / 6.0);  // reward_scale * c_max / T
  }
}

TEST_CASE("label_rewards picks the closest demo, ties to the lowest index") {
  CostFunction cost{CostKind::Euclidean};
  OtParams exact;
  exact.solver = OtSolver::Exact;

  DemoSet near_far;
  near_far.horizon = 3;
  near_far.obs_dim = 1;
  near_far.trajectories.push_back(traj1d({5.0, 6.0, 7.0}));   // far
  near_far.trajectories.push_back(traj1d({0.2, 0.9, 2.2}));   // near
  Trajectory tau = traj1d({0.0, 1.0, 2.0});
  auto picked = label_rewards(tau, near_far, cost, exact, 3.0);
  DemoSet only_near;
  only_near.horizon = 3;
  only_near.obs_dim = 1;
  only_near.trajectories.push_back(near_far.trajectories[1]);
  auto direct = label_rewards(tau, only_near, cost, exact, 3.0);
  CHECK(picked == direct);

  // two equally distant demos: strict improvement keeps the first
  DemoSet tie;
  tie.horizon = 3;
  tie.obs_dim = 1;
  tie.trajectories.push_back(traj1d({0.5, 1.5, 2.5}));   // +0.5 everywhere
  tie.trajectories.push_back(traj1d({-0.5, 0.5, 1.5}));  // -0.5 everywhere
  auto tied = label_rewards(tau, tie, cost, exact, 3.0);
  DemoSet first_only;
  first_only.horizon = 3;
  first_only.obs_dim = 1;
  first_only.trajectories.push_back(tie.trajectories[0]);
  CHECK(tied == label_rewards(tau, first_only, cost, exact, 3.0));
}

TEST_CASE("label_rewards input errors") {
  DemoSet empty;
  empty.horizon = 3;
  empty.obs_dim = 1;
  Trajectory tau = traj1d({0.0, 1.0, 2.0});
  CHECK_THROWS_AS(label_rewards(tau, empty, CostFunction{CostKind::Euclidean}, OtParams{}, 1.0),
                  std::invalid_argument);

  DemoSet demos;
  demos.horizon = 3;
  demos.obs_dim = 1;
  demos.trajectories.push_back(traj1d({0.0, 1.0, 2.0}));
  CHECK_THROWS_AS(
      label_rewards(traj1d({0.0, 1.0}), demos, CostFunction{CostKind::Euclidean}, OtParams{}, 1.0),
      std::invalid_argument);
}

TEST_CASE("sinkhorn marginal property over many random instances") {
  Rng rng(555);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + rng.uniform_int(0, 6);
    CostMatrix C = random_cost(n, rng);
    OtSolution sol = solve_sinkhorn(C, 0.01 * C.mean(), 100000, 1e-6);
    check_marginals(sol.plan, 1e-9);
  }
}
