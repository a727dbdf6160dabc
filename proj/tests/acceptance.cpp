// Acceptance gate: one self-contained check per criterion, one printed
// pass/fail line each, exit 0 iff all pass. Links against the library only;
// every reference value is computed here by an independent method.

#include <ilfo/ilfo.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

using namespace ilfo;

namespace {

struct CheckResult {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 3) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Sinkhorn objective matches a brute-force LP optimum on random costs.
//    With uniform marginals the LP optimum is a permutation matrix / T
//    (Birkhoff), so enumerating permutations is an exact reference.

double assignment_optimum(const Eigen::MatrixXd& C) {
  const int n = static_cast<int>(C.rows());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += C(i, perm[i]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / n;
}

CheckResult criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20260814);
  double worst_gap = 0.0, worst_cap = 1e-3, worst_marginal = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 5;  // T in {2..6}, 40 instances each
    Eigen::MatrixXd C(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) C(i, j) = rng.uniform(0.05, 2.0);
    const double exact = assignment_optimum(C);
    const double eps = 0.01 * C.mean();
    const OtSolution sol = solve_sinkhorn(C, eps, 500, 1e-6);
    const double gap = std::abs(sol.objective - exact);
    const double cap = std::max(1e-3, 0.02 * std::abs(exact));
    if (gap * worst_cap > worst_gap * cap) {  // largest gap/cap ratio so far
      worst_gap = gap;
      worst_cap = cap;
    }
    const double u = 1.0 / n;
    const double row_err = (sol.plan.rowwise().sum().array() - u).abs().maxCoeff();
    const double col_err = (sol.plan.colwise().sum().array() - u).abs().maxCoeff();
    worst_marginal = std::max({worst_marginal, row_err, col_err});
    if (gap > cap) {
      return {false, "trial " + std::to_string(trial) + " (T=" + std::to_string(n) +
                         "): gap " + fmt(gap) + " > cap " + fmt(cap)};
    }
    if (std::max(row_err, col_err) > 1e-6) {
      return {false, "trial " + std::to_string(trial) + ": marginal err " +
                         fmt(std::max(row_err, col_err)) + " > 1e-6"};
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= 10.0) return {false, "runtime " + fmt(secs) + "s >= 10s"};
  return {true, "200/200 matrices; worst gap " + fmt(worst_gap) + " (cap " + fmt(worst_cap) +
                    "); worst marginal err " + fmt(worst_marginal) + "; " + fmt(secs, 2) +
                    "s < 10s"};
}

// ---------------------------------------------------------------------------
// 2. LIS against an independent O(n^2) dynamic program, exhaustively over
//    every sequence of length <= 8 on alphabet {1..5}.

int lis_dp(const std::vector<int>& a) {
  const int n = static_cast<int>(a.size());
  std::vector<int> len(n, 1);
  int best = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j)
      if (a[j] < a[i]) len[i] = std::max(len[i], len[j] + 1);
    best = std::max(best, len[i]);
  }
  return best;
}

CheckResult criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<int> paper = {1, 2, 4, 2, 6, 5, 7};
  if (lis_length(paper) != 5) {
    return {false, "worked example gave " + std::to_string(lis_length(paper)) + ", want 5"};
  }
  long checked = 0;
  std::vector<int> seq;
  for (int len = 1; len <= 8; ++len) {
    seq.assign(len, 1);
    long total = 1;
    for (int i = 0; i < len; ++i) total *= 5;
    for (long code = 0; code < total; ++code) {
      long c = code;
      for (int i = 0; i < len; ++i) {
        seq[i] = 1 + static_cast<int>(c % 5);
        c /= 5;
      }
      if (lis_length(seq) != lis_dp(seq)) {
        std::string s;
        for (int v : seq) s += std::to_string(v) + " ";
        return {false, "mismatch on [" + s + "]: lis_length " +
                           std::to_string(lis_length(seq)) + " vs dp " +
                           std::to_string(lis_dp(seq))};
      }
      ++checked;
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= 30.0) return {false, "runtime " + fmt(secs) + "s >= 30s"};
  return {true, std::to_string(checked) + " sequences + worked example agree with O(n^2) DP; " +
                    fmt(secs, 2) + "s < 30s"};
}

// ---------------------------------------------------------------------------
// 3. Recognizer: replaying a demo drives k to T in one update; trajectories
//    matching only the first half of the demo stabilize k near T/2.

Trajectory line_trajectory(int T, int dim, double scale) {
  Trajectory tau;
  Eigen::VectorXd dir = Eigen::VectorXd::LinSpaced(dim, 1.0, 2.0).normalized();
  for (int i = 0; i < T; ++i) tau.observations.push_back(dir * (scale * i));
  return tau;
}

CheckResult criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  const CostFunction cost{};
  // Demo replay on real environment demos, T = 64.
  auto env = make_env("carry", 64, 0.05);
  Rng demo_rng(42);
  const DemoSet demos = generate_demos(*env, 3, demo_rng);
  for (double lambda : {0.8, 0.9, 1.0}) {
    ProgressRecognizer rec(demos, cost, lambda);
    const int k = rec.update(demos.trajectories[0]);
    if (k != 64) {
      return {false, "demo replay at lambda " + fmt(lambda) + " reached k=" +
                         std::to_string(k) + " in one update, want 64"};
    }
  }
  // Half-match: agent copies the first T/2 demo frames then freezes, so the
  // best alignment at prefix n is min(n, T/2) and the advance rule
  // min(n, T/2) >= lambda*n stalls at the largest k with lambda*k <= T/2.
  const int T = 16;
  DemoSet lines;
  lines.horizon = T;
  lines.obs_dim = 4;
  lines.trajectories = {line_trajectory(T, 4, 0.1), line_trajectory(T, 4, 0.1)};
  std::string ks;
  for (double lambda : {0.8, 0.9, 1.0}) {
    Trajectory half = line_trajectory(T, 4, 0.1);
    for (int i = T / 2; i < T; ++i) half.observations[i] = half.observations[T / 2 - 1];
    ProgressRecognizer rec(lines, cost, lambda);
    int k = rec.update(half);
    for (int rep = 0; rep < 5; ++rep) {          // stabilizes: repeats do not move k
      const int again = rec.update(half);
      if (again != k) return {false, "k drifted on repeated half-match updates"};
      k = again;
    }
    ks += std::to_string(k) + " ";
    if (std::abs(k - T / 2) > 3) {
      return {false, "half-match at lambda " + fmt(lambda) + " stabilized at k=" +
                         std::to_string(k) + ", outside " + std::to_string(T / 2) + "+-3"};
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= 5.0) return {false, "runtime " + fmt(secs) + "s >= 5s"};
  return {true, "demo replay hits k=64 in one update (lambda 0.8/0.9/1.0); half-match at T=16 "
                "stabilizes at k in {" + ks + "} vs T/2=8; " + fmt(secs, 2) + "s < 5s"};
}

// ---------------------------------------------------------------------------
// 4. Discount schedule identities.

CheckResult criterion4() {
  const double alpha = 0.2, gamma0 = 0.2;
  if (map_discount(1, alpha, gamma0) != alpha) {
    return {false, "f(1) = " + fmt(map_discount(1, alpha, gamma0), 17) + " != alpha"};
  }
  double worst = 0.0, prev = 0.0;
  for (int k = 1; k <= 256; ++k) {
    const double f = map_discount(k, alpha, gamma0);
    const double err = std::abs(std::pow(f, k) - alpha);
    worst = std::max(worst, err);
    if (err > 1e-12) {
      return {false, "k=" + std::to_string(k) + ": |f^k - alpha| = " + fmt(err) + " > 1e-12"};
    }
    if (k > 1 && f <= prev) {
      return {false, "schedule not strictly increasing at k=" + std::to_string(k)};
    }
    prev = f;
  }
  return {true, "|f(k)^k - alpha| <= " + fmt(worst) + " for k=1..256; strictly increasing; "
                "f(1) = alpha = 0.2"};
}

// ---------------------------------------------------------------------------
// 5. Backprop gradients vs central finite differences on random probes.

CheckResult criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(5150);
  struct Arch {
    std::vector<int> widths;
    OutputActivation act;
  };
  const std::vector<Arch> archs = {{{6, 16, 12, 3}, OutputActivation::Tanh},
                                   {{5, 20, 10, 1}, OutputActivation::Identity}};
  for (const auto& a : archs) {
    long params = 0;
    for (size_t l = 0; l + 1 < a.widths.size(); ++l)
      params += a.widths[l + 1] * (a.widths[l] + 1);
    if (params > 1000) return {false, "probe net exceeds 1000 parameters"};
  }
  const double h = 1e-5;
  int probes = 0, attempts = 0;
  double worst_rel = 0.0;
  while (probes < 100) {
    if (++attempts > 10000) return {false, "could not find 100 well-scaled probe gradients"};
    const Arch& arch = archs[probes % 2];
    Mlp net = Mlp::make(arch.widths, arch.act, rng);
    const int in = arch.widths.front(), out = arch.widths.back();
    Eigen::VectorXd x(in), target(out);
    for (int i = 0; i < in; ++i) x(i) = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < out; ++i) target(i) = rng.uniform(-1.0, 1.0);
    const auto loss = [&](const Mlp& m) {
      const Eigen::VectorXd y = m.forward(x);
      return 0.5 * (y - target).squaredNorm();
    };
    // Analytic gradient of the same scalar loss.
    MlpCache cache;
    MlpGrads grads;
    const Eigen::MatrixXd y = net.forward(x, cache);
    net.backward(cache, y.col(0) - target, grads);
    // Random parameter coordinate; weights and biases both probed.
    const int layer = rng.uniform_int(0, static_cast<int>(net.w.size()) - 1);
    double analytic = 0.0;
    double* slot = nullptr;
    if (rng.uniform() < 0.75) {
      const int r = rng.uniform_int(0, static_cast<int>(net.w[layer].rows()) - 1);
      const int c = rng.uniform_int(0, static_cast<int>(net.w[layer].cols()) - 1);
      analytic = grads.w[layer](r, c);
      slot = &net.w[layer](r, c);
    } else {
      const int r = rng.uniform_int(0, static_cast<int>(net.b[layer].size()) - 1);
      analytic = grads.b[layer](r);
      slot = &net.b[layer](r);
    }
    const double saved = *slot;
    *slot = saved + h;
    const double up = loss(net);
    *slot = saved - h;
    const double down = loss(net);
    *slot = saved;
    const double numeric = (up - down) / (2.0 * h);
    if (std::abs(numeric) < 1e-3) continue;  // too flat to resolve 4 digits; re-draw
    const double rel = std::abs(analytic - numeric) / std::abs(numeric);
    worst_rel = std::max(worst_rel, rel);
    if (rel > 1e-4) {
      return {false, "probe " + std::to_string(probes) + ": relative error " + fmt(rel) +
                         " > 1e-4 (analytic " + fmt(analytic, 10) + ", numeric " +
                         fmt(numeric, 10) + ")"};
    }
    ++probes;
  }
  const double secs = seconds_since(t0);
  if (secs >= 10.0) return {false, "runtime " + fmt(secs) + "s >= 10s"};
  return {true, "100 probes across tanh/identity heads; worst relative error " + fmt(worst_rel) +
                    " <= 1e-4; " + fmt(secs, 2) + "s < 10s"};
}

// ---------------------------------------------------------------------------
// 6/7. The headline experiment: ads vs fixed discount on the carry task.

struct RunOutcome {
  std::string mode;
  int seed = 0;
  std::vector<MetricsRow> rows;
  EvalStats final_eval;
  double seconds = 0.0;
  bool aborted = false;
};

RunOutcome run_mode(const std::string& mode, int seed) {
  ExperimentConfig cfg;
  cfg.env = "carry";
  cfg.horizon = 64;
  cfg.total_frames = 150000;
  cfg.schedule_mode = mode;  // ads: lambda 0.9, alpha 0.2; fixed: gamma 0.99 (defaults)
  cfg.seed = seed;
  auto demo_env = make_env(cfg.env, cfg.horizon, cfg.init_jitter);
  Rng demo_rng(9000 + seed);  // same demo set for both modes at a given seed
  const DemoSet demos = generate_demos(*demo_env, cfg.demo_count, demo_rng);
  auto train_env = make_env(cfg.env, cfg.horizon, cfg.init_jitter);
  auto eval_env = make_env(cfg.env, cfg.horizon, cfg.init_jitter);

  const auto t0 = std::chrono::steady_clock::now();
  TrainResult res = train(cfg, demos, *train_env, *eval_env, nullptr);
  RunOutcome out;
  out.mode = mode;
  out.seed = seed;
  out.rows = std::move(res.rows);
  out.seconds = seconds_since(t0);
  out.aborted = res.aborted;
  // Final policy measured on 50 fresh evaluation episodes for a low-variance
  // read of success and of the held-flag (stage) activation rate.
  if (res.agent) {
    Rng eval_rng(777 + seed);
    out.final_eval = evaluate(*res.agent, *eval_env, 50, eval_rng);
  }
  std::cerr << "  [run] " << mode << " seed " << seed << ": success "
            << out.final_eval.success_rate << ", stage " << out.final_eval.stage_rate << ", "
            << fmt(out.seconds, 3) << "s\n";
  return out;
}

CheckResult criterion6(const std::vector<RunOutcome>& runs, double total_secs) {
  double ads_success = 0.0, fixed_success = 0.0, fixed_stage = 0.0;
  int n_ads = 0, n_fixed = 0;
  for (const auto& r : runs) {
    if (r.aborted) return {false, r.mode + " seed " + std::to_string(r.seed) + " aborted"};
    if (r.mode == "ads") {
      ads_success += r.final_eval.success_rate;
      ++n_ads;
    } else {
      fixed_success += r.final_eval.success_rate;
      fixed_stage += r.final_eval.stage_rate;
      ++n_fixed;
    }
  }
  ads_success /= n_ads;
  fixed_success /= n_fixed;
  fixed_stage /= n_fixed;
  const double gap = ads_success - fixed_success;
  std::string detail = "ads mean success " + fmt(ads_success) + ", fixed " + fmt(fixed_success) +
                       " (gap " + fmt(gap) + ", need >= 0.30); fixed held-flag rate " +
                       fmt(fixed_stage) + " (need < 0.20); " + fmt(total_secs / 60.0, 3) +
                       " min for 10 runs";
  if (gap < 0.30) return {false, detail};
  if (fixed_stage >= 0.20) return {false, detail};
  return {true, detail};
}

CheckResult criterion7(const std::vector<RunOutcome>& runs) {
  int min_plateau = 1 << 30;
  for (const auto& r : runs) {
    if (r.mode != "ads") continue;
    const auto& rows = r.rows;
    if (rows.size() < 2) return {false, "ads seed " + std::to_string(r.seed) + ": too few rows"};
    for (size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].gamma < rows[i - 1].gamma) {
        return {false, "ads seed " + std::to_string(r.seed) + ": gamma decreased at row " +
                           std::to_string(i)};
      }
    }
    // Longest run of equal gamma strictly before the curve first reaches its
    // final value ("before final convergence").
    const double final_gamma = rows.back().gamma;
    size_t conv = 0;
    while (conv < rows.size() && rows[conv].gamma != final_gamma) ++conv;
    int longest = 0, cur = 0;
    for (size_t i = 0; i < conv; ++i) {
      cur = (i > 0 && rows[i].gamma == rows[i - 1].gamma) ? cur + 1 : 1;
      longest = std::max(longest, cur);
    }
    if (longest < 10) {
      return {false, "ads seed " + std::to_string(r.seed) + ": longest pre-convergence plateau " +
                         std::to_string(longest) + " eval points < 10"};
    }
    min_plateau = std::min(min_plateau, longest);
  }
  return {true, "all ads runs: gamma non-decreasing; shortest pre-convergence plateau " +
                    std::to_string(min_plateau) + " eval points >= 10"};
}

// ---------------------------------------------------------------------------
// 8. Determinism: identical (config, seed) gives byte-identical metrics.

CheckResult criterion8() {
  ExperimentConfig cfg;
  cfg.env = "carry";
  cfg.horizon = 64;
  cfg.seed = 7;
  cfg.total_frames = 6400;
  const auto run_once = [&cfg]() {
    auto demo_env = make_env(cfg.env, cfg.horizon, cfg.init_jitter);
    Rng demo_rng(9007);
    const DemoSet demos = generate_demos(*demo_env, cfg.demo_count, demo_rng);
    auto train_env = make_env(cfg.env, cfg.horizon, cfg.init_jitter);
    auto eval_env = make_env(cfg.env, cfg.horizon, cfg.init_jitter);
    std::ostringstream metrics;
    train(cfg, demos, *train_env, *eval_env, &metrics);
    return metrics.str();
  };
  const std::string first = run_once();
  const std::string second = run_once();
  if (first != second) return {false, "two identical runs produced different metrics bytes"};
  cfg.seed = 8;
  const std::string other = run_once();
  if (other == first) return {false, "changing the seed left the metrics bytes unchanged"};
  return {true, "identical (config, seed) reproduced " + std::to_string(first.size()) +
                    " metrics bytes exactly; different seed differs"};
}

// ---------------------------------------------------------------------------
// 9. ILfO purity: training touches no success flags and no environment
//    rewards. StepResult carries observations only, and a training
//    environment whose eval_info() throws trains to completion.

class GuardEnv : public Env {
 public:
  explicit GuardEnv(int horizon) : inner_(CarryEnv::Config{.horizon = horizon}) {}
  int obs_dim() const override { return inner_.obs_dim(); }
  int action_dim() const override { return inner_.action_dim(); }
  int horizon() const override { return inner_.horizon(); }
  Eigen::VectorXd reset(Rng& rng) override { return inner_.reset(rng); }
  StepResult step(const Eigen::VectorXd& action) override { return inner_.step(action); }
  EvalInfo eval_info() const override {
    throw std::logic_error("GuardEnv: success flag read during training");
  }
  std::string name() const override { return inner_.name(); }

 private:
  CarryEnv inner_;
};

CheckResult criterion9() {
  ExperimentConfig cfg;
  cfg.env = "carry";
  cfg.horizon = 64;
  cfg.seed = 3;
  cfg.total_frames = 3200;
  auto demo_env = make_env(cfg.env, cfg.horizon, cfg.init_jitter);
  Rng demo_rng(9100);
  const DemoSet demos = generate_demos(*demo_env, cfg.demo_count, demo_rng);
  GuardEnv guard(cfg.horizon);
  auto eval_env = make_env(cfg.env, cfg.horizon, cfg.init_jitter);
  TrainResult res;
  try {
    res = train(cfg, demos, guard, *eval_env, nullptr);
  } catch (const std::logic_error& e) {
    return {false, std::string("training read the success flag: ") + e.what()};
  }
  if (res.aborted) return {false, "guarded run aborted: " + res.abort_reason};
  // The guard itself must be live: evaluation on the same object does trip it.
  bool tripped = false;
  try {
    Rng eval_rng(1);
    evaluate(*res.agent, guard, 1, eval_rng);
  } catch (const std::logic_error&) {
    tripped = true;
  }
  if (!tripped) return {false, "guard env failed to detect an eval_info read"};
  return {true, "full run trains with eval_info() poisoned (and StepResult carries no reward "
                "field); the same guard trips under evaluate()"};
}

void report(int id, const char* name, const CheckResult& r, bool& all_pass) {
  std::cout << (r.pass ? "[PASS]" : "[FAIL]") << " criterion " << id << " (" << name
            << "): " << r.detail << "\n";
  std::cout.flush();
  if (!r.pass) all_pass = false;
}

}  // namespace

int main() {
  bool all_pass = true;
  report(1, "transport objective vs exact LP", criterion1(), all_pass);
  report(2, "LIS vs exhaustive oracle", criterion2(), all_pass);
  report(3, "recognizer replay and half-match", criterion3(), all_pass);
  report(4, "discount schedule identities", criterion4(), all_pass);
  report(5, "gradients vs finite differences", criterion5(), all_pass);

  std::vector<RunOutcome> runs;
  const auto t0 = std::chrono::steady_clock::now();
  for (int seed = 0; seed < 5; ++seed) {
    runs.push_back(run_mode("ads", seed));
    runs.push_back(run_mode("fixed", seed));
  }
  const double total_secs = seconds_since(t0);
  report(6, "ads beats fixed discount on carry", criterion6(runs, total_secs), all_pass);
  report(7, "gamma curves step upward with plateaus", criterion7(runs), all_pass);

  report(8, "byte-identical reruns", criterion8(), all_pass);
  report(9, "training path reads no success signal", criterion9(), all_pass);
  return all_pass ? 0 : 1;
}
