// Command-line front end: demo generation, training, policy evaluation, and
// cross-run reporting. Exit codes: 0 ok, 1 usage/config error, 2 numerical
// abort during training.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "ilfo/ilfo.hpp"

namespace {

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ilfo::ExperimentConfig resolve_config(const std::string& config_path,
                                      const std::map<std::string, std::string>& overrides) {
  ilfo::ExperimentConfig cfg;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw CliError("cannot open config file: " + config_path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    cfg = ilfo::parse_config(text);
  }
  for (const auto& [key, value] : overrides) ilfo::set_config_value(cfg, key, value);
  cfg.validate();
  return cfg;
}

void save_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

int run_gen_demos(const ilfo::ExperimentConfig& cfg, const std::string& out_path) {
  auto env = ilfo::make_env(cfg.env, cfg.horizon, cfg.init_jitter);
  ilfo::Rng rng(cfg.seed);
  ilfo::DemoSet demos = ilfo::generate_demos(*env, cfg.demo_count, rng);
  ilfo::save_demo_set(demos, out_path);
  std::cout << "wrote " << demos.trajectories.size() << " demos (horizon " << demos.horizon
            << ", obs_dim " << demos.obs_dim << ") to " << out_path << "\n";
  return 0;
}

int run_train(const ilfo::ExperimentConfig& cfg, const std::string& demos_path,
              const std::string& out_path, const std::string& policy_path) {
  ilfo::DemoSet demos = ilfo::load_demo_set(demos_path);
  auto train_env = ilfo::make_env(cfg.env, cfg.horizon, cfg.init_jitter);
  auto eval_env = ilfo::make_env(cfg.env, cfg.horizon, cfg.init_jitter);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
  ilfo::TrainResult result = ilfo::train(cfg, demos, *train_env, *eval_env, &out);
  if (!out) throw std::runtime_error("write failed: " + out_path);
  if (!policy_path.empty() && result.agent) save_json(policy_path, result.agent->to_json());
  if (result.aborted) {
    std::cerr << "training aborted at frame " << result.frames << ": " << result.abort_reason
              << "\n";
    return 2;
  }
  std::cout << "trained " << result.frames << " frames; final success rate "
            << ilfo::format_double(result.final_eval.success_rate) << "\n";
  return 0;
}

int run_eval(const ilfo::ExperimentConfig& cfg, const std::string& policy_path, int episodes) {
  ilfo::Td3Agent agent = ilfo::Td3Agent::from_json(load_json(policy_path));
  auto env = ilfo::make_env(cfg.env, cfg.horizon, cfg.init_jitter);
  if (env->obs_dim() != agent.params().obs_dim || env->action_dim() != agent.params().action_dim) {
    throw CliError("policy dimensions do not match env '" + cfg.env + "'");
  }
  ilfo::Rng rng(cfg.seed);
  ilfo::EvalStats stats = ilfo::evaluate(agent, *env, episodes, rng);
  std::cout << "success_rate " << ilfo::format_double(stats.success_rate) << "\n";
  std::cout << "stage_rate " << ilfo::format_double(stats.stage_rate) << "\n";
  return 0;
}

int run_report(const std::vector<std::string>& files, const std::string& prefix) {
  std::vector<ilfo::RunSeries> runs;
  for (const auto& f : files) runs.push_back(ilfo::load_run(f));
  std::cout << ilfo::render_summary(ilfo::summarize_runs(runs));
  for (const auto& path : ilfo::write_report(runs, prefix)) std::cout << "wrote " << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"imitation-from-observation trainer with a scheduled discount"};
  app.require_subcommand(1);

  // Every config key doubles as a CLI override on the subcommands that take a
  // config; values go through the same parser as config files.
  struct ConfigCli {
    std::string config_path;
    std::map<std::string, std::string> raw;
    std::vector<std::pair<std::string, CLI::Option*>> opts;
    std::map<std::string, std::string> overrides() const {
      std::map<std::string, std::string> given;
      for (const auto& [name, opt] : opts)
        if (opt->count() > 0) given[name] = raw.at(name);
      return given;
    }
  };
  std::map<CLI::App*, ConfigCli> config_cli;
  auto add_config_options = [&](CLI::App* cmd, bool require_seed) {
    ConfigCli& cc = config_cli[cmd];
    cmd->add_option("--config", cc.config_path, "config file (key=value lines)");
    for (const auto& field : ilfo::detail::config_fields()) {
      CLI::Option* o = cmd->add_option("--" + field.name, cc.raw[field.name], field.doc);
      if (require_seed && field.name == "seed") o->required();
      cc.opts.emplace_back(field.name, o);
    }
  };
  auto config_of = [&](CLI::App* cmd) {
    const ConfigCli& cc = config_cli.at(cmd);
    return resolve_config(cc.config_path, cc.overrides());
  };

  auto* gen = app.add_subcommand("gen-demos", "generate scripted demonstrations");
  std::string gen_out = "demos.json";
  add_config_options(gen, false);
  gen->add_option("--out", gen_out, "output demo file");

  auto* tr = app.add_subcommand("train", "train a policy against a demo set");
  std::string tr_demos, tr_out = "metrics.csv", tr_policy;
  tr->add_option("--demos", tr_demos, "demo file from gen-demos")->required();
  tr->add_option("--out", tr_out, "metrics csv output path");
  tr->add_option("--save-policy", tr_policy, "write the final policy checkpoint here");
  add_config_options(tr, true);

  auto* ev = app.add_subcommand("eval", "evaluate a saved policy");
  std::string ev_policy;
  int ev_episodes = 20;
  ev->add_option("--policy", ev_policy, "policy checkpoint from train")->required();
  ev->add_option("--episodes", ev_episodes, "evaluation episodes");
  add_config_options(ev, false);

  auto* rp = app.add_subcommand("report", "summarize metrics files and plot curves");
  std::vector<std::string> rp_files;
  std::string rp_prefix = "report";
  rp->add_option("files", rp_files, "metrics csv files")->required();
  rp->add_option("--out", rp_prefix, "output path prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return run_gen_demos(config_of(gen), gen_out);
    if (tr->parsed()) return run_train(config_of(tr), tr_demos, tr_out, tr_policy);
    if (ev->parsed()) return run_eval(config_of(ev), ev_policy, ev_episodes);
    if (rp->parsed()) return run_report(rp_files, rp_prefix);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
