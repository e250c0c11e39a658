// Command-line front end: seeded single runs, multi-policy comparisons, and
// standalone forecaster training.
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mec/harness.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string policy;
  std::string out_dir;
  long long steps = -1;
  long long seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--config", args->config_path,
                  "experiment config file (key = value lines)");
  cmd->add_option("--set", args->overrides,
                  "override a config key, e.g. --set batch_size=128")
      ->take_all();
  cmd->add_option("--out", args->out_dir, "output directory");
  cmd->add_option("--steps", args->steps, "override total_steps");
}

mec::ExperimentConfig build_config(const CommonArgs& args) {
  mec::ExperimentConfig cfg;
  if (!args.config_path.empty())
    cfg = mec::ExperimentConfig::from_file(args.config_path);
  for (const std::string& assignment : args.overrides)
    cfg.apply_override(assignment);
  if (!args.policy.empty()) cfg.apply_override("policy", args.policy);
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.steps >= 0)
    cfg.apply_override("total_steps", std::to_string(args.steps));
  if (args.seed >= 0)
    cfg.apply_override("seeds", std::to_string(args.seed));
  return cfg;
}

int do_run(const CommonArgs& args) {
  mec::ExperimentConfig cfg = build_config(args);
  cfg.validate();
  const std::uint64_t seed = cfg.seeds.front();

  std::optional<mec::PredictorBundle> bundle;
  const mec::Predictor* predictor = nullptr;
  if (cfg.policy == mec::PolicyKind::CtoTp) {
    const mec::Topology topo = cfg.topology_path.empty()
                                   ? mec::Topology::default_mesh()
                                   : mec::Topology::from_file(cfg.topology_path);
    bundle.emplace(mec::prepare_predictor(cfg, topo, &std::cout));
    predictor = &bundle->predictor;
  }

  const mec::RunResult rr = mec::run(cfg, seed, predictor);
  const std::vector<mec::MetricsRow> rows =
      rr.metrics_path.empty() ? rr.rows
                              : mec::read_metrics_csv(rr.metrics_path);
  std::cout << mec::policy_kind_name(cfg.policy) << " seed " << seed
            << ": final reward " << mec::final_window_reward(rows)
            << ", final latency " << mec::final_window_latency(rows)
            << " s, final energy " << mec::final_window_energy(rows)
            << " J, mean latency " << mec::mean_active_latency(rows)
            << " s, mean energy " << mec::mean_active_energy(rows)
            << " J, objective " << mec::summarize_objective(rows, cfg.weights)
            << "\n";
  std::cout << "active slots " << rr.diag.active_slots << ", skipped "
            << rr.diag.skipped_slots << ", constraint violations "
            << rr.diag.constraint_violations << "\n";
  if (!rr.metrics_path.empty())
    std::cout << "metrics: " << rr.metrics_path << "\n";
  return 0;
}

int do_compare(const CommonArgs& args) {
  mec::ExperimentConfig cfg = build_config(args);
  cfg.validate();
  const std::vector<mec::PolicyKind> kinds = {
      mec::PolicyKind::CtoTp, mec::PolicyKind::Cto, mec::PolicyKind::Fa,
      mec::PolicyKind::Ra};
  const mec::ComparisonResult cmp = mec::compare(cfg, kinds, &std::cout);
  std::cout << "\npolicy      reward            latency (s)       energy (J)\n";
  for (const mec::PolicySummary& p : cmp.policies)
    std::printf("%-10s %8.4f +- %6.4f %8.3f +- %6.3f %9.2f +- %7.2f\n",
                mec::policy_kind_name(p.kind).c_str(), p.reward_mean,
                p.reward_sd, p.latency_mean, p.latency_sd, p.energy_mean,
                p.energy_sd);
  if (!cmp.summary_path.empty())
    std::cout << "\nartifacts: " << cmp.summary_path << ", " << cmp.runs_path
              << ", " << cmp.reward_plot_path << ", " << cmp.bars_plot_path
              << "\n";
  return 0;
}

int do_train_predictor(const CommonArgs& args) {
  mec::ExperimentConfig cfg = build_config(args);
  cfg.validate();
  if (cfg.predictor_checkpoint.empty() && !cfg.out_dir.empty())
    cfg.predictor_checkpoint = cfg.out_dir + "/predictor.bin";
  const mec::Topology topo = cfg.topology_path.empty()
                                 ? mec::Topology::default_mesh()
                                 : mec::Topology::from_file(cfg.topology_path);
  const mec::PredictorBundle bundle =
      mec::prepare_predictor(cfg, topo, &std::cout);
  if (!cfg.predictor_checkpoint.empty())
    std::cout << "checkpoint: " << cfg.predictor_checkpoint << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cooperative edge offloading simulator"};
  app.require_subcommand(1);

  CommonArgs run_args, cmp_args, pred_args;
  CLI::App* run_cmd =
      app.add_subcommand("run", "one seeded run of a single policy");
  add_common(run_cmd, &run_args);
  run_cmd->add_option("--policy", run_args.policy,
                      "cto-tp, cto, fa, or ra");
  run_cmd->add_option("--seed", run_args.seed, "run seed");

  CLI::App* cmp_cmd = app.add_subcommand(
      "compare", "run all four policies over the configured seeds");
  add_common(cmp_cmd, &cmp_args);

  CLI::App* pred_cmd = app.add_subcommand(
      "train-predictor", "train and score the arrival forecaster");
  add_common(pred_cmd, &pred_args);

  try {
    app.parse(argc, argv);
    if (run_cmd->parsed()) return do_run(run_args);
    if (cmp_cmd->parsed()) return do_compare(cmp_args);
    if (pred_cmd->parsed()) return do_train_predictor(pred_args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
