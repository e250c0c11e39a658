#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "mec/actions.hpp"
#include "mec/agents.hpp"
#include "mec/baselines.hpp"
#include "mec/metrics.hpp"
#include "mec/predictor.hpp"
#include "mec/trace.hpp"
#include "mec/types.hpp"

namespace mec {

// Everything a seeded experiment needs, loadable from a flat key=value file
// with the same keys available as CLI overrides. Every tunable constant in
// the system appears here by name.
struct ExperimentConfig {
  // Scenario.
  std::string topology_path;  // empty -> built-in 3-server mesh
  std::string trace_path;     // empty -> synthetic generator
  std::string out_dir;        // empty -> keep results in memory only
  PolicyKind policy = PolicyKind::CtoTp;
  long long total_steps = 20000;
  long long observation_steps = 5000;  // store-only warmup slots
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

  // Objective and decoding.
  ObjectiveWeights weights;  // lambda_latency / rho_energy
  DecodeParams decode;       // kappa / min_alloc_fraction
  int reward_window = 100;   // sliding window feeding the reward baseline
  int reward_best_k = 5;     // baseline averages the k smallest entries

  // Synthetic trace shape (ignored when trace_path is set). The number of
  // streams, the horizon, and the seed are derived per run.
  SyntheticConfig synthetic;

  // Learning and forecasting.
  LearnerConfig learner;  // per-run seed overrides learner.seed
  PredictorConfig predictor;
  double predictor_train_fraction = 0.5;  // chronological split per server
  std::string predictor_checkpoint;       // load if present, else save here

  void validate() const;
  static ExperimentConfig from_file(const std::string& path);
  // "key=value" or "key = value"; unknown keys throw.
  void apply_override(const std::string& assignment);
  void apply_override(const std::string& key, const std::string& value);
};

struct RunDiagnostics {
  long long total_slots = 0;
  long long active_slots = 0;
  long long skipped_slots = 0;
  long long transitions_learned = 0;  // completed transitions handed over
  long long first_gradient_step = -1;  // slot index, -1 when none happened
  long long constraint_checks = 0;
  long long constraint_violations = 0;
};

struct RunResult {
  std::vector<MetricsRow> rows;  // one per slot, skipped ones flagged
  RunDiagnostics diag;
  std::string metrics_path;  // empty when out_dir was empty
  std::shared_ptr<Policy> policy;
};

// One seeded episode: slots of one second, empty slots skipped, actions
// stored from the start, gradient updates only once the observation phase is
// over. The trace depends only on (config, seed), never on the policy, so
// runs with different policies and the same seed are paired.
// A cto-tp run requires a trained predictor; other policies ignore it.
RunResult run(const ExperimentConfig& cfg, std::uint64_t seed,
              const Predictor* predictor = nullptr);

// The trace a run with this seed will consume (synthetic or file-based).
std::vector<Task> load_events(const ExperimentConfig& cfg,
                              const Topology& topo, std::uint64_t seed);

// Trains (or loads) the forecaster used by cto-tp runs, on a trace stream
// disjoint from every run seed; returns held-out scores alongside.
struct PredictorBundle {
  Predictor predictor;
  std::vector<Predictor::SeriesScores> scores;  // per server, held-out
};
PredictorBundle prepare_predictor(const ExperimentConfig& cfg,
                                  const Topology& topo, std::ostream* log);

struct RunRecord {
  PolicyKind kind = PolicyKind::Fa;
  std::uint64_t seed = 0;
  double final_reward = 0.0;   // smoothed tail mean, see final_window_reward
  double final_latency = 0.0;  // trailing-window mean: the converged policy
  double final_energy = 0.0;
  double mean_latency = 0.0;  // over all non-skipped slots (diagnostic)
  double mean_energy = 0.0;
  RunDiagnostics diag;
  std::string metrics_path;
};

// Per-seed values and their aggregates, all over the final window: learned
// policies spend the early run exploring, so cross-policy comparisons use
// the converged span.
struct PolicySummary {
  PolicyKind kind = PolicyKind::Fa;
  std::vector<double> final_rewards;  // per seed, in seed order
  std::vector<double> latencies;
  std::vector<double> energies;
  double reward_mean = 0.0, reward_sd = 0.0;
  double latency_mean = 0.0, latency_sd = 0.0;
  double energy_mean = 0.0, energy_sd = 0.0;
};

struct ComparisonResult {
  std::vector<std::uint64_t> seeds;
  std::vector<RunRecord> runs;          // kind-major, seed-minor
  std::vector<PolicySummary> policies;  // in requested order
  // Smoothed reward curve per policy, averaged across seeds.
  std::vector<std::vector<double>> mean_curves;
  // Set when a forecast-fed policy took part; holds the shared forecaster
  // and its held-out scores.
  std::shared_ptr<PredictorBundle> predictor_bundle;
  std::string summary_path, runs_path, reward_plot_path, bars_plot_path;
};

// Runs every (policy, seed) pair on paired traces and aggregates. When
// cfg.out_dir is set, emits per-run metrics.csv files plus summary.csv,
// runs.csv, reward.png, and latency_energy.png; the summary statistics are
// recomputed from the metrics files themselves. `log` (may be null) receives
// one progress line per run.
ComparisonResult compare(const ExperimentConfig& cfg,
                         const std::vector<PolicyKind>& kinds,
                         std::ostream* log = nullptr);

}  // namespace mec
