#include "mec/harness.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mec/env.hpp"
#include "mec/plot.hpp"
#include "mec/stats.hpp"

namespace mec {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_d(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key " + key + ": bad number '" + v +
                                "'");
  }
  if (used != v.size())
    throw std::invalid_argument("config key " + key + ": bad number '" + v +
                                "'");
  return out;
}

long long parse_ll(const std::string& key, const std::string& v) {
  const double d = parse_d(key, v);
  const long long out = static_cast<long long>(d);
  if (static_cast<double>(out) != d)
    throw std::invalid_argument("config key " + key + ": expected an integer");
  return out;
}

int parse_i(const std::string& key, const std::string& v) {
  return static_cast<int>(parse_ll(key, v));
}

std::vector<std::string> split_commas(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

// ---------------------------------------------------------------------------
// Per-slot constraint checks. The decode path is built to keep allocations
// feasible; these re-verify it from the outside every step.
// ---------------------------------------------------------------------------

bool action_in_unit_box(const HybridAction& a, int action_count) {
  if (a.discrete.index < 0 || a.discrete.index >= action_count) return false;
  const auto ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  for (double r : a.continuous.offload_frac)
    if (!ok(r)) return false;
  if (!ok(a.continuous.compute_ratio)) return false;
  for (double r : a.continuous.bandwidth_ratio)
    if (!ok(r)) return false;
  return true;
}

bool ledger_within_capacity(const Topology& topo,
                            const ResourceLedger& ledger) {
  constexpr double kTol = 1e-9;
  for (int m = 0; m < topo.num_servers(); ++m) {
    const double rem = ledger.remaining_cpu(m);
    if (rem < -kTol || rem > topo.server(m).cpu_capacity + kTol) return false;
  }
  for (int k = 0; k < topo.num_links(); ++k) {
    const double rem = ledger.remaining_bw(k);
    if (rem < -kTol || rem > topo.link(k).bandwidth_capacity + kTol)
      return false;
  }
  return true;
}

Topology load_topology(const ExperimentConfig& cfg) {
  return cfg.topology_path.empty() ? Topology::default_mesh()
                                   : Topology::from_file(cfg.topology_path);
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (total_steps <= observation_steps)
    throw std::invalid_argument(
        "total_steps must exceed observation_steps");
  if (observation_steps < 0)
    throw std::invalid_argument("observation_steps must be non-negative");
  if (seeds.empty()) throw std::invalid_argument("need at least one seed");
  weights.validate();
  if (decode.kappa <= 0.0 || decode.kappa > 1.0)
    throw std::invalid_argument("kappa must lie in (0,1]");
  if (decode.min_alloc_fraction <= 0.0 || decode.min_alloc_fraction > 1.0)
    throw std::invalid_argument("min_alloc_fraction must lie in (0,1]");
  if (reward_window <= 0 || reward_best_k <= 0 ||
      reward_best_k > reward_window)
    throw std::invalid_argument(
        "reward baseline needs 0 < reward_best_k <= reward_window");
  if (predictor_train_fraction <= 0.0 || predictor_train_fraction >= 1.0)
    throw std::invalid_argument(
        "predictor_train_fraction must lie in (0,1)");
  learner.validate();
  predictor.validate();
}

void ExperimentConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("override '" + assignment +
                                "' is not of the form key=value");
  apply_override(trim(assignment.substr(0, eq)),
                 trim(assignment.substr(eq + 1)));
}

void ExperimentConfig::apply_override(const std::string& key,
                                      const std::string& value) {
  // Scenario.
  if (key == "topology_path") topology_path = value;
  else if (key == "trace_path") trace_path = value;
  else if (key == "out_dir") out_dir = value;
  else if (key == "policy") policy = parse_policy_kind(value);
  else if (key == "total_steps") total_steps = parse_ll(key, value);
  else if (key == "observation_steps") observation_steps = parse_ll(key, value);
  else if (key == "seeds") {
    seeds.clear();
    for (const std::string& s : split_commas(value))
      seeds.push_back(static_cast<std::uint64_t>(parse_ll(key, s)));
  }
  // Objective and decoding.
  else if (key == "lambda_latency") weights.lambda_latency = parse_d(key, value);
  else if (key == "rho_energy") weights.rho_energy = parse_d(key, value);
  else if (key == "kappa") decode.kappa = parse_d(key, value);
  else if (key == "min_alloc_fraction") decode.min_alloc_fraction = parse_d(key, value);
  else if (key == "reward_window") reward_window = parse_i(key, value);
  else if (key == "reward_best_k") reward_best_k = parse_i(key, value);
  // Synthetic trace shape.
  else if (key == "mean_interarrivals") {
    synthetic.mean_interarrival.clear();
    for (const std::string& s : split_commas(value))
      synthetic.mean_interarrival.push_back(parse_d(key, s));
  }
  else if (key == "autocorr") synthetic.autocorr = parse_d(key, value);
  else if (key == "demand_mean") synthetic.demand_mean = parse_d(key, value);
  else if (key == "demand_spread") synthetic.demand_spread = parse_d(key, value);
  else if (key == "interarrival_spread") synthetic.interarrival_spread = parse_d(key, value);
  else if (key == "seasonal_amplitude") synthetic.seasonal_amplitude = parse_d(key, value);
  else if (key == "seasonal_period") synthetic.seasonal_period = parse_i(key, value);
  else if (key == "size_min_mb") synthetic.size_min_mb = parse_d(key, value);
  else if (key == "size_max_mb") synthetic.size_max_mb = parse_d(key, value);
  // Learner.
  else if (key == "learning_rate") learner.learning_rate = parse_d(key, value);
  else if (key == "gamma") learner.gamma = parse_d(key, value);
  else if (key == "tau_dqn") learner.tau_dqn = parse_d(key, value);
  else if (key == "tau_ddpg") learner.tau_ddpg = parse_d(key, value);
  else if (key == "batch_size") learner.batch_size = parse_i(key, value);
  else if (key == "hidden_width") learner.hidden_width = parse_i(key, value);
  else if (key == "agent_buffer_capacity")
    learner.agent_buffer_capacity = static_cast<std::size_t>(parse_ll(key, value));
  else if (key == "global_buffer_capacity")
    learner.global_buffer_capacity = static_cast<std::size_t>(parse_ll(key, value));
  else if (key == "epsilon_initial") learner.epsilon_initial = parse_d(key, value);
  else if (key == "epsilon_decay") learner.epsilon_decay = parse_d(key, value);
  else if (key == "epsilon_floor") learner.epsilon_floor = parse_d(key, value);
  else if (key == "noise_scale_initial") learner.noise_scale_initial = parse_d(key, value);
  else if (key == "noise_decay") learner.noise_decay = parse_d(key, value);
  else if (key == "noise_floor") learner.noise_floor = parse_d(key, value);
  else if (key == "ou_mu") learner.ou_mu = parse_d(key, value);
  else if (key == "ou_sigma") learner.ou_sigma = parse_d(key, value);
  else if (key == "ou_beta") learner.ou_beta = parse_d(key, value);
  else if (key == "global_sync_period") learner.global_sync_period = parse_i(key, value);
  else if (key == "train_rounds") learner.train_rounds = parse_i(key, value);
  // Predictor.
  else if (key == "predictor_model_dim") predictor.model_dim = parse_i(key, value);
  else if (key == "predictor_heads") predictor.attention_heads = parse_i(key, value);
  else if (key == "predictor_layers") predictor.encoder_layers = parse_i(key, value);
  else if (key == "predictor_feedforward_dim") predictor.feedforward_dim = parse_i(key, value);
  else if (key == "predictor_window") predictor.window_length = parse_i(key, value);
  else if (key == "predictor_learning_rate") predictor.learning_rate = parse_d(key, value);
  else if (key == "predictor_epochs") predictor.epochs = parse_i(key, value);
  else if (key == "predictor_batch_size") predictor.batch_size = parse_i(key, value);
  else if (key == "predictor_seed")
    predictor.seed = static_cast<std::uint64_t>(parse_ll(key, value));
  else if (key == "predictor_train_fraction") predictor_train_fraction = parse_d(key, value);
  else if (key == "predictor_checkpoint") predictor_checkpoint = value;
  else
    throw std::invalid_argument("unknown config key: " + key);
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    try {
      cfg.apply_override(t);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Single run
// ---------------------------------------------------------------------------

std::vector<Task> load_events(const ExperimentConfig& cfg,
                              const Topology& topo, std::uint64_t seed) {
  if (!cfg.trace_path.empty()) {
    // File traces are identical across seeds by construction.
    return parse_trace(cfg.trace_path, ParseSchema{}, seed).events;
  }
  SyntheticConfig syn = cfg.synthetic;
  syn.num_servers = topo.num_servers();
  syn.horizon = static_cast<double>(cfg.total_steps) * kSlotSeconds;
  syn.seed = seed;  // policy-independent: paired traces across policies
  syn.validate();
  return generate_synthetic(syn);
}

RunResult run(const ExperimentConfig& cfg, std::uint64_t seed,
              const Predictor* predictor) {
  cfg.validate();
  const Topology topo = load_topology(cfg);
  const int m = topo.num_servers();
  const bool use_forecast = cfg.policy == PolicyKind::CtoTp;
  if (use_forecast && predictor == nullptr)
    throw std::invalid_argument("cto-tp runs need a trained predictor");
  if (use_forecast && predictor->num_servers() != m)
    throw std::invalid_argument("predictor was trained for a different mesh");

  const std::vector<Task> events = load_events(cfg, topo, seed);
  LearnerConfig lcfg = cfg.learner;
  lcfg.seed = seed;
  std::shared_ptr<Policy> policy = make_policy(cfg.policy, topo, lcfg);
  HybridLearner* learner = policy->learner();

  ResourceLedger ledger(topo);
  RewardBaseline baseline(cfg.reward_window, cfg.reward_best_k);
  const StepParams step_params{cfg.decode};
  const int action_count = discrete_action_count(m);
  const int cont_dim = continuous_action_dim(topo);

  RunResult result;
  result.policy = policy;
  std::optional<MetricsWriter> writer;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    result.metrics_path = cfg.out_dir + "/metrics.csv";
    writer.emplace(result.metrics_path, m);
  }

  // Incrementally maintained per-server event history for the forecaster;
  // forecasts are recomputed only when a server's history grows.
  std::vector<EventSeries> history(m);
  std::vector<double> last_arrival(m, 0.0);
  Prediction forecast_cache(m);
  std::vector<std::size_t> forecast_len(m, static_cast<std::size_t>(-1));

  bool has_pending = false;
  Transition pending;
  std::size_t next_event = 0;

  for (long long slot = 0; slot < cfg.total_steps; ++slot) {
    const double now = static_cast<double>(slot) * kSlotSeconds;
    policy->set_training(slot >= cfg.observation_steps);

    std::vector<Task> arrivals;
    while (next_event < events.size() &&
           events[next_event].arrival_time < now + kSlotSeconds)
      arrivals.push_back(events[next_event++]);

    MetricsRow row;
    row.step = slot;
    row.slot_start = now;

    if (arrivals.empty()) {
      // Nothing arrived: releases still happen, but there is no decision,
      // no transition, and no training this slot.
      const SlotOutcome out = step(topo, ledger, {}, {}, now, step_params);
      row.skipped = true;
      row.utilisation = out.utilisation;
      row.epsilon = learner ? learner->epsilon() : 0.0;
      row.noise_scale = learner ? learner->noise_scale() : 0.0;
      ++result.diag.skipped_slots;
      result.rows.push_back(row);
      if (writer) writer->write(result.rows.back());
      continue;
    }

    ledger.advance(now);
    std::vector<double> demands(m, 0.0), payloads(m, 0.0);
    for (const Task& task : arrivals) {
      demands[task.origin_server] += task.compute_demand;
      payloads[task.origin_server] += task.payload_size;
      EventSeries& h = history[task.origin_server];
      h.interarrival.push_back(task.arrival_time -
                               last_arrival[task.origin_server]);
      h.demand.push_back(task.compute_demand);
      last_arrival[task.origin_server] = task.arrival_time;
    }

    Prediction forecast;
    if (use_forecast) {
      for (int s = 0; s < m; ++s)
        if (history[s].interarrival.size() != forecast_len[s]) {
          forecast_cache[s] = predictor->predict_next(s, history[s]);
          forecast_len[s] = history[s].interarrival.size();
        }
      forecast = forecast_cache;
    }
    const std::vector<float> critic_state =
        build_critic_state(topo, ledger, demands, forecast, use_forecast);
    std::vector<std::vector<float>> actor_states(m);
    for (int s = 0; s < m; ++s)
      actor_states[s] = build_actor_state(topo, ledger, s, demands[s],
                                          payloads[s]);

    if (has_pending) {
      pending.next_critic_state = critic_state;
      pending.next_actor_states = actor_states;
      policy->learn(pending);
      ++result.diag.transitions_learned;
      if (learner && result.diag.first_gradient_step < 0 &&
          learner->gradient_steps() > 0)
        result.diag.first_gradient_step = slot;
    }

    Transition next_pending;
    next_pending.critic_state = critic_state;
    next_pending.actor_states = actor_states;
    next_pending.discrete.assign(m, 0);
    next_pending.continuous.assign(m, std::vector<float>(cont_dim, 0.0f));
    next_pending.active.assign(m, 0);

    std::map<int, HybridAction> actions;
    for (int s = 0; s < m; ++s) {
      if (demands[s] <= 0.0) continue;
      HybridAction a = policy->observe(s, actor_states[s]);
      ++result.diag.constraint_checks;
      if (!action_in_unit_box(a, action_count))
        ++result.diag.constraint_violations;
      next_pending.discrete[s] = a.discrete.index;
      next_pending.continuous[s] = flatten_continuous(topo, a.continuous);
      next_pending.active[s] = 1;
      actions.emplace(s, std::move(a));
    }

    const SlotOutcome out =
        step(topo, ledger, arrivals, actions, now, step_params);
    ++result.diag.constraint_checks;
    if (!ledger_within_capacity(topo, ledger) || !ledger.check_conservation())
      ++result.diag.constraint_violations;

    baseline.update(out.total_latency, out.total_energy);
    const double reward =
        compute_reward(out.total_latency, out.total_energy, baseline,
                       cfg.weights);
    next_pending.reward = static_cast<float>(reward);
    pending = std::move(next_pending);
    has_pending = true;

    row.reward = reward;
    row.latency = out.total_latency;
    row.energy = out.total_energy;
    row.utilisation = out.utilisation;
    row.epsilon = learner ? learner->epsilon() : 0.0;
    row.noise_scale = learner ? learner->noise_scale() : 0.0;
    ++result.diag.active_slots;
    result.rows.push_back(row);
    if (writer) writer->write(result.rows.back());
  }

  result.diag.total_slots = cfg.total_steps;
  if (learner && !cfg.out_dir.empty())
    learner->save(cfg.out_dir + "/learner.bin");
  return result;
}

// ---------------------------------------------------------------------------
// Predictor preparation
// ---------------------------------------------------------------------------

PredictorBundle prepare_predictor(const ExperimentConfig& cfg,
                                  const Topology& topo, std::ostream* log) {
  // The training stream is seeded apart from every run seed so no run
  // replays data the forecaster was fitted on (file traces fall back to a
  // chronological split of the one stream available).
  const std::uint64_t trace_seed = cfg.seeds.front() ^ 0x517cc1b727220a95ULL;
  const std::vector<Task> events = load_events(cfg, topo, trace_seed);
  const std::vector<EventSeries> all =
      per_server_series(events, topo.num_servers());

  std::vector<EventSeries> train(all.size()), eval(all.size());
  for (std::size_t s = 0; s < all.size(); ++s) {
    const std::size_t n = all[s].interarrival.size();
    const std::size_t cut = std::max<std::size_t>(
        1, static_cast<std::size_t>(cfg.predictor_train_fraction *
                                    static_cast<double>(n)));
    train[s].interarrival.assign(all[s].interarrival.begin(),
                                 all[s].interarrival.begin() + cut);
    train[s].demand.assign(all[s].demand.begin(), all[s].demand.begin() + cut);
    eval[s].interarrival.assign(all[s].interarrival.begin() + cut,
                                all[s].interarrival.end());
    eval[s].demand.assign(all[s].demand.begin() + cut, all[s].demand.end());
  }

  PredictorBundle bundle;
  const bool have_checkpoint =
      !cfg.predictor_checkpoint.empty() &&
      std::filesystem::exists(cfg.predictor_checkpoint);
  if (have_checkpoint) {
    if (log)
      *log << "predictor: loading " << cfg.predictor_checkpoint << "\n";
    bundle.predictor = Predictor::load(cfg.predictor_checkpoint);
  } else {
    if (log) *log << "predictor: training on trace seed " << trace_seed << "\n";
    bundle.predictor = Predictor::train(train, cfg.predictor);
    if (!cfg.predictor_checkpoint.empty()) {
      const auto parent =
          std::filesystem::path(cfg.predictor_checkpoint).parent_path();
      if (!parent.empty()) std::filesystem::create_directories(parent);
      bundle.predictor.save(cfg.predictor_checkpoint);
    }
  }
  bundle.scores = bundle.predictor.evaluate(eval);
  if (log)
    for (std::size_t s = 0; s < bundle.scores.size(); ++s)
      *log << "predictor: server " << s << " held-out r2 interarrival="
           << bundle.scores[s].interarrival
           << " demand=" << bundle.scores[s].demand << "\n";
  return bundle;
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

namespace {

std::vector<double> active_rewards(const std::vector<MetricsRow>& rows) {
  std::vector<double> out;
  for (const MetricsRow& row : rows)
    if (!row.skipped) out.push_back(row.reward);
  return out;
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(
      static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

ComparisonResult compare(const ExperimentConfig& cfg,
                         const std::vector<PolicyKind>& kinds,
                         std::ostream* log) {
  cfg.validate();
  if (kinds.empty())
    throw std::invalid_argument("nothing to compare: no policies given");
  const Topology topo = load_topology(cfg);

  std::shared_ptr<PredictorBundle> bundle;
  if (std::find(kinds.begin(), kinds.end(), PolicyKind::CtoTp) != kinds.end())
    bundle = std::make_shared<PredictorBundle>(
        prepare_predictor(cfg, topo, log));

  ComparisonResult result;
  result.seeds = cfg.seeds;
  result.predictor_bundle = bundle;
  const bool emit = !cfg.out_dir.empty();
  if (emit) std::filesystem::create_directories(cfg.out_dir);

  std::vector<std::vector<std::vector<double>>> curves(kinds.size());
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const PolicyKind kind = kinds[i];
    PolicySummary summary;
    summary.kind = kind;
    for (std::uint64_t seed : cfg.seeds) {
      ExperimentConfig rc = cfg;
      rc.policy = kind;
      rc.out_dir = emit ? cfg.out_dir + "/" + std::to_string(i) + "_" +
                              policy_kind_name(kind) + "/seed_" +
                              std::to_string(seed)
                        : "";
      const auto t0 = std::chrono::steady_clock::now();
      RunResult rr =
          run(rc, seed, bundle ? &bundle->predictor : nullptr);
      const double dt =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      // Summaries come from what actually landed on disk, so recomputing
      // them from the CSV reproduces the emitted numbers exactly.
      const std::vector<MetricsRow> rows =
          rr.metrics_path.empty() ? rr.rows
                                  : read_metrics_csv(rr.metrics_path);
      RunRecord rec;
      rec.kind = kind;
      rec.seed = seed;
      rec.final_reward = final_window_reward(rows);
      rec.final_latency = final_window_latency(rows);
      rec.final_energy = final_window_energy(rows);
      rec.mean_latency = mean_active_latency(rows);
      rec.mean_energy = mean_active_energy(rows);
      rec.diag = rr.diag;
      rec.metrics_path = rr.metrics_path;
      result.runs.push_back(rec);
      summary.final_rewards.push_back(rec.final_reward);
      summary.latencies.push_back(rec.final_latency);
      summary.energies.push_back(rec.final_energy);
      curves[i].push_back(smooth(active_rewards(rows), 20));
      if (log)
        *log << policy_kind_name(kind) << " seed " << seed
             << ": final reward " << rec.final_reward << ", latency "
             << rec.final_latency << " s, energy " << rec.final_energy
             << " J (" << dt << " s wall)\n";
    }
    const auto sd = [](const std::vector<double>& xs) {
      return xs.size() < 2 ? 0.0 : sample_sd(xs);
    };
    summary.reward_mean = mean(summary.final_rewards);
    summary.reward_sd = sd(summary.final_rewards);
    summary.latency_mean = mean(summary.latencies);
    summary.latency_sd = sd(summary.latencies);
    summary.energy_mean = mean(summary.energies);
    summary.energy_sd = sd(summary.energies);
    result.policies.push_back(summary);
  }

  // Seed-averaged smoothed reward curve per policy (truncated to the
  // shortest seed so every point averages the same number of runs).
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    std::size_t len = curves[i].front().size();
    for (const auto& c : curves[i]) len = std::min(len, c.size());
    std::vector<double> avg(len, 0.0);
    for (const auto& c : curves[i])
      for (std::size_t j = 0; j < len; ++j) avg[j] += c[j];
    for (double& v : avg) v /= static_cast<double>(curves[i].size());
    result.mean_curves.push_back(std::move(avg));
  }

  if (emit) {
    result.runs_path = cfg.out_dir + "/runs.csv";
    std::FILE* f = std::fopen(result.runs_path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write " + result.runs_path);
    std::fprintf(f,
                 "policy,seed,final_reward,final_latency,final_energy,"
                 "mean_latency,mean_energy,"
                 "active_slots,skipped_slots,first_gradient_step,"
                 "constraint_checks,constraint_violations\n");
    for (const RunRecord& r : result.runs)
      std::fprintf(f,
                   "%s,%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%lld,%lld,%lld,"
                   "%lld,%lld\n",
                   policy_kind_name(r.kind).c_str(),
                   static_cast<unsigned long long>(r.seed), r.final_reward,
                   r.final_latency, r.final_energy, r.mean_latency,
                   r.mean_energy, r.diag.active_slots, r.diag.skipped_slots,
                   r.diag.first_gradient_step, r.diag.constraint_checks,
                   r.diag.constraint_violations);
    std::fclose(f);

    result.summary_path = cfg.out_dir + "/summary.csv";
    f = std::fopen(result.summary_path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write " + result.summary_path);
    std::fprintf(f,
                 "policy,reward_mean,reward_sd,latency_mean,latency_sd,"
                 "energy_mean,energy_sd\n");
    for (const PolicySummary& p : result.policies)
      std::fprintf(f, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                   policy_kind_name(p.kind).c_str(), p.reward_mean,
                   p.reward_sd, p.latency_mean, p.latency_sd, p.energy_mean,
                   p.energy_sd);
    std::fclose(f);

    std::vector<Series> series;
    for (std::size_t i = 0; i < kinds.size(); ++i)
      series.push_back(Series{upper(policy_kind_name(kinds[i])),
                              result.mean_curves[i], 0x1F77B4});
    result.reward_plot_path = cfg.out_dir + "/reward.png";
    plot_lines(result.reward_plot_path, "SMOOTHED TEAM REWARD",
               "ACTIVE SLOT", "REWARD", series);

    std::vector<BarPanel> panels(2);
    panels[0].title = "AVG LATENCY (S)";
    panels[1].title = "AVG ENERGY (J)";
    for (const PolicySummary& p : result.policies) {
      panels[0].labels.push_back(upper(policy_kind_name(p.kind)));
      panels[0].values.push_back(p.latency_mean);
      panels[1].labels.push_back(upper(policy_kind_name(p.kind)));
      panels[1].values.push_back(p.energy_mean);
    }
    result.bars_plot_path = cfg.out_dir + "/latency_energy.png";
    plot_bar_panels(result.bars_plot_path, panels);
  }
  return result;
}

}  // namespace mec
