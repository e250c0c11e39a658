#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "mec/types.hpp"

namespace mec {

// One CSV row per simulation slot. Slots without arrivals are logged with the
// skipped flag set and zero reward/latency/energy, so the file is a complete
// timeline and downstream statistics can filter on the flag.
struct MetricsRow {
  long long step = 0;       // slot index, monotone from 0
  double slot_start = 0.0;  // seconds
  double reward = 0.0;
  double latency = 0.0;  // summed per-origin worst-path latency, seconds
  double energy = 0.0;   // summed server energy, joules
  std::vector<double> utilisation;  // mean reserved-cpu fraction per server
  double epsilon = 0.0;             // exploration state at decision time
  double noise_scale = 0.0;
  bool skipped = false;
};

// Streams rows to disk as they are produced so a crashed run still leaves a
// usable prefix. Floating-point fields print with %.17g, which round-trips
// doubles exactly: rerunning a seeded experiment reproduces the bytes.
class MetricsWriter {
 public:
  MetricsWriter(const std::string& path, int num_servers);
  ~MetricsWriter();
  MetricsWriter(const MetricsWriter&) = delete;
  MetricsWriter& operator=(const MetricsWriter&) = delete;

  void write(const MetricsRow& row);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  int num_servers_;
  std::FILE* file_;
};

// Parses a file written by MetricsWriter; throws on malformed input.
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

// Mean of the trailing-smoothed reward over the last `fraction` of the
// non-skipped rows: the convergence value read off a smoothed curve.
double final_window_reward(const std::vector<MetricsRow>& rows,
                           int smooth_window = 20, double fraction = 0.1);

// Mean latency / energy over the non-skipped rows.
double mean_active_latency(const std::vector<MetricsRow>& rows);
double mean_active_energy(const std::vector<MetricsRow>& rows);

// Mean latency / energy over the last `fraction` of the non-skipped rows —
// the converged-policy evaluation span matching final_window_reward.
double final_window_latency(const std::vector<MetricsRow>& rows,
                            double fraction = 0.1);
double final_window_energy(const std::vector<MetricsRow>& rows,
                           double fraction = 0.1);

// Sum over non-skipped rows of lambda * latency + rho * energy.
double summarize_objective(const std::vector<MetricsRow>& rows,
                           const ObjectiveWeights& weights);

}  // namespace mec
