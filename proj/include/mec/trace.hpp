#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mec/types.hpp"

namespace mec {

// Column mapping plus demand rescale for ingesting foreign trace schemas.
// Defaults describe the canonical CSV, which ingests as an identity.
struct ParseSchema {
  std::string server_col = "server_id";
  std::string time_col = "arrival_time_s";
  std::string demand_col = "cpu_gigacycles";
  std::string size_col = "size_mb";  // absent from the file -> sizes drawn
  // gigacycles = demand_offset + demand_scale * raw_column_value
  double demand_offset = 0.0;
  double demand_scale = 1.0;
  double size_min_mb = 5.0;  // draw range when the size column is missing
  double size_max_mb = 20.0;

  // Keys: server_col, time_col, demand_col, size_col, demand_offset,
  // demand_scale (the last two parsed as numbers). Unknown keys are errors.
  static ParseSchema from_map(const std::map<std::string, std::string>& kv);
  // Cluster-style schema: normalized CPU units mapped onto [1, 100] Gc.
  static ParseSchema cluster_normalized();
};

struct ParseResult {
  std::vector<Task> events;  // sorted by (arrival_time, server_id)
  int reordered = 0;         // rows that were out of order within their server
  int sized_randomly = 0;    // rows that drew a payload size
};

// Reads a CSV trace. Missing required columns raise an error naming the
// column; out-of-order rows are sorted and counted; a missing size column
// falls back to uniform draws in [size_min_mb, size_max_mb] under `seed`.
ParseResult parse_trace(const std::string& path, const ParseSchema& schema = {},
                        std::uint64_t seed = 0);

// Canonical CSV, doubles at full precision so a reparse is bit-exact.
void write_trace(const std::string& path, const std::vector<Task>& events);

// Per-server stream generator. Inter-arrivals and demands both follow
//   value = mean * max(0.05, (1-phi)*Exp(1) + phi*(1 + a*sin(2*pi*n/P) + z))
// with z an AR(1) chain of coefficient phi: at phi = 0 the stream is
// memoryless-exponential, at higher phi it gains periodic plus autocorrelated
// structure a forecaster can learn. Servers are independent streams.
struct SyntheticConfig {
  int num_servers = 3;
  double horizon = 20000.0;  // seconds; arrivals strictly beyond are dropped
  std::vector<double> mean_interarrival = {1.0, 1.6, 2.6};  // per server
  double autocorr = 0.0;  // phi in [0,1), shared by both series
  double demand_mean = 40.0;          // gigacycles
  double demand_spread = 0.12;        // AR innovation sd, relative to mean
  double interarrival_spread = 0.12;  // likewise
  double seasonal_amplitude = 0.9;    // scaled by phi, so inert at phi = 0
  int seasonal_period = 20;           // events per cycle
  double size_min_mb = 5.0;
  double size_max_mb = 20.0;
  std::uint64_t seed = 1;

  void validate() const;
};

std::vector<Task> generate_synthetic(const SyntheticConfig& cfg);

struct SplitResult {
  std::vector<Task> train, eval;
  int degenerate_servers = 0;  // servers whose eval side came out empty
};

// Chronological prefix/suffix split per server: each server's first
// max(1, floor(fraction * count)) events land in train, the rest in eval.
SplitResult split_train_eval(const std::vector<Task>& events, double fraction);

// Per-server (inter-arrival, demand) sequences, the forecaster's native food.
// The first inter-arrival is measured from time zero.
struct EventSeries {
  std::vector<double> interarrival;
  std::vector<double> demand;
};
std::vector<EventSeries> per_server_series(const std::vector<Task>& events,
                                           int num_servers);

}  // namespace mec
