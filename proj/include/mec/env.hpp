#pragma once

#include <map>
#include <vector>

#include "mec/actions.hpp"
#include "mec/ledger.hpp"
#include "mec/types.hpp"

namespace mec {

// dB -> linear power ratio.
double linear_snr(double snr_db);
// Achievable rate (bits/s) on an allocated band under the given SNR.
double data_rate(double bandwidth_bps, double snr_linear);
// Serialization delay of a payload at the given rate.
double transmission_latency(double payload_bits, double rate_bps);
// Execution time of a compute demand at the given allocation.
double compute_latency(double demand_gigacycles, double allocated_ghz);
// Linear idle/load power model integrated over the busy interval.
double server_energy(double p_min, double p_max, double utilisation,
                     double busy_time);

// Per-origin latency components for one slot: the local execution time plus
// one transmission+remote-execution total per offload target.
struct OriginLatency {
  double local = 0.0;
  std::vector<double> offload_paths;
};

// Sum over origins of max(local, worst offload path).
double slot_latency(const std::vector<OriginLatency>& origins);

struct SlotOutcome {
  double slot_start = 0.0;
  bool skipped = true;
  std::vector<double> per_server_latency;  // indexed by origin server
  std::vector<double> per_server_energy;
  std::vector<double> utilisation;  // mean reserved-cpu fraction over the slot
  std::vector<double> busy_time;    // capped max completion latency, seconds
  double total_latency = 0.0;
  double total_energy = 0.0;
};

struct StepParams {
  DecodeParams decode;
};

// Advances the ledger to `now`, decodes and reserves each active server's
// work (ascending server id), and accounts the slot's latency and energy.
// Servers with arrivals must appear in `actions` and no others. A slot with
// no arrivals is skipped: zero totals, ledger untouched beyond due releases.
SlotOutcome step(const Topology& topo, ResourceLedger& ledger,
                 const std::vector<Task>& arrivals,
                 const std::map<int, HybridAction>& actions, double now,
                 const StepParams& params);

}  // namespace mec
