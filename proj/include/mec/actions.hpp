#pragma once

#include <vector>

#include "mec/ledger.hpp"
#include "mec/types.hpp"

namespace mec {

// Index into the powerset of the other M-1 servers, bit i addressing the
// i-th other server in ascending id order. Index 0 is the empty set.
struct DiscreteAction {
  int index = 0;
};

int discrete_action_count(int num_servers);
// Selected target server ids, ascending.
std::vector<int> decode_target_set(const Topology& topo, int origin,
                                   DiscreteAction action);

// Raw ratios in [0,1]; slot i of the per-target vectors addresses the i-th
// other server / incident link in ascending neighbor order.
struct ContinuousAction {
  std::vector<double> offload_frac;     // per potential target, pre-mask
  double compute_ratio = 0.0;           // applied at every executing server
  std::vector<double> bandwidth_ratio;  // per incident link
};

struct HybridAction {
  DiscreteAction discrete;
  ContinuousAction continuous;
};

// The "no request" action: empty target set, all ratios zero.
HybridAction zero_action(int num_servers);

struct WorkPiece {
  int target = 0;           // server that executes the cycles
  double demand = 0.0;      // gigacycles
  double payload_mb = 0.0;  // transmitted size; 0 for the local piece
  double cpu_alloc = 0.0;   // gigacycles/s actually reserved
  double cpu_rate = 0.0;    // rate used for latency (fallback floor applies)
  double bw_alloc = 0.0;    // bits/s reserved on the link, 0 for local
  int link_id = -1;
};

struct WorkPlan {
  int origin = 0;
  WorkPiece local;                 // demand may be 0 when everything offloads
  std::vector<WorkPiece> offloads; // ascending target id
  int folded_back = 0;             // offload pieces that fell back to local
};

struct DecodeParams {
  double kappa = 0.4;              // cap on the capacity fraction one decision may take
  double min_alloc_fraction = 0.01;  // latency floor when an allocation clamps to zero
};

// Turns a hybrid action into concrete work pieces against the current ledger:
// offload fractions are masked to the selected targets (divided by the subset
// size when their sum exceeds 1), demand and payload split in the same
// proportions, and each absolute allocation is kappa*ratio*capacity clamped
// to what remains. An offload piece whose link or target allocation clamps to
// zero folds back into the local piece.
WorkPlan decode_action(const Topology& topo, const ResourceLedger& ledger,
                       int origin, const HybridAction& action, double demand,
                       double payload_mb, const DecodeParams& params);

}  // namespace mec
