#include "mec/actions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mec {

int discrete_action_count(int num_servers) {
  if (num_servers < 1 || num_servers > 24)
    throw std::invalid_argument("powerset action space needs 1..24 servers");
  return 1 << (num_servers - 1);
}

std::vector<int> decode_target_set(const Topology& topo, int origin,
                                   DiscreteAction action) {
  const int m = topo.num_servers();
  if (action.index < 0 || action.index >= discrete_action_count(m))
    throw std::invalid_argument("discrete action index out of range");
  std::vector<int> targets;
  int bit = 0;
  for (int other = 0; other < m; ++other) {
    if (other == origin) continue;
    if (action.index & (1 << bit)) targets.push_back(other);
    ++bit;
  }
  return targets;
}

HybridAction zero_action(int num_servers) {
  HybridAction a;
  a.continuous.offload_frac.assign(num_servers - 1, 0.0);
  a.continuous.bandwidth_ratio.assign(num_servers - 1, 0.0);
  return a;
}

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

WorkPlan decode_action(const Topology& topo, const ResourceLedger& ledger,
                       int origin, const HybridAction& action, double demand,
                       double payload_mb, const DecodeParams& params) {
  const int m = topo.num_servers();
  const int n_others = m - 1;
  if (static_cast<int>(action.continuous.offload_frac.size()) != n_others ||
      static_cast<int>(action.continuous.bandwidth_ratio.size()) != n_others)
    throw std::invalid_argument("continuous action has wrong dimensionality");

  WorkPlan plan;
  plan.origin = origin;

  const std::vector<int> targets =
      decode_target_set(topo, origin, action.discrete);

  // Mask fractions to the selected subset; if they sum past 1, divide by the
  // subset size so e.g. two raw 0.8s become 0.4 each with 20% kept local.
  std::vector<double> frac(n_others, 0.0);
  double frac_sum = 0.0;
  {
    int bit = 0;
    for (int other = 0; other < m; ++other) {
      if (other == origin) continue;
      if (std::binary_search(targets.begin(), targets.end(), other))
        frac[bit] = clamp01(action.continuous.offload_frac[bit]);
      frac_sum += frac[bit];
      ++bit;
    }
  }
  if (frac_sum > 1.0 && !targets.empty()) {
    for (double& f : frac) f /= static_cast<double>(targets.size());
    frac_sum = 0.0;
    for (double f : frac) frac_sum += f;
  }
  frac_sum = std::min(frac_sum, 1.0);

  const double compute_ratio = clamp01(action.continuous.compute_ratio);

  double local_demand = demand * (1.0 - frac_sum);

  // Offload pieces first; any infeasible piece folds back into local work.
  int idx = -1;
  for (int other = 0; other < m; ++other) {
    if (other == origin) continue;
    ++idx;
    const double f = frac[idx];
    if (f <= 0.0) continue;
    const double piece_demand = demand * f;
    const double piece_payload = payload_mb * f;
    const int link = topo.link_between(origin, other);
    if (link < 0) {  // no link to the chosen target
      local_demand += piece_demand;
      ++plan.folded_back;
      continue;
    }
    const double cpu_cap = topo.server(other).cpu_capacity;
    const double cpu_alloc = std::min(params.kappa * compute_ratio * cpu_cap,
                                      ledger.remaining_cpu(other));
    const double bw_ratio = clamp01(action.continuous.bandwidth_ratio[idx]);
    const double bw_alloc =
        std::min(params.kappa * bw_ratio * topo.link(link).bandwidth_capacity,
                 ledger.remaining_bw(link));
    if (cpu_alloc <= 0.0 || bw_alloc <= 0.0) {
      local_demand += piece_demand;
      ++plan.folded_back;
      continue;
    }
    WorkPiece piece;
    piece.target = other;
    piece.demand = piece_demand;
    piece.payload_mb = piece_payload;
    piece.cpu_alloc = cpu_alloc;
    piece.cpu_rate = cpu_alloc;
    piece.bw_alloc = bw_alloc;
    piece.link_id = link;
    plan.offloads.push_back(piece);
  }

  plan.local.target = origin;
  plan.local.demand = local_demand;
  if (local_demand > 0.0) {
    const double cpu_cap = topo.server(origin).cpu_capacity;
    double alloc = std::min(params.kappa * compute_ratio * cpu_cap,
                            ledger.remaining_cpu(origin));
    if (alloc <= 0.0) {
      // Minimum grant keeps latency finite when the ratio or remainder is zero.
      alloc = std::min(params.min_alloc_fraction * cpu_cap,
                       ledger.remaining_cpu(origin));
    }
    plan.local.cpu_alloc = alloc;
    plan.local.cpu_rate =
        alloc > 0.0 ? alloc : params.min_alloc_fraction * cpu_cap;
  }
  return plan;
}

}  // namespace mec
