#include "mec/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mec {

double linear_snr(double snr_db) {
  if (!std::isfinite(snr_db)) throw std::domain_error("snr_db must be finite");
  return std::pow(10.0, snr_db / 10.0);
}

double data_rate(double bandwidth_bps, double snr_linear) {
  if (!(bandwidth_bps > 0.0)) throw std::domain_error("bandwidth must be positive");
  if (snr_linear < 0.0) throw std::domain_error("snr ratio must be nonnegative");
  return bandwidth_bps * std::log2(1.0 + snr_linear);
}

double transmission_latency(double payload_bits, double rate_bps) {
  if (payload_bits == 0.0) return 0.0;
  if (!(rate_bps > 0.0))
    throw std::domain_error("no link capacity allocated for transmission");
  return payload_bits / rate_bps;
}

double compute_latency(double demand_gigacycles, double allocated_ghz) {
  if (demand_gigacycles == 0.0) return 0.0;
  if (!(allocated_ghz > 0.0))
    throw std::domain_error("no compute allocated for a nonzero demand");
  return demand_gigacycles / allocated_ghz;
}

double server_energy(double p_min, double p_max, double utilisation,
                     double busy_time) {
  if (utilisation < 0.0 || utilisation > 1.0)
    throw std::domain_error("utilisation must lie in [0,1]");
  if (busy_time < 0.0) throw std::domain_error("busy_time must be nonnegative");
  return p_min * busy_time + (p_max - p_min) * utilisation * busy_time;
}

double slot_latency(const std::vector<OriginLatency>& origins) {
  double total = 0.0;
  for (const OriginLatency& o : origins) {
    double worst = o.local;
    for (double path : o.offload_paths) worst = std::max(worst, path);
    total += worst;
  }
  return total;
}

SlotOutcome step(const Topology& topo, ResourceLedger& ledger,
                 const std::vector<Task>& arrivals,
                 const std::map<int, HybridAction>& actions, double now,
                 const StepParams& params) {
  const int m = topo.num_servers();
  ledger.advance(now);

  SlotOutcome out;
  out.slot_start = now;
  out.per_server_latency.assign(m, 0.0);
  out.per_server_energy.assign(m, 0.0);
  out.utilisation.assign(m, 0.0);
  out.busy_time.assign(m, 0.0);
  if (arrivals.empty()) return out;
  out.skipped = false;

  // Arrivals within the slot are batched into one demand per server.
  std::vector<double> demand(m, 0.0), payload(m, 0.0);
  for (const Task& t : arrivals) {
    if (t.origin_server < 0 || t.origin_server >= m)
      throw std::invalid_argument("task origin out of range");
    demand[t.origin_server] += t.compute_demand;
    payload[t.origin_server] += t.payload_size;
  }
  for (int s = 0; s < m; ++s) {
    const bool has_work = demand[s] > 0.0;
    if (has_work != (actions.count(s) > 0))
      throw std::invalid_argument(
          "actions must be present exactly for servers with arrivals");
  }

  std::vector<OriginLatency> origins(m);
  for (const auto& [origin, action] : actions) {
    const WorkPlan plan = decode_action(topo, ledger, origin, action,
                                        demand[origin], payload[origin],
                                        params.decode);
    OriginLatency& lat = origins[origin];
    if (plan.local.demand > 0.0) {
      lat.local = compute_latency(plan.local.demand, plan.local.cpu_rate);
      ledger.reserve_cpu(origin, plan.local.cpu_alloc, now + lat.local);
    }
    for (const WorkPiece& piece : plan.offloads) {
      const double rate =
          data_rate(piece.bw_alloc, linear_snr(topo.link(piece.link_id).snr_db));
      const double trans =
          transmission_latency(piece.payload_mb * kBitsPerMegabyte, rate);
      const double coop = compute_latency(piece.demand, piece.cpu_rate);
      ledger.reserve_bw(piece.link_id, piece.bw_alloc, now + trans);
      ledger.reserve_cpu(piece.target, piece.cpu_alloc, now + trans + coop);
      lat.offload_paths.push_back(trans + coop);
    }
  }

  for (int s = 0; s < m; ++s) {
    double worst = origins[s].local;
    for (double path : origins[s].offload_paths) worst = std::max(worst, path);
    out.per_server_latency[s] = worst;
    out.utilisation[s] = ledger.mean_cpu_utilisation(s, now, now + kSlotSeconds);
    if (ledger.has_cpu_work(s)) {
      out.busy_time[s] =
          std::min(kSlotSeconds, ledger.last_cpu_release(s, now) - now);
    }
    out.per_server_energy[s] =
        server_energy(topo.server(s).power_min, topo.server(s).power_max,
                      out.utilisation[s], out.busy_time[s]);
  }
  out.total_latency = slot_latency(origins);
  out.total_energy = 0.0;
  for (double e : out.per_server_energy) out.total_energy += e;
  return out;
}

}  // namespace mec
