#pragma once

#include <cstdint>
#include <vector>

#include "mec/types.hpp"

namespace mec {

enum class ResourceKind { Cpu, Bandwidth };

struct ScheduledRelease {
  double time = 0.0;
  ResourceKind kind = ResourceKind::Cpu;
  int id = 0;  // server id for Cpu, link id for Bandwidth
  double amount = 0.0;
  std::uint64_t seq = 0;  // insertion order, breaks time ties deterministically
};

// Time-indexed view of free compute per server and free bandwidth per link.
// Every reservation schedules exactly one release; advance() applies all
// releases due at or before the given time. Value semantics throughout, so
// independent simulations can copy ledgers freely.
class ResourceLedger {
 public:
  explicit ResourceLedger(const Topology& topo);

  double remaining_cpu(int m) const { return rem_cpu_.at(m); }
  double remaining_bw(int k) const { return rem_bw_.at(k); }
  double cpu_capacity(int m) const { return cap_cpu_.at(m); }
  double bw_capacity(int k) const { return cap_bw_.at(k); }

  // Reserving more than remains is a caller bug; throws domain_error.
  void reserve_cpu(int m, double amount, double release_time);
  void reserve_bw(int k, double amount, double release_time);

  void advance(double now);

  // Mean reserved-cpu fraction at server m over [t0, t1), assuming no new
  // reservations land inside the window (reservations only happen at slot
  // starts). Exact piecewise integration over the scheduled releases;
  // releases due at or before t0 count as applied whether or not advance()
  // has caught up to them.
  double mean_cpu_utilisation(int m, double t0, double t1) const;

  // Latest scheduled cpu release at server m, or t_floor when none is pending.
  double last_cpu_release(int m, double t_floor) const;

  bool has_cpu_work(int m) const;

  const std::vector<ScheduledRelease>& outstanding() const { return heap_; }

  // remaining + outstanding reservations == capacity, per resource.
  bool check_conservation(double rel_tol = 1e-9) const;

 private:
  void push_release(double time, ResourceKind kind, int id, double amount);

  std::vector<double> rem_cpu_, rem_bw_;
  std::vector<double> cap_cpu_, cap_bw_;
  std::vector<ScheduledRelease> heap_;  // min-heap on (time, seq)
  std::uint64_t next_seq_ = 0;
};

}  // namespace mec
