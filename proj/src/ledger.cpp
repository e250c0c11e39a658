#include "mec/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mec {

namespace {

// Min-heap ordering: earliest release first, insertion order on ties.
bool heap_after(const ScheduledRelease& a, const ScheduledRelease& b) {
  if (a.time != b.time) return a.time > b.time;
  return a.seq > b.seq;
}

}  // namespace

ResourceLedger::ResourceLedger(const Topology& topo) {
  for (int m = 0; m < topo.num_servers(); ++m) {
    cap_cpu_.push_back(topo.server(m).cpu_capacity);
    rem_cpu_.push_back(topo.server(m).cpu_capacity);
  }
  for (int k = 0; k < topo.num_links(); ++k) {
    cap_bw_.push_back(topo.link(k).bandwidth_capacity);
    rem_bw_.push_back(topo.link(k).bandwidth_capacity);
  }
}

void ResourceLedger::push_release(double time, ResourceKind kind, int id,
                                  double amount) {
  heap_.push_back({time, kind, id, amount, next_seq_++});
  std::push_heap(heap_.begin(), heap_.end(), heap_after);
}

void ResourceLedger::reserve_cpu(int m, double amount, double release_time) {
  if (amount <= 0.0) return;
  double& rem = rem_cpu_.at(m);
  if (amount > rem * (1.0 + 1e-12) + 1e-12)
    throw std::domain_error("cpu reservation exceeds remaining capacity");
  amount = std::min(amount, rem);
  rem -= amount;
  push_release(release_time, ResourceKind::Cpu, m, amount);
}

void ResourceLedger::reserve_bw(int k, double amount, double release_time) {
  if (amount <= 0.0) return;
  double& rem = rem_bw_.at(k);
  if (amount > rem * (1.0 + 1e-12) + 1e-12)
    throw std::domain_error("bandwidth reservation exceeds remaining capacity");
  amount = std::min(amount, rem);
  rem -= amount;
  push_release(release_time, ResourceKind::Bandwidth, k, amount);
}

void ResourceLedger::advance(double now) {
  while (!heap_.empty() && heap_.front().time <= now) {
    std::pop_heap(heap_.begin(), heap_.end(), heap_after);
    const ScheduledRelease rel = heap_.back();
    heap_.pop_back();
    if (rel.kind == ResourceKind::Cpu) {
      double& rem = rem_cpu_.at(rel.id);
      rem = std::min(rem + rel.amount, cap_cpu_.at(rel.id));
    } else {
      double& rem = rem_bw_.at(rel.id);
      rem = std::min(rem + rel.amount, cap_bw_.at(rel.id));
    }
  }
}

double ResourceLedger::mean_cpu_utilisation(int m, double t0, double t1) const {
  if (!(t1 > t0)) return 0.0;
  // Releases inside the window, in time order. Releases already due at the
  // window start count as applied even if advance() has not run yet.
  std::vector<std::pair<double, double>> drops;  // (time, amount)
  double reserved = cap_cpu_.at(m) - rem_cpu_.at(m);
  for (const ScheduledRelease& r : heap_) {
    if (r.kind != ResourceKind::Cpu || r.id != m) continue;
    if (r.time <= t0) reserved -= r.amount;
    else if (r.time < t1) drops.emplace_back(r.time, r.amount);
  }
  reserved = std::max(0.0, reserved);
  std::sort(drops.begin(), drops.end());
  double integral = 0.0;
  double t = t0;
  for (const auto& [time, amount] : drops) {
    integral += reserved * (time - t);
    reserved = std::max(0.0, reserved - amount);
    t = time;
  }
  integral += reserved * (t1 - t);
  return integral / (cap_cpu_.at(m) * (t1 - t0));
}

double ResourceLedger::last_cpu_release(int m, double t_floor) const {
  double latest = t_floor;
  for (const ScheduledRelease& r : heap_)
    if (r.kind == ResourceKind::Cpu && r.id == m) latest = std::max(latest, r.time);
  return latest;
}

bool ResourceLedger::has_cpu_work(int m) const {
  for (const ScheduledRelease& r : heap_)
    if (r.kind == ResourceKind::Cpu && r.id == m) return true;
  return false;
}

bool ResourceLedger::check_conservation(double rel_tol) const {
  std::vector<double> out_cpu(cap_cpu_.size(), 0.0);
  std::vector<double> out_bw(cap_bw_.size(), 0.0);
  for (const ScheduledRelease& r : heap_) {
    if (r.kind == ResourceKind::Cpu) out_cpu.at(r.id) += r.amount;
    else out_bw.at(r.id) += r.amount;
  }
  for (size_t m = 0; m < cap_cpu_.size(); ++m) {
    if (rem_cpu_[m] < -rel_tol * cap_cpu_[m] || rem_cpu_[m] > cap_cpu_[m] * (1.0 + rel_tol))
      return false;
    if (std::abs(rem_cpu_[m] + out_cpu[m] - cap_cpu_[m]) > rel_tol * cap_cpu_[m])
      return false;
  }
  for (size_t k = 0; k < cap_bw_.size(); ++k) {
    if (rem_bw_[k] < -rel_tol * cap_bw_[k] || rem_bw_[k] > cap_bw_[k] * (1.0 + rel_tol))
      return false;
    if (std::abs(rem_bw_[k] + out_bw[k] - cap_bw_[k]) > rel_tol * cap_bw_[k])
      return false;
  }
  return true;
}

}  // namespace mec
