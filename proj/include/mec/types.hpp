#pragma once

#include <string>
#include <vector>

namespace mec {

// Payload sizes are carried in megabytes; link math runs on bits.
constexpr double kBitsPerMegabyte = 8.0e6;
// One simulation slot is one second of wall time.
constexpr double kSlotSeconds = 1.0;

struct ServerSpec {
  int server_id = 0;
  double cpu_capacity = 0.0;  // gigacycles per second
  double power_min = 0.0;     // watts drawn at zero load
  double power_max = 0.0;     // watts drawn at full load
};

struct LinkSpec {
  int link_id = 0;
  int server_a = 0;  // lower endpoint id
  int server_b = 0;  // higher endpoint id
  double bandwidth_capacity = 0.0;  // bits per second
  double snr_db = 0.0;
};

struct Task {
  int origin_server = 0;
  double arrival_time = 0.0;    // seconds
  double compute_demand = 0.0;  // gigacycles
  double payload_size = 0.0;    // megabytes
};

struct ObjectiveWeights {
  double lambda_latency = 0.5;  // 1/seconds
  double rho_energy = 0.5;      // 1/joules
  void validate() const;        // lambda + rho = 1, each in (0,1)
};

// Static description of the edge network: servers plus the mesh of
// inter-server links. Lookup tables are precomputed so per-slot code can
// walk neighbors and incident links in a fixed (ascending id) order.
class Topology {
 public:
  Topology(std::vector<ServerSpec> servers, std::vector<LinkSpec> links);

  // 3 servers, full mesh, 100 GHz, 10 Gbps, 10 dB, 176/396 W.
  static Topology default_mesh();
  static Topology from_file(const std::string& path);

  int num_servers() const { return static_cast<int>(servers_.size()); }
  int num_links() const { return static_cast<int>(links_.size()); }
  const ServerSpec& server(int m) const { return servers_.at(m); }
  const LinkSpec& link(int k) const { return links_.at(k); }

  // -1 when the pair is not connected.
  int link_between(int m, int n) const;
  // Other servers adjacent to m, ascending id.
  const std::vector<int>& neighbors(int m) const { return neighbors_.at(m); }
  // Links incident to m, ordered by ascending neighbor id.
  const std::vector<int>& incident_links(int m) const { return incident_.at(m); }

 private:
  std::vector<ServerSpec> servers_;
  std::vector<LinkSpec> links_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<int>> incident_;
  std::vector<std::vector<int>> link_index_;
};

}  // namespace mec
