#include "mec/types.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mec {

void ObjectiveWeights::validate() const {
  if (!(lambda_latency > 0.0 && lambda_latency < 1.0) ||
      !(rho_energy > 0.0 && rho_energy < 1.0) ||
      std::abs(lambda_latency + rho_energy - 1.0) > 1e-12) {
    throw std::invalid_argument(
        "objective weights must lie in (0,1) and sum to 1");
  }
}

Topology::Topology(std::vector<ServerSpec> servers, std::vector<LinkSpec> links)
    : servers_(std::move(servers)), links_(std::move(links)) {
  const int m = num_servers();
  if (m == 0) throw std::invalid_argument("topology has no servers");
  for (int i = 0; i < m; ++i) {
    const ServerSpec& s = servers_[i];
    if (s.server_id != i)
      throw std::invalid_argument("server ids must be contiguous from 0");
    if (!(s.cpu_capacity > 0.0))
      throw std::invalid_argument("cpu_capacity must be positive");
    if (!(s.power_min > 0.0 && s.power_min <= s.power_max))
      throw std::invalid_argument("require 0 < power_min <= power_max");
  }
  link_index_.assign(m, std::vector<int>(m, -1));
  neighbors_.assign(m, {});
  incident_.assign(m, {});
  for (int k = 0; k < num_links(); ++k) {
    LinkSpec& l = links_[k];
    if (l.link_id != k)
      throw std::invalid_argument("link ids must be contiguous from 0");
    if (l.server_a == l.server_b)
      throw std::invalid_argument("link endpoints must be distinct");
    if (l.server_a < 0 || l.server_b < 0 || l.server_a >= m || l.server_b >= m)
      throw std::invalid_argument("link endpoint out of range");
    if (l.server_a > l.server_b) std::swap(l.server_a, l.server_b);
    if (!(l.bandwidth_capacity > 0.0))
      throw std::invalid_argument("bandwidth_capacity must be positive");
    if (link_index_[l.server_a][l.server_b] != -1)
      throw std::invalid_argument("at most one link per server pair");
    link_index_[l.server_a][l.server_b] = k;
    link_index_[l.server_b][l.server_a] = k;
  }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (link_index_[i][j] >= 0) {
        neighbors_[i].push_back(j);
        incident_[i].push_back(link_index_[i][j]);
      }
    }
  }
}

int Topology::link_between(int m, int n) const {
  return link_index_.at(m).at(n);
}

Topology Topology::default_mesh() {
  std::vector<ServerSpec> servers;
  for (int i = 0; i < 3; ++i) servers.push_back({i, 100.0, 176.0, 396.0});
  std::vector<LinkSpec> links;
  int k = 0;
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) links.push_back({k++, a, b, 10.0e9, 10.0});
  return Topology(std::move(servers), std::move(links));
}

namespace {

// Parses "key=value" into (key, value); throws on malformed tokens.
std::pair<std::string, double> parse_kv(const std::string& tok, int line_no) {
  auto eq = tok.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 >= tok.size())
    throw std::invalid_argument("topology line " + std::to_string(line_no) +
                                ": expected key=value, got '" + tok + "'");
  try {
    return {tok.substr(0, eq), std::stod(tok.substr(eq + 1))};
  } catch (const std::exception&) {
    throw std::invalid_argument("topology line " + std::to_string(line_no) +
                                ": bad number in '" + tok + "'");
  }
}

}  // namespace

Topology Topology::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open topology file: " + path);
  std::vector<ServerSpec> servers;
  std::vector<LinkSpec> links;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    if (kind == "server") {
      ServerSpec s;
      if (!(ls >> s.server_id))
        throw std::invalid_argument("topology line " + std::to_string(line_no) +
                                    ": server needs an id");
      std::string tok;
      while (ls >> tok) {
        auto [key, value] = parse_kv(tok, line_no);
        if (key == "cpu_ghz") s.cpu_capacity = value;
        else if (key == "p_min_w") s.power_min = value;
        else if (key == "p_max_w") s.power_max = value;
        else
          throw std::invalid_argument("topology line " + std::to_string(line_no) +
                                      ": unknown server key '" + key + "'");
      }
      servers.push_back(s);
    } else if (kind == "link") {
      LinkSpec l;
      l.link_id = static_cast<int>(links.size());
      if (!(ls >> l.server_a >> l.server_b))
        throw std::invalid_argument("topology line " + std::to_string(line_no) +
                                    ": link needs two endpoints");
      std::string tok;
      while (ls >> tok) {
        auto [key, value] = parse_kv(tok, line_no);
        if (key == "bw_gbps") l.bandwidth_capacity = value * 1e9;
        else if (key == "snr_db") l.snr_db = value;
        else
          throw std::invalid_argument("topology line " + std::to_string(line_no) +
                                      ": unknown link key '" + key + "'");
      }
      links.push_back(l);
    } else {
      throw std::invalid_argument("topology line " + std::to_string(line_no) +
                                  ": unknown record '" + kind + "'");
    }
  }
  std::sort(servers.begin(), servers.end(),
            [](const ServerSpec& a, const ServerSpec& b) {
              return a.server_id < b.server_id;
            });
  return Topology(std::move(servers), std::move(links));
}

}  // namespace mec
