#include "mec/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mec/rng.hpp"

namespace mec {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_number(const std::string& s, int line_no, const std::string& col) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("trace line " + std::to_string(line_no) +
                             ": cannot parse '" + s + "' in column '" + col +
                             "'");
  }
}

int column_index(const std::vector<std::string>& header, const std::string& col,
                 bool required) {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == col) return static_cast<int>(i);
  if (required)
    throw std::runtime_error("trace file missing column '" + col + "'");
  return -1;
}

bool event_order(const Task& a, const Task& b) {
  if (a.arrival_time != b.arrival_time) return a.arrival_time < b.arrival_time;
  return a.origin_server < b.origin_server;
}

}  // namespace

ParseSchema ParseSchema::from_map(const std::map<std::string, std::string>& kv) {
  ParseSchema s;
  for (const auto& [key, value] : kv) {
    if (key == "server_col") s.server_col = value;
    else if (key == "time_col") s.time_col = value;
    else if (key == "demand_col") s.demand_col = value;
    else if (key == "size_col") s.size_col = value;
    else if (key == "demand_offset") s.demand_offset = parse_number(value, 0, key);
    else if (key == "demand_scale") s.demand_scale = parse_number(value, 0, key);
    else throw std::invalid_argument("unknown schema key '" + key + "'");
  }
  return s;
}

ParseSchema ParseSchema::cluster_normalized() {
  ParseSchema s;
  s.demand_offset = 1.0;
  s.demand_scale = 99.0;
  return s;
}

ParseResult parse_trace(const std::string& path, const ParseSchema& schema,
                        std::uint64_t seed) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open trace file '" + path + "'");

  ParseResult result;
  std::string line;
  if (!std::getline(file, line)) return result;  // empty file, empty list
  const std::vector<std::string> header = split_csv(line);
  const int c_server = column_index(header, schema.server_col, true);
  const int c_time = column_index(header, schema.time_col, true);
  const int c_demand = column_index(header, schema.demand_col, true);
  const int c_size = column_index(header, schema.size_col, false);

  std::mt19937_64 rng = seeded_rng(seed, 0x5a1e);
  std::map<int, double> last_time;  // per server, in file order
  int line_no = 1;
  while (std::getline(file, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> row = split_csv(line);
    if (row.size() < header.size())
      throw std::runtime_error("trace line " + std::to_string(line_no) +
                               ": expected " + std::to_string(header.size()) +
                               " fields, got " + std::to_string(row.size()));
    Task t;
    const double sid = parse_number(row[c_server], line_no, schema.server_col);
    t.origin_server = static_cast<int>(sid);
    if (t.origin_server < 0 || sid != t.origin_server)
      throw std::runtime_error("trace line " + std::to_string(line_no) +
                               ": bad server id '" + row[c_server] + "'");
    t.arrival_time = parse_number(row[c_time], line_no, schema.time_col);
    const double raw = parse_number(row[c_demand], line_no, schema.demand_col);
    t.compute_demand = schema.demand_offset + schema.demand_scale * raw;
    if (!(t.compute_demand > 0.0))
      throw std::runtime_error("trace line " + std::to_string(line_no) +
                               ": nonpositive compute demand");
    if (c_size >= 0) {
      t.payload_size = parse_number(row[c_size], line_no, schema.size_col);
      if (!(t.payload_size > 0.0))
        throw std::runtime_error("trace line " + std::to_string(line_no) +
                                 ": nonpositive payload size");
    } else {
      t.payload_size = uniform_in(rng, schema.size_min_mb, schema.size_max_mb);
      ++result.sized_randomly;
    }
    auto [it, fresh] = last_time.try_emplace(t.origin_server, t.arrival_time);
    if (!fresh) {
      if (t.arrival_time < it->second) ++result.reordered;
      it->second = std::max(it->second, t.arrival_time);
    }
    result.events.push_back(t);
  }
  std::stable_sort(result.events.begin(), result.events.end(), event_order);
  return result;
}

void write_trace(const std::string& path, const std::vector<Task>& events) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write trace file '" + path + "'");
  file << "server_id,arrival_time_s,cpu_gigacycles,size_mb\n";
  char buf[128];
  for (const Task& t : events) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", t.origin_server,
                  t.arrival_time, t.compute_demand, t.payload_size);
    file << buf;
  }
}

void SyntheticConfig::validate() const {
  if (num_servers < 1) throw std::invalid_argument("need at least one server");
  if (horizon < 0.0) throw std::invalid_argument("horizon must be >= 0");
  if (static_cast<int>(mean_interarrival.size()) != num_servers)
    throw std::invalid_argument("need one mean inter-arrival per server");
  for (double m : mean_interarrival)
    if (!(m > 0.0)) throw std::invalid_argument("mean inter-arrival must be > 0");
  if (autocorr < 0.0 || autocorr >= 1.0)
    throw std::invalid_argument("autocorrelation must lie in [0,1)");
  if (!(demand_mean > 0.0)) throw std::invalid_argument("demand mean must be > 0");
  if (demand_spread < 0.0 || interarrival_spread < 0.0)
    throw std::invalid_argument("spreads must be >= 0");
  if (seasonal_amplitude < 0.0)
    throw std::invalid_argument("seasonal amplitude must be >= 0");
  if (seasonal_period < 1)
    throw std::invalid_argument("seasonal period must be >= 1");
  if (!(size_min_mb > 0.0) || size_max_mb < size_min_mb)
    throw std::invalid_argument("size range must satisfy 0 < min <= max");
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kFloorFraction = 0.05;  // keeps draws strictly positive

// One blend-process sample; z is the AR(1) chain state, n the event index.
double blended_draw(std::mt19937_64& rng, double mean, double phi,
                    double spread, double amplitude, int period, double phase,
                    double& z, long n) {
  const double e = exponential(rng, 1.0);
  const double eps = gaussian(rng);
  z = phi * z + spread * eps;
  const double season =
      phi * amplitude * std::sin(kTwoPi * static_cast<double>(n % period) /
                                     static_cast<double>(period) +
                                 phase);
  const double v = (1.0 - phi) * e + phi * (1.0 + season + z);
  return mean * std::max(kFloorFraction, v);
}

}  // namespace

std::vector<Task> generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  std::vector<Task> events;
  for (int m = 0; m < cfg.num_servers; ++m) {
    std::mt19937_64 rng = seeded_rng(cfg.seed, static_cast<std::uint64_t>(m));
    const double phase_ia = uniform_in(rng, 0.0, kTwoPi);
    const double phase_d = uniform_in(rng, 0.0, kTwoPi);
    double z_ia = 0.0, z_d = 0.0;
    double t = 0.0;
    for (long n = 0;; ++n) {
      t += blended_draw(rng, cfg.mean_interarrival[m], cfg.autocorr,
                        cfg.interarrival_spread, cfg.seasonal_amplitude,
                        cfg.seasonal_period, phase_ia, z_ia, n);
      const double demand =
          blended_draw(rng, cfg.demand_mean, cfg.autocorr, cfg.demand_spread,
                       cfg.seasonal_amplitude, cfg.seasonal_period, phase_d,
                       z_d, n);
      const double size = uniform_in(rng, cfg.size_min_mb, cfg.size_max_mb);
      if (t > cfg.horizon) break;
      events.push_back({m, t, demand, size});
    }
  }
  std::sort(events.begin(), events.end(), event_order);
  return events;
}

SplitResult split_train_eval(const std::vector<Task>& events, double fraction) {
  if (!(fraction > 0.0) || !(fraction < 1.0))
    throw std::invalid_argument("split fraction must lie in (0,1)");
  std::map<int, long> count, seen;
  for (const Task& t : events) ++count[t.origin_server];
  std::map<int, long> cutoff;
  SplitResult result;
  for (const auto& [server, n] : count) {
    cutoff[server] = std::max<long>(
        1, static_cast<long>(std::floor(fraction * static_cast<double>(n) + 1e-9)));
    if (cutoff[server] >= n) ++result.degenerate_servers;
  }
  for (const Task& t : events) {
    if (seen[t.origin_server]++ < cutoff[t.origin_server])
      result.train.push_back(t);
    else
      result.eval.push_back(t);
  }
  return result;
}

std::vector<EventSeries> per_server_series(const std::vector<Task>& events,
                                           int num_servers) {
  std::vector<EventSeries> series(num_servers);
  std::vector<double> last(num_servers, 0.0);
  for (const Task& t : events) {
    if (t.origin_server < 0 || t.origin_server >= num_servers)
      throw std::invalid_argument("event server id out of range");
    series[t.origin_server].interarrival.push_back(t.arrival_time -
                                                   last[t.origin_server]);
    series[t.origin_server].demand.push_back(t.compute_demand);
    last[t.origin_server] = t.arrival_time;
  }
  return series;
}

}  // namespace mec
