#include "mec/metrics.hpp"

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mec/predictor.hpp"  // smooth()

namespace mec {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& cell, const std::string& path) {
  std::size_t used = 0;
  const double v = std::stod(cell, &used);
  if (used != cell.size())
    throw std::runtime_error(path + ": malformed numeric cell '" + cell + "'");
  return v;
}

}  // namespace

MetricsWriter::MetricsWriter(const std::string& path, int num_servers)
    : path_(path), num_servers_(num_servers), file_(nullptr) {
  if (num_servers <= 0)
    throw std::invalid_argument("metrics writer needs at least one server");
  file_ = std::fopen(path.c_str(), "wb");
  if (!file_)
    throw std::runtime_error("cannot open metrics file " + path + ": " +
                             std::strerror(errno));
  std::fprintf(file_, "step,slot_start,reward,latency,energy");
  for (int s = 0; s < num_servers_; ++s) std::fprintf(file_, ",u_%d", s);
  std::fprintf(file_, ",epsilon,noise_scale,skipped\n");
  std::fflush(file_);
}

MetricsWriter::~MetricsWriter() {
  if (file_) std::fclose(file_);
}

void MetricsWriter::write(const MetricsRow& row) {
  if (static_cast<int>(row.utilisation.size()) != num_servers_)
    throw std::invalid_argument("metrics row has wrong utilisation length");
  std::fprintf(file_, "%lld,%.17g,%.17g,%.17g,%.17g", row.step, row.slot_start,
               row.reward, row.latency, row.energy);
  for (double u : row.utilisation) std::fprintf(file_, ",%.17g", u);
  std::fprintf(file_, ",%.17g,%.17g,%d\n", row.epsilon, row.noise_scale,
               row.skipped ? 1 : 0);
  std::fflush(file_);
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics file " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty metrics file");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 9 || header[0] != "step" || header.back() != "skipped")
    throw std::runtime_error(path + ": unrecognized metrics header");
  const int num_servers = static_cast<int>(header.size()) - 8;

  std::vector<MetricsRow> rows;
  long long prev_step = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error(path + ": row width mismatch");
    MetricsRow row;
    row.step = std::stoll(cells[0]);
    row.slot_start = parse_double(cells[1], path);
    row.reward = parse_double(cells[2], path);
    row.latency = parse_double(cells[3], path);
    row.energy = parse_double(cells[4], path);
    for (int s = 0; s < num_servers; ++s)
      row.utilisation.push_back(parse_double(cells[5 + s], path));
    row.epsilon = parse_double(cells[5 + num_servers], path);
    row.noise_scale = parse_double(cells[6 + num_servers], path);
    row.skipped = cells[7 + num_servers] == "1";
    if (row.step <= prev_step)
      throw std::runtime_error(path + ": step index not monotone");
    prev_step = row.step;
    rows.push_back(std::move(row));
  }
  return rows;
}

double final_window_reward(const std::vector<MetricsRow>& rows,
                           int smooth_window, double fraction) {
  if (fraction <= 0.0 || fraction > 1.0)
    throw std::invalid_argument("final-window fraction must lie in (0,1]");
  std::vector<double> rewards;
  for (const MetricsRow& row : rows)
    if (!row.skipped) rewards.push_back(row.reward);
  if (rewards.empty())
    throw std::invalid_argument("no non-skipped rows to summarize");
  const std::vector<double> smoothed = smooth(rewards, smooth_window);
  const std::size_t n = smoothed.size();
  const std::size_t window = std::max<std::size_t>(
      1, static_cast<std::size_t>(fraction * static_cast<double>(n)));
  double sum = 0.0;
  for (std::size_t i = n - window; i < n; ++i) sum += smoothed[i];
  return sum / static_cast<double>(window);
}

namespace {

double mean_active_field(const std::vector<MetricsRow>& rows,
                         double MetricsRow::*field) {
  double sum = 0.0;
  long long count = 0;
  for (const MetricsRow& row : rows)
    if (!row.skipped) {
      sum += row.*field;
      ++count;
    }
  if (count == 0)
    throw std::invalid_argument("no non-skipped rows to summarize");
  return sum / static_cast<double>(count);
}

double tail_mean_field(const std::vector<MetricsRow>& rows,
                       double MetricsRow::*field, double fraction) {
  if (fraction <= 0.0 || fraction > 1.0)
    throw std::invalid_argument("final-window fraction must lie in (0,1]");
  std::vector<double> values;
  for (const MetricsRow& row : rows)
    if (!row.skipped) values.push_back(row.*field);
  if (values.empty())
    throw std::invalid_argument("no non-skipped rows to summarize");
  const std::size_t n = values.size();
  const std::size_t window = std::max<std::size_t>(
      1, static_cast<std::size_t>(fraction * static_cast<double>(n)));
  double sum = 0.0;
  for (std::size_t i = n - window; i < n; ++i) sum += values[i];
  return sum / static_cast<double>(window);
}

}  // namespace

double mean_active_latency(const std::vector<MetricsRow>& rows) {
  return mean_active_field(rows, &MetricsRow::latency);
}

double mean_active_energy(const std::vector<MetricsRow>& rows) {
  return mean_active_field(rows, &MetricsRow::energy);
}

double final_window_latency(const std::vector<MetricsRow>& rows,
                            double fraction) {
  return tail_mean_field(rows, &MetricsRow::latency, fraction);
}

double final_window_energy(const std::vector<MetricsRow>& rows,
                           double fraction) {
  return tail_mean_field(rows, &MetricsRow::energy, fraction);
}

double summarize_objective(const std::vector<MetricsRow>& rows,
                           const ObjectiveWeights& weights) {
  weights.validate();
  double total = 0.0;
  for (const MetricsRow& row : rows)
    if (!row.skipped)
      total += weights.lambda_latency * row.latency +
               weights.rho_energy * row.energy;
  return total;
}

}  // namespace mec
