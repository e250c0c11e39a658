#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mec/trace.hpp"

using namespace mec;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content)
      : path(name) {
    std::ofstream f(path);
    f << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

double lag1_autocorr(const std::vector<double>& xs) {
  const size_t n = xs.size();
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < n; ++i) {
    den += (xs[i] - mean) * (xs[i] - mean);
    if (i + 1 < n) num += (xs[i] - mean) * (xs[i + 1] - mean);
  }
  return num / den;
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

bool events_equal(const std::vector<Task>& a, const std::vector<Task>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].origin_server != b[i].origin_server ||
        a[i].arrival_time != b[i].arrival_time ||
        a[i].compute_demand != b[i].compute_demand ||
        a[i].payload_size != b[i].payload_size)
      return false;
  return true;
}

}  // namespace

TEST_CASE("canonical csv ingests as identity") {
  TempFile f("trace_identity.csv",
             "server_id,arrival_time_s,cpu_gigacycles,size_mb\n"
             "0,0.5,30,10\n"
             "1,0.75,45.5,7.25\n"
             "0,1.5,20,5\n");
  const ParseResult r = parse_trace(f.path);
  REQUIRE(r.events.size() == 3);
  CHECK(r.reordered == 0);
  CHECK(r.sized_randomly == 0);
  CHECK(r.events[0].origin_server == 0);
  CHECK(r.events[0].arrival_time == 0.5);
  CHECK(r.events[0].compute_demand == 30.0);
  CHECK(r.events[0].payload_size == 10.0);
  CHECK(r.events[1].origin_server == 1);
  CHECK(r.events[1].compute_demand == 45.5);
  CHECK(r.events[2].arrival_time == 1.5);
}

TEST_CASE("empty and header-only files give empty lists") {
  TempFile empty("trace_empty.csv", "");
  CHECK(parse_trace(empty.path).events.empty());
  TempFile header("trace_header.csv",
                  "server_id,arrival_time_s,cpu_gigacycles,size_mb\n");
  CHECK(parse_trace(header.path).events.empty());
  CHECK_THROWS_AS(parse_trace("no_such_file.csv"), std::runtime_error);
}

TEST_CASE("missing required column is named in the error") {
  TempFile f("trace_nodemand.csv",
             "server_id,arrival_time_s,size_mb\n"
             "0,0.5,10\n");
  CHECK_THROWS_WITH_AS(parse_trace(f.path),
                       doctest::Contains("cpu_gigacycles"), std::runtime_error);
}

TEST_CASE("schema map renames columns and rescales demand") {
  TempFile f("trace_foreign.csv",
             "machine,ts,cpu_norm\n"
             "0,1.0,0\n"
             "0,2.0,0.5\n"
             "0,3.0,1\n");
  ParseSchema schema = ParseSchema::from_map({{"server_col", "machine"},
                                              {"time_col", "ts"},
                                              {"demand_col", "cpu_norm"},
                                              {"demand_offset", "1"},
                                              {"demand_scale", "99"}});
  const ParseResult r = parse_trace(f.path, schema, 7);
  REQUIRE(r.events.size() == 3);
  // Normalized cpu spans [0,1]; rescaled demand spans [1,100] gigacycles.
  CHECK(r.events[0].compute_demand == 1.0);
  CHECK(r.events[1].compute_demand == 50.5);
  CHECK(r.events[2].compute_demand == 100.0);
  CHECK(ParseSchema::cluster_normalized().demand_offset == 1.0);
  CHECK(ParseSchema::cluster_normalized().demand_scale == 99.0);
  CHECK_THROWS_AS(ParseSchema::from_map({{"bogus", "x"}}),
                  std::invalid_argument);
}

TEST_CASE("missing size column draws deterministic sizes") {
  const std::string body =
      "server_id,arrival_time_s,cpu_gigacycles\n"
      "0,1,30\n0,2,40\n0,3,50\n0,4,60\n";
  TempFile f("trace_nosize.csv", body);
  const ParseResult a = parse_trace(f.path, {}, 11);
  const ParseResult b = parse_trace(f.path, {}, 11);
  const ParseResult c = parse_trace(f.path, {}, 12);
  CHECK(a.sized_randomly == 4);
  for (const Task& t : a.events) {
    CHECK(t.payload_size >= 5.0);
    CHECK(t.payload_size <= 20.0);
  }
  CHECK(events_equal(a.events, b.events));
  CHECK_FALSE(events_equal(a.events, c.events));
}

TEST_CASE("out-of-order rows are sorted and counted") {
  TempFile f("trace_unordered.csv",
             "server_id,arrival_time_s,cpu_gigacycles,size_mb\n"
             "0,2.0,30,10\n"
             "0,1.0,40,10\n"   // behind its server's clock
             "1,0.5,20,10\n"   // other server, independent clock
             "0,3.0,50,10\n");
  const ParseResult r = parse_trace(f.path);
  CHECK(r.reordered == 1);
  REQUIRE(r.events.size() == 4);
  CHECK(r.events[0].arrival_time == 0.5);
  CHECK(r.events[1].arrival_time == 1.0);
  CHECK(r.events[2].arrival_time == 2.0);
  CHECK(r.events[3].arrival_time == 3.0);
  double last0 = -1.0;
  for (const Task& t : r.events)
    if (t.origin_server == 0) {
      CHECK(t.arrival_time > last0);
      last0 = t.arrival_time;
    }
}

TEST_CASE("write then reparse round-trips bit-exactly") {
  SyntheticConfig cfg;
  cfg.horizon = 50.0;
  cfg.autocorr = 0.9;
  cfg.seed = 3;
  const std::vector<Task> events = generate_synthetic(cfg);
  REQUIRE(events.size() > 10);
  write_trace("trace_rt1.csv", events);
  const ParseResult once = parse_trace("trace_rt1.csv");
  CHECK(events_equal(once.events, events));
  write_trace("trace_rt2.csv", once.events);
  CHECK(slurp("trace_rt1.csv") == slurp("trace_rt2.csv"));
  std::remove("trace_rt1.csv");
  std::remove("trace_rt2.csv");
}

TEST_CASE("synthetic generator basics") {
  SyntheticConfig cfg;
  cfg.seed = 5;

  SUBCASE("zero horizon is empty") {
    cfg.horizon = 0.0;
    CHECK(generate_synthetic(cfg).empty());
  }

  SUBCASE("same seed reproduces the stream exactly") {
    cfg.horizon = 200.0;
    CHECK(events_equal(generate_synthetic(cfg), generate_synthetic(cfg)));
    SyntheticConfig other = cfg;
    other.seed = 6;
    CHECK_FALSE(events_equal(generate_synthetic(cfg), generate_synthetic(other)));
  }

  SUBCASE("stream invariants hold") {
    cfg.horizon = 500.0;
    cfg.autocorr = 0.9;
    const std::vector<Task> events = generate_synthetic(cfg);
    std::vector<double> last(3, 0.0);
    double prev = 0.0;
    for (const Task& t : events) {
      CHECK(t.origin_server >= 0);
      CHECK(t.origin_server < 3);
      CHECK(t.compute_demand > 0.0);
      CHECK(t.payload_size >= 5.0);
      CHECK(t.payload_size <= 20.0);
      CHECK(t.arrival_time <= 500.0);
      CHECK(t.arrival_time >= prev);              // globally sorted
      CHECK(t.arrival_time > last[t.origin_server]);  // per-server strict
      prev = t.arrival_time;
      last[t.origin_server] = t.arrival_time;
    }
    // All three servers produce work, the busier ones more of it.
    std::vector<int> counts(3, 0);
    for (const Task& t : events) ++counts[t.origin_server];
    CHECK(counts[0] > counts[1]);
    CHECK(counts[1] > counts[2]);
  }

  SUBCASE("config validation") {
    cfg.autocorr = 1.0;
    CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
    cfg.autocorr = 0.5;
    cfg.mean_interarrival = {1.0};  // wrong arity for 3 servers
    CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
  }
}

TEST_CASE("autocorrelation knob shapes the demand process") {
  SyntheticConfig cfg;
  cfg.num_servers = 1;
  cfg.mean_interarrival = {1.0};
  cfg.horizon = 20000.0;
  cfg.seed = 17;

  // Memoryless setting: lag-1 autocorrelation of both series vanishes
  // within three standard errors, and inter-arrivals look exponential
  // (mean ~= configured mean, coefficient of variation ~= 1).
  cfg.autocorr = 0.0;
  const auto flat = per_server_series(generate_synthetic(cfg), 1);
  const size_t n = flat[0].demand.size();
  REQUIRE(n > 10000);
  const double three_se = 3.0 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(lag1_autocorr(flat[0].demand)) < three_se);
  CHECK(std::abs(lag1_autocorr(flat[0].interarrival)) < three_se);
  const double m = mean_of(flat[0].interarrival);
  CHECK(m > 0.95);
  CHECK(m < 1.06);
  double var = 0.0;
  for (double x : flat[0].interarrival) var += (x - m) * (x - m);
  var /= static_cast<double>(flat[0].interarrival.size());
  const double cv = std::sqrt(var) / m;
  CHECK(cv > 0.9);
  CHECK(cv < 1.1);

  // Strong setting: both series carry plainly visible structure.
  cfg.autocorr = 0.9;
  const auto hot = per_server_series(generate_synthetic(cfg), 1);
  CHECK(lag1_autocorr(hot[0].demand) > 0.5);
  CHECK(lag1_autocorr(hot[0].interarrival) > 0.5);
  const double dm = mean_of(hot[0].demand);
  CHECK(dm > 34.0);
  CHECK(dm < 46.0);
}

TEST_CASE("train/eval split is chronological per server") {
  SyntheticConfig cfg;
  cfg.num_servers = 1;
  cfg.mean_interarrival = {1.0};
  cfg.horizon = 10.5;
  cfg.seed = 2;
  std::vector<Task> events = generate_synthetic(cfg);
  // Pin exactly ten events for the arithmetic below.
  while (events.size() > 10) events.pop_back();
  REQUIRE(events.size() == 10);

  const SplitResult split = split_train_eval(events, 0.8);
  CHECK(split.train.size() == 8);
  CHECK(split.eval.size() == 2);
  CHECK(split.degenerate_servers == 0);
  std::vector<Task> joined = split.train;
  joined.insert(joined.end(), split.eval.begin(), split.eval.end());
  CHECK(events_equal(joined, events));

  const SplitResult single = split_train_eval({events[0]}, 0.5);
  CHECK(single.train.size() == 1);
  CHECK(single.eval.empty());
  CHECK(single.degenerate_servers == 1);

  CHECK_THROWS_AS(split_train_eval(events, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(split_train_eval(events, 1.0), std::invalid_argument);
}

TEST_CASE("split keeps per-server prefixes together on mixed streams") {
  SyntheticConfig cfg;
  cfg.horizon = 60.0;
  cfg.seed = 9;
  const std::vector<Task> events = generate_synthetic(cfg);
  const SplitResult split = split_train_eval(events, 0.8);
  // Every eval event strictly follows every train event of the same server.
  for (int s = 0; s < 3; ++s) {
    double last_train = -1.0, first_eval = 1e18;
    for (const Task& t : split.train)
      if (t.origin_server == s) last_train = std::max(last_train, t.arrival_time);
    for (const Task& t : split.eval)
      if (t.origin_server == s) first_eval = std::min(first_eval, t.arrival_time);
    CHECK(last_train < first_eval);
  }
  CHECK(split.train.size() + split.eval.size() == events.size());
}

TEST_CASE("per-server series measure gaps from time zero") {
  const std::vector<Task> events = {
      {0, 2.0, 30.0, 10.0}, {1, 3.0, 20.0, 10.0}, {0, 5.5, 40.0, 10.0}};
  const auto series = per_server_series(events, 3);
  REQUIRE(series[0].interarrival.size() == 2);
  CHECK(series[0].interarrival[0] == 2.0);
  CHECK(series[0].interarrival[1] == 3.5);
  CHECK(series[0].demand[1] == 40.0);
  CHECK(series[1].interarrival[0] == 3.0);
  CHECK(series[2].interarrival.empty());
}
