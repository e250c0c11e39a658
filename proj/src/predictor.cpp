#include "mec/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace mec {

namespace {

constexpr double kSdFloor = 1e-8;  // constant series normalize to zero

// In-place Fisher-Yates with explicit draws, stable across standard
// libraries (std::shuffle's sequence is implementation defined).
void shuffle_indices(std::vector<int>& idx, std::mt19937_64& rng) {
  for (size_t i = idx.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(idx[i - 1], idx[std::min(j, i - 1)]);
  }
}

struct ChannelNorm {
  double mean = 0.0, sd = 1.0;
  double norm(double x) const { return (x - mean) / sd; }
  double denorm(double z) const { return mean + z * sd; }
};

ChannelNorm fit_norm(const std::vector<double>& xs) {
  ChannelNorm n;
  if (xs.empty()) return n;
  double s = 0.0;
  for (double x : xs) s += x;
  n.mean = s / static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - n.mean) * (x - n.mean);
  n.sd = std::max(kSdFloor, std::sqrt(v / static_cast<double>(xs.size())));
  return n;
}

// Fills one sample's window columns with normalized tokens. Source index
// runs over [target - window, target); indices before the series start
// repeat the earliest observation.
void fill_window(Mat<float>& x, int sample, int window, int target,
                 const EventSeries& series, const ChannelNorm& nia,
                 const ChannelNorm& nd) {
  for (int j = 0; j < window; ++j) {
    int src = target - window + j;
    if (src < 0) src = 0;
    x(0, sample * window + j) =
        static_cast<float>(nia.norm(series.interarrival[src]));
    x(1, sample * window + j) = static_cast<float>(nd.norm(series.demand[src]));
  }
}

TransformerSpec spec_from(const PredictorConfig& cfg) {
  TransformerSpec spec;
  spec.d_model = cfg.model_dim;
  spec.heads = cfg.attention_heads;
  spec.layers = cfg.encoder_layers;
  spec.ffn_dim = cfg.feedforward_dim;
  spec.window = cfg.window_length;
  spec.in_channels = 2;
  spec.out_dim = 2;
  return spec;
}

}  // namespace

void PredictorConfig::validate() const {
  spec_from(*this).validate();
  if (window_length < 1) throw std::invalid_argument("window must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("bad learning rate");
  if (epochs < 1 || batch_size < 1)
    throw std::invalid_argument("epochs and batch size must be >= 1");
}

double r2_score(const std::vector<double>& truth,
                const std::vector<double>& predicted) {
  if (truth.size() != predicted.size())
    throw std::invalid_argument("r2 needs equal-length series");
  if (truth.size() < 2)
    throw std::invalid_argument("r2 needs at least two points");
  double mean = 0.0;
  for (double t : truth) mean += t;
  mean /= static_cast<double>(truth.size());
  double ss_tot = 0.0, ss_res = 0.0;
  for (size_t i = 0; i < truth.size(); ++i) {
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
    ss_res += (truth[i] - predicted[i]) * (truth[i] - predicted[i]);
  }
  if (ss_tot == 0.0)
    throw std::invalid_argument("r2 undefined for a constant truth series");
  return 1.0 - ss_res / ss_tot;
}

std::vector<double> smooth(const std::vector<double>& series, int window) {
  if (window < 1) throw std::invalid_argument("smoothing window must be >= 1");
  std::vector<double> out(series.size());
  double acc = 0.0;
  for (size_t i = 0; i < series.size(); ++i) {
    acc += series[i];
    if (i >= static_cast<size_t>(window)) acc -= series[i - window];
    const double n = static_cast<double>(std::min<size_t>(i + 1, window));
    out[i] = acc / n;
  }
  return out;
}

Predictor Predictor::train(const std::vector<EventSeries>& history,
                           const PredictorConfig& cfg) {
  cfg.validate();
  Predictor p;
  p.cfg_ = cfg;
  const int servers = static_cast<int>(history.size());
  p.epoch_loss_.resize(servers);

  for (int s = 0; s < servers; ++s) {
    const EventSeries& series = history[s];
    const int n = static_cast<int>(series.interarrival.size());
    if (n <= cfg.window_length)
      throw std::invalid_argument(
          "training history for server " + std::to_string(s) + " has " +
          std::to_string(n) + " events; need more than " +
          std::to_string(cfg.window_length));

    const ChannelNorm nia = fit_norm(series.interarrival);
    const ChannelNorm nd = fit_norm(series.demand);
    p.stats_.push_back({nia.mean, nia.sd, nd.mean, nd.sd});

    TransformerNet net(spec_from(cfg),
                       cfg.seed + static_cast<std::uint64_t>(s) * 0x9e3779b9u);
    std::mt19937_64 rng =
        seeded_rng(cfg.seed, 0xba7c4 + static_cast<std::uint64_t>(s));

    std::vector<int> targets(static_cast<size_t>(n) - 1);
    for (int i = 1; i < n; ++i) targets[i - 1] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      shuffle_indices(targets, rng);
      double loss_sum = 0.0;
      long batches = 0;
      for (size_t at = 0; at < targets.size(); at += cfg.batch_size) {
        const int b =
            static_cast<int>(std::min<size_t>(cfg.batch_size,
                                              targets.size() - at));
        Mat<float> x(2, b * cfg.window_length);
        Mat<float> y(2, b);
        for (int k = 0; k < b; ++k) {
          const int tgt = targets[at + k];
          fill_window(x, k, cfg.window_length, tgt, series, nia, nd);
          y(0, k) = static_cast<float>(nia.norm(series.interarrival[tgt]));
          y(1, k) = static_cast<float>(nd.norm(series.demand[tgt]));
        }
        loss_sum += net.train_step(x, y, static_cast<float>(cfg.learning_rate));
        ++batches;
      }
      p.epoch_loss_[s].push_back(loss_sum / static_cast<double>(batches));
    }
    p.models_.push_back(std::move(net));
  }
  return p;
}

ServerForecast Predictor::predict_next(int server,
                                       const EventSeries& recent) const {
  const TransformerNet& net = models_.at(server);
  const SeriesStats& st = stats_.at(server);
  const ChannelNorm nia{st.mean_ia, st.sd_ia};
  const ChannelNorm nd{st.mean_d, st.sd_d};
  const int w = cfg_.window_length;

  Mat<float> x(2, w);
  const int n = static_cast<int>(recent.interarrival.size());
  for (int j = 0; j < w; ++j) {
    if (n == 0) {  // cold start: the training mean, i.e. normalized zero
      x(0, j) = 0.0f;
      x(1, j) = 0.0f;
    } else {
      const int src = std::max(0, n - w + j);
      x(0, j) = static_cast<float>(nia.norm(recent.interarrival[src]));
      x(1, j) = static_cast<float>(nd.norm(recent.demand[src]));
    }
  }
  const Mat<float> y = net.forward(x);
  ServerForecast out;
  out.next_interarrival = std::max(0.0, nia.denorm(y(0, 0)));
  out.next_demand = std::max(0.0, nd.denorm(y(1, 0)));
  if (!std::isfinite(out.next_interarrival) || !std::isfinite(out.next_demand))
    throw std::runtime_error("non-finite forecast");
  return out;
}

Prediction Predictor::predict_all(
    const std::vector<EventSeries>& recent) const {
  Prediction out(models_.size());
  for (size_t s = 0; s < models_.size(); ++s)
    out[s] = predict_next(static_cast<int>(s), recent.at(s));
  return out;
}

std::vector<Predictor::SeriesScores> Predictor::evaluate(
    const std::vector<EventSeries>& eval) const {
  std::vector<SeriesScores> scores;
  const int w = cfg_.window_length;
  const int chunk = 256;
  for (size_t s = 0; s < models_.size(); ++s) {
    const EventSeries& series = eval.at(s);
    const int n = static_cast<int>(series.interarrival.size());
    if (n < 2)
      throw std::invalid_argument("evaluation series too short for server " +
                                  std::to_string(s));
    const SeriesStats& st = stats_[s];
    const ChannelNorm nia{st.mean_ia, st.sd_ia};
    const ChannelNorm nd{st.mean_d, st.sd_d};

    std::vector<double> truth_ia, truth_d, pred_ia, pred_d;
    for (int start = 1; start < n; start += chunk) {
      const int b = std::min(chunk, n - start);
      Mat<float> x(2, b * w);
      for (int k = 0; k < b; ++k)
        fill_window(x, k, w, start + k, series, nia, nd);
      const Mat<float> y = models_[s].forward(x);
      for (int k = 0; k < b; ++k) {
        truth_ia.push_back(series.interarrival[start + k]);
        truth_d.push_back(series.demand[start + k]);
        pred_ia.push_back(std::max(0.0, nia.denorm(y(0, k))));
        pred_d.push_back(std::max(0.0, nd.denorm(y(1, k))));
      }
    }
    scores.push_back({r2_score(truth_ia, pred_ia), r2_score(truth_d, pred_d)});
  }
  return scores;
}

void Predictor::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  const std::int32_t magic = 0x4d454350;  // "MECP"
  out.write(reinterpret_cast<const char*>(&magic), sizeof(magic));
  const std::int32_t servers = num_servers();
  out.write(reinterpret_cast<const char*>(&servers), sizeof(servers));
  const std::int32_t dims[8] = {cfg_.model_dim,
                                cfg_.attention_heads,
                                cfg_.encoder_layers,
                                cfg_.feedforward_dim,
                                cfg_.window_length,
                                cfg_.epochs,
                                cfg_.batch_size,
                                0};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  out.write(reinterpret_cast<const char*>(&cfg_.learning_rate),
            sizeof(cfg_.learning_rate));
  for (int s = 0; s < servers; ++s) {
    out.write(reinterpret_cast<const char*>(&stats_[s]), sizeof(SeriesStats));
    models_[s].save(out);
  }
}

Predictor Predictor::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  std::int32_t magic = 0;
  in.read(reinterpret_cast<char*>(&magic), sizeof(magic));
  if (!in || magic != 0x4d454350)
    throw std::runtime_error("'" + path + "' is not a predictor checkpoint");
  std::int32_t servers = 0;
  in.read(reinterpret_cast<char*>(&servers), sizeof(servers));
  std::int32_t dims[8] = {};
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  Predictor p;
  p.cfg_.model_dim = dims[0];
  p.cfg_.attention_heads = dims[1];
  p.cfg_.encoder_layers = dims[2];
  p.cfg_.feedforward_dim = dims[3];
  p.cfg_.window_length = dims[4];
  p.cfg_.epochs = dims[5];
  p.cfg_.batch_size = dims[6];
  in.read(reinterpret_cast<char*>(&p.cfg_.learning_rate),
          sizeof(p.cfg_.learning_rate));
  if (!in || servers < 0) throw std::runtime_error("truncated checkpoint");
  for (int s = 0; s < servers; ++s) {
    SeriesStats st;
    in.read(reinterpret_cast<char*>(&st), sizeof(SeriesStats));
    if (!in) throw std::runtime_error("truncated checkpoint");
    p.stats_.push_back(st);
    p.models_.push_back(TransformerNet::load(in));
  }
  return p;
}

}  // namespace mec
