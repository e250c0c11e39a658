#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mec/trace.hpp"
#include "mec/transformer.hpp"

namespace mec {

struct PredictorConfig {
  int model_dim = 512;
  int attention_heads = 4;
  int encoder_layers = 1;
  int feedforward_dim = 1024;
  int window_length = 20;  // context events per prediction
  double learning_rate = 1e-4;
  int epochs = 2;
  int batch_size = 32;
  std::uint64_t seed = 1;
  void validate() const;
};

// Q_Mt: the per-server forecast appended to the critic state.
struct ServerForecast {
  double next_interarrival = 0.0;  // seconds
  double next_demand = 0.0;        // gigacycles
};
using Prediction = std::vector<ServerForecast>;

// 1 - SS_res / SS_tot. Throws on length mismatch, length < 2, or constant
// truth (the score is undefined there).
double r2_score(const std::vector<double>& truth,
                const std::vector<double>& predicted);

// Trailing moving average; output length equals input length.
std::vector<double> smooth(const std::vector<double>& series, int window = 20);

// One transformer per server, trained offline on that server's own
// (inter-arrival, demand) history, both channels z-scored against the
// training split. Predictions denormalize and clamp at zero.
class Predictor {
 public:
  struct SeriesStats {
    double mean_ia = 0.0, sd_ia = 1.0;
    double mean_d = 0.0, sd_d = 1.0;
  };
  struct SeriesScores {
    double interarrival = 0.0, demand = 0.0;  // held-out R² per channel
  };

  Predictor() = default;

  // history: one series per server, each strictly longer than the window.
  static Predictor train(const std::vector<EventSeries>& history,
                         const PredictorConfig& cfg);

  int num_servers() const { return static_cast<int>(models_.size()); }
  const PredictorConfig& config() const { return cfg_; }
  const SeriesStats& stats(int server) const { return stats_.at(server); }
  // Mean training MSE per epoch, per server.
  const std::vector<std::vector<double>>& epoch_loss() const {
    return epoch_loss_;
  }

  // One-step-ahead forecast from the trailing window of `recent`. Short
  // histories pad by repeating the earliest observation; an empty history
  // falls back to the training mean.
  ServerForecast predict_next(int server, const EventSeries& recent) const;
  Prediction predict_all(const std::vector<EventSeries>& recent) const;

  // One-step-ahead R² over each held-out series (needs length >= 2).
  std::vector<SeriesScores> evaluate(
      const std::vector<EventSeries>& eval) const;

  void save(const std::string& path) const;
  static Predictor load(const std::string& path);

 private:
  PredictorConfig cfg_;
  std::vector<TransformerNet> models_;
  std::vector<SeriesStats> stats_;
  std::vector<std::vector<double>> epoch_loss_;
};

}  // namespace mec
