#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <vector>

#include "mec/predictor.hpp"
#include "mec/transformer.hpp"

using namespace mec;

namespace {

// Small everything: unit tests exercise behavior, not capacity.
PredictorConfig tiny_config() {
  PredictorConfig cfg;
  cfg.model_dim = 16;
  cfg.attention_heads = 2;
  cfg.encoder_layers = 1;
  cfg.feedforward_dim = 32;
  cfg.window_length = 4;
  cfg.learning_rate = 3e-3;
  cfg.epochs = 30;
  cfg.batch_size = 16;
  cfg.seed = 5;
  return cfg;
}

EventSeries constant_series(int n, double ia, double d) {
  EventSeries s;
  s.interarrival.assign(n, ia);
  s.demand.assign(n, d);
  return s;
}

// Period-2 alternation: the simplest nontrivial learnable pattern.
EventSeries alternating_series(int n) {
  EventSeries s;
  for (int i = 0; i < n; ++i) {
    s.interarrival.push_back(i % 2 == 0 ? 1.0 : 3.0);
    s.demand.push_back(i % 2 == 0 ? 20.0 : 40.0);
  }
  return s;
}

}  // namespace

TEST_CASE("r2 score definition") {
  CHECK(r2_score({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 1.0);
  CHECK(r2_score({1.0, 2.0, 3.0}, {2.0, 2.0, 2.0}) == 0.0);  // mean predictor
  CHECK(r2_score({1.0, 2.0, 3.0}, {1.0, 2.0, 2.0}) == 0.5);
  CHECK(r2_score({1.0, 2.0}, {2.0, 1.0}) < 0.0);  // worse than the mean
  CHECK_THROWS_AS(r2_score({1.0, 2.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(r2_score({1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(r2_score({2.0, 2.0, 2.0}, {1.0, 2.0, 3.0}),
                  std::invalid_argument);
}

TEST_CASE("smoothing is a trailing mean") {
  const std::vector<double> xs = {2.0, 4.0, 6.0, 8.0};
  CHECK(smooth(xs, 1) == xs);
  CHECK(smooth({5.0, 5.0, 5.0}, 20) == std::vector<double>{5.0, 5.0, 5.0});
  const std::vector<double> partial = smooth(xs, 2);
  CHECK(partial[0] == 2.0);  // leading edge averages what exists
  CHECK(partial[1] == 3.0);
  CHECK(partial[2] == 5.0);
  CHECK(partial[3] == 7.0);
  std::vector<double> spike(20, 0.0);
  spike.back() = 20.0;
  const std::vector<double> sm = smooth(spike, 20);
  CHECK(sm.size() == spike.size());
  CHECK(sm.back() == 1.0);
  CHECK_THROWS_AS(smooth(xs, 0), std::invalid_argument);
}

TEST_CASE("encoder layer backward matches finite differences") {
  TransformerSpec spec;
  spec.d_model = 8;
  spec.heads = 2;
  spec.ffn_dim = 12;
  spec.window = 3;
  std::mt19937_64 rng(21);
  EncoderLayerT<double> layer;
  layer.init(spec.d_model, spec.heads, spec.ffn_dim, rng);

  const int batch = 2;
  Mat<double> x(spec.d_model, spec.window * batch);
  Mat<double> target(spec.d_model, spec.window * batch);
  for (int c = 0; c < x.cols(); ++c)
    for (int r = 0; r < x.rows(); ++r) {
      x(r, c) = uniform_in(rng, -1.0, 1.0);
      target(r, c) = uniform_in(rng, -1.0, 1.0);
    }

  EncoderLayerT<double>::Cache cache;
  const Mat<double> y = layer.forward(x, spec.window, &cache);
  layer.zero_grad();
  const Mat<double> dx = layer.backward(spec.window, cache, y - target);

  auto loss = [&] {
    const Mat<double> out = layer.forward(x, spec.window, nullptr);
    return 0.5 * (out - target).squaredNorm();
  };
  std::vector<Mat<double>*> params, grads;
  layer.collect(params, grads);
  const double h = 1e-6;
  for (size_t i = 0; i < params.size(); ++i) {
    Mat<double>& p = *params[i];
    for (int c = 0; c < p.cols(); ++c)
      for (int r = 0; r < p.rows(); ++r) {
        const double keep = p(r, c);
        p(r, c) = keep + h;
        const double up = loss();
        p(r, c) = keep - h;
        const double down = loss();
        p(r, c) = keep;
        const double fd = (up - down) / (2.0 * h);
        const double g = (*grads[i])(r, c);
        const double scale = std::max({1e-4, std::abs(fd), std::abs(g)});
        CHECK(std::abs(fd - g) / scale < 1e-4);
      }
  }
  // And the input gradient.
  for (int c = 0; c < x.cols(); ++c)
    for (int r = 0; r < x.rows(); ++r) {
      const double keep = x(r, c);
      x(r, c) = keep + h;
      const double up = loss();
      x(r, c) = keep - h;
      const double down = loss();
      x(r, c) = keep;
      const double fd = (up - down) / (2.0 * h);
      const double scale = std::max({1e-4, std::abs(fd), std::abs(dx(r, c))});
      CHECK(std::abs(fd - dx(r, c)) / scale < 1e-4);
    }
}

TEST_CASE("constant series trains to the constant") {
  PredictorConfig cfg = tiny_config();
  cfg.epochs = 5;
  const std::vector<EventSeries> history = {constant_series(50, 2.0, 30.0)};
  const Predictor p = Predictor::train(history, cfg);

  const ServerForecast f = p.predict_next(0, constant_series(10, 2.0, 30.0));
  CHECK(f.next_interarrival == doctest::Approx(2.0).epsilon(0.1));
  CHECK(f.next_demand == doctest::Approx(30.0).epsilon(0.1));

  // Prediction error over a constant stream is essentially zero.
  const EventSeries eval = constant_series(30, 2.0, 30.0);
  double mse = 0.0;
  for (int i = 1; i < 30; ++i) {
    EventSeries window;
    window.interarrival.assign(eval.interarrival.begin(),
                               eval.interarrival.begin() + i);
    window.demand.assign(eval.demand.begin(), eval.demand.begin() + i);
    const ServerForecast g = p.predict_next(0, window);
    mse += (g.next_interarrival - 2.0) * (g.next_interarrival - 2.0) +
           (g.next_demand - 30.0) * (g.next_demand - 30.0);
  }
  mse /= 29.0;
  CHECK(mse < 1e-6);
}

TEST_CASE("insufficient history names the offending server") {
  PredictorConfig cfg = tiny_config();
  const std::vector<EventSeries> history = {constant_series(50, 1.0, 10.0),
                                            constant_series(3, 1.0, 10.0)};
  CHECK_THROWS_WITH_AS(Predictor::train(history, cfg),
                       doctest::Contains("server 1"), std::invalid_argument);
}

TEST_CASE("alternating pattern is learned") {
  PredictorConfig cfg = tiny_config();
  const std::vector<EventSeries> history = {alternating_series(240)};
  const Predictor p = Predictor::train(history, cfg);

  // Training loss dropped from the first epoch to the last.
  const auto& losses = p.epoch_loss()[0];
  REQUIRE(losses.size() == static_cast<size_t>(cfg.epochs));
  CHECK(losses.back() < losses.front());

  // A window ending on the (1, 20) phase predicts the (3, 40) phase.
  EventSeries recent = alternating_series(9);  // ends on the even phase
  const ServerForecast f = p.predict_next(0, recent);
  CHECK(f.next_interarrival == doctest::Approx(3.0).epsilon(0.2));
  CHECK(f.next_demand == doctest::Approx(40.0).epsilon(0.2));

  // Held-out R² on the same process is high for both channels.
  const auto scores = p.evaluate({alternating_series(80)});
  CHECK(scores[0].interarrival > 0.8);
  CHECK(scores[0].demand > 0.8);
}

TEST_CASE("prediction is pure, clamped, and survives odd windows") {
  PredictorConfig cfg = tiny_config();
  cfg.epochs = 3;
  const Predictor p = Predictor::train({alternating_series(100)}, cfg);

  const EventSeries empty;
  const ServerForecast cold = p.predict_next(0, empty);
  CHECK(std::isfinite(cold.next_interarrival));
  CHECK(std::isfinite(cold.next_demand));
  CHECK(cold.next_interarrival >= 0.0);
  CHECK(cold.next_demand >= 0.0);

  const EventSeries shorty = alternating_series(2);  // shorter than the window
  const ServerForecast s1 = p.predict_next(0, shorty);
  const ServerForecast s2 = p.predict_next(0, shorty);
  CHECK(s1.next_interarrival == s2.next_interarrival);
  CHECK(s1.next_demand == s2.next_demand);

  const Prediction all = p.predict_all({alternating_series(5)});
  REQUIRE(all.size() == 1);
  CHECK(all[0].next_demand >= 0.0);
}

TEST_CASE("training is deterministic in the seed") {
  PredictorConfig cfg = tiny_config();
  cfg.epochs = 4;
  const std::vector<EventSeries> history = {alternating_series(100)};
  const Predictor a = Predictor::train(history, cfg);
  const Predictor b = Predictor::train(history, cfg);
  cfg.seed = 6;
  const Predictor c = Predictor::train(history, cfg);

  const EventSeries probe = alternating_series(7);
  CHECK(a.predict_next(0, probe).next_demand ==
        b.predict_next(0, probe).next_demand);
  CHECK(a.predict_next(0, probe).next_interarrival ==
        b.predict_next(0, probe).next_interarrival);
  CHECK(a.predict_next(0, probe).next_demand !=
        c.predict_next(0, probe).next_demand);
}

TEST_CASE("normalization statistics round-trip") {
  PredictorConfig cfg = tiny_config();
  cfg.epochs = 1;
  const Predictor p = Predictor::train({alternating_series(60)}, cfg);
  const Predictor::SeriesStats st = p.stats(0);
  for (double x : {0.37, 1.0, 3.0, 123.456}) {
    const double z = (x - st.mean_ia) / st.sd_ia;
    CHECK(st.mean_ia + z * st.sd_ia == doctest::Approx(x).epsilon(1e-12));
    const double zd = (x - st.mean_d) / st.sd_d;
    CHECK(st.mean_d + zd * st.sd_d == doctest::Approx(x).epsilon(1e-12));
  }
}

TEST_CASE("checkpoints restore the exact model") {
  PredictorConfig cfg = tiny_config();
  cfg.epochs = 3;
  const std::vector<EventSeries> history = {alternating_series(100),
                                            alternating_series(90)};
  const Predictor p = Predictor::train(history, cfg);
  p.save("predictor_ckpt.bin");
  const Predictor q = Predictor::load("predictor_ckpt.bin");
  std::remove("predictor_ckpt.bin");

  CHECK(q.num_servers() == 2);
  CHECK(q.config().model_dim == cfg.model_dim);
  const EventSeries probe = alternating_series(11);
  for (int s = 0; s < 2; ++s) {
    const ServerForecast a = p.predict_next(s, probe);
    const ServerForecast b = q.predict_next(s, probe);
    CHECK(a.next_interarrival == b.next_interarrival);
    CHECK(a.next_demand == b.next_demand);
  }
  CHECK_THROWS_AS(Predictor::load("missing_ckpt.bin"), std::runtime_error);
}
