#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <vector>

#include "mec/nn.hpp"

using namespace mec;
using Md = Mat<double>;

namespace {

// Central finite differences over every entry of every tensor in `params`,
// compared against the already-accumulated analytic gradients in `grads`.
void check_grads_fd(const std::vector<Md*>& params,
                    const std::vector<Md*>& grads,
                    const std::function<double()>& loss, double tol) {
  const double h = 1e-6;
  for (size_t i = 0; i < params.size(); ++i) {
    Md& p = *params[i];
    const Md& g = *grads[i];
    for (int c = 0; c < p.cols(); ++c)
      for (int r = 0; r < p.rows(); ++r) {
        const double keep = p(r, c);
        p(r, c) = keep + h;
        const double up = loss();
        p(r, c) = keep - h;
        const double down = loss();
        p(r, c) = keep;
        const double fd = (up - down) / (2.0 * h);
        const double err = std::abs(fd - g(r, c));
        const double scale = std::max({1e-4, std::abs(fd), std::abs(g(r, c))});
        CHECK(err / scale < tol);
      }
  }
}

double sq_loss(const Md& y, const Md& target) {
  return 0.5 * (y - target).squaredNorm();
}

}  // namespace

TEST_CASE("linear layer matches hand arithmetic") {
  Linear<double> lin;
  std::mt19937_64 rng(1);
  lin.init(2, 2, rng);
  lin.W << 1.0, 2.0, 3.0, 4.0;
  lin.b << 0.5, -0.5;
  Md x(2, 1);
  x << 1.0, 1.0;
  const Md y = lin.forward(x);
  CHECK(y(0, 0) == 3.5);
  CHECK(y(1, 0) == 6.5);

  // Batched columns evaluate independently.
  Md xb(2, 2);
  xb << 1.0, 0.0, 1.0, 0.0;
  const Md yb = lin.forward(xb);
  CHECK(yb(0, 0) == 3.5);
  CHECK(yb(0, 1) == 0.5);
  CHECK(yb(1, 1) == -0.5);
}

TEST_CASE("activation functions") {
  Md z(3, 1);
  z << -1.0, 0.0, 2.0;
  const Md r = apply_act(Act::Relu, z);
  CHECK(r(0, 0) == 0.0);
  CHECK(r(1, 0) == 0.0);
  CHECK(r(2, 0) == 2.0);
  const Md s = apply_act(Act::Sigmoid, z);
  CHECK(s(1, 0) == 0.5);
  CHECK(s(0, 0) == doctest::Approx(1.0 / (1.0 + std::exp(1.0))).epsilon(1e-12));
  const Md t = apply_act(Act::Tanh, z);
  CHECK(t(1, 0) == 0.0);
  CHECK(t(2, 0) == doctest::Approx(std::tanh(2.0)).epsilon(1e-12));
  for (int i = 0; i < 3; ++i) {
    CHECK(s(i, 0) > 0.0);
    CHECK(s(i, 0) < 1.0);
  }
}

TEST_CASE("mlp backprop matches finite differences") {
  std::mt19937_64 rng(42);
  for (Act out : {Act::None, Act::Sigmoid, Act::Tanh}) {
    CAPTURE(static_cast<int>(out));
    MLP<double> net({4, 8, 8, 3}, out, rng);
    Md x(4, 5), target(3, 5);
    for (int c = 0; c < 5; ++c) {
      for (int r = 0; r < 4; ++r) x(r, c) = uniform_in(rng, -1.0, 1.0);
      for (int r = 0; r < 3; ++r) target(r, c) = uniform_in(rng, -0.5, 0.5);
    }
    MLP<double>::Cache cache;
    const Md y = net.train_forward(x, cache);
    net.zero_grad();
    const Md dx = net.backward(cache, y - target);

    auto loss = [&] { return sq_loss(net.forward(x), target); };
    check_grads_fd(net.params(), net.grads(), loss, 1e-5);

    // Input gradient agrees with finite differences too.
    const double h = 1e-6;
    for (int r = 0; r < 4; ++r) {
      const double keep = x(r, 0);
      x(r, 0) = keep + h;
      const double up = loss();
      x(r, 0) = keep - h;
      const double down = loss();
      x(r, 0) = keep;
      const double fd = (up - down) / (2.0 * h);
      CHECK(dx(r, 0) == doctest::Approx(fd).epsilon(1e-4));
    }
  }
}

TEST_CASE("gradients accumulate until cleared") {
  std::mt19937_64 rng(7);
  MLP<double> net({3, 4, 2}, Act::None, rng);
  Md x = Md::Random(3, 2);
  MLP<double>::Cache cache;
  net.train_forward(x, cache);
  net.zero_grad();
  net.backward(cache, Md::Ones(2, 2));
  const Md once = net.layers[0].gW;
  net.backward(cache, Md::Ones(2, 2));
  CHECK((net.layers[0].gW - 2.0 * once).norm() == doctest::Approx(0.0).epsilon(1e-12));
  net.zero_grad();
  CHECK(net.layers[0].gW.norm() == 0.0);
}

TEST_CASE("soft update is the tau mix of both nets") {
  std::mt19937_64 rng(11);
  MLP<double> main({5, 16, 4}, Act::Sigmoid, rng);
  MLP<double> target({5, 16, 4}, Act::Sigmoid, rng);
  std::vector<Md> before;
  for (const auto* p : target.params()) before.push_back(*p);

  const double tau = 0.005;
  soft_update(target, main, tau);
  auto t = target.params();
  auto m = main.params();
  for (size_t i = 0; i < t.size(); ++i) {
    const Md expect = tau * (*m[i]) + (1.0 - tau) * before[i];
    CHECK((*t[i] - expect).cwiseAbs().maxCoeff() <= 1e-12);
  }

  // tau = 1 copies the main net outright.
  soft_update(target, main, 1.0);
  for (size_t i = 0; i < t.size(); ++i)
    CHECK((*t[i] - *m[i]).cwiseAbs().maxCoeff() == 0.0);

  MLP<double> other({5, 16, 5}, Act::Sigmoid, rng);
  CHECK_THROWS_AS(soft_update(other, main, 0.5), std::invalid_argument);
}

TEST_CASE("adam drives a quadratic to its minimum deterministically") {
  auto run = [](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    MLP<double> net({2, 16, 1}, Act::None, rng);
    Md x(2, 8), target(1, 8);
    for (int c = 0; c < 8; ++c) {
      x(0, c) = uniform_in(rng, -1.0, 1.0);
      x(1, c) = uniform_in(rng, -1.0, 1.0);
      target(0, c) = 0.3 * x(0, c) - 0.7 * x(1, c) + 0.1;
    }
    Adam<double> opt;
    opt.lr = 1e-2;
    double first = -1.0, last = -1.0;
    for (int it = 0; it < 500; ++it) {
      MLP<double>::Cache cache;
      const Md y = net.train_forward(x, cache);
      if (it == 0) first = sq_loss(y, target);
      last = sq_loss(y, target);
      net.zero_grad();
      net.backward(cache, y - target);
      opt.step(net);
    }
    return std::tuple{first, last, net.layers.back().W};
  };
  auto [first, last, w1] = run(123);
  CHECK(last < first / 100.0);
  auto [f2, l2, w2] = run(123);
  CHECK(last == l2);
  CHECK((w1 - w2).norm() == 0.0);
  auto [f3, l3, w3] = run(124);
  CHECK((w1 - w3).norm() > 0.0);
}

TEST_CASE("layer norm standardizes each sample") {
  LayerNorm<double> ln;
  ln.init(6);
  Md x = 3.0 * Md::Random(6, 4);
  x.array() += 2.0;
  const Md y = ln.forward(x);
  for (int c = 0; c < 4; ++c) {
    CHECK(y.col(c).mean() == doctest::Approx(0.0).epsilon(1e-9));
    const double var = y.col(c).squaredNorm() / 6.0;
    CHECK(var == doctest::Approx(1.0).epsilon(1e-4));  // eps shifts it slightly
  }
}

TEST_CASE("layer norm backprop matches finite differences") {
  std::mt19937_64 rng(3);
  LayerNorm<double> ln;
  ln.init(5);
  for (int i = 0; i < 5; ++i) {
    ln.gamma(i, 0) = uniform_in(rng, 0.5, 1.5);
    ln.beta(i, 0) = uniform_in(rng, -0.3, 0.3);
  }
  Md x(5, 3), target(5, 3);
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < 5; ++r) {
      x(r, c) = uniform_in(rng, -2.0, 2.0);
      target(r, c) = uniform_in(rng, -1.0, 1.0);
    }

  LayerNorm<double>::Cache cache;
  const Md y = ln.forward(x, &cache);
  ln.zero_grad();
  const Md dx = ln.backward(cache, y - target);

  auto loss = [&] { return sq_loss(ln.forward(x), target); };
  std::vector<Md*> params = {&ln.gamma, &ln.beta};
  std::vector<Md*> grads = {&ln.ggamma, &ln.gbeta};
  check_grads_fd(params, grads, loss, 1e-5);

  const double h = 1e-6;
  for (int r = 0; r < 5; ++r) {
    const double keep = x(r, 1);
    x(r, 1) = keep + h;
    const double up = loss();
    x(r, 1) = keep - h;
    const double down = loss();
    x(r, 1) = keep;
    CHECK(dx(r, 1) == doctest::Approx((up - down) / (2.0 * h)).epsilon(1e-4));
  }
}

TEST_CASE("initialization is seed-deterministic") {
  std::mt19937_64 a(99), b(99), c(100);
  MLP<double> n1({7, 9, 2}, Act::None, a);
  MLP<double> n2({7, 9, 2}, Act::None, b);
  MLP<double> n3({7, 9, 2}, Act::None, c);
  CHECK((n1.layers[0].W - n2.layers[0].W).norm() == 0.0);
  CHECK((n1.layers[1].W - n2.layers[1].W).norm() == 0.0);
  CHECK((n1.layers[0].W - n3.layers[0].W).norm() > 0.0);
}
