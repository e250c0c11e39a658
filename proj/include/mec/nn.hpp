#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mec/rng.hpp"

namespace mec {

// Samples are columns: a batch of B vectors of width D is a D x B matrix.
template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

enum class Act { None, Relu, Sigmoid, Tanh };

template <typename T>
Mat<T> apply_act(Act act, const Mat<T>& z) {
  switch (act) {
    case Act::None: return z;
    case Act::Relu: return z.cwiseMax(T(0));
    case Act::Sigmoid:
      return (T(1) / (T(1) + (-z.array()).exp())).matrix();
    case Act::Tanh: return z.array().tanh().matrix();
  }
  throw std::logic_error("unreachable");
}

// Derivative written in terms of the post-activation value a = act(z).
template <typename T>
Mat<T> act_grad_from_output(Act act, const Mat<T>& a, const Mat<T>& dy) {
  switch (act) {
    case Act::None: return dy;
    case Act::Relu:
      return (dy.array() * (a.array() > T(0)).template cast<T>()).matrix();
    case Act::Sigmoid:
      return (dy.array() * a.array() * (T(1) - a.array())).matrix();
    case Act::Tanh:
      return (dy.array() * (T(1) - a.array() * a.array())).matrix();
  }
  throw std::logic_error("unreachable");
}

// Numerically safe row-wise softmax (max subtracted before exponentiation).
template <typename T>
Mat<T> softmax_rows(Mat<T> s) {
  for (int r = 0; r < s.rows(); ++r) {
    const T mx = s.row(r).maxCoeff();
    s.row(r) = (s.row(r).array() - mx).exp();
    s.row(r) /= s.row(r).sum();
  }
  return s;
}

template <typename T>
struct Linear {
  Mat<T> W, b;    // out x in, out x 1
  Mat<T> gW, gb;  // accumulated gradients, same shapes

  void init(int in, int out, std::mt19937_64& rng) {
    // Xavier-uniform keeps activations in range for the shallow nets here.
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    W.resize(out, in);
    for (int c = 0; c < in; ++c)
      for (int r = 0; r < out; ++r)
        W(r, c) = static_cast<T>(uniform_in(rng, -limit, limit));
    b = Mat<T>::Zero(out, 1);
    gW = Mat<T>::Zero(out, in);
    gb = Mat<T>::Zero(out, 1);
  }

  Mat<T> forward(const Mat<T>& x) const {
    return (W * x).colwise() + b.col(0);
  }

  // Accumulates parameter gradients for upstream gradient dy, returns dx.
  Mat<T> backward(const Mat<T>& x, const Mat<T>& dy) {
    gW.noalias() += dy * x.transpose();
    gb.col(0) += dy.rowwise().sum();
    return W.transpose() * dy;
  }

  void zero_grad() {
    gW.setZero();
    gb.setZero();
  }
};

// Fully connected net: Relu between layers, configurable output activation.
template <typename T>
struct MLP {
  std::vector<Linear<T>> layers;
  Act output_act = Act::None;

  MLP() = default;
  MLP(const std::vector<int>& widths, Act out_act, std::mt19937_64& rng)
      : output_act(out_act) {
    if (widths.size() < 2)
      throw std::invalid_argument("an MLP needs at least input and output widths");
    layers.resize(widths.size() - 1);
    for (size_t i = 0; i + 1 < widths.size(); ++i)
      layers[i].init(widths[i], widths[i + 1], rng);
  }

  Act act_of(size_t layer) const {
    return layer + 1 == layers.size() ? output_act : Act::Relu;
  }

  Mat<T> forward(Mat<T> x) const {
    for (size_t i = 0; i < layers.size(); ++i)
      x = apply_act(act_of(i), layers[i].forward(x));
    return x;
  }

  struct Cache {
    std::vector<Mat<T>> inputs;  // input to each layer
    std::vector<Mat<T>> post;    // activation output of each layer
  };

  Mat<T> train_forward(const Mat<T>& x, Cache& cache) const {
    cache.inputs.assign(layers.size(), {});
    cache.post.assign(layers.size(), {});
    Mat<T> cur = x;
    for (size_t i = 0; i < layers.size(); ++i) {
      cache.inputs[i] = cur;
      cur = apply_act(act_of(i), layers[i].forward(cur));
      cache.post[i] = cur;
    }
    return cur;
  }

  // dy is dLoss/dOutput; accumulates layer gradients, returns dLoss/dInput.
  Mat<T> backward(const Cache& cache, Mat<T> dy) {
    for (size_t i = layers.size(); i-- > 0;) {
      dy = act_grad_from_output(act_of(i), cache.post[i], dy);
      dy = layers[i].backward(cache.inputs[i], dy);
    }
    return dy;
  }

  void zero_grad() {
    for (auto& l : layers) l.zero_grad();
  }

  std::vector<Mat<T>*> params() {
    std::vector<Mat<T>*> out;
    for (auto& l : layers) {
      out.push_back(&l.W);
      out.push_back(&l.b);
    }
    return out;
  }
  std::vector<const Mat<T>*> params() const {
    std::vector<const Mat<T>*> out;
    for (const auto& l : layers) {
      out.push_back(&l.W);
      out.push_back(&l.b);
    }
    return out;
  }
  std::vector<Mat<T>*> grads() {
    std::vector<Mat<T>*> out;
    for (auto& l : layers) {
      out.push_back(&l.gW);
      out.push_back(&l.gb);
    }
    return out;
  }
};

// Copies architecture and parameters across scalar types, e.g. to re-run a
// float net's gradients in double precision for finite-difference checks.
template <typename To, typename From>
MLP<To> cast_mlp(const MLP<From>& src) {
  MLP<To> out;
  out.output_act = src.output_act;
  out.layers.resize(src.layers.size());
  for (std::size_t i = 0; i < src.layers.size(); ++i) {
    out.layers[i].W = src.layers[i].W.template cast<To>();
    out.layers[i].b = src.layers[i].b.template cast<To>();
    out.layers[i].gW = Mat<To>::Zero(src.layers[i].W.rows(),
                                     src.layers[i].W.cols());
    out.layers[i].gb = Mat<To>::Zero(src.layers[i].b.rows(), 1);
  }
  return out;
}

// target <- tau * main + (1 - tau) * target, elementwise over every tensor.
template <typename T>
void soft_update(Mat<T>& target, const Mat<T>& main, T tau) {
  target = tau * main + (T(1) - tau) * target;
}

template <typename T>
void soft_update(MLP<T>& target, const MLP<T>& main, T tau) {
  auto t = target.params();
  auto m = main.params();
  if (t.size() != m.size())
    throw std::invalid_argument("soft update across mismatched nets");
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i]->rows() != m[i]->rows() || t[i]->cols() != m[i]->cols())
      throw std::invalid_argument("soft update across mismatched shapes");
    soft_update(*t[i], *m[i], tau);
  }
}

// Adam over an arbitrary fixed list of parameter tensors. The state list is
// built lazily on the first step and must see the same shapes ever after.
template <typename T>
struct Adam {
  T lr = T(5e-4);
  T beta1 = T(0.9), beta2 = T(0.999), eps = T(1e-8);
  long t = 0;
  std::vector<Mat<T>> m, v;

  void step(const std::vector<Mat<T>*>& params,
            const std::vector<Mat<T>*>& grads) {
    if (params.size() != grads.size())
      throw std::invalid_argument("params/grads arity mismatch");
    if (m.empty()) {
      for (auto* p : params) {
        m.push_back(Mat<T>::Zero(p->rows(), p->cols()));
        v.push_back(Mat<T>::Zero(p->rows(), p->cols()));
      }
    }
    if (m.size() != params.size())
      throw std::invalid_argument("optimizer bound to a different net");
    ++t;
    const T c1 = T(1) - std::pow(beta1, static_cast<T>(t));
    const T c2 = T(1) - std::pow(beta2, static_cast<T>(t));
    for (size_t i = 0; i < params.size(); ++i) {
      const auto g = grads[i]->array();
      m[i].array() = beta1 * m[i].array() + (T(1) - beta1) * g;
      v[i].array() = beta2 * v[i].array() + (T(1) - beta2) * g * g;
      params[i]->array() -=
          lr * (m[i].array() / c1) / ((v[i].array() / c2).sqrt() + eps);
    }
  }

  void step(MLP<T>& net) { step(net.params(), net.grads()); }
};

// Layer normalization over the feature dimension of each column sample.
template <typename T>
struct LayerNorm {
  Mat<T> gamma, beta;    // d x 1
  Mat<T> ggamma, gbeta;  // gradients
  T eps = T(1e-5);

  void init(int d) {
    gamma = Mat<T>::Ones(d, 1);
    beta = Mat<T>::Zero(d, 1);
    ggamma = Mat<T>::Zero(d, 1);
    gbeta = Mat<T>::Zero(d, 1);
  }

  struct Cache {
    Mat<T> xhat;       // normalized input
    Mat<T> inv_sigma;  // 1 x B row of 1/sqrt(var + eps)
  };

  Mat<T> forward(const Mat<T>& x, Cache* cache = nullptr) const {
    const auto d = static_cast<T>(x.rows());
    Mat<T> mu = x.colwise().mean();  // 1 x B
    Mat<T> centered = x.rowwise() - mu.row(0);
    Mat<T> var = centered.array().square().matrix().colwise().sum() / d;
    Mat<T> inv_sigma = (var.array() + eps).rsqrt().matrix();
    Mat<T> xhat =
        (centered.array().rowwise() * inv_sigma.row(0).array()).matrix();
    if (cache) {
      cache->xhat = xhat;
      cache->inv_sigma = inv_sigma;
    }
    return ((xhat.array().colwise() * gamma.col(0).array()).colwise() +
            beta.col(0).array())
        .matrix();
  }

  Mat<T> backward(const Cache& cache, const Mat<T>& dy) {
    const auto d = static_cast<T>(dy.rows());
    ggamma.col(0) += (dy.array() * cache.xhat.array()).matrix().rowwise().sum();
    gbeta.col(0) += dy.rowwise().sum();
    Mat<T> dxhat = (dy.array().colwise() * gamma.col(0).array()).matrix();
    // dx = (1/sigma) * (dxhat - mean(dxhat) - xhat * mean(dxhat .* xhat))
    Mat<T> mean_dxhat = dxhat.colwise().sum() / d;                   // 1 x B
    Mat<T> mean_dxhat_xhat =
        (dxhat.array() * cache.xhat.array()).matrix().colwise().sum() / d;
    Mat<T> dx = dxhat.rowwise() - mean_dxhat.row(0);
    dx.array() -=
        cache.xhat.array().rowwise() * mean_dxhat_xhat.row(0).array();
    dx.array().rowwise() *= cache.inv_sigma.row(0).array();
    return dx;
  }

  void zero_grad() {
    ggamma.setZero();
    gbeta.setZero();
  }
};

}  // namespace mec
