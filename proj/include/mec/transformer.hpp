#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mec/nn.hpp"

namespace mec {

struct TransformerSpec {
  int d_model = 512;
  int heads = 4;
  int layers = 1;
  int ffn_dim = 1024;
  int window = 20;       // tokens per sample
  int in_channels = 2;   // features per token
  int out_dim = 2;       // regression targets read off the last token
  void validate() const;
};

// Classic post-norm encoder layer with full self-attention over the window.
// Samples are independent: a batch lays its windows out as column blocks of
// width `window` inside one big matrix. Templated so tests can run the exact
// attention backward in double precision.
template <typename T>
struct EncoderLayerT {
  int heads = 1;
  Linear<T> wq, wk, wv, wo;
  LayerNorm<T> ln1, ln2;
  Linear<T> ff1, ff2;

  struct Cache {
    Mat<T> input;              // d x (L*B)
    Mat<T> q, k, v;            // d x (L*B)
    std::vector<Mat<T>> probs; // per (sample, head): L x L attention weights
    Mat<T> att_concat;         // d x (L*B), before wo
    typename LayerNorm<T>::Cache ln1c, ln2c;
    Mat<T> ln1_out;            // d x (L*B)
    Mat<T> ff_hidden;          // ffn x (L*B), post-relu
  };

  void init(int d_model, int n_heads, int ffn_dim, std::mt19937_64& rng) {
    heads = n_heads;
    wq.init(d_model, d_model, rng);
    wk.init(d_model, d_model, rng);
    wv.init(d_model, d_model, rng);
    wo.init(d_model, d_model, rng);
    ln1.init(d_model);
    ln2.init(d_model);
    ff1.init(d_model, ffn_dim, rng);
    ff2.init(ffn_dim, d_model, rng);
  }

  Mat<T> forward(const Mat<T>& x, int window, Cache* cache) const {
    const int d = static_cast<int>(x.rows());
    const int batch = static_cast<int>(x.cols()) / window;
    const int dk = d / heads;
    const T scale = T(1) / std::sqrt(static_cast<T>(dk));

    Mat<T> q = wq.forward(x);
    Mat<T> k = wk.forward(x);
    Mat<T> v = wv.forward(x);
    Mat<T> att(d, x.cols());
    std::vector<Mat<T>> probs;
    probs.reserve(static_cast<size_t>(batch) * heads);
    for (int b = 0; b < batch; ++b) {
      for (int h = 0; h < heads; ++h) {
        const auto qb = q.block(h * dk, b * window, dk, window);
        const auto kb = k.block(h * dk, b * window, dk, window);
        const auto vb = v.block(h * dk, b * window, dk, window);
        const Mat<T> p = softmax_rows<T>((qb.transpose() * kb) * scale);
        att.block(h * dk, b * window, dk, window).noalias() =
            vb * p.transpose();
        probs.push_back(p);
      }
    }
    Mat<T> post_att = x + wo.forward(att);

    typename LayerNorm<T>::Cache ln1c, ln2c;
    Mat<T> ln1_out = ln1.forward(post_att, &ln1c);
    Mat<T> ff_hidden = apply_act(Act::Relu, ff1.forward(ln1_out));
    Mat<T> post_ffn = ln1_out + ff2.forward(ff_hidden);
    Mat<T> out = ln2.forward(post_ffn, &ln2c);

    if (cache) {
      cache->input = x;
      cache->q = std::move(q);
      cache->k = std::move(k);
      cache->v = std::move(v);
      cache->probs = std::move(probs);
      cache->att_concat = std::move(att);
      cache->ln1c = std::move(ln1c);
      cache->ln2c = std::move(ln2c);
      cache->ln1_out = std::move(ln1_out);
      cache->ff_hidden = std::move(ff_hidden);
    }
    return out;
  }

  Mat<T> backward(int window, const Cache& cache, const Mat<T>& dy) {
    const int d = static_cast<int>(cache.input.rows());
    const int batch = static_cast<int>(cache.input.cols()) / window;
    const int dk = d / heads;
    const T scale = T(1) / std::sqrt(static_cast<T>(dk));

    Mat<T> d_post_ffn = ln2.backward(cache.ln2c, dy);
    Mat<T> d_ln1_out = d_post_ffn;  // residual branch
    Mat<T> d_hidden = ff2.backward(cache.ff_hidden, d_post_ffn);
    d_ln1_out += ff1.backward(
        cache.ln1_out, act_grad_from_output(Act::Relu, cache.ff_hidden, d_hidden));
    Mat<T> d_post_att = ln1.backward(cache.ln1c, d_ln1_out);

    Mat<T> dx = d_post_att;  // residual branch
    Mat<T> d_att = wo.backward(cache.att_concat, d_post_att);

    Mat<T> dq = Mat<T>::Zero(d, cache.input.cols());
    Mat<T> dkm = Mat<T>::Zero(d, cache.input.cols());
    Mat<T> dv = Mat<T>::Zero(d, cache.input.cols());
    for (int b = 0; b < batch; ++b) {
      for (int h = 0; h < heads; ++h) {
        const Mat<T>& p = cache.probs[static_cast<size_t>(b) * heads + h];
        const auto d_out = d_att.block(h * dk, b * window, dk, window);
        const auto qb = cache.q.block(h * dk, b * window, dk, window);
        const auto kb = cache.k.block(h * dk, b * window, dk, window);
        const auto vb = cache.v.block(h * dk, b * window, dk, window);
        dv.block(h * dk, b * window, dk, window).noalias() = d_out * p;
        Mat<T> dp = d_out.transpose() * vb;  // window x window
        Mat<T> row_dot =
            (dp.array() * p.array()).rowwise().sum().matrix();  // window x 1
        Mat<T> ds =
            ((dp.array().colwise() - row_dot.col(0).array()) * p.array() *
             scale)
                .matrix();
        dq.block(h * dk, b * window, dk, window).noalias() =
            kb * ds.transpose();
        dkm.block(h * dk, b * window, dk, window).noalias() = qb * ds;
      }
    }
    dx += wq.backward(cache.input, dq);
    dx += wk.backward(cache.input, dkm);
    dx += wv.backward(cache.input, dv);
    return dx;
  }

  void zero_grad() {
    wq.zero_grad();
    wk.zero_grad();
    wv.zero_grad();
    wo.zero_grad();
    ln1.zero_grad();
    ln2.zero_grad();
    ff1.zero_grad();
    ff2.zero_grad();
  }

  void collect(std::vector<Mat<T>*>& params, std::vector<Mat<T>*>& grads) {
    for (Linear<T>* l : {&wq, &wk, &wv, &wo, &ff1, &ff2}) {
      params.push_back(&l->W);
      grads.push_back(&l->gW);
      params.push_back(&l->b);
      grads.push_back(&l->gb);
    }
    for (LayerNorm<T>* n : {&ln1, &ln2}) {
      params.push_back(&n->gamma);
      grads.push_back(&n->ggamma);
      params.push_back(&n->beta);
      grads.push_back(&n->gbeta);
    }
  }

  void collect(std::vector<const Mat<T>*>& params) const {
    for (const Linear<T>* l : {&wq, &wk, &wv, &wo, &ff1, &ff2}) {
      params.push_back(&l->W);
      params.push_back(&l->b);
    }
    for (const LayerNorm<T>* n : {&ln1, &ln2}) {
      params.push_back(&n->gamma);
      params.push_back(&n->beta);
    }
  }
};

using EncoderLayer = EncoderLayerT<float>;

// Sequence regressor: token embedding + sinusoidal positions, a stack of
// encoder layers, and a linear head on the final token's representation.
class TransformerNet {
 public:
  TransformerNet() = default;
  TransformerNet(const TransformerSpec& spec, std::uint64_t seed);

  const TransformerSpec& spec() const { return spec_; }

  // x: in_channels x (window * batch), sample-major column blocks.
  // Returns out_dim x batch.
  Mat<float> forward(const Mat<float>& x) const;

  // One optimization step on the batch; returns the batch MSE before it.
  float train_step(const Mat<float>& x, const Mat<float>& target, float lr);

  void save(std::ostream& out) const;
  static TransformerNet load(std::istream& in);

 private:
  struct FullCache;
  Mat<float> run(const Mat<float>& x, FullCache* cache) const;
  std::vector<Mat<float>*> params();
  std::vector<const Mat<float>*> params() const;
  std::vector<Mat<float>*> grads();
  void zero_grad();

  TransformerSpec spec_;
  Linear<float> embed_;
  Mat<float> positions_;  // d_model x window, fixed sinusoids
  std::vector<EncoderLayer> layers_;
  Linear<float> head_;
  Adam<float> opt_;
};

}  // namespace mec
