#include "mec/transformer.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "mec/tensor_io.hpp"

namespace mec {

void TransformerSpec::validate() const {
  if (d_model < 1 || heads < 1 || layers < 1 || ffn_dim < 1 || window < 1 ||
      in_channels < 1 || out_dim < 1)
    throw std::invalid_argument("transformer dimensions must be positive");
  if (d_model % heads != 0)
    throw std::invalid_argument("model width must divide evenly across heads");
}

struct TransformerNet::FullCache {
  Mat<float> x_in;
  std::vector<EncoderLayer::Cache> layer_caches;
  Mat<float> head_in;  // d x batch, last-token slices
};

TransformerNet::TransformerNet(const TransformerSpec& spec, std::uint64_t seed)
    : spec_(spec) {
  spec_.validate();
  std::mt19937_64 rng = seeded_rng(seed, 0x7f0d);
  embed_.init(spec_.in_channels, spec_.d_model, rng);
  layers_.resize(spec_.layers);
  for (auto& layer : layers_)
    layer.init(spec_.d_model, spec_.heads, spec_.ffn_dim, rng);
  head_.init(spec_.d_model, spec_.out_dim, rng);

  // Fixed sinusoidal position code, one column per window slot.
  positions_.resize(spec_.d_model, spec_.window);
  for (int t = 0; t < spec_.window; ++t) {
    for (int i = 0; i < spec_.d_model; i += 2) {
      const double rate =
          std::pow(10000.0, static_cast<double>(i) / spec_.d_model);
      positions_(i, t) = static_cast<float>(std::sin(t / rate));
      if (i + 1 < spec_.d_model)
        positions_(i + 1, t) = static_cast<float>(std::cos(t / rate));
    }
  }
}

Mat<float> TransformerNet::run(const Mat<float>& x, FullCache* cache) const {
  if (x.rows() != spec_.in_channels || x.cols() % spec_.window != 0)
    throw std::invalid_argument("bad input shape for the transformer window");
  const int batch = static_cast<int>(x.cols()) / spec_.window;
  Mat<float> cur = embed_.forward(x);
  for (int b = 0; b < batch; ++b)
    cur.middleCols(b * spec_.window, spec_.window) += positions_;

  std::vector<EncoderLayer::Cache> layer_caches(cache ? layers_.size() : 0);
  for (size_t i = 0; i < layers_.size(); ++i)
    cur = layers_[i].forward(cur, spec_.window,
                             cache ? &layer_caches[i] : nullptr);

  Mat<float> head_in(spec_.d_model, batch);
  for (int b = 0; b < batch; ++b)
    head_in.col(b) = cur.col((b + 1) * spec_.window - 1);
  Mat<float> y = head_.forward(head_in);

  if (cache) {
    cache->x_in = x;
    cache->layer_caches = std::move(layer_caches);
    cache->head_in = std::move(head_in);
  }
  return y;
}

Mat<float> TransformerNet::forward(const Mat<float>& x) const {
  return run(x, nullptr);
}

float TransformerNet::train_step(const Mat<float>& x, const Mat<float>& target,
                                 float lr) {
  FullCache cache;
  const Mat<float> y = run(x, &cache);
  if (target.rows() != y.rows() || target.cols() != y.cols())
    throw std::invalid_argument("target shape mismatch");
  const int batch = static_cast<int>(y.cols());
  const float denom = static_cast<float>(y.size());
  const float loss = (y - target).squaredNorm() / denom;

  zero_grad();
  Mat<float> dy = 2.0f * (y - target) / denom;
  Mat<float> d_head_in = head_.backward(cache.head_in, dy);
  Mat<float> d_cur = Mat<float>::Zero(spec_.d_model, x.cols());
  for (int b = 0; b < batch; ++b)
    d_cur.col((b + 1) * spec_.window - 1) = d_head_in.col(b);
  for (size_t i = layers_.size(); i-- > 0;)
    d_cur = layers_[i].backward(spec_.window, cache.layer_caches[i], d_cur);
  embed_.backward(cache.x_in, d_cur);

  opt_.lr = lr;
  opt_.step(params(), grads());
  return loss;
}

std::vector<Mat<float>*> TransformerNet::params() {
  std::vector<Mat<float>*> out = {&embed_.W, &embed_.b};
  std::vector<Mat<float>*> grads_ignored;
  for (auto& layer : layers_) layer.collect(out, grads_ignored);
  out.push_back(&head_.W);
  out.push_back(&head_.b);
  return out;
}

std::vector<const Mat<float>*> TransformerNet::params() const {
  std::vector<const Mat<float>*> out = {&embed_.W, &embed_.b};
  for (const auto& layer : layers_) layer.collect(out);
  out.push_back(&head_.W);
  out.push_back(&head_.b);
  return out;
}

std::vector<Mat<float>*> TransformerNet::grads() {
  std::vector<Mat<float>*> g = {&embed_.gW, &embed_.gb};
  std::vector<Mat<float>*> params_ignored;
  for (auto& layer : layers_) layer.collect(params_ignored, g);
  g.push_back(&head_.gW);
  g.push_back(&head_.gb);
  return g;
}

void TransformerNet::zero_grad() {
  embed_.zero_grad();
  for (auto& layer : layers_) layer.zero_grad();
  head_.zero_grad();
}

void TransformerNet::save(std::ostream& out) const {
  const std::int32_t magic = 0x4d454354;  // "MECT"
  out.write(reinterpret_cast<const char*>(&magic), sizeof(magic));
  const std::int32_t dims[7] = {spec_.d_model,     spec_.heads,
                                spec_.layers,      spec_.ffn_dim,
                                spec_.window,      spec_.in_channels,
                                spec_.out_dim};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  for (const Mat<float>* p : params()) write_tensor(out, *p);
}

TransformerNet TransformerNet::load(std::istream& in) {
  std::int32_t magic = 0;
  in.read(reinterpret_cast<char*>(&magic), sizeof(magic));
  if (!in || magic != 0x4d454354)
    throw std::runtime_error("not a model checkpoint");
  std::int32_t dims[7] = {};
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in) throw std::runtime_error("truncated model checkpoint");
  TransformerSpec spec;
  spec.d_model = dims[0];
  spec.heads = dims[1];
  spec.layers = dims[2];
  spec.ffn_dim = dims[3];
  spec.window = dims[4];
  spec.in_channels = dims[5];
  spec.out_dim = dims[6];
  TransformerNet net(spec, 0);
  for (Mat<float>* p : net.params()) read_tensor(in, *p);
  return net;
}

}  // namespace mec
