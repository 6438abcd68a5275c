#include "stca/model/params.hpp"

#include <cmath>
#include <random>

namespace stca::model {

namespace {

template <typename T>
Param<T> uniform_param(std::string name, std::size_t rows, std::size_t cols, double bound,
                       std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix<T> m(rows, cols);
  for (auto& v : m.values()) v = static_cast<T>(dist(rng));
  return Param<T>(std::move(name), std::move(m));
}

template <typename T>
Param<T> constant_param(std::string name, std::size_t rows, std::size_t cols, T value) {
  return Param<T>(std::move(name), Matrix<T>(rows, cols, value));
}

template <typename T>
SwiGluParams<T> swiglu_params(const std::string& prefix, std::size_t d, std::size_t hidden,
                              std::mt19937_64& rng) {
  const double a = 1.0 / std::sqrt(static_cast<double>(d));
  SwiGluParams<T> p;
  p.wu = uniform_param<T>(prefix + ".wu", d, hidden, a, rng);
  p.wv = uniform_param<T>(prefix + ".wv", d, hidden, a, rng);
  p.wo = uniform_param<T>(prefix + ".wo", hidden, d, a, rng);
  return p;
}

template <typename T>
LayerNormParams<T> norm_params(const std::string& prefix, std::size_t d) {
  return {constant_param<T>(prefix + ".gamma", 1, d, T{1}), constant_param<T>(prefix + ".beta", 1, d, T{0})};
}

template <typename T>
AttentionParams<T> attention_params(const std::string& prefix, std::size_t d, std::size_t heads,
                                    std::mt19937_64& rng) {
  const double a = 1.0 / std::sqrt(static_cast<double>(d));
  const std::size_t dh = d / heads;
  AttentionParams<T> p;
  for (std::size_t h = 0; h < heads; ++h) {
    const auto suffix = "." + std::to_string(h);
    p.wq.push_back(uniform_param<T>(prefix + ".wq" + suffix, d, dh, a, rng));
    p.wk.push_back(uniform_param<T>(prefix + ".wk" + suffix, d, dh, a, rng));
    p.wv.push_back(uniform_param<T>(prefix + ".wv" + suffix, d, dh, a, rng));
  }
  p.wo = uniform_param<T>(prefix + ".wo", d, d, a, rng);
  return p;
}

template <typename U, typename T>
Param<U> cast_param(const Param<T>& p) {
  Param<U> out;
  out.name = p.name;
  out.value = p.value.template cast<U>();
  out.grad = p.grad.template cast<U>();
  return out;
}

template <typename U, typename T>
SwiGluParams<U> cast_swiglu(const SwiGluParams<T>& p) {
  return {cast_param<U>(p.wu), cast_param<U>(p.wv), cast_param<U>(p.wo)};
}

template <typename U, typename T>
LayerNormParams<U> cast_norm(const LayerNormParams<T>& p) {
  return {cast_param<U>(p.gamma), cast_param<U>(p.beta)};
}


template <typename T>
void expect_shape(const Param<T>& p, std::size_t rows, std::size_t cols) {
  if (p.value.rows() != rows || p.value.cols() != cols || !p.grad.same_shape(p.value)) {
    throw DimensionError("parameter '" + p.name + "' has shape " + p.value.shape() + ", expected " +
                         numerics::shape_string(rows, cols));
  }
}

}  // namespace

bool is_embedding(const std::string& name) { return name.rfind("embed.", 0) == 0; }

template <typename T>
AttentionParams<T> AttentionParams<T>::random(std::size_t d, std::size_t heads, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return attention_params<T>("attn", d, heads, rng);
}

template <typename T>
StcaParams<T> StcaParams<T>::initialize(const StcaConfig& c, std::uint64_t seed) {
  c.validate();
  std::mt19937_64 rng(seed);
  const std::size_t d = c.d;
  const double a = 1.0 / std::sqrt(static_cast<double>(d));
  const double kEmbed = c.embed_init;
  StcaParams p;
  p.video = uniform_param<T>("embed.video", c.video_vocab + 1, d, kEmbed, rng);
  p.action = uniform_param<T>("embed.action", c.action_vocab + 1, d, kEmbed, rng);
  p.position = uniform_param<T>("embed.position", c.max_position + 1, d, kEmbed, rng);
  p.time_delta = uniform_param<T>("embed.time_delta", c.time_buckets, d, kEmbed, rng);
  p.query_norm = norm_params<T>("query_norm", d);
  for (std::size_t i = 0; i < c.layers; ++i) {
    const auto prefix = "layers." + std::to_string(i);
    LayerParams<T> layer;
    layer.ffn = swiglu_params<T>(prefix + ".ffn", d, c.hidden(), rng);
    layer.norm = norm_params<T>(prefix + ".norm", d);
    layer.attn = attention_params<T>(prefix + ".attn", d, c.heads, rng);
    if (i > 0) {
      const std::size_t in = c.use_query_fusion ? (i + 1) * d : d;
      layer.fuse = uniform_param<T>(prefix + ".fuse", in, d, a, rng);
    }
    p.layers.push_back(std::move(layer));
  }
  p.head.wz = uniform_param<T>("head.wz", (c.layers + 1) * d, d, a, rng);
  p.head.ffn = swiglu_params<T>("head.ffn", d, c.hidden(), rng);
  p.head.mix_in = uniform_param<T>("head.mix_in", (1 + c.aux_tokens()) * d, c.hidden(), a, rng);
  p.head.mix_out = uniform_param<T>("head.mix_out", c.hidden(), d, a, rng);
  p.head.w = uniform_param<T>("head.w", d, 1, a, rng);
  p.head.b = constant_param<T>("head.b", 1, 1, T{0});
  return p;
}

template <typename T>
std::vector<const Param<T>*> StcaParams<T>::all() const {
  std::vector<const Param<T>*> out{&video, &action, &position, &time_delta, &query_norm.gamma,
                                   &query_norm.beta};
  for (const auto& l : layers) {
    out.insert(out.end(), {&l.ffn.wu, &l.ffn.wv, &l.ffn.wo, &l.norm.gamma, &l.norm.beta});
    for (const auto& w : l.attn.wq) out.push_back(&w);
    for (const auto& w : l.attn.wk) out.push_back(&w);
    for (const auto& w : l.attn.wv) out.push_back(&w);
    out.push_back(&l.attn.wo);
    if (!l.fuse.empty()) out.push_back(&l.fuse);
  }
  out.insert(out.end(), {&head.wz, &head.ffn.wu, &head.ffn.wv, &head.ffn.wo, &head.mix_in,
                         &head.mix_out, &head.w, &head.b});
  return out;
}

template <typename T>
std::vector<Param<T>*> StcaParams<T>::all() {
  const auto& self = *this;
  std::vector<Param<T>*> out;
  for (const Param<T>* p : self.all()) out.push_back(const_cast<Param<T>*>(p));
  return out;
}

template <typename T>
void StcaParams<T>::zero_grad() {
  for (auto* p : all()) p->zero_grad();
}

template <typename T>
void StcaParams<T>::check(const StcaConfig& c) const {
  c.validate();
  const std::size_t d = c.d, dh = c.head_dim(), hid = c.hidden();
  expect_shape(video, c.video_vocab + 1, d);
  expect_shape(action, c.action_vocab + 1, d);
  expect_shape(position, c.max_position + 1, d);
  expect_shape(time_delta, c.time_buckets, d);
  expect_shape(query_norm.gamma, 1, d);
  expect_shape(query_norm.beta, 1, d);
  if (layers.size() != c.layers) {
    throw DimensionError("expected " + std::to_string(c.layers) + " layers, got " +
                         std::to_string(layers.size()));
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    expect_shape(l.ffn.wu, d, hid);
    expect_shape(l.ffn.wv, d, hid);
    expect_shape(l.ffn.wo, hid, d);
    expect_shape(l.norm.gamma, 1, d);
    expect_shape(l.norm.beta, 1, d);
    if (l.attn.heads() != c.heads || l.attn.wk.size() != c.heads || l.attn.wv.size() != c.heads) {
      throw DimensionError("layer " + std::to_string(i) + " has wrong head count");
    }
    for (std::size_t h = 0; h < c.heads; ++h) {
      expect_shape(l.attn.wq[h], d, dh);
      expect_shape(l.attn.wk[h], d, dh);
      expect_shape(l.attn.wv[h], d, dh);
    }
    expect_shape(l.attn.wo, d, d);
    if (i > 0) expect_shape(l.fuse, c.use_query_fusion ? (i + 1) * d : d, d);
  }
  expect_shape(head.wz, (c.layers + 1) * d, d);
  expect_shape(head.ffn.wu, d, hid);
  expect_shape(head.ffn.wv, d, hid);
  expect_shape(head.ffn.wo, hid, d);
  expect_shape(head.mix_in, (1 + c.aux_tokens()) * d, hid);
  expect_shape(head.mix_out, hid, d);
  expect_shape(head.w, d, 1);
  expect_shape(head.b, 1, 1);
}

template <typename T>
template <typename U>
StcaParams<U> StcaParams<T>::cast() const {
  StcaParams<U> out;
  out.video = cast_param<U>(video);
  out.action = cast_param<U>(action);
  out.position = cast_param<U>(position);
  out.time_delta = cast_param<U>(time_delta);
  out.query_norm = cast_norm<U>(query_norm);
  for (const auto& l : layers) {
    LayerParams<U> o;
    o.ffn = cast_swiglu<U>(l.ffn);
    o.norm = cast_norm<U>(l.norm);
    for (const auto& w : l.attn.wq) o.attn.wq.push_back(cast_param<U>(w));
    for (const auto& w : l.attn.wk) o.attn.wk.push_back(cast_param<U>(w));
    for (const auto& w : l.attn.wv) o.attn.wv.push_back(cast_param<U>(w));
    o.attn.wo = cast_param<U>(l.attn.wo);
    if (!l.fuse.empty()) o.fuse = cast_param<U>(l.fuse);
    out.layers.push_back(std::move(o));
  }
  out.head.wz = cast_param<U>(head.wz);
  out.head.ffn = cast_swiglu<U>(head.ffn);
  out.head.mix_in = cast_param<U>(head.mix_in);
  out.head.mix_out = cast_param<U>(head.mix_out);
  out.head.w = cast_param<U>(head.w);
  out.head.b = cast_param<U>(head.b);
  return out;
}

template struct AttentionParams<float>;
template struct AttentionParams<double>;
template struct StcaParams<float>;
template struct StcaParams<double>;
template StcaParams<double> StcaParams<float>::cast<double>() const;
template StcaParams<float> StcaParams<double>::cast<float>() const;
template StcaParams<float> StcaParams<float>::cast<float>() const;
template StcaParams<double> StcaParams<double>::cast<double>() const;

}  // namespace stca::model
