#pragma once

#include <cstdint>
#include <vector>

#include "stca/model/config.hpp"
#include "stca/numerics/ops.hpp"

namespace stca::model {

using numerics::LayerNormParams;
using numerics::Matrix;
using numerics::Param;
using numerics::SwiGluParams;

// Per-head projections are stored as separate d x d_h matrices.
template <typename T>
struct AttentionParams {
  std::vector<Param<T>> wq;
  std::vector<Param<T>> wk;
  std::vector<Param<T>> wv;
  Param<T> wo;  // d x d

  std::size_t heads() const { return wq.size(); }
  std::size_t model_dim() const { return wo.value.rows(); }
  std::size_t head_dim() const { return wq.empty() ? 0 : wq.front().value.cols(); }

  static AttentionParams random(std::size_t d, std::size_t heads, std::uint64_t seed);
};

template <typename T>
struct LayerParams {
  SwiGluParams<T> ffn;       // shared by the history path and this layer's query
  LayerNormParams<T> norm;   // history-path LayerNorm
  AttentionParams<T> attn;
  Param<T> fuse;             // W_C; empty on the first layer
};

template <typename T>
struct HeadParams {
  Param<T> wz;       // (M+1)d x d
  SwiGluParams<T> ffn;
  Param<T> mix_in;   // (1+K+C)d x rd
  Param<T> mix_out;  // rd x d
  Param<T> w;        // d x 1
  Param<T> b;        // 1 x 1
};

// Every learnable tensor of the model. Embedding tables carry one extra
// trailing row used for out-of-vocabulary ids.
template <typename T>
struct StcaParams {
  Param<T> video;
  Param<T> action;
  Param<T> position;
  Param<T> time_delta;
  LayerNormParams<T> query_norm;
  std::vector<LayerParams<T>> layers;
  HeadParams<T> head;

  // Dense weights ~ U(-1/sqrt(d), 1/sqrt(d)); embeddings ~ U(-0.01, 0.01);
  // LayerNorm gamma = 1, beta = 0; logit bias 0.
  static StcaParams initialize(const StcaConfig& config, std::uint64_t seed);

  std::vector<Param<T>*> all();
  std::vector<const Param<T>*> all() const;
  void zero_grad();

  // Throws DimensionError if any tensor disagrees with `config`.
  void check(const StcaConfig& config) const;

  template <typename U>
  StcaParams<U> cast() const;
};

bool is_embedding(const std::string& param_name);

}  // namespace stca::model
