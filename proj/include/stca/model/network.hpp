#pragma once

#include <span>
#include <vector>

#include "stca/model/attention.hpp"
#include "stca/model/tokens.hpp"

namespace stca::model {

using numerics::LayerNormCache;
using numerics::SwiGluCache;

// One history shared by a group of targets. A request contributes one
// segment with m targets; a lone triplet is a segment with one target.
struct SegmentInput {
  std::span<const HistoryEvent> history;
  Seconds snapshot_time = 0;               // reference for time-delta buckets
  std::span<const TargetItem> targets;
  std::span<const float> user_tokens;      // K*d values, empty means zeros
};

template <typename T>
struct ForwardResult {
  std::vector<T> logits;               // one per target, segment-major
  Matrix<T> z;                         // n_targets x d
  std::vector<Matrix<T>> summaries;    // per layer, n_targets x d
};

template <typename T>
struct LayerCache {
  SwiGluCache<T> history_ffn;
  LayerNormCache<T> history_norm;
  Matrix<T> keys;  // LN(SwiGLU(X)) for this layer
  SwiGluCache<T> query_ffn;
  LayerNormCache<T> query_norm;  // first layer only
  Matrix<T> fuse_input;          // later layers only
  AttentionCache<T> attention;
};

template <typename T>
struct NetworkCache {
  std::vector<std::size_t> query_offsets;
  std::vector<std::size_t> key_offsets;
  std::vector<TokenIndex> tokens;
  std::vector<std::uint32_t> target_rows;
  Matrix<T> x;        // raw history tokens, T_total x d
  Matrix<T> x_target; // n_targets x d
  std::vector<LayerCache<T>> layers;
  Matrix<T> z_input;
  SwiGluCache<T> z_ffn;
  Matrix<T> flat;
  Matrix<T> mix_pre;
  Matrix<T> mix_act;
  Matrix<T> h;
};

// Batched forward over ragged segments. Each segment's history is encoded
// once no matter how many targets it carries.
template <typename T>
ForwardResult<T> network_forward(std::span<const SegmentInput> segments, const StcaParams<T>& params,
                                 const StcaConfig& config, Exec exec = Exec::kParallel,
                                 NetworkCache<T>* cache = nullptr);

// Accumulates dL/dparams given dL/dlogit per target. Requires a cache
// recorded on the reordered attention path.
template <typename T>
void network_backward(const NetworkCache<T>& cache, std::span<const T> grad_logits, StcaParams<T>& params,
                      const StcaConfig& config, Exec exec = Exec::kParallel);

template <typename T>
struct StcaOutput {
  Matrix<T> z;          // 1 x d
  Matrix<T> summaries;  // M x d
  T logit{};
  T y_hat{};
};

// Single history, single target.
template <typename T>
StcaOutput<T> stca_forward(std::span<const HistoryEvent> history, const TargetItem& target,
                           const StcaParams<T>& params, const StcaConfig& config,
                           std::span<const float> user_tokens = {});

// q^(i+1) = SwiGLU([o^(1) | ... | o^(i) | x_t] W_C), row-wise over a batch.
template <typename T>
Matrix<T> fuse_query(std::span<const Matrix<T>> summaries, const Matrix<T>& x_target,
                     const Param<T>& w_c, const SwiGluParams<T>& ffn);

inline constexpr double kProbabilityClamp = 1e-7;

// Binary cross-entropy with y_hat clamped to [1e-7, 1 - 1e-7].
double bce_loss(double y_hat, double y);

// Same loss from a logit. The clamp applies to the value only; the gradient
// is always sigmoid(logit) - y.
template <typename T>
T bce_with_logit(T logit, T y);

template <typename T>
T bce_logit_grad(T logit, T y) {
  return numerics::sigmoid(logit) - y;
}

}  // namespace stca::model
