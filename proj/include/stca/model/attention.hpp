#pragma once

#include <span>
#include <vector>

#include "stca/model/config.hpp"
#include "stca/model/params.hpp"

namespace stca::model {

using numerics::ConstMatView;
using numerics::Exec;

// Single-query multi-head cross attention in the textbook order: project all
// L keys and values per head, score, mix, concatenate heads, project with W_O.
// `q` is 1 x d, `x` is L x d (the layer's transformed history).
template <typename T>
Matrix<T> cross_attention_layer(const Matrix<T>& q, ConstMatView<T> x, const AttentionParams<T>& p);

// Same function with the products reassociated so no L x d_h tensor exists:
//   u = (q W_Q) W_K^T,  alpha = softmax(u X^T / sqrt(d_h)),  o = (alpha X) W_V.
template <typename T>
Matrix<T> cross_attention_layer_reordered(const Matrix<T>& q, ConstMatView<T> x,
                                          const AttentionParams<T>& p);

// Which queries attend to which key rows. Segment b owns queries
// [query_offsets[b], query_offsets[b+1]) and key rows
// [key_offsets[b], key_offsets[b+1]).
struct SegmentMap {
  std::span<const std::size_t> query_offsets;
  std::span<const std::size_t> key_offsets;

  std::size_t segments() const { return key_offsets.empty() ? 0 : key_offsets.size() - 1; }
  // Throws DimensionError on malformed offsets and EmptyHistoryError when a
  // segment with queries has no keys.
  void validate(std::size_t num_queries, std::size_t num_keys) const;
};

// Intermediates of the reordered path kept for the backward pass.
template <typename T>
struct AttentionCache {
  Matrix<T> queries;                 // n_q x d
  std::vector<Matrix<T>> query_heads;  // per head, n_q x d_h
  std::vector<Matrix<T>> key_probes;   // per head, u = q_h W_K^T, n_q x d
  std::vector<Matrix<T>> weights;      // per head, 1 x sum_b(m_b * L_b) softmax blocks
  std::vector<Matrix<T>> mixed;        // per head, alpha X, n_q x d
  Matrix<T> heads_concat;              // n_q x d
  std::vector<std::size_t> weight_offsets;  // per segment start into `weights`
};

// Ragged multi-query attention: each query attends only to its own
// segment's keys. No padding is materialized. Only the reordered path
// records a cache.
template <typename T>
Matrix<T> attend_ragged(const Matrix<T>& queries, ConstMatView<T> keys, const SegmentMap& segments,
                        const AttentionParams<T>& p, AttentionPath path, Exec exec,
                        AttentionCache<T>* cache = nullptr);

template <typename T>
struct AttentionGrads {
  Matrix<T> queries;  // n_q x d
  Matrix<T> keys;     // num_keys x d
};

// Backward of the reordered path. Accumulates weight gradients into `p`.
template <typename T>
AttentionGrads<T> attend_ragged_backward(const Matrix<T>& grad_out, ConstMatView<T> keys,
                                         const SegmentMap& segments, AttentionParams<T>& p,
                                         const AttentionCache<T>& cache, Exec exec);

}  // namespace stca::model
