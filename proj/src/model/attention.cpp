#include "stca/model/attention.hpp"

#include <algorithm>
#include <cmath>
#include <omp.h>

namespace stca::model {

using numerics::gemm;
using numerics::MatView;
using numerics::OpTag;
using numerics::TagScope;
using numerics::Trans;

namespace {

template <typename T>
void check_attention_inputs(std::size_t query_cols, ConstMatView<T> x, const AttentionParams<T>& p) {
  const std::size_t d = p.model_dim();
  if (p.heads() == 0 || p.head_dim() * p.heads() != d) {
    throw DimensionError("attention params: heads=" + std::to_string(p.heads()) +
                         " head_dim=" + std::to_string(p.head_dim()) + " d=" + std::to_string(d));
  }
  if (query_cols != d || x.cols != d) {
    throw DimensionError("attention: query width " + std::to_string(query_cols) + ", key width " +
                         std::to_string(x.cols) + ", model width " + std::to_string(d));
  }
}

template <typename T>
void for_each_segment(std::size_t segments, Exec exec, auto&& body) {
  const auto n = static_cast<std::ptrdiff_t>(segments);
  const bool parallel = exec == Exec::kParallel && segments > 1 && !omp_in_parallel();
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
  for (std::ptrdiff_t b = 0; b < n; ++b) body(static_cast<std::size_t>(b));
}

}  // namespace

void SegmentMap::validate(std::size_t num_queries, std::size_t num_keys) const {
  if (query_offsets.size() != key_offsets.size() || key_offsets.empty()) {
    throw DimensionError("segment map: " + std::to_string(query_offsets.size()) + " query offsets vs " +
                         std::to_string(key_offsets.size()) + " key offsets");
  }
  if (query_offsets.front() != 0 || key_offsets.front() != 0 || query_offsets.back() != num_queries ||
      key_offsets.back() != num_keys) {
    throw DimensionError("segment map does not cover " + std::to_string(num_queries) + " queries and " +
                         std::to_string(num_keys) + " keys");
  }
  for (std::size_t b = 0; b + 1 < key_offsets.size(); ++b) {
    if (query_offsets[b + 1] < query_offsets[b] || key_offsets[b + 1] < key_offsets[b]) {
      throw DimensionError("segment map offsets must be nondecreasing (segment " + std::to_string(b) + ")");
    }
    if (query_offsets[b + 1] > query_offsets[b] && key_offsets[b + 1] == key_offsets[b]) {
      throw EmptyHistoryError("segment " + std::to_string(b) + " has queries but an empty history");
    }
  }
}

template <typename T>
Matrix<T> cross_attention_layer(const Matrix<T>& q, ConstMatView<T> x, const AttentionParams<T>& p) {
  if (q.rows() != 1) throw DimensionError("cross_attention_layer: query must be 1 x d, got " + q.shape());
  check_attention_inputs<T>(q.cols(), x, p);
  if (x.rows == 0) throw EmptyHistoryError("cross_attention_layer: empty history");
  const std::size_t d = p.model_dim(), dh = p.head_dim();
  const T scale = T{1} / std::sqrt(static_cast<T>(dh));
  const Matrix<T> keys_input(x);
  Matrix<T> concat(1, d);
  for (std::size_t h = 0; h < p.heads(); ++h) {
    Matrix<T> qh, k, v;
    {
      TagScope tag(OpTag::kQueryProjection);
      qh = numerics::matmul(q, p.wq[h].value);
    }
    {
      TagScope tag(OpTag::kKeyValueProjection);
      k = numerics::matmul(keys_input, p.wk[h].value);
      v = numerics::matmul(keys_input, p.wv[h].value);
    }
    Matrix<T> scores;
    {
      TagScope tag(OpTag::kAttentionScore);
      scores = numerics::matmul_nt(qh, k);
    }
    for (auto& s : scores.values()) s *= scale;
    numerics::softmax_inplace<T>(scores.values());
    TagScope tag(OpTag::kWeightedSum);
    const Matrix<T> oh = numerics::matmul(scores, v);
    std::copy_n(oh.data(), dh, concat.data() + h * dh);
  }
  TagScope tag(OpTag::kOutputProjection);
  return numerics::matmul(concat, p.wo.value);
}

template <typename T>
Matrix<T> cross_attention_layer_reordered(const Matrix<T>& q, ConstMatView<T> x,
                                          const AttentionParams<T>& p) {
  if (q.rows() != 1) {
    throw DimensionError("cross_attention_layer_reordered: query must be 1 x d, got " + q.shape());
  }
  if (x.rows == 0) throw EmptyHistoryError("cross_attention_layer_reordered: empty history");
  const std::size_t query_offsets[] = {0, 1};
  const std::size_t key_offsets[] = {0, x.rows};
  return attend_ragged<T>(q, x, SegmentMap{query_offsets, key_offsets}, p, AttentionPath::kReordered,
                          Exec::kSerial);
}

template <typename T>
Matrix<T> attend_ragged(const Matrix<T>& queries, ConstMatView<T> keys, const SegmentMap& segments,
                        const AttentionParams<T>& p, AttentionPath path, Exec exec,
                        AttentionCache<T>* cache) {
  check_attention_inputs<T>(queries.cols(), keys, p);
  segments.validate(queries.rows(), keys.rows);
  const std::size_t nq = queries.rows(), d = p.model_dim(), dh = p.head_dim(), heads = p.heads();
  const std::size_t nseg = segments.segments();
  const auto& qo = segments.query_offsets;
  const auto& ko = segments.key_offsets;
  const T scale = T{1} / std::sqrt(static_cast<T>(dh));

  std::vector<std::size_t> weight_offsets(nseg + 1, 0);
  for (std::size_t b = 0; b < nseg; ++b) {
    weight_offsets[b + 1] = weight_offsets[b] + (qo[b + 1] - qo[b]) * (ko[b + 1] - ko[b]);
  }

  Matrix<T> concat(nq, d);
  if (cache != nullptr) {
    *cache = AttentionCache<T>{};
    cache->queries = queries;
    cache->weight_offsets = weight_offsets;
  }

  for (std::size_t h = 0; h < heads; ++h) {
    Matrix<T> qh(nq, dh);
    {
      TagScope tag(OpTag::kQueryProjection);
      gemm<T>(queries, Trans::kNo, p.wq[h].value, Trans::kNo, qh, false);
    }
    Matrix<T> weights(1, weight_offsets.back());
    const MatView<T> out_block = concat.view().cols_range(h * dh, (h + 1) * dh);

    if (path == AttentionPath::kReordered) {
      Matrix<T> probe(nq, d);
      {
        TagScope tag(OpTag::kQueryProjection);
        gemm<T>(qh, Trans::kNo, p.wk[h].value, Trans::kYes, probe, false);
      }
      Matrix<T> mixed(nq, d);
      {
        TagScope tag(OpTag::kAttentionScore);
        for_each_segment<T>(nseg, exec, [&](std::size_t b) {
          const std::size_t m = qo[b + 1] - qo[b], len = ko[b + 1] - ko[b];
          if (m == 0) return;
          MatView<T> s{weights.data() + weight_offsets[b], m, len, len};
          gemm<T>(probe.view().rows_range(qo[b], qo[b + 1]), Trans::kNo, keys.rows_range(ko[b], ko[b + 1]),
                  Trans::kYes, s, false);
          for (std::size_t i = 0; i < m; ++i) {
            auto row = s.row(i);
            for (auto& v : row) v *= scale;
            numerics::softmax_inplace<T>(row);
          }
        });
      }
      {
        TagScope tag(OpTag::kWeightedSum);
        for_each_segment<T>(nseg, exec, [&](std::size_t b) {
          const std::size_t m = qo[b + 1] - qo[b], len = ko[b + 1] - ko[b];
          if (m == 0) return;
          ConstMatView<T> a{weights.data() + weight_offsets[b], m, len, len};
          gemm<T>(a, Trans::kNo, keys.rows_range(ko[b], ko[b + 1]), Trans::kNo,
                  mixed.view().rows_range(qo[b], qo[b + 1]), false);
        });
      }
      {
        TagScope tag(OpTag::kValueProjection);
        gemm<T>(mixed, Trans::kNo, p.wv[h].value, Trans::kNo, out_block, false);
      }
      if (cache != nullptr) {
        cache->query_heads.push_back(std::move(qh));
        cache->key_probes.push_back(std::move(probe));
        cache->weights.push_back(std::move(weights));
        cache->mixed.push_back(std::move(mixed));
      }
    } else {
      Matrix<T> k(keys.rows, dh), v(keys.rows, dh);
      {
        TagScope tag(OpTag::kKeyValueProjection);
        gemm<T>(keys, Trans::kNo, p.wk[h].value, Trans::kNo, k, false);
        gemm<T>(keys, Trans::kNo, p.wv[h].value, Trans::kNo, v, false);
      }
      {
        TagScope tag(OpTag::kAttentionScore);
        for_each_segment<T>(nseg, exec, [&](std::size_t b) {
          const std::size_t m = qo[b + 1] - qo[b], len = ko[b + 1] - ko[b];
          if (m == 0) return;
          MatView<T> s{weights.data() + weight_offsets[b], m, len, len};
          gemm<T>(qh.view().rows_range(qo[b], qo[b + 1]), Trans::kNo, k.view().rows_range(ko[b], ko[b + 1]),
                  Trans::kYes, s, false);
          for (std::size_t i = 0; i < m; ++i) {
            auto row = s.row(i);
            for (auto& val : row) val *= scale;
            numerics::softmax_inplace<T>(row);
          }
        });
      }
      {
        TagScope tag(OpTag::kWeightedSum);
        for_each_segment<T>(nseg, exec, [&](std::size_t b) {
          const std::size_t m = qo[b + 1] - qo[b], len = ko[b + 1] - ko[b];
          if (m == 0) return;
          ConstMatView<T> a{weights.data() + weight_offsets[b], m, len, len};
          gemm<T>(a, Trans::kNo, v.view().rows_range(ko[b], ko[b + 1]), Trans::kNo,
                  out_block.rows_range(qo[b], qo[b + 1]), false);
        });
      }
      if (cache != nullptr) cache->weights.push_back(std::move(weights));
    }
  }

  Matrix<T> out(nq, d);
  {
    TagScope tag(OpTag::kOutputProjection);
    gemm<T>(concat, Trans::kNo, p.wo.value, Trans::kNo, out, false);
  }
  if (cache != nullptr) cache->heads_concat = std::move(concat);
  return out;
}

template <typename T>
AttentionGrads<T> attend_ragged_backward(const Matrix<T>& grad_out, ConstMatView<T> keys,
                                         const SegmentMap& segments, AttentionParams<T>& p,
                                         const AttentionCache<T>& cache, Exec exec) {
  const std::size_t nq = cache.queries.rows(), d = p.model_dim(), dh = p.head_dim();
  if (cache.key_probes.size() != p.heads()) {
    throw DimensionError("attend_ragged_backward: cache was not recorded on the reordered path");
  }
  if (grad_out.rows() != nq || grad_out.cols() != d) {
    throw DimensionError("attend_ragged_backward: grad " + grad_out.shape() + " for " +
                         std::to_string(nq) + " queries");
  }
  const std::size_t nseg = segments.segments();
  const auto& qo = segments.query_offsets;
  const auto& ko = segments.key_offsets;
  const auto& wo = cache.weight_offsets;
  const T scale = T{1} / std::sqrt(static_cast<T>(dh));

  Matrix<T> d_concat;
  {
    TagScope tag(OpTag::kOutputProjection);
    d_concat = numerics::linear_backward(cache.heads_concat, p.wo, grad_out);
  }

  AttentionGrads<T> g{Matrix<T>(nq, d), Matrix<T>(keys.rows, d)};
  for (std::size_t h = 0; h < p.heads(); ++h) {
    const ConstMatView<T> d_head = d_concat.view().cols_range(h * dh, (h + 1) * dh);
    Matrix<T> d_mixed(nq, d);
    {
      TagScope tag(OpTag::kValueProjection);
      gemm<T>(cache.mixed[h], Trans::kYes, d_head, Trans::kNo, p.wv[h].grad, true);
      gemm<T>(d_head, Trans::kNo, p.wv[h].value, Trans::kYes, d_mixed, false);
    }
    const Matrix<T>& weights = cache.weights[h];
    const Matrix<T>& probe = cache.key_probes[h];
    Matrix<T> d_probe(nq, d);
    {
      TagScope tag(OpTag::kWeightedSum);
      for_each_segment<T>(nseg, exec, [&](std::size_t b) {
        const std::size_t m = qo[b + 1] - qo[b], len = ko[b + 1] - ko[b];
        if (m == 0) return;
        const auto xb = keys.rows_range(ko[b], ko[b + 1]);
        const auto dxb = g.keys.view().rows_range(ko[b], ko[b + 1]);
        ConstMatView<T> a{weights.data() + wo[b], m, len, len};
        const auto dc = d_mixed.view().rows_range(qo[b], qo[b + 1]);
        gemm<T>(a, Trans::kYes, dc, Trans::kNo, dxb, true);
        Matrix<T> ds(m, len);
        gemm<T>(dc, Trans::kNo, xb, Trans::kYes, ds, false);
        for (std::size_t i = 0; i < m; ++i) {
          auto row = ds.row(i);
          numerics::softmax_backward_inplace<T>(a.row(i), row);
          for (auto& v : row) v *= scale;
        }
        gemm<T>(ds, Trans::kNo, xb, Trans::kNo, d_probe.view().rows_range(qo[b], qo[b + 1]), false);
        gemm<T>(ds, Trans::kYes, probe.view().rows_range(qo[b], qo[b + 1]), Trans::kNo, dxb, true);
      });
    }
    Matrix<T> d_qh(nq, dh);
    {
      TagScope tag(OpTag::kQueryProjection);
      // probe = qh W_K^T  =>  dW_K += dprobe^T qh,  dqh = dprobe W_K
      gemm<T>(d_probe, Trans::kYes, cache.query_heads[h], Trans::kNo, p.wk[h].grad, true);
      gemm<T>(d_probe, Trans::kNo, p.wk[h].value, Trans::kNo, d_qh, false);
      gemm<T>(cache.queries, Trans::kYes, d_qh, Trans::kNo, p.wq[h].grad, true);
      gemm<T>(d_qh, Trans::kNo, p.wq[h].value, Trans::kYes, g.queries, true);
    }
  }
  return g;
}

#define STCA_INSTANTIATE_ATTENTION(T)                                                              \
  template Matrix<T> cross_attention_layer<T>(const Matrix<T>&, ConstMatView<T>, const AttentionParams<T>&); \
  template Matrix<T> cross_attention_layer_reordered<T>(const Matrix<T>&, ConstMatView<T>,         \
                                                        const AttentionParams<T>&);                 \
  template Matrix<T> attend_ragged<T>(const Matrix<T>&, ConstMatView<T>, const SegmentMap&,         \
                                      const AttentionParams<T>&, AttentionPath, Exec,               \
                                      AttentionCache<T>*);                                          \
  template AttentionGrads<T> attend_ragged_backward<T>(const Matrix<T>&, ConstMatView<T>,           \
                                                       const SegmentMap&, AttentionParams<T>&,      \
                                                       const AttentionCache<T>&, Exec);

STCA_INSTANTIATE_ATTENTION(float)
STCA_INSTANTIATE_ATTENTION(double)

}  // namespace stca::model
