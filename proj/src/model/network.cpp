#include "stca/model/network.hpp"

#include <algorithm>
#include <cmath>

namespace stca::model {

using numerics::gemm;
using numerics::OpTag;
using numerics::TagScope;
using numerics::Trans;

namespace {

template <typename T>
void copy_tokens(std::span<const float> src, std::size_t count, std::size_t d, std::span<T> dst,
                 const char* what) {
  if (src.empty()) return;
  if (src.size() != count * d) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(count * d) + " values, got " +
                         std::to_string(src.size()));
  }
  std::copy(src.begin(), src.end(), dst.begin());
}

template <typename T>
void scatter_rows(const Matrix<T>& grad, std::size_t row, Param<T>& table, std::uint32_t index) {
  auto dst = table.grad.row(index);
  const auto src = grad.row(row);
  for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
}

template <typename T>
Matrix<T> concat_with_target(const std::vector<Matrix<T>>& summaries, std::size_t count,
                             const Matrix<T>& x_target) {
  std::vector<const Matrix<T>*> parts;
  for (std::size_t j = 0; j < count; ++j) parts.push_back(&summaries[j]);
  parts.push_back(&x_target);
  return numerics::hconcat<T>(parts);
}

// Adds column block j of `grad` (width d) into `dst`.
template <typename T>
void add_block(Matrix<T>& dst, const Matrix<T>& grad, std::size_t j) {
  const std::size_t d = dst.cols();
  for (std::size_t r = 0; r < dst.rows(); ++r) {
    const auto src = grad.row(r).subspan(j * d, d);
    auto out = dst.row(r);
    for (std::size_t c = 0; c < d; ++c) out[c] += src[c];
  }
}

}  // namespace

template <typename T>
Matrix<T> fuse_query(std::span<const Matrix<T>> summaries, const Matrix<T>& x_target, const Param<T>& w_c,
                     const SwiGluParams<T>& ffn) {
  std::vector<const Matrix<T>*> parts;
  for (const auto& s : summaries) parts.push_back(&s);
  parts.push_back(&x_target);
  const Matrix<T> input = numerics::hconcat<T>(parts);
  if (input.cols() != w_c.value.rows()) {
    throw DimensionError("fuse_query: concatenation " + input.shape() + " vs W_C " + w_c.value.shape());
  }
  return numerics::swiglu_forward(numerics::matmul(input, w_c.value), ffn);
}

template <typename T>
ForwardResult<T> network_forward(std::span<const SegmentInput> segments, const StcaParams<T>& params,
                                 const StcaConfig& config, Exec exec, NetworkCache<T>* cache) {
  const std::size_t d = config.d, M = config.layers;
  const std::size_t K = config.user_tokens, C = config.candidate_tokens;
  const T eps = static_cast<T>(config.ln_eps);

  std::vector<std::size_t> qo{0}, ko{0};
  std::vector<TokenIndex> tokens;
  std::vector<std::uint32_t> target_rows;
  for (std::size_t b = 0; b < segments.size(); ++b) {
    const auto& s = segments[b];
    if (s.history.empty()) throw EmptyHistoryError("segment " + std::to_string(b) + " has an empty history");
    const auto seg_tokens = tokenize_history(s.history, s.snapshot_time, config);
    tokens.insert(tokens.end(), seg_tokens.begin(), seg_tokens.end());
    for (const auto& t : s.targets) target_rows.push_back(video_row(t.video_id, config));
    ko.push_back(tokens.size());
    qo.push_back(target_rows.size());
  }
  numerics::instrumentation::add_history_encodings(segments.size());
  const std::size_t nq = target_rows.size();

  Matrix<T> x = embed_tokens<T>(tokens, params, config);
  Matrix<T> x_target(nq, d);
  for (std::size_t i = 0; i < nq; ++i) {
    std::copy_n(params.video.value.row(target_rows[i]).data(), d, x_target.row(i).data());
  }

  const SegmentMap map{qo, ko};
  ForwardResult<T> result;
  std::vector<LayerCache<T>> layer_caches(cache != nullptr ? M : 0);
  for (std::size_t i = 0; i < M; ++i) {
    const auto& layer = params.layers[i];
    LayerCache<T>* lc = cache != nullptr ? &layer_caches[i] : nullptr;
    Matrix<T> keys;
    {
      TagScope tag(OpTag::kHistoryFfn);
      keys = numerics::swiglu_forward(x, layer.ffn, lc ? &lc->history_ffn : nullptr);
    }
    {
      TagScope tag(OpTag::kHistoryNorm);
      keys = numerics::layer_norm(keys, layer.norm, eps, lc ? &lc->history_norm : nullptr);
    }
    Matrix<T> q;
    {
      TagScope tag(OpTag::kQueryPath);
      if (i == 0) {
        q = numerics::swiglu_forward(x_target, layer.ffn, lc ? &lc->query_ffn : nullptr);
        q = numerics::layer_norm(q, params.query_norm, eps, lc ? &lc->query_norm : nullptr);
      } else {
        Matrix<T> fuse_in = config.use_query_fusion ? concat_with_target(result.summaries, i, x_target)
                                                    : Matrix<T>(x_target);
        Matrix<T> fused;
        {
          TagScope fusion(OpTag::kFusion);
          fused = numerics::matmul(fuse_in, layer.fuse.value);
        }
        q = numerics::swiglu_forward(fused, layer.ffn, lc ? &lc->query_ffn : nullptr);
        if (lc) lc->fuse_input = std::move(fuse_in);
      }
    }
    result.summaries.push_back(
        attend_ragged<T>(q, keys, map, layer.attn, config.attention_path, exec, lc ? &lc->attention : nullptr));
    if (lc) lc->keys = std::move(keys);
  }

  TagScope head_tag(OpTag::kHead);
  Matrix<T> z_input = concat_with_target(result.summaries, M, x_target);
  result.z = numerics::swiglu_forward(numerics::matmul(z_input, params.head.wz.value), params.head.ffn,
                                      cache ? &cache->z_ffn : nullptr);

  const std::size_t width = (1 + K + C) * d;
  Matrix<T> flat(nq, width);
  for (std::size_t b = 0; b < segments.size(); ++b) {
    for (std::size_t qi = qo[b]; qi < qo[b + 1]; ++qi) {
      auto row = flat.row(qi);
      std::copy_n(result.z.row(qi).data(), d, row.data());
      copy_tokens<T>(segments[b].user_tokens, K, d, row.subspan(d, K * d), "user tokens");
      copy_tokens<T>(segments[b].targets[qi - qo[b]].aux, C, d, row.subspan((1 + K) * d, C * d),
                     "candidate tokens");
    }
  }
  Matrix<T> mix_pre = numerics::matmul(flat, params.head.mix_in.value);
  Matrix<T> mix_act(mix_pre.rows(), mix_pre.cols());
  for (std::size_t k = 0; k < mix_pre.size(); ++k) mix_act[k] = numerics::silu(mix_pre[k]);
  Matrix<T> h = numerics::matmul(mix_act, params.head.mix_out.value);
  const Matrix<T> logits = numerics::matmul(h, params.head.w.value);
  result.logits.resize(nq);
  for (std::size_t k = 0; k < nq; ++k) result.logits[k] = logits[k] + params.head.b.value[0];

  if (cache != nullptr) {
    cache->query_offsets = std::move(qo);
    cache->key_offsets = std::move(ko);
    cache->tokens = std::move(tokens);
    cache->target_rows = std::move(target_rows);
    cache->x = std::move(x);
    cache->x_target = std::move(x_target);
    cache->layers = std::move(layer_caches);
    cache->z_input = std::move(z_input);
    cache->flat = std::move(flat);
    cache->mix_pre = std::move(mix_pre);
    cache->mix_act = std::move(mix_act);
    cache->h = std::move(h);
  }
  return result;
}

template <typename T>
void network_backward(const NetworkCache<T>& cache, std::span<const T> grad_logits, StcaParams<T>& params,
                      const StcaConfig& config, Exec exec) {
  const std::size_t d = config.d, M = config.layers;
  const std::size_t nq = cache.target_rows.size();
  if (grad_logits.size() != nq) {
    throw DimensionError("network_backward: " + std::to_string(grad_logits.size()) + " gradients for " +
                         std::to_string(nq) + " targets");
  }
  if (cache.layers.size() != M) throw DimensionError("network_backward: cache has wrong layer count");
  const SegmentMap map{cache.query_offsets, cache.key_offsets};

  Matrix<T> dx_target(nq, d);
  std::vector<Matrix<T>> d_summaries(M, Matrix<T>(nq, d));
  {
    TagScope tag(OpTag::kHead);
    const Matrix<T> dlogit(nq, 1, std::vector<T>(grad_logits.begin(), grad_logits.end()));
    for (T g : grad_logits) params.head.b.grad[0] += g;
    const Matrix<T> dh = numerics::linear_backward(cache.h, params.head.w, dlogit);
    Matrix<T> dpre = numerics::linear_backward(cache.mix_act, params.head.mix_out, dh);
    for (std::size_t k = 0; k < dpre.size(); ++k) dpre[k] *= numerics::silu_grad(cache.mix_pre[k]);
    const Matrix<T> dflat = numerics::linear_backward(cache.flat, params.head.mix_in, dpre);
    const Matrix<T> dz = numerics::column_block(dflat, 0, d);
    const Matrix<T> dzpre = numerics::swiglu_backward(dz, cache.z_ffn, params.head.ffn);
    const Matrix<T> dz_input = numerics::linear_backward(cache.z_input, params.head.wz, dzpre);
    for (std::size_t j = 0; j < M; ++j) add_block(d_summaries[j], dz_input, j);
    add_block(dx_target, dz_input, M);
  }

  Matrix<T> dx(cache.x.rows(), d);
  for (std::size_t ii = M; ii-- > 0;) {
    auto& layer = params.layers[ii];
    const auto& lc = cache.layers[ii];
    const auto grads = attend_ragged_backward<T>(d_summaries[ii], lc.keys, map, layer.attn, lc.attention, exec);
    {
      TagScope tag(OpTag::kHistoryNorm);
      const Matrix<T> dffn = numerics::layer_norm_backward(grads.keys, lc.history_norm, layer.norm);
      TagScope ffn_tag(OpTag::kHistoryFfn);
      numerics::add_inplace(dx, numerics::swiglu_backward(dffn, lc.history_ffn, layer.ffn));
    }
    TagScope tag(OpTag::kQueryPath);
    if (ii == 0) {
      const Matrix<T> dffn = numerics::layer_norm_backward(grads.queries, lc.query_norm, params.query_norm);
      numerics::add_inplace(dx_target, numerics::swiglu_backward(dffn, lc.query_ffn, layer.ffn));
    } else {
      const Matrix<T> dfused = numerics::swiglu_backward(grads.queries, lc.query_ffn, layer.ffn);
      TagScope fusion(OpTag::kFusion);
      const Matrix<T> dfuse_in = numerics::linear_backward(lc.fuse_input, layer.fuse, dfused);
      if (config.use_query_fusion) {
        for (std::size_t j = 0; j < ii; ++j) add_block(d_summaries[j], dfuse_in, j);
        add_block(dx_target, dfuse_in, ii);
      } else {
        numerics::add_inplace(dx_target, dfuse_in);
      }
    }
  }

  for (std::size_t j = 0; j < cache.tokens.size(); ++j) {
    const auto& t = cache.tokens[j];
    scatter_rows(dx, j, params.video, t.video);
    scatter_rows(dx, j, params.action, t.action);
    if (config.use_position) scatter_rows(dx, j, params.position, t.position);
    if (config.use_time_delta) scatter_rows(dx, j, params.time_delta, t.time);
  }
  for (std::size_t k = 0; k < nq; ++k) scatter_rows(dx_target, k, params.video, cache.target_rows[k]);
}

template <typename T>
StcaOutput<T> stca_forward(std::span<const HistoryEvent> history, const TargetItem& target,
                           const StcaParams<T>& params, const StcaConfig& config,
                           std::span<const float> user_tokens) {
  const SegmentInput seg{history, target.request_time, std::span<const TargetItem>(&target, 1), user_tokens};
  auto r = network_forward<T>(std::span<const SegmentInput>(&seg, 1), params, config, Exec::kSerial);
  StcaOutput<T> out;
  out.z = std::move(r.z);
  out.summaries = Matrix<T>(config.layers, config.d);
  for (std::size_t i = 0; i < config.layers; ++i) {
    std::copy_n(r.summaries[i].data(), config.d, out.summaries.row(i).data());
  }
  out.logit = r.logits.front();
  out.y_hat = numerics::sigmoid(out.logit);
  return out;
}

double bce_loss(double y_hat, double y) {
  const double p = std::clamp(y_hat, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return -y * std::log(p) - (1.0 - y) * std::log1p(-p);
}

template <typename T>
T bce_with_logit(T logit, T y) {
  const T bound = static_cast<T>(std::log((1.0 - kProbabilityClamp) / kProbabilityClamp));
  const T l = std::clamp(logit, -bound, bound);
  // log(1 + e^l) - y l, evaluated without overflow
  return std::max(l, T{0}) - y * l + std::log1p(std::exp(-std::abs(l)));
}

#define STCA_INSTANTIATE_NETWORK(T)                                                                 \
  template Matrix<T> fuse_query<T>(std::span<const Matrix<T>>, const Matrix<T>&, const Param<T>&,   \
                                   const SwiGluParams<T>&);                                         \
  template ForwardResult<T> network_forward<T>(std::span<const SegmentInput>, const StcaParams<T>&, \
                                               const StcaConfig&, Exec, NetworkCache<T>*);          \
  template void network_backward<T>(const NetworkCache<T>&, std::span<const T>, StcaParams<T>&,     \
                                    const StcaConfig&, Exec);                                       \
  template StcaOutput<T> stca_forward<T>(std::span<const HistoryEvent>, const TargetItem&,          \
                                         const StcaParams<T>&, const StcaConfig&,                   \
                                         std::span<const float>);                                   \
  template T bce_with_logit<T>(T, T);

STCA_INSTANTIATE_NETWORK(float)
STCA_INSTANTIATE_NETWORK(double)

}  // namespace stca::model
