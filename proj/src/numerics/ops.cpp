#include "stca/numerics/ops.hpp"

#include <cmath>

namespace stca::numerics {

template <typename T>
Matrix<T> swiglu_forward(const Matrix<T>& x, const SwiGluParams<T>& p, SwiGluCache<T>* cache) {
  const auto d = p.wu.value.rows();
  const auto hidden = p.wu.value.cols();
  if (x.cols() != d || p.wv.value.rows() != d || p.wv.value.cols() != hidden ||
      p.wo.value.rows() != hidden || p.wo.value.cols() != d) {
    throw DimensionError("swiglu_forward: x" + x.shape() + " Wu" + p.wu.value.shape() + " Wv" +
                         p.wv.value.shape() + " Wo" + p.wo.value.shape());
  }
  Matrix<T> up = matmul(x, p.wu.value);
  Matrix<T> gate = matmul(x, p.wv.value);
  Matrix<T> mixed(up.rows(), up.cols());
  for (std::size_t i = 0; i < mixed.size(); ++i) mixed[i] = up[i] * silu(gate[i]);
  Matrix<T> out = matmul(mixed, p.wo.value);
  if (cache != nullptr) {
    cache->input = x;
    cache->up = std::move(up);
    cache->gate = std::move(gate);
    cache->mixed = std::move(mixed);
  }
  return out;
}

template <typename T>
Matrix<T> swiglu_backward(const Matrix<T>& grad_out, const SwiGluCache<T>& cache, SwiGluParams<T>& p) {
  if (grad_out.rows() != cache.input.rows() || grad_out.cols() != p.wo.value.cols()) {
    throw DimensionError("swiglu_backward: grad" + grad_out.shape() + " vs input" + cache.input.shape());
  }
  Matrix<T> d_mixed = linear_backward(cache.mixed, p.wo, grad_out);
  Matrix<T> d_up(d_mixed.rows(), d_mixed.cols());
  Matrix<T> d_gate(d_mixed.rows(), d_mixed.cols());
  for (std::size_t i = 0; i < d_mixed.size(); ++i) {
    const T g = cache.gate[i];
    d_up[i] = d_mixed[i] * silu(g);
    d_gate[i] = d_mixed[i] * cache.up[i] * silu_grad(g);
  }
  Matrix<T> dx = linear_backward(cache.input, p.wu, d_up);
  add_inplace(dx, linear_backward(cache.input, p.wv, d_gate));
  return dx;
}

template <typename T>
Matrix<T> layer_norm(const Matrix<T>& x, const LayerNormParams<T>& p, T eps, LayerNormCache<T>* cache) {
  const std::size_t d = x.cols();
  if (d == 0) throw DimensionError("layer_norm: zero-width input " + x.shape());
  if (p.gamma.value.size() != d || p.beta.value.size() != d) {
    throw DimensionError("layer_norm: x" + x.shape() + " gamma" + p.gamma.value.shape());
  }
  Matrix<T> out(x.rows(), d);
  Matrix<T> normalized;
  std::vector<T> inv_std;
  if (cache != nullptr) {
    normalized = Matrix<T>(x.rows(), d);
    inv_std.resize(x.rows());
  }
  const T* gamma = p.gamma.value.data();
  const T* beta = p.beta.value.data();
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    T mean = 0;
    for (T v : row) mean += v;
    mean /= static_cast<T>(d);
    T var = 0;
    for (T v : row) var += (v - mean) * (v - mean);
    var /= static_cast<T>(d);
    const T rstd = T{1} / std::sqrt(var + eps);
    auto o = out.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      const T n = (row[c] - mean) * rstd;
      o[c] = gamma[c] * n + beta[c];
      if (cache != nullptr) normalized(r, c) = n;
    }
    if (cache != nullptr) inv_std[r] = rstd;
  }
  if (cache != nullptr) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return out;
}

template <typename T>
Matrix<T> layer_norm_backward(const Matrix<T>& grad_out, const LayerNormCache<T>& cache,
                              LayerNormParams<T>& p) {
  require_same_shape(grad_out, cache.normalized, "layer_norm_backward");
  const std::size_t d = grad_out.cols();
  const T* gamma = p.gamma.value.data();
  T* dgamma = p.gamma.grad.data();
  T* dbeta = p.beta.grad.data();
  Matrix<T> dx(grad_out.rows(), d);
  std::vector<T> dn(d);
  for (std::size_t r = 0; r < grad_out.rows(); ++r) {
    const auto g = grad_out.row(r);
    const auto n = cache.normalized.row(r);
    T sum_dn = 0, sum_dn_n = 0;
    for (std::size_t c = 0; c < d; ++c) {
      dgamma[c] += g[c] * n[c];
      dbeta[c] += g[c];
      dn[c] = g[c] * gamma[c];
      sum_dn += dn[c];
      sum_dn_n += dn[c] * n[c];
    }
    const T scale = cache.inv_std[r] / static_cast<T>(d);
    auto out = dx.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      out[c] = scale * (static_cast<T>(d) * dn[c] - sum_dn - n[c] * sum_dn_n);
    }
  }
  return dx;
}

template <typename T>
void softmax_inplace(std::span<T> row) {
  if (row.empty()) throw DimensionError("softmax: empty input");
  T mx = row[0];
  for (T v : row) mx = std::max(mx, v);
  T sum = 0;
  for (T& v : row) {
    v = std::exp(v - mx);
    sum += v;
  }
  const T inv = T{1} / sum;
  for (T& v : row) v *= inv;
}

template <typename T>
void softmax_backward_inplace(std::span<const T> probs, std::span<T> grad_probs) {
  T dot = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) dot += probs[i] * grad_probs[i];
  for (std::size_t i = 0; i < probs.size(); ++i) grad_probs[i] = probs[i] * (grad_probs[i] - dot);
}

#define STCA_INSTANTIATE_OPS(T)                                                                  \
  template Matrix<T> swiglu_forward<T>(const Matrix<T>&, const SwiGluParams<T>&, SwiGluCache<T>*); \
  template Matrix<T> swiglu_backward<T>(const Matrix<T>&, const SwiGluCache<T>&, SwiGluParams<T>&); \
  template Matrix<T> layer_norm<T>(const Matrix<T>&, const LayerNormParams<T>&, T, LayerNormCache<T>*); \
  template Matrix<T> layer_norm_backward<T>(const Matrix<T>&, const LayerNormCache<T>&,           \
                                            LayerNormParams<T>&);                               \
  template void softmax_inplace<T>(std::span<T>);                                               \
  template void softmax_backward_inplace<T>(std::span<const T>, std::span<T>);

STCA_INSTANTIATE_OPS(float)
STCA_INSTANTIATE_OPS(double)

}  // namespace stca::numerics
