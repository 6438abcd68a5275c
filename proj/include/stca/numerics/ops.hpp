#pragma once

#include <span>
#include <string>
#include <vector>

#include "stca/numerics/kernels.hpp"

namespace stca::numerics {

// A learnable tensor with its gradient accumulator (ParamWithGrad).
template <typename T>
struct Param {
  std::string name;
  Matrix<T> value;
  Matrix<T> grad;

  Param() = default;
  Param(std::string n, Matrix<T> v) : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}

  void zero_grad() { grad.set_zero(); }
  bool empty() const { return value.empty(); }
};

// Dimension-preserving gated FFN: ((x Wu) . silu(x Wv)) Wo, no biases.
template <typename T>
struct SwiGluParams {
  Param<T> wu;  // d x rd
  Param<T> wv;  // d x rd
  Param<T> wo;  // rd x d
};

template <typename T>
struct LayerNormParams {
  Param<T> gamma;  // 1 x d
  Param<T> beta;   // 1 x d
};

template <typename T>
struct SwiGluCache {
  Matrix<T> input;
  Matrix<T> up;    // x Wu
  Matrix<T> gate;  // x Wv (pre-activation)
  Matrix<T> mixed; // up . silu(gate)
};

template <typename T>
struct LayerNormCache {
  Matrix<T> normalized;      // (x - mean) * rstd
  std::vector<T> inv_std;    // per row
};

template <typename T>
T sigmoid(T x) {
  if (x >= 0) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

template <typename T>
T silu(T x) { return x * sigmoid(x); }

template <typename T>
T silu_grad(T x) {
  const T s = sigmoid(x);
  return s * (T{1} + x * (T{1} - s));
}

// Row-wise SwiGLUFFN. When `cache` is non-null the intermediates needed by
// swiglu_backward are stored there.
template <typename T>
Matrix<T> swiglu_forward(const Matrix<T>& x, const SwiGluParams<T>& p, SwiGluCache<T>* cache = nullptr);

// Accumulates parameter gradients into p.*.grad and returns dL/dx.
template <typename T>
Matrix<T> swiglu_backward(const Matrix<T>& grad_out, const SwiGluCache<T>& cache, SwiGluParams<T>& p);

// LayerNorm over the last axis, eps inside the square root.
template <typename T>
Matrix<T> layer_norm(const Matrix<T>& x, const LayerNormParams<T>& p, T eps,
                     LayerNormCache<T>* cache = nullptr);

template <typename T>
Matrix<T> layer_norm_backward(const Matrix<T>& grad_out, const LayerNormCache<T>& cache,
                              LayerNormParams<T>& p);

// Max-subtracted softmax of one row, in place.
template <typename T>
void softmax_inplace(std::span<T> row);

template <typename T>
std::vector<T> softmax_row(std::span<const T> logits) {
  if (logits.empty()) throw DimensionError("softmax_row: empty input");
  std::vector<T> out(logits.begin(), logits.end());
  softmax_inplace<T>(out);
  return out;
}

// dL/dlogits given the softmax output and dL/dprobs; written into grad_probs.
template <typename T>
void softmax_backward_inplace(std::span<const T> probs, std::span<T> grad_probs);

template <typename T>
std::vector<T> softmax_backward(std::span<const T> probs, std::span<const T> grad_probs) {
  if (probs.size() != grad_probs.size()) {
    throw DimensionError("softmax_backward: " + std::to_string(probs.size()) + " vs " +
                         std::to_string(grad_probs.size()));
  }
  std::vector<T> g(grad_probs.begin(), grad_probs.end());
  softmax_backward_inplace<T>(probs, g);
  return g;
}

// Accumulating variant of matmul_backward for parameter products c = x W.
template <typename T>
Matrix<T> linear_backward(const Matrix<T>& x, Param<T>& w, const Matrix<T>& grad_out) {
  if (grad_out.rows() != x.rows() || grad_out.cols() != w.value.cols() || x.cols() != w.value.rows()) {
    throw DimensionError("linear_backward: x" + x.shape() + " W" + w.value.shape() + " grad" +
                         grad_out.shape());
  }
  gemm<T>(x, Trans::kYes, grad_out, Trans::kNo, w.grad, true);
  return matmul_nt(grad_out, w.value);
}

}  // namespace stca::numerics
