#pragma once

#include "stca/numerics/matrix.hpp"

namespace stca::numerics {

enum class Trans : bool { kNo = false, kYes = true };

// Execution policy for the optimized kernels. Parallelism is only ever over
// independent output rows, so kSerial and kParallel agree bitwise.
enum class Exec { kSerial, kParallel };

// c = op(a) * op(b)  (or c += ... when accumulate). Counts m*n*k multiply-adds
// under the current instrumentation tag.
template <typename T>
void gemm(ConstMatView<T> a, Trans ta, ConstMatView<T> b, Trans tb, MatView<T> c, bool accumulate,
          Exec exec = Exec::kParallel);

namespace serial {
// Textbook i-j-k triple loop. Kept as the reference the optimized kernel is
// tested and benchmarked against.
template <typename T>
void gemm(ConstMatView<T> a, Trans ta, ConstMatView<T> b, Trans tb, MatView<T> c, bool accumulate);
}  // namespace serial

template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b, Exec exec = Exec::kParallel) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + a.shape() + " * " + b.shape());
  }
  Matrix<T> c(a.rows(), b.cols());
  gemm<T>(a, Trans::kNo, b, Trans::kNo, c, false, exec);
  return c;
}

// a^T * b
template <typename T>
Matrix<T> matmul_tn(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows()) throw DimensionError("matmul_tn: " + a.shape() + "^T * " + b.shape());
  Matrix<T> c(a.cols(), b.cols());
  gemm<T>(a, Trans::kYes, b, Trans::kNo, c, false);
  return c;
}

// a * b^T
template <typename T>
Matrix<T> matmul_nt(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.cols()) throw DimensionError("matmul_nt: " + a.shape() + " * " + b.shape() + "^T");
  Matrix<T> c(a.rows(), b.rows());
  gemm<T>(a, Trans::kNo, b, Trans::kYes, c, false);
  return c;
}

template <typename T>
struct MatmulGrads {
  Matrix<T> a;
  Matrix<T> b;
};

// Gradients of c = a * b given dL/dc.
template <typename T>
MatmulGrads<T> matmul_backward(const Matrix<T>& a, const Matrix<T>& b, const Matrix<T>& grad_out) {
  if (grad_out.rows() != a.rows() || grad_out.cols() != b.cols() || a.cols() != b.rows()) {
    throw DimensionError("matmul_backward: a" + a.shape() + " b" + b.shape() + " grad" + grad_out.shape());
  }
  return {matmul_nt(grad_out, b), matmul_tn(a, grad_out)};
}

}  // namespace stca::numerics
