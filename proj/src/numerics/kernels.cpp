#include "stca/numerics/kernels.hpp"

#include <omp.h>

namespace stca::numerics {

namespace {

constexpr std::size_t kParallelWork = 1u << 15;

template <typename T>
void check_shapes(ConstMatView<T> a, Trans ta, ConstMatView<T> b, Trans tb, MatView<T> c,
                  std::size_t& m, std::size_t& n, std::size_t& k) {
  m = ta == Trans::kYes ? a.cols : a.rows;
  k = ta == Trans::kYes ? a.rows : a.cols;
  const std::size_t kb = tb == Trans::kYes ? b.cols : b.rows;
  n = tb == Trans::kYes ? b.rows : b.cols;
  if (k != kb || c.rows != m || c.cols != n) {
    throw DimensionError("gemm: op(a)" + shape_string(m, k) + " * op(b)" + shape_string(kb, n) +
                         " -> c" + shape_string(c.rows, c.cols));
  }
}

// One output row of the optimized kernel. Inner loops run over contiguous
// memory for every transpose combination except TT.
template <typename T>
void gemm_row(ConstMatView<T> a, Trans ta, ConstMatView<T> b, Trans tb, MatView<T> c,
              std::size_t i, std::size_t n, std::size_t k) {
  T* crow = c.data + i * c.stride;
  if (tb == Trans::kNo) {
    for (std::size_t p = 0; p < k; ++p) {
      const T aip = ta == Trans::kNo ? a.data[i * a.stride + p] : a.data[p * a.stride + i];
      const T* brow = b.data + p * b.stride;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  } else if (ta == Trans::kNo) {
    const T* arow = a.data + i * a.stride;
    for (std::size_t j = 0; j < n; ++j) {
      const T* brow = b.data + j * b.stride;
      T s = 0;
      for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
      crow[j] += s;
    }
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      T s = 0;
      for (std::size_t p = 0; p < k; ++p) s += a.data[p * a.stride + i] * b.data[j * b.stride + p];
      crow[j] += s;
    }
  }
}

}  // namespace

template <typename T>
void gemm(ConstMatView<T> a, Trans ta, ConstMatView<T> b, Trans tb, MatView<T> c, bool accumulate,
          Exec exec) {
  std::size_t m = 0, n = 0, k = 0;
  check_shapes(a, ta, b, tb, c, m, n, k);
  instrumentation::add_macs(static_cast<std::uint64_t>(m) * n * k);
  if (!accumulate) {
    for (std::size_t i = 0; i < m; ++i) std::fill_n(c.data + i * c.stride, n, T{0});
  }
  const bool parallel = exec == Exec::kParallel && m > 1 && m * n * k >= kParallelWork &&
                        !omp_in_parallel();
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    gemm_row(a, ta, b, tb, c, static_cast<std::size_t>(i), n, k);
  }
}

namespace serial {

template <typename T>
void gemm(ConstMatView<T> a, Trans ta, ConstMatView<T> b, Trans tb, MatView<T> c, bool accumulate) {
  std::size_t m = 0, n = 0, k = 0;
  check_shapes(a, ta, b, tb, c, m, n, k);
  instrumentation::add_macs(static_cast<std::uint64_t>(m) * n * k);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T s = 0;
      for (std::size_t p = 0; p < k; ++p) {
        const T av = ta == Trans::kNo ? a(i, p) : a(p, i);
        const T bv = tb == Trans::kNo ? b(p, j) : b(j, p);
        s += av * bv;
      }
      c(i, j) = accumulate ? c(i, j) + s : s;
    }
  }
}

template void gemm<float>(ConstMatView<float>, Trans, ConstMatView<float>, Trans, MatView<float>, bool);
template void gemm<double>(ConstMatView<double>, Trans, ConstMatView<double>, Trans, MatView<double>, bool);

}  // namespace serial

template void gemm<float>(ConstMatView<float>, Trans, ConstMatView<float>, Trans, MatView<float>, bool,
                          Exec);
template void gemm<double>(ConstMatView<double>, Trans, ConstMatView<double>, Trans, MatView<double>,
                           bool, Exec);

}  // namespace stca::numerics
