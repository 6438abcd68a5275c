#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stca/errors.hpp"
#include "stca/numerics/instrumentation.hpp"

namespace stca::numerics {

inline std::string shape_string(std::size_t rows, std::size_t cols) {
  return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
}

// Non-owning view of a row-major block whose rows are `stride` apart.
template <typename T>
struct MatView {
  T* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t stride = 0;

  T& operator()(std::size_t r, std::size_t c) const { return data[r * stride + c]; }
  std::span<T> row(std::size_t r) const { return {data + r * stride, cols}; }
  MatView rows_range(std::size_t r0, std::size_t r1) const {
    return {data + r0 * stride, r1 - r0, cols, stride};
  }
  MatView cols_range(std::size_t c0, std::size_t c1) const {
    return {data + c0, rows, c1 - c0, stride};
  }
};

template <typename T>
struct ConstMatView {
  const T* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t stride = 0;

  ConstMatView() = default;
  ConstMatView(const T* d, std::size_t r, std::size_t c, std::size_t s)
      : data(d), rows(r), cols(c), stride(s) {}
  ConstMatView(MatView<T> v) : data(v.data), rows(v.rows), cols(v.cols), stride(v.stride) {}

  const T& operator()(std::size_t r, std::size_t c) const { return data[r * stride + c]; }
  std::span<const T> row(std::size_t r) const { return {data + r * stride, cols}; }
  ConstMatView rows_range(std::size_t r0, std::size_t r1) const {
    return {data + r0 * stride, r1 - r0, cols, stride};
  }
  ConstMatView cols_range(std::size_t c0, std::size_t c1) const {
    return {data + c0, rows, c1 - c0, stride};
  }
};

// Dense row-major matrix. Vectors are 1xN matrices.
template <typename T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{0})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    instrumentation::note_allocation(data_.size());
  }
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("matrix data length " + std::to_string(data_.size()) +
                           " does not match shape " + shape_string(rows_, cols_));
    }
    instrumentation::note_allocation(data_.size());
  }
  Matrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionError("ragged initializer for Matrix");
      data_.insert(data_.end(), r.begin(), r.end());
    }
    instrumentation::note_allocation(data_.size());
  }
  explicit Matrix(ConstMatView<T> v) : Matrix(v.rows, v.cols) {
    for (std::size_t r = 0; r < v.rows; ++r) std::copy_n(v.row(r).data(), v.cols, row(r).data());
  }

  Matrix(const Matrix& other) : rows_(other.rows_), cols_(other.cols_), data_(other.data_) {
    instrumentation::note_allocation(data_.size());
  }
  Matrix& operator=(const Matrix& other) {
    if (this != &other) {
      rows_ = other.rows_;
      cols_ = other.cols_;
      data_ = other.data_;
      instrumentation::note_allocation(data_.size());
    }
    return *this;
  }
  Matrix(Matrix&&) noexcept = default;
  Matrix& operator=(Matrix&&) noexcept = default;

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }
  static Matrix row_vector(std::span<const T> values) {
    return Matrix(1, values.size(), std::vector<T>(values.begin(), values.end()));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  std::string shape() const { return shape_string(rows_, cols_); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  MatView<T> view() { return {data_.data(), rows_, cols_, cols_}; }
  ConstMatView<T> view() const { return {data_.data(), rows_, cols_, cols_}; }
  operator ConstMatView<T>() const { return view(); }
  operator MatView<T>() { return view(); }

  void set_zero() { std::fill(data_.begin(), data_.end(), T{0}); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
  }

  template <typename U>
  Matrix<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Matrix<U>(rows_, cols_, std::move(out));
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <typename T>
void require_same_shape(const Matrix<T>& a, const Matrix<T>& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shape mismatch " + a.shape() + " vs " + b.shape());
  }
}

// Elementwise helpers used across modules.
template <typename T>
void add_inplace(Matrix<T>& dst, const Matrix<T>& src) {
  require_same_shape(dst, src, "add_inplace");
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

template <typename T>
void scale_inplace(Matrix<T>& m, T s) {
  for (auto& v : m.values()) v *= s;
}

template <typename T>
T max_abs_diff(const Matrix<T>& a, const Matrix<T>& b) {
  require_same_shape(a, b, "max_abs_diff");
  T m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

template <typename T>
T frobenius(const Matrix<T>& a) {
  T s = 0;
  for (T v : a.values()) s += v * v;
  return std::sqrt(s);
}

// Horizontal concatenation [a | b | ...]; all parts share a row count.
template <typename T>
Matrix<T> hconcat(std::span<const Matrix<T>* const> parts) {
  if (parts.empty()) return {};
  const std::size_t rows = parts.front()->rows();
  std::size_t cols = 0;
  for (const auto* p : parts) {
    if (p->rows() != rows) {
      throw DimensionError("hconcat: row mismatch " + p->shape() + " vs rows=" + std::to_string(rows));
    }
    cols += p->cols();
  }
  Matrix<T> out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t c0 = 0;
    for (const auto* p : parts) {
      std::copy_n(p->row(r).data(), p->cols(), out.row(r).data() + c0);
      c0 += p->cols();
    }
  }
  return out;
}

// Copy columns [c0, c0 + cols) of `src` into a new matrix.
template <typename T>
Matrix<T> column_block(const Matrix<T>& src, std::size_t c0, std::size_t cols) {
  if (c0 + cols > src.cols()) throw DimensionError("column_block out of range on " + src.shape());
  Matrix<T> out(src.rows(), cols);
  for (std::size_t r = 0; r < src.rows(); ++r) std::copy_n(src.row(r).data() + c0, cols, out.row(r).data());
  return out;
}

}  // namespace stca::numerics
