#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stca/model/attention.hpp"

namespace stca::ragged {

using numerics::Matrix;

// Variable-length sequences stored back to back with no padding. Segment b
// occupies rows [index[b], index[b+1]) of `values`.
template <typename T>
struct RaggedBatch {
  Matrix<T> values;                 // T_total x d
  std::vector<std::size_t> index;   // B + 1 offsets

  std::size_t batch_size() const { return index.empty() ? 0 : index.size() - 1; }
  std::size_t total_tokens() const { return index.empty() ? 0 : index.back(); }
  std::size_t length(std::size_t b) const { return index[b + 1] - index[b]; }
  numerics::ConstMatView<T> segment(std::size_t b) const {
    return values.view().rows_range(index[b], index[b + 1]);
  }
  // Throws DimensionError unless index starts at 0, never decreases and ends
  // at values.rows().
  void validate() const;
};

// Empty sequences are allowed here and simply produce repeated offsets.
template <typename T>
RaggedBatch<T> build_ragged(std::span<const Matrix<T>> sequences);

template <typename T>
std::vector<Matrix<T>> split(const RaggedBatch<T>& batch);

// Row b of the result is query b attending only to segment b.
template <typename T>
Matrix<T> ragged_target_attention(const Matrix<T>& queries, const RaggedBatch<T>& batch,
                                  const model::AttentionParams<T>& params,
                                  numerics::Exec exec = numerics::Exec::kParallel);

struct TokenBudget {
  std::size_t batch_size = 0;
  std::size_t avg_length = 0;

  std::size_t total() const { return batch_size * avg_length; }
};

// Fits requested lengths into the budget. Under budget the request is
// returned unchanged. Over budget every length is scaled by
// budget / sum(requested), floored to a multiple of 8 (at least
// min(requested, max(min_length, 8))), and the leftover is handed out in
// steps of 8 to the most-truncated sequences, lowest index first.
std::vector<std::size_t> allocate_lengths(std::span<const std::size_t> requested, const TokenBudget& budget,
                                          std::size_t min_length);

// Where a slice of a logical sequence lives in the packed layout.
struct Piece {
  std::size_t row = 0;
  std::size_t start = 0;
  std::size_t length = 0;

  friend bool operator==(const Piece&, const Piece&) = default;
};

template <typename T>
struct CompactBatch {
  Matrix<T> physical;                        // (rows * row_length) x d
  std::size_t rows = 0;
  std::size_t row_length = 0;
  std::vector<std::vector<Piece>> segments;  // per logical sequence

  numerics::ConstMatView<T> physical_row(std::size_t r) const {
    return physical.view().rows_range(r * row_length, (r + 1) * row_length);
  }
  // Offsets of each logical sequence within the packed buffer.
  std::vector<std::size_t> logical_offsets() const;
};

// Packs sequences into batch_size rows of exactly avg_length tokens, filling
// rows in order and splitting a sequence across adjacent rows when needed.
// Throws CompactionError unless total_tokens == batch_size * avg_length.
template <typename T>
CompactBatch<T> compact(const RaggedBatch<T>& batch, std::size_t avg_length);

template <typename T>
RaggedBatch<T> unpack(const CompactBatch<T>& packed);

}  // namespace stca::ragged
