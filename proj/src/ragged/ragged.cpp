#include "stca/ragged/ragged.hpp"

#include <algorithm>
#include <numeric>

namespace stca::ragged {

template <typename T>
void RaggedBatch<T>::validate() const {
  if (index.empty() || index.front() != 0) throw DimensionError("ragged index must start at 0");
  for (std::size_t b = 0; b + 1 < index.size(); ++b) {
    if (index[b + 1] < index[b]) {
      throw DimensionError("ragged index decreases at segment " + std::to_string(b));
    }
  }
  if (index.back() != values.rows()) {
    throw DimensionError("ragged index ends at " + std::to_string(index.back()) + " but values has " +
                         std::to_string(values.rows()) + " rows");
  }
}

template <typename T>
RaggedBatch<T> build_ragged(std::span<const Matrix<T>> sequences) {
  RaggedBatch<T> out;
  out.index.assign(1, 0);
  std::size_t d = 0;
  bool have_width = false;
  for (std::size_t b = 0; b < sequences.size(); ++b) {
    const auto& s = sequences[b];
    if (s.rows() > 0 || s.cols() > 0) {
      if (have_width && s.cols() != d) {
        throw DimensionError("sequence " + std::to_string(b) + " has width " + std::to_string(s.cols()) +
                             ", expected " + std::to_string(d));
      }
      d = s.cols();
      have_width = true;
    }
    out.index.push_back(out.index.back() + s.rows());
  }
  out.values = Matrix<T>(out.index.back(), d);
  for (std::size_t b = 0; b < sequences.size(); ++b) {
    std::copy_n(sequences[b].data(), sequences[b].size(), out.values.row(out.index[b]).data());
  }
  return out;
}

template <typename T>
std::vector<Matrix<T>> split(const RaggedBatch<T>& batch) {
  batch.validate();
  std::vector<Matrix<T>> out;
  for (std::size_t b = 0; b < batch.batch_size(); ++b) out.emplace_back(batch.segment(b));
  return out;
}

template <typename T>
Matrix<T> ragged_target_attention(const Matrix<T>& queries, const RaggedBatch<T>& batch,
                                  const model::AttentionParams<T>& params, numerics::Exec exec) {
  batch.validate();
  if (queries.rows() != batch.batch_size()) {
    throw DimensionError("ragged_target_attention: " + std::to_string(queries.rows()) + " queries for " +
                         std::to_string(batch.batch_size()) + " segments");
  }
  std::vector<std::size_t> query_offsets(batch.batch_size() + 1);
  std::iota(query_offsets.begin(), query_offsets.end(), std::size_t{0});
  return model::attend_ragged<T>(queries, batch.values, model::SegmentMap{query_offsets, batch.index}, params,
                                 model::AttentionPath::kReordered, exec);
}

std::vector<std::size_t> allocate_lengths(std::span<const std::size_t> requested, const TokenBudget& budget,
                                          std::size_t min_length) {
  const std::size_t n = requested.size();
  if (n != budget.batch_size) {
    throw DimensionError("allocate_lengths: " + std::to_string(n) + " requests for batch size " +
                         std::to_string(budget.batch_size));
  }
  const std::size_t total_budget = budget.total();
  if (total_budget < n * min_length) {
    throw InfeasibleBudgetError("token budget " + std::to_string(total_budget) + " cannot hold " +
                                std::to_string(n) + " sequences of at least " + std::to_string(min_length));
  }
  for (std::size_t b = 0; b < n; ++b) {
    if (requested[b] < min_length) {
      throw ConfigError("requested length " + std::to_string(requested[b]) + " at index " + std::to_string(b) +
                        " is below the minimum " + std::to_string(min_length));
    }
  }
  const std::size_t requested_total = std::accumulate(requested.begin(), requested.end(), std::size_t{0});
  std::vector<std::size_t> out(requested.begin(), requested.end());
  if (requested_total <= total_budget) return out;

  std::vector<std::size_t> floor_len(n);
  std::size_t floor_total = 0;
  for (std::size_t b = 0; b < n; ++b) {
    floor_len[b] = std::min(requested[b], std::max<std::size_t>(min_length, 8));
    floor_total += floor_len[b];
    const auto scaled = static_cast<std::size_t>(static_cast<long double>(requested[b]) * total_budget /
                                                 static_cast<long double>(requested_total));
    out[b] = std::clamp(scaled / 8 * 8, floor_len[b], requested[b]);
  }
  if (floor_total > total_budget) {
    throw InfeasibleBudgetError("token budget " + std::to_string(total_budget) +
                                " cannot hold the per-sequence floor of " + std::to_string(floor_total));
  }

  std::size_t used = std::accumulate(out.begin(), out.end(), std::size_t{0});
  while (used > total_budget) {
    std::size_t pick = n;
    for (std::size_t b = 0; b < n; ++b) {
      if (out[b] > floor_len[b] && (pick == n || out[b] - floor_len[b] > out[pick] - floor_len[pick])) pick = b;
    }
    const std::size_t step = std::min<std::size_t>(8, out[pick] - floor_len[pick]);
    out[pick] -= step;
    used -= step;
  }

  for (;;) {
    const std::size_t slack = total_budget - used;
    std::size_t pick = n;
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t missing = requested[b] - out[b];
      if (missing == 0 || std::min<std::size_t>(8, missing) > slack) continue;
      if (pick == n || missing > requested[pick] - out[pick]) pick = b;
    }
    if (pick == n) break;
    const std::size_t step = std::min<std::size_t>(8, requested[pick] - out[pick]);
    out[pick] += step;
    used += step;
  }
  return out;
}

template <typename T>
std::vector<std::size_t> CompactBatch<T>::logical_offsets() const {
  std::vector<std::size_t> offsets{0};
  for (const auto& pieces : segments) {
    std::size_t len = 0;
    for (const auto& p : pieces) len += p.length;
    offsets.push_back(offsets.back() + len);
  }
  return offsets;
}

template <typename T>
CompactBatch<T> compact(const RaggedBatch<T>& batch, std::size_t avg_length) {
  batch.validate();
  const std::size_t rows = batch.batch_size();
  if (avg_length == 0 || batch.total_tokens() != rows * avg_length) {
    throw CompactionError("compaction needs exactly " + std::to_string(rows) + " x " +
                          std::to_string(avg_length) + " tokens, got " + std::to_string(batch.total_tokens()));
  }
  CompactBatch<T> out;
  out.physical = batch.values;
  out.rows = rows;
  out.row_length = avg_length;
  out.segments.resize(rows);
  for (std::size_t b = 0; b < rows; ++b) {
    std::size_t pos = batch.index[b];
    const std::size_t end = batch.index[b + 1];
    while (pos < end) {
      const std::size_t row = pos / avg_length, start = pos % avg_length;
      const std::size_t len = std::min(end - pos, avg_length - start);
      out.segments[b].push_back({row, start, len});
      pos += len;
    }
  }
  return out;
}

template <typename T>
RaggedBatch<T> unpack(const CompactBatch<T>& packed) {
  std::vector<Matrix<T>> sequences;
  const std::size_t d = packed.physical.cols();
  for (const auto& pieces : packed.segments) {
    std::size_t len = 0;
    for (const auto& p : pieces) len += p.length;
    Matrix<T> seq(len, d);
    std::size_t r = 0;
    for (const auto& p : pieces) {
      if (p.row >= packed.rows || p.start + p.length > packed.row_length) {
        throw CompactionError("segment piece outside the packed layout");
      }
      const auto src = packed.physical_row(p.row);
      for (std::size_t k = 0; k < p.length; ++k, ++r) {
        std::copy_n(src.row(p.start + k).data(), d, seq.row(r).data());
      }
    }
    sequences.push_back(std::move(seq));
  }
  auto out = build_ragged<T>(sequences);
  if (out.values.cols() != d) out.values = Matrix<T>(out.values.rows(), d);
  return out;
}

#define STCA_INSTANTIATE_RAGGED(T)                                                                     \
  template struct RaggedBatch<T>;                                                                      \
  template struct CompactBatch<T>;                                                                     \
  template RaggedBatch<T> build_ragged<T>(std::span<const Matrix<T>>);                                 \
  template std::vector<Matrix<T>> split<T>(const RaggedBatch<T>&);                                     \
  template Matrix<T> ragged_target_attention<T>(const Matrix<T>&, const RaggedBatch<T>&,               \
                                                const model::AttentionParams<T>&, numerics::Exec);     \
  template CompactBatch<T> compact<T>(const RaggedBatch<T>&, std::size_t);                             \
  template RaggedBatch<T> unpack<T>(const CompactBatch<T>&);

STCA_INSTANTIATE_RAGGED(float)
STCA_INSTANTIATE_RAGGED(double)

}  // namespace stca::ragged
