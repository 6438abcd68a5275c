#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stca/model/config.hpp"
#include "stca/model/params.hpp"
#include "stca/types.hpp"

namespace stca::model {

// Embedding-table rows for one history token.
struct TokenIndex {
  std::uint32_t video = 0;
  std::uint32_t action = 0;
  std::uint32_t position = 0;
  std::uint32_t time = 0;
};

// floor(log2(delta_seconds)) clamped to [0, buckets); deltas below 2s map to 0.
std::uint32_t time_delta_bucket(Seconds delta, std::size_t buckets);

// Ids outside [0, vocab) map to the reserved trailing OOV row.
std::uint32_t video_row(Id video_id, const StcaConfig& config);
std::uint32_t action_row(Id action, const StcaConfig& config);

// Positions are recency ranks within the given window: the last event has
// rank 0. Ranks >= max_position share the OOV row.
std::vector<TokenIndex> tokenize_history(std::span<const HistoryEvent> events, Seconds request_time,
                                         const StcaConfig& config);

// x_j = video + action (+ position) (+ time-delta), one row per event in
// history order.
template <typename T>
Matrix<T> embed_tokens(std::span<const TokenIndex> tokens, const StcaParams<T>& params,
                       const StcaConfig& config);

template <typename T>
Matrix<T> encode_history(std::span<const HistoryEvent> events, const TargetItem& target,
                         const StcaParams<T>& params, const StcaConfig& config) {
  const auto tokens = tokenize_history(events, target.request_time, config);
  return embed_tokens<T>(tokens, params, config);
}

}  // namespace stca::model
