#pragma once

#include <cstdint>
#include <vector>

namespace stca {

using Id = std::int64_t;
using Seconds = std::int64_t;

// One interaction in a user's history. Positions strictly increase and
// timestamps never decrease along a history.
struct HistoryEvent {
  Id video_id = 0;
  Id action_type = 0;
  std::int64_t position = 0;
  Seconds timestamp = 0;

  friend bool operator==(const HistoryEvent&, const HistoryEvent&) = default;
};

// The candidate being ranked. `aux` optionally carries C candidate-side
// tokens (C*d values, row-major); empty means zero tokens.
struct TargetItem {
  Id video_id = 0;
  Seconds request_time = 0;
  std::vector<float> aux;

  friend bool operator==(const TargetItem&, const TargetItem&) = default;
};

using History = std::vector<HistoryEvent>;

}  // namespace stca
