#include "stca/model/tokens.hpp"

#include <bit>

namespace stca::model {

std::uint32_t time_delta_bucket(Seconds delta, std::size_t buckets) {
  if (delta < 2) return 0;
  const auto b = static_cast<std::size_t>(std::bit_width(static_cast<std::uint64_t>(delta)) - 1);
  return static_cast<std::uint32_t>(std::min(b, buckets - 1));
}

std::uint32_t video_row(Id video_id, const StcaConfig& config) {
  if (video_id < 0 || static_cast<std::uint64_t>(video_id) >= config.video_vocab) {
    return static_cast<std::uint32_t>(config.video_vocab);
  }
  return static_cast<std::uint32_t>(video_id);
}

std::uint32_t action_row(Id action, const StcaConfig& config) {
  if (action < 0 || static_cast<std::uint64_t>(action) >= config.action_vocab) {
    return static_cast<std::uint32_t>(config.action_vocab);
  }
  return static_cast<std::uint32_t>(action);
}

std::vector<TokenIndex> tokenize_history(std::span<const HistoryEvent> events, Seconds request_time,
                                         const StcaConfig& config) {
  std::vector<TokenIndex> out(events.size());
  const std::size_t n = events.size();
  for (std::size_t j = 0; j < n; ++j) {
    const auto& e = events[j];
    const std::size_t rank = n - 1 - j;
    out[j].video = video_row(e.video_id, config);
    out[j].action = action_row(e.action_type, config);
    out[j].position = static_cast<std::uint32_t>(std::min(rank, config.max_position));
    out[j].time = time_delta_bucket(request_time - e.timestamp, config.time_buckets);
  }
  return out;
}

template <typename T>
Matrix<T> embed_tokens(std::span<const TokenIndex> tokens, const StcaParams<T>& params,
                       const StcaConfig& config) {
  const std::size_t d = config.d;
  Matrix<T> x(tokens.size(), d);
  for (std::size_t j = 0; j < tokens.size(); ++j) {
    auto row = x.row(j);
    const auto v = params.video.value.row(tokens[j].video);
    const auto a = params.action.value.row(tokens[j].action);
    for (std::size_t c = 0; c < d; ++c) row[c] = v[c] + a[c];
    if (config.use_position) {
      const auto p = params.position.value.row(tokens[j].position);
      for (std::size_t c = 0; c < d; ++c) row[c] += p[c];
    }
    if (config.use_time_delta) {
      const auto t = params.time_delta.value.row(tokens[j].time);
      for (std::size_t c = 0; c < d; ++c) row[c] += t[c];
    }
  }
  return x;
}

template Matrix<float> embed_tokens<float>(std::span<const TokenIndex>, const StcaParams<float>&,
                                           const StcaConfig&);
template Matrix<double> embed_tokens<double>(std::span<const TokenIndex>, const StcaParams<double>&,
                                             const StcaConfig&);

}  // namespace stca::model
