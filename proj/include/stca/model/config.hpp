#pragma once

#include <cstddef>
#include <string>

#include <json.hpp>

namespace stca::model {

enum class AttentionPath { kStandard, kReordered };

// Architecture hyperparameters. Nothing here depends on history length.
struct StcaConfig {
  std::size_t d = 32;
  std::size_t heads = 4;
  std::size_t ffn_ratio = 2;
  std::size_t layers = 2;

  std::size_t video_vocab = 1000;
  std::size_t action_vocab = 8;
  std::size_t max_position = 512;
  std::size_t time_buckets = 32;

  std::size_t user_tokens = 2;       // K
  std::size_t candidate_tokens = 2;  // C

  bool use_position = true;
  bool use_time_delta = true;
  bool use_query_fusion = true;

  double ln_eps = 1e-5;
  double embed_init = 0.01;  // embedding tables start uniform in (-embed_init, embed_init)
  AttentionPath attention_path = AttentionPath::kReordered;

  std::size_t head_dim() const { return d / heads; }
  std::size_t hidden() const { return ffn_ratio * d; }
  std::size_t aux_tokens() const { return user_tokens + candidate_tokens; }

  // Throws ConfigError when d % heads != 0, layers == 0, ffn_ratio == 0, ...
  void validate() const;

  bool operator==(const StcaConfig&) const = default;
};

void to_json(nlohmann::json& j, const StcaConfig& c);
void from_json(const nlohmann::json& j, StcaConfig& c);

}  // namespace stca::model
