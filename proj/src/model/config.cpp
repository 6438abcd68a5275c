#include "stca/model/config.hpp"

#include "stca/errors.hpp"

namespace stca::model {

void StcaConfig::validate() const {
  if (d == 0 || heads == 0 || d % heads != 0) {
    throw ConfigError("d must be a positive multiple of heads (d=" + std::to_string(d) +
                      ", heads=" + std::to_string(heads) + ")");
  }
  if (layers == 0) throw ConfigError("layers must be >= 1");
  if (ffn_ratio == 0) throw ConfigError("ffn_ratio must be >= 1");
  if (video_vocab == 0 || action_vocab == 0) throw ConfigError("vocab sizes must be positive");
  if (max_position == 0) throw ConfigError("max_position must be positive");
  if (time_buckets == 0) throw ConfigError("time_buckets must be positive");
  if (!(ln_eps > 0)) throw ConfigError("ln_eps must be positive");
  if (!(embed_init > 0)) throw ConfigError("embed_init must be positive");
}

void to_json(nlohmann::json& j, const StcaConfig& c) {
  j = nlohmann::json{{"d", c.d},
                     {"heads", c.heads},
                     {"ffn_ratio", c.ffn_ratio},
                     {"layers", c.layers},
                     {"video_vocab", c.video_vocab},
                     {"action_vocab", c.action_vocab},
                     {"max_position", c.max_position},
                     {"time_buckets", c.time_buckets},
                     {"user_tokens", c.user_tokens},
                     {"candidate_tokens", c.candidate_tokens},
                     {"use_position", c.use_position},
                     {"use_time_delta", c.use_time_delta},
                     {"use_query_fusion", c.use_query_fusion},
                     {"ln_eps", c.ln_eps},
                     {"embed_init", c.embed_init},
                     {"attention_path",
                      c.attention_path == AttentionPath::kStandard ? "standard" : "reordered"}};
}

void from_json(const nlohmann::json& j, StcaConfig& c) {
  StcaConfig def;
  c.d = j.value("d", def.d);
  c.heads = j.value("heads", def.heads);
  c.ffn_ratio = j.value("ffn_ratio", def.ffn_ratio);
  c.layers = j.value("layers", def.layers);
  c.video_vocab = j.value("video_vocab", def.video_vocab);
  c.action_vocab = j.value("action_vocab", def.action_vocab);
  c.max_position = j.value("max_position", def.max_position);
  c.time_buckets = j.value("time_buckets", def.time_buckets);
  c.user_tokens = j.value("user_tokens", def.user_tokens);
  c.candidate_tokens = j.value("candidate_tokens", def.candidate_tokens);
  c.use_position = j.value("use_position", def.use_position);
  c.use_time_delta = j.value("use_time_delta", def.use_time_delta);
  c.use_query_fusion = j.value("use_query_fusion", def.use_query_fusion);
  c.ln_eps = j.value("ln_eps", def.ln_eps);
  c.embed_init = j.value("embed_init", def.embed_init);
  const std::string path = j.value("attention_path", std::string("reordered"));
  if (path == "standard") {
    c.attention_path = AttentionPath::kStandard;
  } else if (path == "reordered") {
    c.attention_path = AttentionPath::kReordered;
  } else {
    throw ConfigError("attention_path must be 'standard' or 'reordered', got '" + path + "'");
  }
}

}  // namespace stca::model
