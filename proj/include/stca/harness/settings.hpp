#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "stca/harness/synthetic.hpp"
#include "stca/harness/trainer.hpp"
#include "stca/model/config.hpp"

namespace stca::harness {

// Everything a CLI run needs. Serialized as one JSON document with the
// sections "model", "length", "train" and "data" plus a top-level "seed".
struct Settings {
  std::uint64_t seed = 1;
  model::StcaConfig model;
  TrainConfig train;
  SyntheticTaskConfig data;
  double eval_fraction = 0.1;
};

nlohmann::json to_json(const Settings& s);
// Missing keys keep their defaults; unknown keys are rejected.
Settings settings_from_json(const nlohmann::json& j);

Settings load_settings(const std::filesystem::path& path);

// Applies "section.key=value". The value is parsed as JSON when possible and
// taken as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// The top-level seed is copied into the model, training and data seeds.
void propagate_seed(Settings& s);

}  // namespace stca::harness
