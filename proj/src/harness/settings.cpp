#include "stca/harness/settings.hpp"

#include <fstream>

namespace stca::harness {

using nlohmann::json;

namespace {

const char* selection_name(extrapolation::Selection s) {
  return s == extrapolation::Selection::kSuffix ? "suffix" : "random";
}

extrapolation::Selection parse_selection(const std::string& s) {
  if (s == "suffix") return extrapolation::Selection::kSuffix;
  if (s == "random") return extrapolation::Selection::kRandom;
  throw ConfigError("length.selection must be 'suffix' or 'random', got '" + s + "'");
}

void reject_unknown(const json& j, const json& defaults, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!defaults.contains(key)) throw ConfigError("unknown setting '" + where + "." + key + "'");
  }
}

template <typename U>
U pick(const json& j, const char* key, U fallback) {
  return j.contains(key) ? j.at(key).get<U>() : fallback;
}

}  // namespace

json to_json(const Settings& s) {
  const auto& t = s.train;
  const auto& l = t.lengths;
  const auto& d = s.data;
  json curriculum = json::array();
  for (const auto& st : t.curriculum) curriculum.push_back({{"steps", st.steps}, {"max_length", st.max_length}});
  return {
      {"seed", s.seed},
      {"model", json(s.model)},
      {"length",
       {{"min", l.min_length},
        {"avg", l.avg_length},
        {"max", l.max_length},
        {"infer", l.infer_length},
        {"alpha", l.alpha},
        {"selection", selection_name(l.selection)}}},
      {"train",
       {{"batch_size", t.batch_size},
        {"steps", t.steps},
        {"length_mode", t.length_mode == LengthMode::kFixed ? "fixed" : "stochastic"},
        {"fixed_length", t.fixed_length},
        {"use_budget", t.use_budget},
        {"batching", t.batching == Batching::kRlb ? "rlb" : "triplet"},
        {"loss_mode", t.loss_mode == rlb::LossMode::kPerUser ? "per_user" : "flat"},
        {"lr_dense", t.adam.lr_dense},
        {"lr_embedding", t.adam.lr_embedding},
        {"beta1", t.adam.beta1},
        {"beta2", t.adam.beta2},
        {"eps", t.adam.eps},
        {"curriculum", curriculum},
        {"eval_fraction", s.eval_fraction}}},
      {"data",
       {{"vocab", d.vocab},
        {"n_clusters", d.n_clusters},
        {"action_vocab", d.action_vocab},
        {"history_min", d.history_len_range.first},
        {"history_max", d.history_len_range.second},
        {"m", d.m},
        {"lag_min", d.signal_lag_range.first},
        {"lag_max", d.signal_lag_range.second},
        {"noise", d.noise},
        {"plant_prob", d.plant_prob},
        {"plant_copies", d.plant_copies},
        {"decoys", d.decoys},
        {"num_requests", d.num_requests}}},
  };
}

Settings settings_from_json(const json& j) {
  const Settings def;
  const json defaults = to_json(def);
  reject_unknown(j, defaults, "settings");
  Settings s;
  s.seed = pick(j, "seed", def.seed);
  if (j.contains("model")) {
    reject_unknown(j["model"], defaults["model"], "model");
    s.model = j["model"].get<model::StcaConfig>();
  }
  if (j.contains("length")) {
    const auto& l = j["length"];
    reject_unknown(l, defaults["length"], "length");
    auto& c = s.train.lengths;
    c.min_length = pick(l, "min", c.min_length);
    c.avg_length = pick(l, "avg", c.avg_length);
    c.max_length = pick(l, "max", c.max_length);
    c.infer_length = pick(l, "infer", c.infer_length);
    c.alpha = pick(l, "alpha", c.alpha);
    c.selection = parse_selection(pick<std::string>(l, "selection", selection_name(c.selection)));
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    reject_unknown(t, defaults["train"], "train");
    auto& c = s.train;
    c.batch_size = pick(t, "batch_size", c.batch_size);
    c.steps = pick(t, "steps", c.steps);
    const auto mode = pick<std::string>(t, "length_mode", "stochastic");
    if (mode != "fixed" && mode != "stochastic") throw ConfigError("train.length_mode must be fixed or stochastic");
    c.length_mode = mode == "fixed" ? LengthMode::kFixed : LengthMode::kStochastic;
    c.fixed_length = pick(t, "fixed_length", c.fixed_length);
    c.use_budget = pick(t, "use_budget", c.use_budget);
    const auto batching = pick<std::string>(t, "batching", "rlb");
    if (batching != "rlb" && batching != "triplet") throw ConfigError("train.batching must be rlb or triplet");
    c.batching = batching == "rlb" ? Batching::kRlb : Batching::kTriplet;
    const auto loss = pick<std::string>(t, "loss_mode", "per_user");
    if (loss != "per_user" && loss != "flat") throw ConfigError("train.loss_mode must be per_user or flat");
    c.loss_mode = loss == "flat" ? rlb::LossMode::kFlat : rlb::LossMode::kPerUser;
    c.adam.lr_dense = pick(t, "lr_dense", c.adam.lr_dense);
    c.adam.lr_embedding = pick(t, "lr_embedding", c.adam.lr_embedding);
    c.adam.beta1 = pick(t, "beta1", c.adam.beta1);
    c.adam.beta2 = pick(t, "beta2", c.adam.beta2);
    c.adam.eps = pick(t, "eps", c.adam.eps);
    if (t.contains("curriculum")) {
      for (const auto& st : t["curriculum"]) {
        c.curriculum.push_back({st.at("steps").get<std::size_t>(), st.at("max_length").get<std::size_t>()});
      }
    }
    s.eval_fraction = pick(t, "eval_fraction", s.eval_fraction);
  }
  if (j.contains("data")) {
    const auto& d = j["data"];
    reject_unknown(d, defaults["data"], "data");
    auto& c = s.data;
    c.vocab = pick(d, "vocab", c.vocab);
    c.n_clusters = pick(d, "n_clusters", c.n_clusters);
    c.action_vocab = pick(d, "action_vocab", c.action_vocab);
    c.history_len_range.first = pick(d, "history_min", c.history_len_range.first);
    c.history_len_range.second = pick(d, "history_max", c.history_len_range.second);
    c.m = pick(d, "m", c.m);
    c.signal_lag_range.first = pick(d, "lag_min", c.signal_lag_range.first);
    c.signal_lag_range.second = pick(d, "lag_max", c.signal_lag_range.second);
    c.noise = pick(d, "noise", c.noise);
    c.plant_prob = pick(d, "plant_prob", c.plant_prob);
    c.plant_copies = pick(d, "plant_copies", c.plant_copies);
    c.decoys = pick(d, "decoys", c.decoys);
    c.num_requests = pick(d, "num_requests", c.num_requests);
  }
  return s;
}

Settings load_settings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open settings file " + path.string());
  try {
    return settings_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
  std::string pointer = "/" + assignment.substr(0, eq);
  for (auto& ch : pointer) {
    if (ch == '.') ch = '/';
  }
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  doc[json::json_pointer(pointer)] = value;
}

void propagate_seed(Settings& s) {
  s.train.seed = s.seed;
  s.data.seed = s.seed;
}

}  // namespace stca::harness
