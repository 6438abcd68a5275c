#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "stca/costmodel/costmodel.hpp"
#include "stca/extrapolation/length_sampler.hpp"
#include "stca/harness/settings.hpp"
#include "stca/harness/synthetic.hpp"
#include "stca/harness/trainer.hpp"
#include "stca/model/checkpoint.hpp"
#include "stca/rlb/dataset.hpp"
#include "stca/verify/verify.hpp"

namespace {

using nlohmann::json;
using namespace stca;

// A flag that writes its value into the settings document.
struct Binding {
  std::string path;
  std::string value;
};

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::vector<std::unique_ptr<Binding>> bindings;

  void bind(CLI::App* app, const std::string& flag, const std::string& path, const std::string& help) {
    auto b = std::make_unique<Binding>();
    b->path = path;
    app->add_option(flag, b->value, help + " (" + path + ")");
    bindings.push_back(std::move(b));
  }

  harness::Settings settings() const {
    json doc = harness::to_json(harness::Settings{});
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot open config " + config_path);
      doc.merge_patch(json::parse(in));
    }
    for (const auto& o : overrides) harness::apply_override(doc, o);
    for (const auto& b : bindings) {
      if (!b->value.empty()) harness::apply_override(doc, b->path + "=" + b->value);
    }
    if (seed) doc["seed"] = *seed;
    auto s = harness::settings_from_json(doc);
    harness::propagate_seed(s);
    return s;
  }
};

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoul(item));
  }
  return out;
}

std::vector<rlb::Request> load_or_generate(const std::string& path, const harness::Settings& s) {
  if (!path.empty()) return rlb::load_requests(path);
  return harness::generate(s.data);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STCA long-sequence ranking toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config_path, "JSON settings file");
  app.add_option("--set", common.overrides, "Override a setting, e.g. --set length.avg=64")->take_all();
  app.add_option("--seed", common.seed, "Global seed");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset (one request per line)");
  std::string gen_out = "data.jsonl";
  bool gen_triplets = false;
  gen->add_option("-o,--out", gen_out, "Output file");
  gen->add_flag("--triplets", gen_triplets, "Write flat triplets instead of requests");
  common.bind(gen, "--requests", "data.num_requests", "Number of requests");
  common.bind(gen, "--m", "data.m", "Targets per request");
  common.bind(gen, "--noise", "data.noise", "Label flip probability");
  common.bind(gen, "--history-min", "data.history_min", "Shortest history");
  common.bind(gen, "--history-max", "data.history_max", "Longest history");
  common.bind(gen, "--lag-min", "data.lag_min", "Signal lag lower bound");
  common.bind(gen, "--lag-max", "data.lag_max", "Signal lag upper bound");
  common.bind(gen, "--decoys", "data.decoys", "Decoys per target");
  common.bind(gen, "--plant-copies", "data.plant_copies", "Matching items planted per positive target");

  // convert
  auto* convert = app.add_subcommand("convert", "Group a flat triplet file into requests");
  std::string convert_in, convert_out = "requests.jsonl";
  bool by_session = false;
  convert->add_option("input", convert_in, "Triplet file")->required();
  convert->add_option("-o,--out", convert_out, "Output file");
  convert->add_flag("--by-session", by_session, "Group by user and session");

  // train
  auto* train = app.add_subcommand("train", "Train a model");
  std::string train_data, train_out = "model.stca", train_log;
  train->add_option("--data", train_data, "Request file (default: generate from settings)");
  train->add_option("-o,--out", train_out, "Checkpoint path");
  train->add_option("--log", train_log, "Metrics log (JSON lines)");
  common.bind(train, "--steps", "train.steps", "Training steps");
  common.bind(train, "--batch-size", "train.batch_size", "Requests per step");
  common.bind(train, "--length-mode", "train.length_mode", "fixed or stochastic");
  common.bind(train, "--fixed-length", "train.fixed_length", "Length in fixed mode");
  common.bind(train, "--batching", "train.batching", "rlb or triplet");
  common.bind(train, "--lr-dense", "train.lr_dense", "Dense learning rate");
  common.bind(train, "--lr-embedding", "train.lr_embedding", "Embedding learning rate");
  common.bind(train, "--l-min", "length.min", "Minimum training length");
  common.bind(train, "--l-avg", "length.avg", "Average training length");
  common.bind(train, "--l-max", "length.max", "Maximum training length");
  common.bind(train, "--alpha", "length.alpha", "Beta shape alpha");
  common.bind(train, "--selection", "length.selection", "suffix or random");
  std::string curriculum;
  train->add_option("--curriculum", curriculum, "Stages as steps:max_length,... e.g. 100:64,200:256");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string eval_ckpt, eval_data;
  std::size_t infer_len = 256;
  eval->add_option("--checkpoint", eval_ckpt, "Checkpoint path")->required();
  eval->add_option("--data", eval_data, "Request file (default: generate from settings)");
  eval->add_option("--infer-len", infer_len, "Inference length");

  // flops
  auto* flops = app.add_subcommand("flops", "Analytic FLOPs sweep as CSV");
  std::vector<std::string> kinds{"stca_reordered", "stca_standard", "self_attention"};
  std::string lengths = "500,1000,2000,4000,8000,10000", convention = "calibrated";
  costmodel::ArchSpec dims;
  flops->add_option("--kind", kinds, "Architectures")->take_all();
  flops->add_option("--L", lengths, "Comma-separated lengths");
  flops->add_option("--dim", dims.d, "Model width");
  flops->add_option("--heads", dims.h, "Heads");
  flops->add_option("--ffn-ratio", dims.r, "FFN ratio");
  flops->add_option("--layers", dims.M, "Layers");
  flops->add_option("--convention", convention, "calibrated, counted or textbook");

  // sample-lengths
  auto* sample = app.add_subcommand("sample-lengths", "Print sampled training lengths, one per line");
  std::size_t n_samples = 1000;
  sample->add_option("-n,--count", n_samples, "Number of samples");
  common.bind(sample, "--l-min", "length.min", "Minimum training length");
  common.bind(sample, "--l-avg", "length.avg", "Average training length");
  common.bind(sample, "--l-max", "length.max", "Maximum training length");
  common.bind(sample, "--alpha", "length.alpha", "Beta shape alpha");

  // verify
  auto* verify = app.add_subcommand("verify", "Run every oracle");
  bool as_json = false;
  std::string mutate;
  verify->add_flag("--json", as_json, "Machine-readable output");
  verify->add_option("--mutate", mutate, "Corrupt one attention weight: wq, wk, wv or wo");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto s = common.settings();

    if (*gen) {
      const auto requests = harness::generate(s.data);
      std::ofstream out(gen_out);
      if (!out) throw FormatError("cannot open " + gen_out);
      if (gen_triplets) {
        for (const auto& t : rlb::flatten(requests)) {
          rlb::Request one{t.user_id, t.session_id, t.history, {t.target}, {t.label}, t.user_tokens};
          json j = one;
          j["target"] = j["targets"][0];
          j["label"] = t.label;
          j.erase("targets");
          j.erase("labels");
          out << j.dump() << '\n';
        }
      } else {
        rlb::write_requests(out, requests);
      }
      std::cerr << "wrote " << requests.size() << " requests to " << gen_out << '\n';
    } else if (*convert) {
      std::ifstream in(convert_in);
      if (!in) throw FormatError("cannot open " + convert_in);
      const auto requests = rlb::convert_triplets(in, by_session ? rlb::GroupKey::kUserSession : rlb::GroupKey::kUser);
      rlb::save_requests(convert_out, requests);
      std::cerr << "grouped into " << requests.size() << " requests\n";
    } else if (*train) {
      auto cfg = s.train;
      if (!curriculum.empty()) {
        cfg.curriculum.clear();
        std::stringstream ss(curriculum);
        std::string stage;
        while (std::getline(ss, stage, ',')) {
          const auto colon = stage.find(':');
          if (colon == std::string::npos) throw ConfigError("curriculum stage must be steps:max_length");
          cfg.curriculum.push_back({std::stoul(stage.substr(0, colon)), std::stoul(stage.substr(colon + 1))});
        }
      }
      auto data = load_or_generate(train_data, s);
      auto split = harness::split_by_user(std::move(data), s.eval_fraction);
      std::ofstream log_file;
      if (!train_log.empty()) log_file.open(train_log);
      const auto result = harness::train(s.model, cfg, split.train, train_log.empty() ? nullptr : &log_file);
      model::save_checkpoint(train_out, s.model, result.params);
      json summary = {{"checkpoint", train_out}, {"steps", result.log.size()}};
      if (!result.log.empty()) summary["final_loss"] = result.log.back().loss;
      if (!split.eval.empty()) {
        const auto m = harness::evaluate(result.params, s.model, split.eval,
                                         static_cast<std::size_t>(cfg.lengths.infer_length));
        summary["eval"] = {{"auc", m.auc}, {"nll", m.nll}, {"n", m.n}};
      }
      std::cout << summary.dump() << '\n';
    } else if (*eval) {
      const auto ck = model::load_checkpoint(eval_ckpt);
      const auto data = load_or_generate(eval_data, s);
      const auto m = harness::evaluate(ck.params, ck.config, data, infer_len);
      std::cout << json{{"auc", m.auc}, {"nll", m.nll}, {"n", m.n}, {"infer_len", infer_len}}.dump() << '\n';
    } else if (*flops) {
      const auto conv = convention == "counted"    ? costmodel::Convention::counted()
                        : convention == "textbook" ? costmodel::Convention::textbook()
                        : convention == "calibrated"
                            ? costmodel::Convention::calibrated()
                            : throw ConfigError("unknown convention '" + convention + "'");
      std::cout << "kind,L,d,h,r,M,total_gflops,len_dep_gflops\n";
      for (const auto& k : kinds) {
        for (std::size_t L : parse_list(lengths)) {
          auto spec = dims;
          spec.kind = costmodel::parse_kind(k);
          spec.L = L;
          const auto r = costmodel::flops(spec, conv);
          std::cout << k << ',' << L << ',' << spec.d << ',' << spec.h << ',' << spec.r << ',' << spec.M << ','
                    << r.total_flops / 1e9 << ',' << r.length_dependent_flops / 1e9 << '\n';
        }
      }
    } else if (*sample) {
      extrapolation::Rng rng(s.seed);
      for (std::size_t i = 0; i < n_samples; ++i) std::cout << extrapolation::sample_length(s.train.lengths, rng) << '\n';
    } else if (*verify) {
      verify::VerifyOptions opts;
      opts.seed = common.seed.value_or(opts.seed);
      if (!mutate.empty()) {
        verify::Mutation m;
        if (mutate == "wq") m.matrix = verify::AttentionMatrix::kQuery;
        else if (mutate == "wk") m.matrix = verify::AttentionMatrix::kKey;
        else if (mutate == "wv") m.matrix = verify::AttentionMatrix::kValue;
        else if (mutate == "wo") m.matrix = verify::AttentionMatrix::kOutput;
        else throw ConfigError("--mutate must be wq, wk, wv or wo");
        opts.mutation = m;
      }
      const auto results = verify::run_all(opts);
      if (as_json) {
        std::cout << verify::results_json(results).dump(2) << '\n';
      } else {
        for (const auto& r : results) {
          std::printf("%-26s %s  max_error=%.3e  tol=%.1e  cases=%zu\n", r.name.c_str(), r.pass ? "PASS" : "FAIL",
                      r.max_error, r.tolerance, r.cases_run);
        }
      }
      return verify::all_passed(results) ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
