#include "stca/harness/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "stca/ragged/ragged.hpp"

namespace stca::harness {

using extrapolation::Rng;

void write_step(std::ostream& out, const StepMetrics& m) {
  nlohmann::json j = {{"step", m.step},
                      {"loss", m.loss},
                      {"auc", m.auc ? nlohmann::json(*m.auc) : nlohmann::json(nullptr)},
                      {"nll", m.nll},
                      {"tokens_processed", m.tokens_processed},
                      {"encoder_invocations", m.encoder_invocations}};
  out << j.dump() << '\n';
}

namespace {

std::size_t curriculum_cap(const std::vector<CurriculumStage>& stages, std::size_t step) {
  std::size_t begin = 0;
  for (const auto& s : stages) {
    if (step < begin + s.steps) return s.max_length;
    begin += s.steps;
  }
  return 0;
}

std::vector<std::size_t> requested_lengths(const TrainConfig& c, std::span<const rlb::Request* const> batch,
                                           std::size_t step, Rng& rng) {
  const std::size_t cap = curriculum_cap(c.curriculum, step);
  std::vector<std::size_t> out;
  for (const auto* r : batch) {
    std::size_t len = c.length_mode == LengthMode::kStochastic ? extrapolation::sample_length(c.lengths, rng)
                                                               : c.fixed_length;
    if (cap > 0) len = std::min(len, cap);
    out.push_back(std::min(len, r->history.size()));
  }
  if (c.length_mode == LengthMode::kStochastic && c.use_budget) {
    const std::size_t floor_len =
        std::min(std::max<std::size_t>(8, extrapolation::round8(c.lengths.min_length)),
                 *std::min_element(out.begin(), out.end()));
    const ragged::TokenBudget budget{out.size(), static_cast<std::size_t>(c.lengths.avg_length)};
    out = ragged::allocate_lengths(out, budget, floor_len);
  }
  return out;
}

}  // namespace

TrainResult train(const model::StcaConfig& model_config, const TrainConfig& c, std::span<const rlb::Request> data,
                  std::ostream* log, const model::StcaParams<float>* init) {
  model_config.validate();
  if (c.length_mode == LengthMode::kStochastic) c.lengths.validate();
  if (data.empty()) throw ConfigError("training data is empty");
  if (c.batch_size == 0) throw ConfigError("batch_size must be positive");

  TrainResult result;
  result.params = init ? *init : model::StcaParams<float>::initialize(model_config, c.seed);
  result.params.check(model_config);
  Adam<float> adam(result.params, c.adam);
  Rng rng(c.seed ^ 0x5eed5eedULL);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();
  std::uint64_t tokens = 0;
  const auto encodings_before = numerics::instrumentation::history_encodings();

  for (std::size_t step = 0; step < c.steps; ++step) {
    std::vector<rlb::Request> batch;
    std::vector<const rlb::Request*> batch_ptrs;
    for (std::size_t b = 0; b < std::min(c.batch_size, data.size()); ++b) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      batch_ptrs.push_back(&data[order[cursor++]]);
    }
    const auto lengths = requested_lengths(c, batch_ptrs, step, rng);
    for (std::size_t b = 0; b < batch_ptrs.size(); ++b) {
      rlb::Request r = *batch_ptrs[b];
      r.history = extrapolation::select(batch_ptrs[b]->history, lengths[b], c.lengths.selection, rng);
      batch.push_back(std::move(r));
    }

    std::vector<model::SegmentInput> segments;
    for (const auto& r : batch) {
      if (c.batching == Batching::kRlb) {
        segments.push_back(rlb::to_segment(r));
        tokens += r.history.size();
      } else {
        const auto per_target = rlb::to_triplet_segments(r);
        segments.insert(segments.end(), per_target.begin(), per_target.end());
        tokens += r.history.size() * r.m();
      }
    }

    model::NetworkCache<float> cache;
    const auto fwd = model::network_forward<float>(segments, result.params, model_config, c.exec, &cache);
    const auto loss = rlb::rlb_loss_from_logits<float>(batch, fwd.logits, c.loss_mode);
    result.params.zero_grad();
    model::network_backward<float>(cache, loss.grad_logits, result.params, model_config, c.exec);
    adam.step(result.params);

    StepMetrics m;
    m.step = step;
    m.loss = loss.loss;
    std::vector<double> probs;
    std::vector<int> labels;
    for (std::size_t k = 0; k < fwd.logits.size(); ++k) probs.push_back(numerics::sigmoid<double>(fwd.logits[k]));
    for (const auto& r : batch) labels.insert(labels.end(), r.labels.begin(), r.labels.end());
    m.nll = nll(probs, labels);
    try {
      m.auc = auc(probs, labels);
    } catch (const UndefinedMetricError&) {
    }
    m.tokens_processed = tokens;
    m.encoder_invocations = numerics::instrumentation::history_encodings() - encodings_before;
    if (log != nullptr) write_step(*log, m);
    result.log.push_back(m);
  }
  return result;
}

std::vector<double> predict(const model::StcaParams<float>& params, const model::StcaConfig& config,
                            std::span<const rlb::Request> data, std::size_t infer_length, numerics::Exec exec) {
  constexpr std::size_t kChunk = 64;
  std::vector<double> out;
  for (std::size_t begin = 0; begin < data.size(); begin += kChunk) {
    const std::size_t end = std::min(data.size(), begin + kChunk);
    std::vector<rlb::Request> chunk;
    for (std::size_t i = begin; i < end; ++i) {
      rlb::Request r = data[i];
      r.history = extrapolation::select_suffix(data[i].history, infer_length);
      chunk.push_back(std::move(r));
    }
    std::vector<model::SegmentInput> segments;
    for (const auto& r : chunk) segments.push_back(rlb::to_segment(r));
    const auto fwd = model::network_forward<float>(segments, params, config, exec);
    for (float l : fwd.logits) out.push_back(numerics::sigmoid<double>(l));
  }
  return out;
}

Metrics evaluate(const model::StcaParams<float>& params, const model::StcaConfig& config,
                 std::span<const rlb::Request> data, std::size_t infer_length, numerics::Exec exec) {
  const auto probs = predict(params, config, data, infer_length, exec);
  std::vector<int> labels;
  for (const auto& r : data) labels.insert(labels.end(), r.labels.begin(), r.labels.end());
  return compute_metrics(probs, labels);
}

}  // namespace stca::harness
