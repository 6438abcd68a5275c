#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "stca/extrapolation/length_sampler.hpp"
#include "stca/harness/metrics.hpp"
#include "stca/harness/optimizer.hpp"
#include "stca/model/network.hpp"
#include "stca/rlb/rlb.hpp"

namespace stca::harness {

enum class LengthMode { kFixed, kStochastic };
enum class Batching { kRlb, kTriplet };

// Caps training lengths at max_length for the given number of steps.
struct CurriculumStage {
  std::size_t steps = 0;
  std::size_t max_length = 0;
};

struct TrainConfig {
  std::size_t batch_size = 32;  // requests per step
  std::size_t steps = 300;
  LengthMode length_mode = LengthMode::kStochastic;
  std::size_t fixed_length = 64;
  extrapolation::LengthSamplerConfig lengths = extrapolation::LengthSamplerConfig::desk();
  bool use_budget = true;  // allocate stochastic lengths against B * L_avg
  Batching batching = Batching::kRlb;
  rlb::LossMode loss_mode = rlb::LossMode::kPerUser;
  AdamConfig adam;
  std::vector<CurriculumStage> curriculum;
  std::uint64_t seed = 1;
  numerics::Exec exec = numerics::Exec::kParallel;
};

struct StepMetrics {
  std::size_t step = 0;
  double loss = 0;
  std::optional<double> auc;  // undefined when the batch has one class
  double nll = 0;
  std::uint64_t tokens_processed = 0;     // cumulative history tokens encoded
  std::uint64_t encoder_invocations = 0;  // cumulative
};

void write_step(std::ostream& out, const StepMetrics& m);

struct TrainResult {
  model::StcaParams<float> params;
  std::vector<StepMetrics> log;
};

// Per step: draw requests, sample and allocate lengths, select events,
// ragged forward, loss, backward, Adam. Each StepMetrics is also written to
// `log` when given. Starts from `init` if given, else a fresh model seeded
// by config.seed.
TrainResult train(const model::StcaConfig& model_config, const TrainConfig& config,
                  std::span<const rlb::Request> data, std::ostream* log = nullptr,
                  const model::StcaParams<float>* init = nullptr);

// Per-target probabilities with histories suffix-truncated to infer_length.
std::vector<double> predict(const model::StcaParams<float>& params, const model::StcaConfig& config,
                            std::span<const rlb::Request> data, std::size_t infer_length,
                            numerics::Exec exec = numerics::Exec::kParallel);

Metrics evaluate(const model::StcaParams<float>& params, const model::StcaConfig& config,
                 std::span<const rlb::Request> data, std::size_t infer_length,
                 numerics::Exec exec = numerics::Exec::kParallel);

}  // namespace stca::harness
