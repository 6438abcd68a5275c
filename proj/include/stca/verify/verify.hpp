#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stca/model/params.hpp"

namespace stca::verify {

struct OracleResult {
  std::string name;
  bool pass = false;
  double max_error = 0;
  double tolerance = 0;
  std::size_t cases_run = 0;

  friend bool operator==(const OracleResult&, const OracleResult&) = default;
};

OracleResult make_result(std::string name, double max_error, double tolerance, std::size_t cases);

enum class AttentionMatrix { kQuery, kKey, kValue, kOutput };

// Adds `delta` to one entry of one attention weight on the side under test.
struct Mutation {
  AttentionMatrix matrix = AttentionMatrix::kKey;
  std::size_t head = 0;
  double delta = 0.5;
};

void apply_mutation(model::AttentionParams<double>& params, const Mutation& mutation);

struct VerifyOptions {
  std::uint64_t seed = 2024;
  std::optional<Mutation> mutation;
};

// Individual oracles. Each returns the worst error over its cases.
OracleResult check_matmul(std::uint64_t seed);
OracleResult check_numerics_gradients(std::uint64_t seed);
OracleResult check_attention_equivalence(std::size_t cases, std::uint64_t seed,
                                         const std::optional<Mutation>& mutation = std::nullopt);
OracleResult check_ragged_vs_padded(std::size_t batches, std::uint64_t seed,
                                    const std::optional<Mutation>& mutation = std::nullopt);
OracleResult check_compaction_round_trip(std::size_t batches, std::uint64_t seed);
OracleResult check_allocation_budget(std::size_t trials, std::uint64_t seed);
OracleResult check_rlb_forward(std::size_t requests, std::size_t m, std::uint64_t seed);
OracleResult check_rlb_flat_mean(std::size_t requests, std::size_t m, std::uint64_t seed);
OracleResult check_rlb_gradient(std::size_t requests, std::size_t m, std::uint64_t seed);
OracleResult check_model_gradient(std::uint64_t seed);
OracleResult check_beta_arithmetic();
OracleResult check_sampler_mean(std::size_t samples, std::uint64_t seed);
OracleResult check_sampler_u_shape(std::size_t samples, std::uint64_t seed);
OracleResult check_sparsity_arithmetic();
OracleResult check_costmodel_calibration();
OracleResult check_reorder_reduction();
OracleResult check_counter_vs_costmodel(std::uint64_t seed);

// Every oracle in declaration order.
std::vector<OracleResult> run_all(const VerifyOptions& options = {});

bool all_passed(const std::vector<OracleResult>& results);
nlohmann::json results_json(const std::vector<OracleResult>& results);

}  // namespace stca::verify
