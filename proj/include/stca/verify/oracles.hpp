#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stca/model/network.hpp"
#include "stca/rlb/rlb.hpp"

namespace stca::verify {

using numerics::Matrix;

// Reference implementations that share no code path with the kernels they
// check.

// Triple-loop product.
Matrix<double> naive_matmul(const Matrix<double>& a, const Matrix<double>& b);

// Pads every sequence to the longest one, projects keys and values per head
// the textbook way, and masks padded positions out of the softmax.
Matrix<double> padded_masked_attention(const Matrix<double>& queries, std::span<const Matrix<double>> sequences,
                                       const model::AttentionParams<double>& params);

// ||a - b|| / max(||a||, ||b||, 1e-12) over flattened entries.
double relative_error(std::span<const double> a, std::span<const double> b);

// max |a - b| / max(max |b|, 1e-300).
double max_relative_error(const Matrix<double>& a, const Matrix<double>& b);

// Central differences of `loss` with respect to every entry of `param`.
Matrix<double> numeric_gradient(Matrix<double>& param, const std::function<double()>& loss, double step = 1e-5);

struct GroupError {
  std::string name;
  double error = 0;
};

// Full-model check: random params and requests, per-user loss, analytic
// backward against central differences for every parameter tensor.
struct GradientCheckSetup {
  model::StcaConfig config;
  std::size_t history_length = 8;
  std::size_t requests = 2;
  std::size_t targets_per_request = 2;
  std::uint64_t seed = 7;
};

model::StcaConfig gradient_check_config();
std::vector<GroupError> model_gradient_check(const GradientCheckSetup& setup);

// Random requests over the config's vocabularies, with shared request time.
std::vector<rlb::Request> random_requests(const model::StcaConfig& config, std::size_t count, std::size_t m,
                                          std::size_t min_len, std::size_t max_len, std::uint64_t seed,
                                          bool with_aux = true);

// Random f64 parameters with larger embeddings so attention is not uniform.
model::StcaParams<double> random_params(const model::StcaConfig& config, std::uint64_t seed);

}  // namespace stca::verify
