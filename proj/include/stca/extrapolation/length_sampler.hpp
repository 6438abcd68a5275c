#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "stca/types.hpp"

namespace stca::extrapolation {

using Rng = std::mt19937_64;

enum class Selection { kSuffix, kRandom };

struct LengthSamplerConfig {
  double min_length = 8;
  double avg_length = 64;
  double max_length = 256;
  double alpha = 0.02;
  double infer_length = 256;
  Selection selection = Selection::kSuffix;

  // Throws ConfigError unless min < avg < max <= infer and alpha > 0.
  void validate() const;

  static LengthSamplerConfig production();
  static LengthSamplerConfig desk();
};

// beta = alpha (L_max - L_avg) / (L_avg - L_min), which makes
// E[L_min + s (L_max - L_min)] = L_avg for s ~ Beta(alpha, beta).
double beta_param(const LengthSamplerConfig& config);

// Beta(a, b) via two Gamma draws taken in log space, stable for shapes far
// below 1.
double sample_beta(double a, double b, Rng& rng);

// Nearest multiple of 8, ties rounding up.
std::size_t round8(double x);

// Maps a normalized ratio s in [0, 1] to a training length.
std::size_t length_from_ratio(const LengthSamplerConfig& config, double s);

std::size_t sample_length(const LengthSamplerConfig& config, Rng& rng);

// The last min(L, |history|) events, in order.
History select_suffix(std::span<const HistoryEvent> history, std::size_t length);

// A uniform subset of min(L, |history|) events, in original order.
History select_random(std::span<const HistoryEvent> history, std::size_t length, Rng& rng);

History select(std::span<const HistoryEvent> history, std::size_t length, Selection selection, Rng& rng);

struct SparsityReport {
  double ss = 0;                   // L_avg / L_max
  double expected_length = 0;      // L_avg
  double extrapolation_ratio = 0;  // L_infer / L_avg
};

// Also defined for dense training, where avg == max.
SparsityReport sequence_sparsity(const LengthSamplerConfig& config);

}  // namespace stca::extrapolation
