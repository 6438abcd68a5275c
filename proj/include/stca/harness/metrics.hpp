#pragma once

#include <cstddef>
#include <span>

namespace stca::harness {

struct Metrics {
  double auc = 0.5;
  double nll = 0;
  std::size_t n = 0;
};

// Mann-Whitney U over all positive/negative pairs, ties counting one half.
// Throws UndefinedMetricError when only one class is present.
double auc(std::span<const double> scores, std::span<const int> labels);

// Mean clamped binary cross-entropy.
double nll(std::span<const double> probabilities, std::span<const int> labels);

Metrics compute_metrics(std::span<const double> probabilities, std::span<const int> labels);

}  // namespace stca::harness
