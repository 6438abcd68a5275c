#include "stca/harness/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "stca/errors.hpp"
#include "stca/model/network.hpp"

namespace stca::harness {

namespace {

void check_sizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": " + std::to_string(a) + " scores vs " + std::to_string(b) + " labels");
  }
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
  check_sizes(scores.size(), labels.size(), "auc");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positives = 0, rank_sum = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        rank_sum += avg_rank;
        positives += 1;
      }
    }
    i = j;
  }
  const double negatives = static_cast<double>(n) - positives;
  if (positives == 0 || negatives == 0) throw UndefinedMetricError("auc needs both positive and negative labels");
  return (rank_sum - positives * (positives + 1) / 2) / (positives * negatives);
}

double nll(std::span<const double> probabilities, std::span<const int> labels) {
  check_sizes(probabilities.size(), labels.size(), "nll");
  if (probabilities.empty()) throw UndefinedMetricError("nll of an empty set");
  double s = 0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) s += model::bce_loss(probabilities[i], labels[i]);
  return s / static_cast<double>(probabilities.size());
}

Metrics compute_metrics(std::span<const double> probabilities, std::span<const int> labels) {
  return {auc(probabilities, labels), nll(probabilities, labels), probabilities.size()};
}

}  // namespace stca::harness
