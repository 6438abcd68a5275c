#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "stca/rlb/rlb.hpp"

namespace stca::harness {

// Items belong to latent clusters (id mod n_clusters). A target is positive
// when an item of its cluster sits within signal_lag_range positions of the
// history end (lag 1 is the last event).
struct SyntheticTaskConfig {
  std::size_t vocab = 1000;
  std::size_t n_clusters = 20;
  std::size_t action_vocab = 4;
  std::pair<std::size_t, std::size_t> history_len_range{64, 256};
  std::size_t m = 8;
  std::pair<std::size_t, std::size_t> signal_lag_range{1, 16};
  double noise = 0.0;
  double plant_prob = 0.5;
  // Lags drawn (with replacement) for each planted target.
  std::size_t plant_copies = 1;
  // Same-cluster items planted before the lag window, per target.
  std::size_t decoys = 0;
  std::size_t num_requests = 1000;
  std::uint64_t seed = 1;

  void validate() const;
};

std::size_t cluster_of(Id video_id, std::size_t n_clusters);

// Noise-free label of target k, recomputed from the stored history.
int rescan_label(const rlb::Request& request, std::size_t k, const SyntheticTaskConfig& config);

std::vector<rlb::Request> generate(const SyntheticTaskConfig& config);

// Deterministic 90/10 style split on a hash of user_id.
struct Split {
  std::vector<rlb::Request> train;
  std::vector<rlb::Request> eval;
};
Split split_by_user(std::vector<rlb::Request> requests, double eval_fraction = 0.1);

}  // namespace stca::harness
