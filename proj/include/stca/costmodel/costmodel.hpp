#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace stca::costmodel {

enum class Kind { kStcaStandard, kStcaReordered, kSelfAttention };

std::string_view kind_name(Kind kind);
Kind parse_kind(std::string_view name);

struct ArchSpec {
  std::size_t L = 500;
  std::size_t d = 256;
  std::size_t h = 8;
  std::size_t r = 4;
  std::size_t M = 4;
  Kind kind = Kind::kStcaReordered;

  // Throws ConfigError unless every field is positive and h divides d.
  void validate() const;
};

// How operations turn into FLOPs.
struct Convention {
  double flops_per_mac = 1;
  double ffn_matrices = 2;       // weight matrices charged per SwiGLU FFN
  double elementwise_flops = 5;  // per element of LayerNorm, activation, softmax

  // Best fit to the reference operating points.
  static Convention calibrated();
  // Exactly the multiply-adds issued by this implementation's kernels.
  static Convention counted();
  // Two FLOPs per multiply-add, all three FFN matrices, elementwise charged.
  static Convention textbook();
};

struct Component {
  std::string name;
  double flops = 0;
  bool length_dependent = false;
};

struct CostReport {
  double total_flops = 0;
  double length_dependent_flops = 0;
  double length_independent_flops = 0;
  double peak_scratch_entries = 0;  // largest attention intermediate, entries
  std::vector<Component> breakdown;

  // Sum of every component with this name (0 when absent).
  double component(std::string_view name) const;
};

// Forward pass of the sequence path only (embeddings and the prediction head
// are excluded). Components are summed over layers.
CostReport flops(const ArchSpec& spec, const Convention& convention = Convention::calibrated());

double scaling_ratio(Kind kind, std::size_t L1, std::size_t L2, const ArchSpec& dims,
                     const Convention& convention = Convention::calibrated());

// 2d/h: per-head cost of X W_K plus X W_V over the cost of alpha X.
double reorder_reduction(std::size_t d, std::size_t h);

// The same ratio read off the breakdown of a standard and a reordered report.
double measured_reorder_reduction(const CostReport& standard, const CostReport& reordered);

enum class BatchMode { kTriplet, kRlb };

struct MemoryReport {
  double history_entries = 0;            // activations of the shared history path
  double target_entries = 0;             // activations of all target paths
  double per_target_history_entries = 0; // history_entries / m
  double total() const { return history_entries + target_entries; }
};

// History activations retained for backward: (3r + 4) L d per layer.
double history_activation_entries(const ArchSpec& spec);

// Triplet mode stores the history activations once per target, RLB once per
// request.
MemoryReport memory_model(const ArchSpec& spec, std::size_t m, BatchMode mode);

// per_target_history_entries(triplet) / per_target_history_entries(rlb).
double footprint_ratio(const ArchSpec& spec, std::size_t m);

}  // namespace stca::costmodel
