#pragma once

#include <span>
#include <vector>

#include "stca/model/network.hpp"
#include "stca/types.hpp"

namespace stca::rlb {

// All targets that share one user history snapshot.
struct Request {
  Id user_id = 0;
  Id session_id = 0;
  History history;
  std::vector<TargetItem> targets;
  std::vector<int> labels;
  std::vector<float> user_tokens;  // K*d values or empty

  std::size_t m() const { return targets.size(); }
  // Throws EmptyHistoryError or DimensionError on malformed requests.
  void validate() const;

  friend bool operator==(const Request&, const Request&) = default;
};

struct Triplet {
  Id user_id = 0;
  Id session_id = 0;
  History history;
  TargetItem target;
  int label = 0;
  std::vector<float> user_tokens;
};

enum class GroupKey { kUser, kUserSession };

// One Request per key, in order of first appearance; targets keep their
// input order. Throws GroupingConflictError when one key carries two
// different histories.
std::vector<Request> group_by_request(std::span<const Triplet> triplets, GroupKey key = GroupKey::kUser);

std::vector<Triplet> flatten(std::span<const Request> requests);

// The whole request becomes one segment. Time deltas are measured from the
// first target's request time.
model::SegmentInput to_segment(const Request& request);

// Triplet mode: every target gets its own copy of the history.
std::vector<model::SegmentInput> to_triplet_segments(const Request& request);

// Per-target probabilities for one request, encoding the history once.
template <typename T>
std::vector<T> rlb_forward(const Request& request, const model::StcaParams<T>& params,
                           const model::StcaConfig& config);

enum class LossMode {
  kPerUser,  // mean over users of the per-user mean
  kFlat,     // mean over all targets
};

// Loss over requests given one probability per target (request-major).
double rlb_loss(std::span<const Request> requests, std::span<const double> y_hats,
                LossMode mode = LossMode::kPerUser);

template <typename T>
struct LossAndGrad {
  T loss{};
  std::vector<T> grad_logits;
};

// Same objective from logits, with dL/dlogit per target.
template <typename T>
LossAndGrad<T> rlb_loss_from_logits(std::span<const Request> requests, std::span<const T> logits,
                                    LossMode mode = LossMode::kPerUser);

struct PayloadModel {
  double user_bytes = 0;    // U
  double target_bytes = 0;  // T
  std::size_t m = 1;
};

enum class PayloadMode { kTriplet, kRlb };

// Triplet: m(U + T). RLB: U + mT.
double payload_bytes(const PayloadModel& model, PayloadMode mode);

// Fraction of user-side bytes avoided by sending the history once: 1 - 1/m.
double user_payload_saving(std::size_t m);

}  // namespace stca::rlb
