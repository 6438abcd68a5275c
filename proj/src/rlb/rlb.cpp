#include "stca/rlb/rlb.hpp"

#include <map>

namespace stca::rlb {

void Request::validate() const {
  if (history.empty()) throw EmptyHistoryError("request for user " + std::to_string(user_id) + " has no history");
  if (targets.empty()) throw DimensionError("request for user " + std::to_string(user_id) + " has no targets");
  if (labels.size() != targets.size()) {
    throw DimensionError("request for user " + std::to_string(user_id) + " has " +
                         std::to_string(targets.size()) + " targets but " + std::to_string(labels.size()) +
                         " labels");
  }
}

std::vector<Request> group_by_request(std::span<const Triplet> triplets, GroupKey key) {
  std::vector<Request> out;
  std::map<std::pair<Id, Id>, std::size_t> slot;
  for (const auto& t : triplets) {
    const std::pair<Id, Id> k{t.user_id, key == GroupKey::kUserSession ? t.session_id : 0};
    auto [it, inserted] = slot.try_emplace(k, out.size());
    if (inserted) {
      Request r;
      r.user_id = t.user_id;
      r.session_id = key == GroupKey::kUserSession ? t.session_id : 0;
      r.history = t.history;
      r.user_tokens = t.user_tokens;
      out.push_back(std::move(r));
    }
    auto& r = out[it->second];
    if (r.history != t.history || r.user_tokens != t.user_tokens) {
      throw GroupingConflictError("user " + std::to_string(t.user_id) +
                                  (key == GroupKey::kUserSession ? " session " + std::to_string(t.session_id) : "") +
                                  " appears with two different histories");
    }
    r.targets.push_back(t.target);
    r.labels.push_back(t.label);
  }
  return out;
}

std::vector<Triplet> flatten(std::span<const Request> requests) {
  std::vector<Triplet> out;
  for (const auto& r : requests) {
    for (std::size_t k = 0; k < r.m(); ++k) {
      out.push_back({r.user_id, r.session_id, r.history, r.targets[k], r.labels[k], r.user_tokens});
    }
  }
  return out;
}

model::SegmentInput to_segment(const Request& request) {
  request.validate();
  return {request.history, request.targets.front().request_time, request.targets, request.user_tokens};
}

std::vector<model::SegmentInput> to_triplet_segments(const Request& request) {
  request.validate();
  std::vector<model::SegmentInput> out;
  for (std::size_t k = 0; k < request.m(); ++k) {
    out.push_back({request.history, request.targets[k].request_time,
                   std::span<const TargetItem>(&request.targets[k], 1), request.user_tokens});
  }
  return out;
}

template <typename T>
std::vector<T> rlb_forward(const Request& request, const model::StcaParams<T>& params,
                           const model::StcaConfig& config) {
  const auto seg = to_segment(request);
  const auto r = model::network_forward<T>(std::span<const model::SegmentInput>(&seg, 1), params, config,
                                           numerics::Exec::kSerial);
  std::vector<T> out;
  for (T l : r.logits) out.push_back(numerics::sigmoid(l));
  return out;
}

namespace {

// Weight of each target in the loss, request-major.
std::vector<double> target_weights(std::span<const Request> requests, LossMode mode, std::size_t n) {
  std::size_t total = 0;
  for (const auto& r : requests) {
    if (r.m() == 0 || r.labels.size() != r.m()) {
      throw DimensionError("request for user " + std::to_string(r.user_id) + " has mismatched targets/labels");
    }
    total += r.m();
  }
  if (total != n) {
    throw DimensionError("loss: " + std::to_string(n) + " predictions for " + std::to_string(total) + " targets");
  }
  std::vector<double> w;
  w.reserve(total);
  for (const auto& r : requests) {
    const double wk = mode == LossMode::kPerUser
                          ? 1.0 / (static_cast<double>(requests.size()) * static_cast<double>(r.m()))
                          : 1.0 / static_cast<double>(total);
    w.insert(w.end(), r.m(), wk);
  }
  return w;
}

}  // namespace

double rlb_loss(std::span<const Request> requests, std::span<const double> y_hats, LossMode mode) {
  if (requests.empty()) return 0.0;
  const auto w = target_weights(requests, mode, y_hats.size());
  double loss = 0.0;
  std::size_t i = 0;
  if (mode == LossMode::kFlat) {
    for (const auto& r : requests) {
      for (int y : r.labels) loss += model::bce_loss(y_hats[i++], y);
    }
    return loss * w.front();
  }
  for (const auto& r : requests) {
    double inner = 0.0;
    for (int y : r.labels) inner += model::bce_loss(y_hats[i++], y);
    loss += inner / static_cast<double>(r.m());
  }
  return loss / static_cast<double>(requests.size());
}

template <typename T>
LossAndGrad<T> rlb_loss_from_logits(std::span<const Request> requests, std::span<const T> logits, LossMode mode) {
  LossAndGrad<T> out;
  if (requests.empty()) return out;
  const auto w = target_weights(requests, mode, logits.size());
  out.grad_logits.resize(logits.size());
  std::size_t i = 0;
  T total{};
  for (const auto& r : requests) {
    T inner{};
    for (int y : r.labels) {
      const T yt = static_cast<T>(y);
      inner += model::bce_with_logit(logits[i], yt);
      out.grad_logits[i] = static_cast<T>(w[i]) * model::bce_logit_grad(logits[i], yt);
      ++i;
    }
    total += mode == LossMode::kPerUser ? inner / static_cast<T>(r.m()) : inner;
  }
  out.loss = mode == LossMode::kPerUser ? total / static_cast<T>(requests.size())
                                        : total / static_cast<T>(logits.size());
  return out;
}

double payload_bytes(const PayloadModel& model, PayloadMode mode) {
  if (model.m == 0 || model.user_bytes < 0 || model.target_bytes < 0) {
    throw ConfigError("payload model needs U, T >= 0 and m >= 1");
  }
  const double m = static_cast<double>(model.m);
  return mode == PayloadMode::kTriplet ? m * (model.user_bytes + model.target_bytes)
                                       : model.user_bytes + m * model.target_bytes;
}

double user_payload_saving(std::size_t m) {
  if (m == 0) throw ConfigError("m must be at least 1");
  return 1.0 - 1.0 / static_cast<double>(m);
}

template std::vector<float> rlb_forward<float>(const Request&, const model::StcaParams<float>&,
                                               const model::StcaConfig&);
template std::vector<double> rlb_forward<double>(const Request&, const model::StcaParams<double>&,
                                                 const model::StcaConfig&);
template LossAndGrad<float> rlb_loss_from_logits<float>(std::span<const Request>, std::span<const float>, LossMode);
template LossAndGrad<double> rlb_loss_from_logits<double>(std::span<const Request>, std::span<const double>,
                                                          LossMode);

}  // namespace stca::rlb
