#include "stca/verify/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace stca::verify {

Matrix<double> naive_matmul(const Matrix<double>& a, const Matrix<double>& b) {
  if (a.cols() != b.rows()) throw DimensionError("naive_matmul: " + a.shape() + " * " + b.shape());
  Matrix<double> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  }
  return c;
}

Matrix<double> padded_masked_attention(const Matrix<double>& queries, std::span<const Matrix<double>> sequences,
                                       const model::AttentionParams<double>& p) {
  const std::size_t B = sequences.size(), d = p.model_dim(), dh = p.head_dim();
  if (queries.rows() != B) throw DimensionError("padded_masked_attention: one query per sequence");
  std::size_t lmax = 0;
  for (const auto& s : sequences) lmax = std::max(lmax, s.rows());
  Matrix<double> out(B, d);
  for (std::size_t b = 0; b < B; ++b) {
    if (sequences[b].rows() == 0) throw EmptyHistoryError("padded_masked_attention: empty sequence");
    Matrix<double> padded(lmax, d);
    std::vector<bool> mask(lmax, false);
    for (std::size_t j = 0; j < sequences[b].rows(); ++j) {
      mask[j] = true;
      for (std::size_t c = 0; c < d; ++c) padded(j, c) = sequences[b](j, c);
    }
    Matrix<double> q(1, d);
    for (std::size_t c = 0; c < d; ++c) q(0, c) = queries(b, c);
    Matrix<double> concat(1, d);
    for (std::size_t h = 0; h < p.heads(); ++h) {
      const auto qh = naive_matmul(q, p.wq[h].value);
      const auto k = naive_matmul(padded, p.wk[h].value);
      const auto v = naive_matmul(padded, p.wv[h].value);
      std::vector<double> logits(lmax);
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < lmax; ++j) {
        double s = 0;
        for (std::size_t c = 0; c < dh; ++c) s += qh(0, c) * k(j, c);
        logits[j] = mask[j] ? s / std::sqrt(static_cast<double>(dh)) : -std::numeric_limits<double>::infinity();
        mx = std::max(mx, logits[j]);
      }
      double z = 0;
      for (auto& l : logits) {
        l = std::exp(l - mx);
        z += l;
      }
      for (std::size_t c = 0; c < dh; ++c) {
        double s = 0;
        for (std::size_t j = 0; j < lmax; ++j) s += logits[j] / z * v(j, c);
        concat(0, h * dh + c) = s;
      }
    }
    const auto o = naive_matmul(concat, p.wo.value);
    for (std::size_t c = 0; c < d; ++c) out(b, c) = o(0, c);
  }
  return out;
}

double relative_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("relative_error: size mismatch");
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

double max_relative_error(const Matrix<double>& a, const Matrix<double>& b) {
  numerics::require_same_shape(a, b, "max_relative_error");
  double diff = 0, scale = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return diff / std::max(scale, 1e-300);
}

Matrix<double> numeric_gradient(Matrix<double>& param, const std::function<double()>& loss, double step) {
  Matrix<double> g(param.rows(), param.cols());
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double keep = param[i];
    param[i] = keep + step;
    const double up = loss();
    param[i] = keep - step;
    const double down = loss();
    param[i] = keep;
    g[i] = (up - down) / (2 * step);
  }
  return g;
}

model::StcaConfig gradient_check_config() {
  model::StcaConfig c;
  c.d = 8;
  c.heads = 2;
  c.ffn_ratio = 2;
  c.layers = 2;
  c.video_vocab = 16;
  c.action_vocab = 4;
  c.max_position = 16;
  c.time_buckets = 32;
  c.user_tokens = 1;
  c.candidate_tokens = 1;
  return c;
}

std::vector<rlb::Request> random_requests(const model::StcaConfig& config, std::size_t count, std::size_t m,
                                          std::size_t min_len, std::size_t max_len, std::uint64_t seed,
                                          bool with_aux) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<Id> video(0, static_cast<Id>(config.video_vocab) - 1);
  std::uniform_int_distribution<Id> action(0, static_cast<Id>(config.action_vocab) - 1);
  std::uniform_int_distribution<Seconds> gap(1, 5000);
  std::uniform_real_distribution<float> aux(-1.0F, 1.0F);
  std::bernoulli_distribution label(0.5);
  std::vector<rlb::Request> out;
  for (std::size_t i = 0; i < count; ++i) {
    rlb::Request r;
    r.user_id = static_cast<Id>(i);
    Seconds t = 1'000'000;
    const std::size_t n = len(rng);
    for (std::size_t j = 0; j < n; ++j) {
      t += gap(rng);
      r.history.push_back({video(rng), action(rng), static_cast<std::int64_t>(j), t});
    }
    const Seconds now = t + gap(rng);
    for (std::size_t k = 0; k < m; ++k) {
      TargetItem target{video(rng), now, {}};
      if (with_aux) {
        for (std::size_t q = 0; q < config.candidate_tokens * config.d; ++q) target.aux.push_back(aux(rng));
      }
      r.targets.push_back(std::move(target));
      r.labels.push_back(label(rng) ? 1 : 0);
    }
    if (with_aux) {
      for (std::size_t q = 0; q < config.user_tokens * config.d; ++q) r.user_tokens.push_back(aux(rng));
    }
    out.push_back(std::move(r));
  }
  return out;
}

model::StcaParams<double> random_params(const model::StcaConfig& config, std::uint64_t seed) {
  auto p = model::StcaParams<double>::initialize(config, seed);
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> wide(-0.5, 0.5);
  for (auto* param : p.all()) {
    if (model::is_embedding(param->name) || param->name.find("norm") != std::string::npos ||
        param->name == "head.b") {
      for (auto& v : param->value.values()) v += wide(rng);
    }
  }
  return p;
}

std::vector<GroupError> model_gradient_check(const GradientCheckSetup& s) {
  auto params = random_params(s.config, s.seed);
  const auto requests = random_requests(s.config, s.requests, s.targets_per_request, s.history_length,
                                        s.history_length, s.seed + 11);
  std::vector<model::SegmentInput> segments;
  for (const auto& r : requests) segments.push_back(rlb::to_segment(r));

  auto loss = [&]() {
    const auto fwd = model::network_forward<double>(segments, params, s.config, numerics::Exec::kSerial);
    return rlb::rlb_loss_from_logits<double>(requests, fwd.logits).loss;
  };

  model::NetworkCache<double> cache;
  const auto fwd = model::network_forward<double>(segments, params, s.config, numerics::Exec::kSerial, &cache);
  const auto lg = rlb::rlb_loss_from_logits<double>(requests, fwd.logits);
  params.zero_grad();
  model::network_backward<double>(cache, lg.grad_logits, params, s.config, numerics::Exec::kSerial);

  std::vector<GroupError> out;
  for (auto* p : params.all()) {
    const Matrix<double> analytic = p->grad;
    const auto numeric = numeric_gradient(p->value, loss);
    out.push_back({p->name, relative_error(analytic.values(), numeric.values())});
  }
  return out;
}

}  // namespace stca::verify
