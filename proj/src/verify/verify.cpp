#include "stca/verify/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "stca/costmodel/costmodel.hpp"
#include "stca/extrapolation/length_sampler.hpp"
#include "stca/ragged/ragged.hpp"
#include "stca/rlb/rlb.hpp"
#include "stca/verify/oracles.hpp"

namespace stca::verify {

using numerics::Exec;
using Rng = std::mt19937_64;

namespace {

Matrix<double> random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix<double> m(rows, cols);
  for (auto& v : m.values()) v = u(rng);
  return m;
}

double dot(const Matrix<double>& a, const Matrix<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

numerics::Param<double>& mutation_target(model::AttentionParams<double>& p, const Mutation& m) {
  switch (m.matrix) {
    case AttentionMatrix::kQuery: return p.wq.at(m.head);
    case AttentionMatrix::kKey: return p.wk.at(m.head);
    case AttentionMatrix::kValue: return p.wv.at(m.head);
    case AttentionMatrix::kOutput: return p.wo;
  }
  return p.wo;
}

}  // namespace

OracleResult make_result(std::string name, double max_error, double tolerance, std::size_t cases) {
  const bool pass = std::isfinite(max_error) && max_error <= tolerance;
  return {std::move(name), pass, max_error, tolerance, cases};
}

void apply_mutation(model::AttentionParams<double>& params, const Mutation& mutation) {
  mutation_target(params, mutation).value[0] += mutation.delta;
}

OracleResult check_matmul(std::uint64_t seed) {
  Rng rng(seed);
  double err = 0;
  const std::size_t cases = 20;
  for (std::size_t c = 0; c < cases; ++c) {
    const auto a = random_matrix(5, 7, rng);
    const auto b = random_matrix(7, 3, rng);
    err = std::max(err, numerics::max_abs_diff(numerics::matmul(a, b), naive_matmul(a, b)));
    err = std::max(err, numerics::max_abs_diff(numerics::matmul(a, b, Exec::kSerial), naive_matmul(a, b)));
  }
  return make_result("matmul_triple_loop", err, 1e-12, cases);
}

OracleResult check_numerics_gradients(std::uint64_t seed) {
  Rng rng(seed);
  double err = 0;
  std::size_t cases = 0;
  for (std::size_t rep = 0; rep < 3; ++rep) {
    const std::size_t n = 3 + rep, d = 4, r = 2;
    // SwiGLU
    {
      auto x = random_matrix(n, d, rng);
      numerics::SwiGluParams<double> p{{"wu", random_matrix(d, r * d, rng)},
                                       {"wv", random_matrix(d, r * d, rng)},
                                       {"wo", random_matrix(r * d, d, rng)}};
      const auto g = random_matrix(n, d, rng);
      auto loss = [&] { return dot(numerics::swiglu_forward(x, p), g); };
      numerics::SwiGluCache<double> cache;
      numerics::swiglu_forward(x, p, &cache);
      const auto dx = numerics::swiglu_backward(g, cache, p);
      err = std::max(err, relative_error(dx.values(), numeric_gradient(x, loss).values()));
      for (auto* w : {&p.wu, &p.wv, &p.wo}) {
        err = std::max(err, relative_error(w->grad.values(), numeric_gradient(w->value, loss).values()));
      }
      ++cases;
    }
    // LayerNorm
    {
      auto x = random_matrix(n, d, rng);
      numerics::LayerNormParams<double> p{{"gamma", random_matrix(1, d, rng)}, {"beta", random_matrix(1, d, rng)}};
      const auto g = random_matrix(n, d, rng);
      auto loss = [&] { return dot(numerics::layer_norm(x, p, 1e-5), g); };
      numerics::LayerNormCache<double> cache;
      numerics::layer_norm(x, p, 1e-5, &cache);
      const auto dx = numerics::layer_norm_backward(g, cache, p);
      err = std::max(err, relative_error(dx.values(), numeric_gradient(x, loss).values()));
      err = std::max(err, relative_error(p.gamma.grad.values(), numeric_gradient(p.gamma.value, loss).values()));
      err = std::max(err, relative_error(p.beta.grad.values(), numeric_gradient(p.beta.value, loss).values()));
      ++cases;
    }
    // Softmax
    {
      auto x = random_matrix(1, n + 2, rng, 3.0);
      const auto g = random_matrix(1, n + 2, rng);
      auto loss = [&] {
        const auto s = numerics::softmax_row<double>(x.values());
        double v = 0;
        for (std::size_t i = 0; i < s.size(); ++i) v += s[i] * g[i];
        return v;
      };
      const auto probs = numerics::softmax_row<double>(x.values());
      const auto dx = numerics::softmax_backward<double>(probs, g.values());
      err = std::max(err, relative_error(dx, numeric_gradient(x, loss).values()));
      ++cases;
    }
    // Matmul
    {
      auto a = random_matrix(n, d, rng);
      auto b = random_matrix(d, 2, rng);
      const auto g = random_matrix(n, 2, rng);
      auto loss = [&] { return dot(numerics::matmul(a, b), g); };
      const auto grads = numerics::matmul_backward(a, b, g);
      err = std::max(err, relative_error(grads.a.values(), numeric_gradient(a, loss).values()));
      err = std::max(err, relative_error(grads.b.values(), numeric_gradient(b, loss).values()));
      ++cases;
    }
  }
  return make_result("numerics_gradients", err, 1e-4, cases);
}

OracleResult check_attention_equivalence(std::size_t cases, std::uint64_t seed, const std::optional<Mutation>& mutation) {
  Rng rng(seed);
  const std::size_t head_choices[] = {1, 2, 4, 8};
  std::uniform_int_distribution<std::size_t> pick_h(0, 3), pick_dh(1, 4), pick_l(1, 64);
  double err = 0;
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t h = head_choices[pick_h(rng)];
    const std::size_t d = h * std::min<std::size_t>(pick_dh(rng), 32 / h);
    const std::size_t L = pick_l(rng);
    const auto params = model::AttentionParams<double>::random(d, h, rng());
    auto tested = params;
    if (mutation) apply_mutation(tested, Mutation{mutation->matrix, std::min(mutation->head, h - 1), mutation->delta});
    const auto q = random_matrix(1, d, rng);
    const auto x = random_matrix(L, d, rng);
    const auto standard = model::cross_attention_layer<double>(q, x, params);
    const auto reordered = model::cross_attention_layer_reordered<double>(q, x, tested);
    err = std::max(err, max_relative_error(reordered, standard));
  }
  return make_result("attention_equivalence", err, 1e-10, cases);
}

OracleResult check_ragged_vs_padded(std::size_t batches, std::uint64_t seed, const std::optional<Mutation>& mutation) {
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick_b(1, 8), pick_l(1, 32);
  double err = 0;
  const std::size_t d = 16, h = 4;
  for (std::size_t c = 0; c < batches; ++c) {
    const std::size_t B = pick_b(rng);
    std::vector<Matrix<double>> seqs;
    for (std::size_t b = 0; b < B; ++b) seqs.push_back(random_matrix(pick_l(rng), d, rng));
    const auto params = model::AttentionParams<double>::random(d, h, rng());
    auto tested = params;
    if (mutation) apply_mutation(tested, Mutation{mutation->matrix, std::min(mutation->head, h - 1), mutation->delta});
    const auto queries = random_matrix(B, d, rng);
    const auto batch = ragged::build_ragged<double>(seqs);
    const auto ragged_out = ragged::ragged_target_attention<double>(queries, batch, tested);
    const auto padded = padded_masked_attention(queries, seqs, params);
    err = std::max(err, max_relative_error(ragged_out, padded));
  }
  return make_result("ragged_vs_padded", err, 1e-10, batches);
}

OracleResult check_compaction_round_trip(std::size_t batches, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick_b(1, 8), pick_avg(1, 24);
  double err = 0;
  for (std::size_t c = 0; c < batches; ++c) {
    const std::size_t B = pick_b(rng), avg = pick_avg(rng), total = B * avg;
    std::uniform_int_distribution<std::size_t> cut(0, total);
    std::vector<std::size_t> cuts{0, total};
    for (std::size_t b = 0; b + 1 < B; ++b) cuts.push_back(cut(rng));
    std::sort(cuts.begin(), cuts.end());
    std::vector<Matrix<double>> seqs;
    for (std::size_t b = 0; b < B; ++b) seqs.push_back(random_matrix(cuts[b + 1] - cuts[b], 3, rng));
    const auto batch = ragged::build_ragged<double>(seqs);
    const auto packed = ragged::compact(batch, avg);
    const auto back = ragged::unpack(packed);
    bool same = back.index == batch.index && back.values.same_shape(batch.values);
    if (same) same = numerics::max_abs_diff(back.values, batch.values) == 0.0;
    for (const auto& pieces : packed.segments) {
      for (const auto& p : pieces) same = same && p.start + p.length <= avg && p.row < B;
    }
    if (!same) err += 1;
  }
  return make_result("compaction_round_trip", err, 0.0, batches);
}

OracleResult check_allocation_budget(std::size_t trials, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick_b(1, 32), pick_min(1, 64), pick_req(0, 4096);
  double violations = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t B = pick_b(rng), lmin = pick_min(rng);
    std::uniform_int_distribution<std::size_t> pick_avg(lmin, 1024);
    const ragged::TokenBudget budget{B, pick_avg(rng)};
    std::vector<std::size_t> req(B);
    for (auto& r : req) r = lmin + pick_req(rng);
    std::vector<std::size_t> alloc;
    try {
      alloc = ragged::allocate_lengths(req, budget, lmin);
    } catch (const InfeasibleBudgetError&) {
      continue;
    }
    const std::size_t sum = std::accumulate(alloc.begin(), alloc.end(), std::size_t{0});
    const std::size_t req_sum = std::accumulate(req.begin(), req.end(), std::size_t{0});
    if (sum > budget.total()) violations += static_cast<double>(sum - budget.total());
    if (req_sum > budget.total() && sum + 8 <= budget.total()) violations += 1;
    for (std::size_t b = 0; b < B; ++b) {
      const bool shape_ok = alloc[b] % 8 == 0 || alloc[b] == req[b] || alloc[b] == std::max<std::size_t>(lmin, 8);
      if (alloc[b] > req[b] || alloc[b] == 0 || !shape_ok) violations += 1;
    }
  }
  return make_result("allocation_budget", violations, 0.0, trials);
}

OracleResult check_rlb_forward(std::size_t requests, std::size_t m, std::uint64_t seed) {
  const auto config = gradient_check_config();
  const auto params = random_params(config, seed);
  const auto reqs = random_requests(config, requests, m, 4, 24, seed + 1);
  double err = 0;
  for (const auto& r : reqs) {
    const auto before = numerics::instrumentation::history_encodings();
    const auto y = rlb::rlb_forward<double>(r, params, config);
    const auto encodings = numerics::instrumentation::history_encodings() - before;
    err = std::max(err, std::abs(static_cast<double>(encodings) - 1.0));
    for (std::size_t k = 0; k < r.m(); ++k) {
      const auto single = model::stca_forward<double>(r.history, r.targets[k], params, config, r.user_tokens);
      err = std::max(err, std::abs(single.y_hat - y[k]));
    }
  }
  return make_result("rlb_forward_equivalence", err, 1e-12, requests);
}

OracleResult check_rlb_flat_mean(std::size_t requests, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> prob(0.01, 0.99);
  std::bernoulli_distribution label(0.5);
  std::vector<rlb::Request> reqs(requests);
  std::vector<double> y;
  double flat = 0;
  for (auto& r : reqs) {
    r.history.push_back({});
    for (std::size_t k = 0; k < m; ++k) {
      r.targets.push_back({});
      r.labels.push_back(label(rng) ? 1 : 0);
      y.push_back(prob(rng));
      flat += model::bce_loss(y.back(), r.labels.back());
    }
  }
  flat /= static_cast<double>(y.size());
  const double per_user = rlb::rlb_loss(reqs, y, rlb::LossMode::kPerUser);
  const double flat_mode = rlb::rlb_loss(reqs, y, rlb::LossMode::kFlat);
  return make_result("rlb_flat_mean", std::max(std::abs(per_user - flat), std::abs(flat_mode - flat)), 1e-12,
                     requests);
}

OracleResult check_rlb_gradient(std::size_t requests, std::size_t m, std::uint64_t seed) {
  const auto config = gradient_check_config();
  auto rlb_params = random_params(config, seed);
  auto flat_params = rlb_params;
  const auto reqs = random_requests(config, requests, m, 4, 16, seed + 1);

  std::vector<model::SegmentInput> grouped, triplets;
  for (const auto& r : reqs) {
    grouped.push_back(rlb::to_segment(r));
    const auto t = rlb::to_triplet_segments(r);
    triplets.insert(triplets.end(), t.begin(), t.end());
  }
  const auto before = numerics::instrumentation::history_encodings();
  model::NetworkCache<double> c1, c2;
  const auto f1 = model::network_forward<double>(grouped, rlb_params, config, Exec::kSerial, &c1);
  const auto encodings = numerics::instrumentation::history_encodings() - before;
  const auto l1 = rlb::rlb_loss_from_logits<double>(reqs, f1.logits, rlb::LossMode::kPerUser);
  rlb_params.zero_grad();
  model::network_backward<double>(c1, l1.grad_logits, rlb_params, config, Exec::kSerial);

  const auto f2 = model::network_forward<double>(triplets, flat_params, config, Exec::kSerial, &c2);
  const auto l2 = rlb::rlb_loss_from_logits<double>(reqs, f2.logits, rlb::LossMode::kFlat);
  flat_params.zero_grad();
  model::network_backward<double>(c2, l2.grad_logits, flat_params, config, Exec::kSerial);

  double diff2 = 0;
  const auto a = rlb_params.all();
  const auto b = flat_params.all();
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < a[i]->grad.size(); ++k) diff2 += std::pow(a[i]->grad[k] - b[i]->grad[k], 2);
  }
  double err = std::max(std::abs(l1.loss - l2.loss), std::sqrt(diff2));
  err = std::max(err, std::abs(static_cast<double>(encodings) - static_cast<double>(requests)));
  return make_result("rlb_gradient_equivalence", err, 1e-10, requests);
}

OracleResult check_model_gradient(std::uint64_t seed) {
  GradientCheckSetup setup;
  setup.config = gradient_check_config();
  setup.seed = seed;
  double err = 0;
  std::size_t groups = 0;
  for (const auto& g : model_gradient_check(setup)) {
    err = std::max(err, g.error);
    ++groups;
  }
  return make_result("model_gradient_check", err, 1e-4, groups);
}

OracleResult check_beta_arithmetic() {
  extrapolation::LengthSamplerConfig c{0, 2000, 10000, 0.02, 10000, extrapolation::Selection::kSuffix};
  double err = std::abs(extrapolation::beta_param(c) - 0.08);
  const double b = extrapolation::beta_param(c);
  const double mean = c.min_length + c.alpha / (c.alpha + b) * (c.max_length - c.min_length);
  err = std::max(err, std::abs(mean - c.avg_length) / c.avg_length);
  extrapolation::LengthSamplerConfig sym{0, 5000, 10000, 1.0, 10000, extrapolation::Selection::kSuffix};
  err = std::max(err, std::abs(extrapolation::beta_param(sym) - 1.0));
  Rng rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 100; ++i) {
    const double lo = 1000 * u(rng), avg = lo + 1 + 1000 * u(rng), hi = avg + 1 + 5000 * u(rng);
    extrapolation::LengthSamplerConfig r{lo, avg, hi, 0.01 + 5 * u(rng), hi, extrapolation::Selection::kSuffix};
    const double rb = extrapolation::beta_param(r);
    const double rm = r.min_length + r.alpha / (r.alpha + rb) * (r.max_length - r.min_length);
    err = std::max(err, std::abs(rm - r.avg_length) / r.avg_length);
  }
  return make_result("beta_param_arithmetic", err, 1e-12, 102);
}

namespace {

extrapolation::LengthSamplerConfig production_sampler() {
  return {0, 2000, 10000, 0.02, 10000, extrapolation::Selection::kSuffix};
}

}  // namespace

OracleResult check_sampler_mean(std::size_t samples, std::uint64_t seed) {
  const auto c = production_sampler();
  Rng rng(seed);
  double sum = 0, sum2 = 0;
  bool in_range = true;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto L = static_cast<double>(extrapolation::sample_length(c, rng));
    in_range = in_range && static_cast<std::size_t>(L) % 8 == 0 && L >= 8 && L <= 10000;
    sum += L;
    sum2 += L * L;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double sd = std::sqrt(std::max(0.0, sum2 / n - mean * mean));
  const double z = std::abs(mean - c.avg_length) / (sd / std::sqrt(n));
  return make_result("length_sampler_mean", in_range ? z : std::numeric_limits<double>::infinity(), 3.0, samples);
}

OracleResult check_sampler_u_shape(std::size_t samples, std::uint64_t seed) {
  const auto c = production_sampler();
  Rng rng(seed);
  std::size_t ends = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto L = extrapolation::sample_length(c, rng);
    if (L < 1000 || L > 9000) ++ends;
  }
  const double mass = static_cast<double>(ends) / static_cast<double>(samples);
  // Passing needs endpoint mass above 0.8.
  return make_result("length_sampler_u_shape", 1.0 - mass, 0.2 - 1e-12, samples);
}

OracleResult check_sparsity_arithmetic() {
  const auto r = extrapolation::sequence_sparsity(production_sampler());
  const auto dense =
      extrapolation::sequence_sparsity({0, 2000, 2000.0000001, 0.02, 10000, extrapolation::Selection::kSuffix});
  double err = std::max(std::abs(r.ss - 0.2), std::abs(r.extrapolation_ratio - 5.0));
  err = std::max(err, std::abs(dense.ss - 1.0) - 1e-9);
  return make_result("sparsity_arithmetic", std::max(err, 0.0), 1e-12, 2);
}

OracleResult check_costmodel_calibration() {
  using costmodel::Kind;
  const costmodel::ArchSpec dims{500, 256, 8, 4, 4, Kind::kStcaReordered};
  struct Point {
    Kind kind;
    std::size_t L;
    double gflops;
  };
  const Point points[] = {{Kind::kStcaReordered, 500, 1.06},
                          {Kind::kStcaReordered, 10000, 21.06},
                          {Kind::kSelfAttention, 500, 2.08},
                          {Kind::kSelfAttention, 8000, 156.24},
                          {Kind::kSelfAttention, 10000, 236.26}};
  double err = 0;
  for (const auto& p : points) {
    auto spec = dims;
    spec.kind = p.kind;
    spec.L = p.L;
    err = std::max(err, std::abs(costmodel::flops(spec).total_flops / 1e9 - p.gflops) / p.gflops);
  }
  err = std::max(err, std::abs(costmodel::scaling_ratio(Kind::kStcaReordered, 500, 10000, dims) - 19.9) / 19.9);
  err = std::max(err, std::abs(costmodel::scaling_ratio(Kind::kSelfAttention, 500, 10000, dims) - 113.6) / 113.6);
  return make_result("costmodel_calibration", err, 0.10, 7);
}

OracleResult check_reorder_reduction() {
  const std::size_t d = 256, h = 8, L = 4096;
  double err = std::abs(costmodel::reorder_reduction(d, h) - 64.0) / 64.0;
  costmodel::ArchSpec spec{L, d, h, 4, 4, costmodel::Kind::kStcaStandard};
  const auto standard = costmodel::flops(spec);
  spec.kind = costmodel::Kind::kStcaReordered;
  const auto reordered = costmodel::flops(spec);
  err = std::max(err, std::abs(costmodel::measured_reorder_reduction(standard, reordered) - 64.0) / 64.0);

  Rng rng(5);
  const auto params = model::AttentionParams<float>::random(d, h, 9);
  numerics::Matrix<float> q(1, d), x(L, d);
  std::uniform_real_distribution<float> u(-1, 1);
  for (auto& v : q.values()) v = u(rng);
  for (auto& v : x.values()) v = u(rng);
  const std::size_t qo[] = {0, 1}, ko[] = {0, L};
  std::uint64_t kv = 0, mixed = 0;
  {
    numerics::CountingSession session;
    model::attend_ragged<float>(q, x, model::SegmentMap{qo, ko}, params, model::AttentionPath::kStandard,
                                Exec::kParallel);
    kv = session.snapshot().mac(numerics::OpTag::kKeyValueProjection);
  }
  {
    numerics::CountingSession session;
    model::attend_ragged<float>(q, x, model::SegmentMap{qo, ko}, params, model::AttentionPath::kReordered,
                                Exec::kParallel);
    mixed = session.snapshot().mac(numerics::OpTag::kWeightedSum);
  }
  const double counted = static_cast<double>(kv) / static_cast<double>(std::max<std::uint64_t>(mixed, 1));
  err = std::max(err, std::abs(counted - 64.0) / 64.0);
  return make_result("reorder_reduction", err, 0.05, 3);
}

OracleResult check_counter_vs_costmodel(std::uint64_t seed) {
  double err = 0;
  std::size_t cases = 0;
  for (auto path : {model::AttentionPath::kStandard, model::AttentionPath::kReordered}) {
    for (std::size_t L : {8, 24, 40}) {
      for (std::size_t layers : {1, 3}) {
        auto config = gradient_check_config();
        config.layers = layers;
        config.attention_path = path;
        const auto params = random_params(config, seed);
        const auto reqs = random_requests(config, 1, 1, L, L, seed + L);
        const auto seg = rlb::to_segment(reqs.front());
        std::uint64_t macs = 0;
        {
          numerics::CountingSession session;
          model::network_forward<double>(std::span<const model::SegmentInput>(&seg, 1), params, config,
                                         Exec::kSerial);
          const auto snap = session.snapshot();
          macs = snap.macs_excluding(numerics::OpTag::kHead);
        }
        const costmodel::ArchSpec spec{L, config.d, config.heads, config.ffn_ratio, layers,
                                       path == model::AttentionPath::kStandard ? costmodel::Kind::kStcaStandard
                                                                               : costmodel::Kind::kStcaReordered};
        const double predicted = costmodel::flops(spec, costmodel::Convention::counted()).total_flops;
        err = std::max(err, std::abs(static_cast<double>(macs) - predicted) / predicted);
        ++cases;
      }
    }
  }
  return make_result("counter_vs_costmodel", err, 0.01, cases);
}

std::vector<OracleResult> run_all(const VerifyOptions& o) {
  const auto s = o.seed;
  return {
      check_matmul(s),
      check_numerics_gradients(s + 1),
      check_attention_equivalence(200, s + 2, o.mutation),
      check_ragged_vs_padded(100, s + 3, o.mutation),
      check_compaction_round_trip(200, s + 4),
      check_allocation_budget(10000, s + 5),
      check_rlb_forward(20, 8, s + 6),
      check_rlb_flat_mean(1000, 8, s + 7),
      check_rlb_gradient(50, 8, s + 8),
      check_model_gradient(s + 9),
      check_beta_arithmetic(),
      check_sampler_mean(100000, s + 10),
      check_sampler_u_shape(100000, s + 11),
      check_sparsity_arithmetic(),
      check_costmodel_calibration(),
      check_reorder_reduction(),
      check_counter_vs_costmodel(s + 12),
  };
}

bool all_passed(const std::vector<OracleResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const OracleResult& r) { return r.pass; });
}

nlohmann::json results_json(const std::vector<OracleResult>& results) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : results) {
    out.push_back({{"name", r.name},
                   {"status", r.pass ? "pass" : "fail"},
                   {"max_error", std::isfinite(r.max_error) ? nlohmann::json(r.max_error) : nlohmann::json("inf")},
                   {"tolerance", r.tolerance},
                   {"cases_run", r.cases_run}});
  }
  return out;
}

}  // namespace stca::verify
