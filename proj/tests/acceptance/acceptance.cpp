// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "stca/costmodel/costmodel.hpp"
#include "stca/extrapolation/length_sampler.hpp"
#include "stca/harness/synthetic.hpp"
#include "stca/harness/trainer.hpp"
#include "stca/ragged/ragged.hpp"
#include "stca/rlb/rlb.hpp"
#include "stca/verify/oracles.hpp"
#include "stca/verify/verify.hpp"

namespace {

using namespace stca;
using Clock = std::chrono::steady_clock;
using numerics::Matrix;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Matrix<double> random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Matrix<double> m(rows, cols);
  for (auto& v : m.values()) v = u(rng);
  return m;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// 1. Standard and reordered attention agree.
Outcome reordered_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  const std::size_t heads[] = {1, 2, 4, 8};
  double worst = 0;
  for (int c = 0; c < 200; ++c) {
    const std::size_t h = heads[rng() % 4];
    const std::size_t d = h * (1 + rng() % (32 / h));
    const std::size_t L = 1 + rng() % 64;
    const auto p = model::AttentionParams<double>::random(d, h, rng());
    const auto q = random_matrix(1, d, rng), x = random_matrix(L, d, rng);
    const auto a = model::cross_attention_layer<double>(q, x.view(), p);
    const auto b = model::cross_attention_layer_reordered<double>(q, x.view(), p);
    worst = std::max(worst, verify::max_relative_error(b, a));
  }
  const double t = seconds_since(t0);
  return {worst < 1e-10 && t < 5, fmt("max_rel_err=%.2e over 200 cases, %.2fs", worst, t)};
}

// 2. FLOPs model against the reference operating points.
Outcome flops_calibration() {
  const auto t0 = Clock::now();
  using costmodel::Kind;
  struct Point {
    Kind kind;
    std::size_t L;
    double gflops;
  };
  const Point points[] = {{Kind::kStcaReordered, 500, 1.06},    {Kind::kStcaReordered, 10000, 21.06},
                          {Kind::kSelfAttention, 500, 2.08},    {Kind::kSelfAttention, 8000, 156.24},
                          {Kind::kSelfAttention, 10000, 236.26}};
  double worst = 0;
  costmodel::ArchSpec dims{500, 256, 8, 4, 4, Kind::kStcaReordered};
  for (const auto& p : points) {
    auto s = dims;
    s.kind = p.kind;
    s.L = p.L;
    worst = std::max(worst, std::abs(costmodel::flops(s).total_flops / 1e9 - p.gflops) / p.gflops);
  }
  const double r_stca = costmodel::scaling_ratio(Kind::kStcaReordered, 500, 10000, dims);
  const double r_self = costmodel::scaling_ratio(Kind::kSelfAttention, 500, 10000, dims);
  worst = std::max({worst, std::abs(r_stca - 19.9) / 19.9, std::abs(r_self - 113.6) / 113.6});
  const double t = seconds_since(t0);
  return {worst <= 0.10 && t < 1,
          fmt("worst deviation %.1f%%, ratios %.1fx / %.1fx, %.3fs", 100 * worst, r_stca, r_self, t)};
}

// 3. Reduction factor, closed form and counted.
Outcome reduction_factor() {
  const double closed = costmodel::reorder_reduction(256, 8);
  const std::size_t d = 256, h = 8, L = 4096;
  std::mt19937_64 rng(3);
  const auto p = model::AttentionParams<double>::random(d, h, 4);
  const auto q = random_matrix(1, d, rng), x = random_matrix(L, d, rng);
  auto count = [&](auto fn) {
    numerics::CountingSession s;
    fn();
    return s.snapshot();
  };
  const auto standard = count([&] { model::cross_attention_layer<double>(q, x.view(), p); });
  const auto reordered = count([&] { model::cross_attention_layer_reordered<double>(q, x.view(), p); });
  const double counted = static_cast<double>(standard.mac(numerics::OpTag::kKeyValueProjection)) /
                         static_cast<double>(reordered.mac(numerics::OpTag::kWeightedSum));
  return {closed == 64.0 && std::abs(counted - 64) / 64 <= 0.05,
          fmt("reorder_reduction(256,8)=%.17g, counted ratio at L=4096: %.3f", closed, counted)};
}

// 4. End-to-end finite-difference gradient check.
Outcome gradient_check() {
  const auto t0 = Clock::now();
  verify::GradientCheckSetup setup;
  setup.config = verify::gradient_check_config();
  setup.history_length = 8;
  const auto groups = verify::model_gradient_check(setup);
  double worst = 0;
  std::string worst_name;
  for (const auto& g : groups) {
    if (!(g.error <= worst)) worst = g.error, worst_name = g.name;
  }
  const auto& c = setup.config;
  const double t = seconds_since(t0);
  return {worst < 1e-4 && t < 30 && c.d == 8 && c.heads == 2 && c.layers == 2,
          fmt("%zu groups, max_rel_err=%.2e (%s), %.2fs", groups.size(), worst, worst_name.c_str(), t)};
}

// 5. Per-user objective equals the flat mean under equal m.
Outcome rlb_invariance() {
  harness::SyntheticTaskConfig task;
  task.num_requests = 1000;
  task.m = 8;
  task.history_len_range = {16, 48};
  task.seed = 5;
  const auto reqs = harness::generate(task);
  auto config = verify::gradient_check_config();
  config.video_vocab = task.vocab;
  config.max_position = 64;
  config.user_tokens = 0;
  config.candidate_tokens = 0;
  auto grouped_params = verify::random_params(config, 6);
  auto flat_params = grouped_params;

  std::vector<model::SegmentInput> grouped, triplets;
  for (const auto& r : reqs) {
    grouped.push_back(rlb::to_segment(r));
    const auto t = rlb::to_triplet_segments(r);
    triplets.insert(triplets.end(), t.begin(), t.end());
  }
  const auto before = numerics::instrumentation::history_encodings();
  model::NetworkCache<double> c1, c2;
  const auto f1 = model::network_forward<double>(grouped, grouped_params, config, numerics::Exec::kParallel, &c1);
  const auto encodings = numerics::instrumentation::history_encodings() - before;
  const auto f2 = model::network_forward<double>(triplets, flat_params, config, numerics::Exec::kParallel, &c2);

  std::vector<double> y1;
  for (double l : f1.logits) y1.push_back(numerics::sigmoid(l));
  double flat = 0;
  std::size_t i = 0;
  for (const auto& r : reqs) {
    for (int label : r.labels) flat += model::bce_loss(numerics::sigmoid(f2.logits[i++]), label);
  }
  flat /= static_cast<double>(i);
  const double loss_gap = std::abs(rlb::rlb_loss(reqs, y1) - flat);

  const auto g1 = rlb::rlb_loss_from_logits<double>(reqs, f1.logits, rlb::LossMode::kPerUser);
  grouped_params.zero_grad();
  model::network_backward<double>(c1, g1.grad_logits, grouped_params, config, numerics::Exec::kParallel);
  const auto g2 = rlb::rlb_loss_from_logits<double>(reqs, f2.logits, rlb::LossMode::kFlat);
  flat_params.zero_grad();
  model::network_backward<double>(c2, g2.grad_logits, flat_params, config, numerics::Exec::kParallel);
  double diff2 = 0;
  const auto a = grouped_params.all();
  const auto b = flat_params.all();
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::size_t e = 0; e < a[k]->grad.size(); ++e) diff2 += std::pow(a[k]->grad[e] - b[k]->grad[e], 2);
  }
  const double grad_gap = std::sqrt(diff2);
  return {loss_gap < 1e-12 && grad_gap < 1e-10 && encodings == reqs.size(),
          fmt("|loss gap|=%.2e, grad diff norm=%.2e, encodings=%llu for %zu requests", loss_gap, grad_gap,
              static_cast<unsigned long long>(encodings), reqs.size())};
}

// 6. Payload accounting and measured throughput gain.
Outcome rlb_payload() {
  const double saving = rlb::user_payload_saving(8);
  bool ratios_ok = true;
  const costmodel::ArchSpec spec{512, 32, 4, 2, 2, costmodel::Kind::kStcaReordered};
  for (std::size_t m : {1u, 2u, 4u, 8u}) ratios_ok &= costmodel::footprint_ratio(spec, m) == static_cast<double>(m);

  harness::SyntheticTaskConfig task;
  task.num_requests = 64;
  task.m = 8;
  task.history_len_range = {512, 512};
  task.seed = 6;
  const auto data = harness::generate(task);
  model::StcaConfig config;
  config.max_position = 512;
  harness::TrainConfig t;
  t.batch_size = 8;
  t.steps = 4;
  t.length_mode = harness::LengthMode::kFixed;
  t.fixed_length = 512;
  auto time_mode = [&](harness::Batching mode) {
    t.batching = mode;
    std::vector<double> runs;
    for (int r = 0; r < 3; ++r) {
      const auto t0 = Clock::now();
      harness::train(config, t, data);
      runs.push_back(seconds_since(t0));
    }
    return median(runs);
  };
  const double triplet = time_mode(harness::Batching::kTriplet);
  const double grouped = time_mode(harness::Batching::kRlb);
  const double speedup = triplet / grouped;
  return {saving == 0.875 && ratios_ok && speedup >= 1.5,
          fmt("saving=%.4f, footprint ratios %s, throughput %.2fx (triplet %.2fs, rlb %.2fs)", saving,
              ratios_ok ? "== m" : "WRONG", speedup, triplet, grouped)};
}

// 7. Length sampler statistics.
Outcome length_sampler() {
  const auto t0 = Clock::now();
  extrapolation::LengthSamplerConfig c;
  c.min_length = 0;
  c.avg_length = 2000;
  c.max_length = 10000;
  c.infer_length = 10000;
  c.alpha = 0.02;
  const double beta = extrapolation::beta_param(c);
  extrapolation::Rng rng(7);
  const std::size_t n = 100000;
  double sum = 0, sq = 0;
  std::size_t ends = 0;
  bool grid_ok = true;
  for (std::size_t i = 0; i < n; ++i) {
    const auto L = extrapolation::sample_length(c, rng);
    grid_ok &= L % 8 == 0 && L >= 8 && L <= 10000;
    sum += static_cast<double>(L);
    sq += static_cast<double>(L) * static_cast<double>(L);
    ends += (L < 1000 || L > 9000) ? 1 : 0;
  }
  const double mean = sum / n, se = std::sqrt((sq / n - mean * mean) / n);
  const double z = std::abs(mean - 2000) / se, mass = static_cast<double>(ends) / n;
  const auto ss = extrapolation::sequence_sparsity(c);
  const double t = seconds_since(t0);
  return {beta == 0.08 && z < 3 && grid_ok && mass > 0.8 && ss.ss == 0.2 && ss.extrapolation_ratio == 5 && t < 10,
          fmt("beta=%.17g, mean=%.1f (z=%.2f), endpoint mass=%.3f, SS=%.0f%%, rho=%.0f, %.2fs", beta, mean, z, mass,
              100 * ss.ss, ss.extrapolation_ratio, t)};
}

// 8. Ragged attention, compaction and allocation.
Outcome ragged_batching() {
  std::mt19937_64 rng(8);
  double worst = 0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t B = 1 + rng() % 8, d = 16;
    std::vector<Matrix<double>> seqs;
    for (std::size_t b = 0; b < B; ++b) seqs.push_back(random_matrix(1 + rng() % 32, d, rng));
    const auto p = model::AttentionParams<double>::random(d, 4, rng());
    const auto q = random_matrix(B, d, rng);
    const auto got = ragged::ragged_target_attention(q, ragged::build_ragged<double>(seqs), p);
    worst = std::max(worst, verify::max_relative_error(got, verify::padded_masked_attention(q, seqs, p)));
  }
  bool lossless = true;
  for (int c = 0; c < 100; ++c) {
    const std::size_t B = 1 + rng() % 8, avg = 1 + rng() % 16;
    std::vector<std::size_t> lengths(B, 0);
    for (std::size_t t = 0; t < B * avg; ++t) ++lengths[rng() % B];
    std::vector<Matrix<double>> seqs;
    for (auto L : lengths) seqs.push_back(random_matrix(L, 4, rng));
    const auto batch = ragged::build_ragged<double>(seqs);
    const auto back = ragged::unpack(ragged::compact(batch, avg));
    lossless &= back.index == batch.index && back.values.values().size() == batch.values.values().size() &&
                std::equal(back.values.values().begin(), back.values.values().end(), batch.values.values().begin());
  }
  std::size_t violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t B = 1 + rng() % 64, avg = 8 + rng() % 512;
    std::vector<std::size_t> req(B);
    for (auto& r : req) r = 8 + rng() % 2048;
    const auto got = ragged::allocate_lengths(req, ragged::TokenBudget{B, avg}, 8);
    const std::size_t total = std::accumulate(got.begin(), got.end(), std::size_t{0});
    for (std::size_t b = 0; b < B; ++b) violations += got[b] > req[b];
    violations += total > B * avg;
  }
  return {worst < 1e-10 && lossless && violations == 0,
          fmt("ragged vs padded max_rel_err=%.2e, compaction %s, budget violations=%zu/10000", worst,
              lossless ? "lossless" : "LOSSY", violations)};
}

// 9. Extrapolation trends on the planted-lag task, 5 seeds.
struct Arm {
  const char* name;
  harness::SyntheticTaskConfig task;
  harness::TrainConfig train;
};

double train_and_eval(const Arm& arm, std::uint64_t seed, std::size_t infer_length) {
  auto task = arm.task;
  task.seed = 1000 + seed;
  auto split = harness::split_by_user(harness::generate(task), 0.1);
  auto t = arm.train;
  t.seed = seed;
  model::StcaConfig config;
  config.max_position = 512;
  config.embed_init = 1.0;
  const auto result = harness::train(config, t, split.train);
  return harness::evaluate(result.params, config, split.eval, infer_length).auc;
}

struct Stats {
  double mean = 0, se = 0;
};

Stats stats(const std::vector<double>& v) {
  Stats s;
  for (double x : v) s.mean += x / v.size();
  double var = 0;
  for (double x : v) var += (x - s.mean) * (x - s.mean) / (v.size() - 1);
  s.se = std::sqrt(var / v.size());
  return s;
}

Outcome extrapolation_trend() {
  const auto t0 = Clock::now();
  harness::SyntheticTaskConfig long_lag;
  long_lag.vocab = 20;
  long_lag.m = 4;
  long_lag.history_len_range = {256, 320};
  long_lag.signal_lag_range = {65, 256};
  long_lag.plant_copies = 32;
  long_lag.num_requests = 4000;

  harness::SyntheticTaskConfig recency = long_lag;
  recency.signal_lag_range = {1, 16};
  recency.plant_copies = 4;
  recency.decoys = 4;

  harness::TrainConfig base;
  base.batch_size = 64;
  base.steps = 300;
  base.adam.lr_dense = 1e-3;
  base.adam.lr_embedding = 1e-3;
  base.lengths = extrapolation::LengthSamplerConfig::desk();

  auto stochastic = base;
  auto fixed = base;
  fixed.length_mode = harness::LengthMode::kFixed;
  fixed.fixed_length = 64;
  auto skewed = base;
  skewed.lengths.alpha = 10;
  auto suffix_sel = base;
  suffix_sel.steps = 150;
  auto random_sel = suffix_sel;
  random_sel.lengths.selection = extrapolation::Selection::kRandom;

  const Arm arms[] = {{"stochastic", long_lag, stochastic}, {"fixed64", long_lag, fixed},
                      {"alpha10", long_lag, skewed},        {"suffix", recency, suffix_sel},
                      {"random", recency, random_sel}};
  std::vector<std::vector<double>> aucs(5);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (std::size_t a = 0; a < 5; ++a) aucs[a].push_back(train_and_eval(arms[a], seed, 256));
  }
  std::vector<double> gap_a, gap_b, gap_c;
  for (std::size_t s = 0; s < 5; ++s) {
    gap_a.push_back(aucs[0][s] - aucs[1][s]);
    gap_b.push_back(aucs[3][s] - aucs[4][s]);
    gap_c.push_back(aucs[0][s] - aucs[2][s]);
  }
  const auto a = stats(gap_a), b = stats(gap_b), c = stats(gap_c);
  const double t = seconds_since(t0);
  const bool pass_a = a.mean > 3 * a.se && a.mean > 0;
  const bool pass_b = b.mean >= 0;
  const bool pass_c = c.mean >= 0;
  std::string per_arm;
  for (std::size_t k = 0; k < 5; ++k) per_arm += fmt(" %s=%.4f", arms[k].name, stats(aucs[k]).mean);
  return {pass_a && pass_b && pass_c && t < 1200,
          fmt("(a) gap %.4f (se %.4f) %s; (b) gap %.4f %s; (c) gap %.4f %s; AUC@256:%s; %.0fs", a.mean, a.se,
              pass_a ? "ok" : "FAIL", b.mean, pass_b ? "ok" : "FAIL", c.mean, pass_c ? "ok" : "FAIL",
              per_arm.c_str(), t)};
}

// 10. Corrupting any attention weight breaks an oracle.
Outcome mutation_sensitivity() {
  std::string detail;
  bool all_caught = true;
  const std::pair<verify::AttentionMatrix, const char*> matrices[] = {{verify::AttentionMatrix::kQuery, "W_Q"},
                                                                      {verify::AttentionMatrix::kKey, "W_K"},
                                                                      {verify::AttentionMatrix::kValue, "W_V"},
                                                                      {verify::AttentionMatrix::kOutput, "W_O"}};
  for (const auto& [matrix, name] : matrices) {
    verify::VerifyOptions opts;
    opts.mutation = verify::Mutation{matrix, 0, 0.5};
    std::size_t failed = 0;
    for (const auto& r : verify::run_all(opts)) failed += r.pass ? 0 : 1;
    all_caught &= failed > 0;
    detail += fmt("%s:%zu failing ", name, failed);
  }
  return {all_caught && verify::all_passed(verify::run_all()), detail + "(unmutated run passes)"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"reordered attention equivalence", reordered_equivalence},
      {"FLOPs calibration", flops_calibration},
      {"reduction factor", reduction_factor},
      {"gradient correctness", gradient_check},
      {"RLB objective invariance", rlb_invariance},
      {"RLB payload accounting", rlb_payload},
      {"length sampler", length_sampler},
      {"ragged attention and compaction", ragged_batching},
      {"extrapolation trend", extrapolation_trend},
      {"mutation sensitivity", mutation_sensitivity},
  };
  std::vector<bool> selected(criteria.size(), argc <= 1);
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k >= 1 && k <= static_cast<int>(criteria.size())) selected[k - 1] = true;
  }
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("[%s] %2zu %-32s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
