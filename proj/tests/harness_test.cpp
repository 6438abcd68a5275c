#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "stca/harness/metrics.hpp"
#include "stca/harness/settings.hpp"
#include "stca/harness/synthetic.hpp"
#include "stca/harness/trainer.hpp"
#include "stca/model/checkpoint.hpp"

namespace {

using namespace stca;
using namespace stca::harness;

SyntheticTaskConfig small_task() {
  SyntheticTaskConfig c;
  c.history_len_range = {16, 48};
  c.num_requests = 200;
  c.m = 4;
  c.seed = 3;
  return c;
}

model::StcaConfig desk_model() {
  model::StcaConfig c;
  c.d = 16;
  c.heads = 2;
  c.layers = 2;
  c.max_position = 256;
  return c;
}

TEST(Generate, LastItemDecidesLabelForUnitLag) {
  auto c = small_task();
  c.signal_lag_range = {1, 1};
  for (const auto& r : generate(c)) {
    const auto last = cluster_of(r.history.back().video_id, c.n_clusters);
    for (std::size_t k = 0; k < r.m(); ++k) {
      EXPECT_EQ(r.labels[k], last == cluster_of(r.targets[k].video_id, c.n_clusters) ? 1 : 0);
    }
  }
}

TEST(Generate, RescanReproducesLabelsWithoutNoise) {
  auto c = small_task();
  c.decoys = 2;
  c.history_len_range = {40, 64};
  c.signal_lag_range = {5, 20};
  std::size_t positives = 0, total = 0;
  for (const auto& r : generate(c)) {
    for (std::size_t k = 0; k < r.m(); ++k) {
      EXPECT_EQ(r.labels[k], rescan_label(r, k, c));
      positives += r.labels[k];
      ++total;
    }
  }
  EXPECT_GT(positives, total / 5);
  EXPECT_LT(positives, 4 * total / 5);
}

TEST(Generate, PlantCopiesOnlyAddMatches) {
  auto c = small_task();
  c.plant_prob = 1.0;
  c.plant_copies = 6;
  c.m = 2;
  c.history_len_range = {64, 64};
  c.signal_lag_range = {1, 32};
  for (const auto& r : generate(c)) {
    for (std::size_t k = 0; k < r.m(); ++k) {
      const auto cl = cluster_of(r.targets[k].video_id, c.n_clusters);
      const auto matches = std::count_if(r.history.begin(), r.history.end(), [&](const HistoryEvent& e) {
        return cluster_of(e.video_id, c.n_clusters) == cl;
      });
      EXPECT_GE(matches, 1);
      EXPECT_LE(matches, 6);
      EXPECT_EQ(r.labels[k], rescan_label(r, k, c));
    }
  }
  c.plant_copies = 0;
  EXPECT_THROW(generate(c), ConfigError);
}

TEST(Generate, IsDeterministicPerSeed) {
  const auto c = small_task();
  EXPECT_EQ(generate(c), generate(c));
  auto other = c;
  other.seed = 4;
  EXPECT_NE(generate(c), generate(other));
}

TEST(Generate, RecordsAreWellFormed) {
  for (const auto& r : generate(small_task())) {
    EXPECT_NO_THROW(r.validate());
    EXPECT_GE(r.history.size(), 16u);
    EXPECT_LE(r.history.size(), 48u);
    for (std::size_t i = 1; i < r.history.size(); ++i) {
      EXPECT_LT(r.history[i - 1].position, r.history[i].position);
      EXPECT_LE(r.history[i - 1].timestamp, r.history[i].timestamp);
    }
    for (const auto& t : r.targets) EXPECT_GE(t.request_time, r.history.back().timestamp);
  }
}

TEST(Generate, FullNoiseDecouplesLabels) {
  auto c = small_task();
  c.noise = 0.5;
  c.num_requests = 2000;
  std::size_t agree = 0, total = 0;
  for (const auto& r : generate(c)) {
    for (std::size_t k = 0; k < r.m(); ++k) {
      agree += r.labels[k] == rescan_label(r, k, c) ? 1 : 0;
      ++total;
    }
  }
  EXPECT_NEAR(static_cast<double>(agree) / total, 0.5, 0.02);
}

TEST(Generate, InvalidConfigIsRejected) {
  auto c = small_task();
  c.signal_lag_range = {1, 100};
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_task();
  c.noise = 0.6;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Split, NoUserOverlapAndRoughlyTenPercent) {
  auto c = small_task();
  c.num_requests = 2000;
  const auto split = split_by_user(generate(c));
  std::set<Id> train_users;
  for (const auto& r : split.train) train_users.insert(r.user_id);
  for (const auto& r : split.eval) EXPECT_FALSE(train_users.count(r.user_id));
  EXPECT_NEAR(static_cast<double>(split.eval.size()) / 2000, 0.1, 0.03);
}

TEST(Auc, PerfectSeparation) {
  const std::vector<double> s{0.1, 0.2, 0.8, 0.9};
  const std::vector<int> y{0, 0, 1, 1};
  EXPECT_EQ(auc(s, y), 1.0);
}

TEST(Auc, AllTiesGiveHalf) {
  const std::vector<double> s(6, 0.3);
  const std::vector<int> y{0, 1, 0, 1, 1, 0};
  EXPECT_EQ(auc(s, y), 0.5);
}

TEST(Auc, PairwiseExample) {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const std::vector<int> y{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(auc(s, y), 0.75);
}

TEST(Auc, MatchesPairwiseCountWithTies) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> score(0, 9), label(0, 1);
  std::vector<double> s(300);
  std::vector<int> y(300);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = score(rng), y[i] = label(rng);
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
    }
  }
  EXPECT_NEAR(auc(s, y), wins / pairs, 1e-12);
}

TEST(Auc, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> s(200), t(200);
  std::vector<int> y(200);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = n(rng);
    t[i] = std::exp(3 * s[i]) + 7;
    y[i] = n(rng) + s[i] > 0;
  }
  EXPECT_EQ(auc(s, y), auc(t, y));
}

TEST(Auc, SingleClassIsUndefined) {
  const std::vector<double> s{0.1, 0.2};
  const std::vector<int> y{1, 1};
  EXPECT_THROW(auc(s, y), UndefinedMetricError);
}

TEST(Nll, EqualsMeanBce) {
  const std::vector<double> p{0.9, 0.2, 0.6, 1e-9};
  const std::vector<int> y{1, 0, 0, 0};
  double mean = 0;
  for (std::size_t i = 0; i < p.size(); ++i) mean += model::bce_loss(p[i], y[i]) / p.size();
  EXPECT_NEAR(nll(p, y), mean, 1e-12);
}

TrainConfig quick_train() {
  TrainConfig t;
  t.batch_size = 16;
  t.steps = 6;
  t.seed = 9;
  return t;
}

TEST(Train, ZeroLearningRateLeavesParametersUnchanged) {
  const auto data = generate(small_task());
  auto t = quick_train();
  t.adam.lr_dense = 0;
  t.adam.lr_embedding = 0;
  const auto cfg = desk_model();
  const auto init = model::StcaParams<float>::initialize(cfg, 9);
  const auto result = train(cfg, t, data, nullptr, &init);
  const auto a = init.all();
  const auto b = result.params.all();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(numerics::max_abs_diff(a[i]->value, b[i]->value), 0.0f);
}

TEST(Train, FixedBatchLossDecreases) {
  auto task = small_task();
  task.num_requests = 64;
  task.m = 4;
  const auto data = generate(task);
  TrainConfig t;
  t.batch_size = 64;
  t.steps = 50;
  t.length_mode = LengthMode::kFixed;
  t.fixed_length = 48;
  t.seed = 1;
  const auto result = train(desk_model(), t, data);
  ASSERT_EQ(result.log.size(), 50u);
  for (std::size_t s = 1; s < result.log.size(); ++s) EXPECT_LT(result.log[s].loss, result.log[s - 1].loss) << s;
}

TEST(Train, LogIsBitReproducible) {
  const auto data = generate(small_task());
  std::ostringstream a, b;
  train(desk_model(), quick_train(), data, &a);
  train(desk_model(), quick_train(), data, &b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_FALSE(a.str().empty());
}

TEST(Train, SerialAndParallelExecutionAgree) {
  const auto data = generate(small_task());
  auto t = quick_train();
  t.exec = numerics::Exec::kSerial;
  const auto serial = train(desk_model(), t, data);
  t.exec = numerics::Exec::kParallel;
  const auto parallel = train(desk_model(), t, data);
  for (std::size_t s = 0; s < serial.log.size(); ++s) EXPECT_EQ(serial.log[s].loss, parallel.log[s].loss);
}

TEST(Train, CountsEncoderInvocationsPerMode) {
  const auto data = generate(small_task());
  auto t = quick_train();
  t.batching = Batching::kRlb;
  EXPECT_EQ(train(desk_model(), t, data).log.back().encoder_invocations, 6u * 16);
  t.batching = Batching::kTriplet;
  EXPECT_EQ(train(desk_model(), t, data).log.back().encoder_invocations, 6u * 16 * 4);
}

TEST(Train, CurriculumCheckpointEvaluatesAtAnyLength) {
  auto task = small_task();
  task.history_len_range = {64, 256};
  const auto data = generate(task);
  auto t = quick_train();
  t.steps = 4;
  t.curriculum = {{2, 64}, {2, 256}};
  const auto cfg = desk_model();
  const auto result = train(cfg, t, data);
  std::stringstream buf;
  model::write_checkpoint(buf, cfg, result.params);
  const auto ck = model::read_checkpoint(buf);
  for (std::size_t L : {8u, 64u, 256u}) {
    const auto m = evaluate(ck.params, ck.config, data, L);
    EXPECT_GE(m.auc, 0.0);
    EXPECT_LE(m.auc, 1.0);
  }
}

TEST(Train, StochasticModelGainsFromLongerInference) {
  SyntheticTaskConfig task;
  task.vocab = 20;
  task.m = 4;
  task.history_len_range = {256, 320};
  task.signal_lag_range = {65, 256};
  task.plant_copies = 32;
  task.num_requests = 4000;
  task.seed = 21;
  const auto split = split_by_user(generate(task), 0.1);
  TrainConfig t;
  t.batch_size = 64;
  t.steps = 300;
  t.adam.lr_dense = 1e-3;
  t.adam.lr_embedding = 1e-3;
  model::StcaConfig cfg;
  cfg.embed_init = 1.0;
  const auto result = train(cfg, t, split.train);
  const double at_256 = evaluate(result.params, cfg, split.eval, 256).auc;
  const double at_64 = evaluate(result.params, cfg, split.eval, 64).auc;
  EXPECT_GT(at_256, at_64 + 0.05);
}

TEST(Evaluate, IsDeterministic) {
  const auto data = generate(small_task());
  const auto params = model::StcaParams<float>::initialize(desk_model(), 5);
  const auto a = evaluate(params, desk_model(), data, 48);
  const auto b = evaluate(params, desk_model(), data, 48);
  EXPECT_EQ(a.auc, b.auc);
  EXPECT_EQ(a.nll, b.nll);
}

TEST(Evaluate, RandomParametersScoreNearChance) {
  auto task = small_task();
  task.num_requests = 1250;
  task.m = 8;
  task.seed = 11;
  const auto data = generate(task);
  const auto m = evaluate(model::StcaParams<float>::initialize(desk_model(), 12), desk_model(), data, 48);
  EXPECT_EQ(m.n, 10000u);
  EXPECT_NEAR(m.auc, 0.5, 0.02);
}

TEST(Settings, RoundTripAndOverrides) {
  auto doc = to_json(Settings{});
  apply_override(doc, "length.avg=32");
  apply_override(doc, "train.batching=triplet");
  apply_override(doc, "model.d=16");
  const auto s = settings_from_json(doc);
  EXPECT_EQ(s.train.lengths.avg_length, 32);
  EXPECT_EQ(s.train.batching, Batching::kTriplet);
  EXPECT_EQ(s.model.d, 16u);
  EXPECT_EQ(to_json(settings_from_json(to_json(s))), to_json(s));
}

TEST(Settings, UnknownKeyIsRejected) {
  auto doc = to_json(Settings{});
  doc["length"]["mean"] = 3;
  EXPECT_THROW(settings_from_json(doc), ConfigError);
  EXPECT_THROW(apply_override(doc, "no-equals-sign"), ConfigError);
}

TEST(Settings, SeedPropagates) {
  Settings s;
  s.seed = 77;
  propagate_seed(s);
  EXPECT_EQ(s.train.seed, 77u);
  EXPECT_EQ(s.data.seed, 77u);
}

}  // namespace
