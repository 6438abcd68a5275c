#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stca/model/checkpoint.hpp"
#include "stca/model/network.hpp"
#include "stca/model/tokens.hpp"
#include "stca/verify/oracles.hpp"
#include "test_util.hpp"

namespace {

using namespace stca;
using model::StcaConfig;
using numerics::Matrix;
using stca::testing::random_matrix;

StcaConfig small_config() {
  StcaConfig c;
  c.d = 8;
  c.heads = 2;
  c.ffn_ratio = 2;
  c.layers = 2;
  c.video_vocab = 50;
  c.action_vocab = 4;
  c.max_position = 64;
  c.user_tokens = 1;
  c.candidate_tokens = 1;
  return c;
}

History make_history(std::size_t n, std::mt19937_64& rng, Seconds t0 = 1000) {
  std::uniform_int_distribution<Id> vid(0, 49), act(0, 3);
  History h;
  for (std::size_t i = 0; i < n; ++i) {
    h.push_back({vid(rng), act(rng), static_cast<std::int64_t>(i), t0 + static_cast<Seconds>(10 * i)});
  }
  return h;
}

TEST(EncodeHistory, ZeroTablesGiveZeroMatrix) {
  const auto config = small_config();
  auto params = model::StcaParams<double>::initialize(config, 1);
  for (auto* p : {&params.video, &params.action, &params.position, &params.time_delta}) p->value.set_zero();
  std::mt19937_64 rng(1);
  const auto h = make_history(5, rng);
  const auto x = model::encode_history<double>(h, TargetItem{3, 5000, {}}, params, config);
  EXPECT_EQ(x.rows(), 5u);
  EXPECT_EQ(numerics::frobenius(x), 0.0);
}

TEST(Initialize, EmbeddingRangeFollowsConfig) {
  auto config = small_config();
  for (double bound : {0.01, 1.0}) {
    config.embed_init = bound;
    const auto params = model::StcaParams<double>::initialize(config, 4);
    double largest = 0;
    for (double v : params.video.value.values()) largest = std::max(largest, std::abs(v));
    EXPECT_LT(largest, bound);
    EXPECT_GT(largest, 0.9 * bound);
  }
  config.embed_init = 0;
  EXPECT_THROW(config.validate(), ConfigError);
}

TEST(EncodeHistory, SingleEventIsSumOfComponents) {
  const auto config = small_config();
  const auto params = verify::random_params(config, 2);
  const History h{{7, 2, 0, 1000}};
  const TargetItem t{1, 1000 + 3600, {}};
  const auto x = model::encode_history<double>(h, t, params, config);
  const auto bucket = model::time_delta_bucket(3600, config.time_buckets);
  for (std::size_t c = 0; c < config.d; ++c) {
    const double expect = params.video.value(7, c) + params.action.value(2, c) + params.position.value(0, c) +
                          params.time_delta.value(bucket, c);
    EXPECT_NEAR(x(0, c), expect, 1e-15);
  }
}

TEST(EncodeHistory, TimeDeltaBucketIsFloorLog2) {
  EXPECT_EQ(model::time_delta_bucket(3600, 32), 11u);
  EXPECT_EQ(model::time_delta_bucket(2048, 32), 11u);
  EXPECT_EQ(model::time_delta_bucket(4095, 32), 11u);
  EXPECT_EQ(model::time_delta_bucket(0, 32), 0u);
  EXPECT_EQ(model::time_delta_bucket(Seconds{1} << 40, 32), 31u);
}

TEST(EncodeHistory, UnknownIdsUseReservedRow) {
  const auto config = small_config();
  EXPECT_EQ(model::video_row(-3, config), config.video_vocab);
  EXPECT_EQ(model::video_row(static_cast<Id>(config.video_vocab) + 10, config), config.video_vocab);
  EXPECT_EQ(model::action_row(99, config), config.action_vocab);
}

struct AttentionFixture : ::testing::Test {
  std::mt19937_64 rng{42};
  model::AttentionParams<double> p = model::AttentionParams<double>::random(8, 2, 3);
};

TEST_F(AttentionFixture, SingleKeyIgnoresQuery) {
  const auto x = random_matrix(1, 8, rng);
  const auto a = model::cross_attention_layer<double>(random_matrix(1, 8, rng), x.view(), p);
  const auto b = model::cross_attention_layer<double>(random_matrix(1, 8, rng), x.view(), p);
  EXPECT_LT(numerics::max_abs_diff(a, b), 1e-14);
}

TEST_F(AttentionFixture, IdenticalRowsMatchSingleRow) {
  const auto row = random_matrix(1, 8, rng);
  Matrix<double> x(6, 8);
  for (std::size_t r = 0; r < 6; ++r) std::copy_n(row.data(), 8, x.row(r).data());
  const auto q = random_matrix(1, 8, rng);
  EXPECT_LT(numerics::max_abs_diff(model::cross_attention_layer<double>(q, x.view(), p),
                                   model::cross_attention_layer<double>(q, row.view(), p)),
            1e-14);
}

TEST_F(AttentionFixture, ReorderedMatchesStandard) {
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t L = 1 + trial;
    const auto q = random_matrix(1, 8, rng), x = random_matrix(L, 8, rng);
    const auto a = model::cross_attention_layer<double>(q, x.view(), p);
    const auto b = model::cross_attention_layer_reordered<double>(q, x.view(), p);
    EXPECT_LT(verify::max_relative_error(b, a), 1e-10);
  }
}

TEST_F(AttentionFixture, ReorderedMatchesStandardInSinglePrecision) {
  const auto pf = model::AttentionParams<float>::random(16, 4, 5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto q = random_matrix<float>(1, 16, rng), x = random_matrix<float>(40, 16, rng);
    const auto a = model::cross_attention_layer<float>(q, x.view(), pf);
    const auto b = model::cross_attention_layer_reordered<float>(q, x.view(), pf);
    EXPECT_LT(numerics::max_abs_diff(a, b) / std::max(1e-6f, numerics::frobenius(a)), 1e-5f);
  }
}

TEST_F(AttentionFixture, EmptyHistoryIsRejected) {
  const Matrix<double> x(0, 8);
  EXPECT_THROW(model::cross_attention_layer<double>(random_matrix(1, 8, rng), x.view(), p), EmptyHistoryError);
  EXPECT_THROW(model::cross_attention_layer_reordered<double>(random_matrix(1, 8, rng), x.view(), p), EmptyHistoryError);
}

TEST_F(AttentionFixture, ReorderedCacheWeightsAreProbabilities) {
  const auto q = random_matrix(1, 8, rng), x = random_matrix(17, 8, rng);
  const std::vector<std::size_t> qo{0, 1}, ko{0, 17};
  model::AttentionCache<double> cache;
  model::attend_ragged(q, x.view(), {qo, ko}, p, model::AttentionPath::kReordered, numerics::Exec::kSerial, &cache);
  for (const auto& w : cache.weights) {
    double sum = 0;
    for (double v : w.values()) {
      EXPECT_GE(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST_F(AttentionFixture, LengthDependentCostShrinksByTwiceHeadDim) {
  const std::size_t L = 512;
  const auto q = random_matrix(1, 8, rng), x = random_matrix(L, 8, rng);
  std::uint64_t standard = 0, reordered = 0;
  {
    numerics::CountingSession s;
    model::cross_attention_layer<double>(q, x.view(), p);
    standard = s.snapshot().mac(numerics::OpTag::kKeyValueProjection);
  }
  {
    numerics::CountingSession s;
    model::cross_attention_layer_reordered<double>(q, x.view(), p);
    reordered = s.snapshot().mac(numerics::OpTag::kWeightedSum);
  }
  EXPECT_EQ(standard, 2 * (2 * L * 8 * 4));
  EXPECT_EQ(reordered, L * 8 * 2);
  EXPECT_DOUBLE_EQ(static_cast<double>(standard) / static_cast<double>(reordered), 2.0 * 4);
}

TEST(FuseQuery, ZeroInputsGiveZeroQuery) {
  const auto config = small_config();
  const auto params = verify::random_params(config, 4);
  const std::vector<Matrix<double>> summaries{Matrix<double>(1, 8)};
  const auto q = model::fuse_query<double>(summaries, Matrix<double>(1, 8), params.layers[1].fuse,
                                           params.layers[1].ffn);
  EXPECT_EQ(numerics::frobenius(q), 0.0);
}

TEST(FuseQuery, SelectorWeightReducesToFfnOfSummary) {
  const auto config = small_config();
  const auto params = verify::random_params(config, 5);
  std::mt19937_64 rng(5);
  Matrix<double> selector(16, 8);
  for (std::size_t i = 0; i < 8; ++i) selector(i, i) = 1;
  const numerics::Param<double> w_c("fuse", selector);
  const std::vector<Matrix<double>> summaries{random_matrix(1, 8, rng)};
  const auto q = model::fuse_query<double>(summaries, random_matrix(1, 8, rng), w_c, params.layers[1].ffn);
  const auto expect = numerics::swiglu_forward(summaries[0], params.layers[1].ffn);
  EXPECT_LT(numerics::max_abs_diff(q, expect), 1e-15);
}

TEST(FuseQuery, WrongWidthIsRejected) {
  const auto config = small_config();
  const auto params = verify::random_params(config, 6);
  const std::vector<Matrix<double>> summaries{Matrix<double>(1, 8), Matrix<double>(1, 8)};
  EXPECT_THROW(model::fuse_query<double>(summaries, Matrix<double>(1, 8), params.layers[1].fuse,
                                         params.layers[1].ffn),
               DimensionError);
}

TEST(StcaForward, SameParametersRunAtAnyLength) {
  auto config = small_config();
  config.max_position = 8192;
  const auto params = model::StcaParams<float>::initialize(config, 3);
  std::mt19937_64 rng(3);
  for (std::size_t L : {16u, 4096u}) {
    const auto h = make_history(L, rng);
    const auto out = model::stca_forward<float>(h, TargetItem{4, h.back().timestamp + 5, {}}, params, config);
    EXPECT_EQ(out.z.rows(), 1u);
    EXPECT_EQ(out.z.cols(), config.d);
    EXPECT_EQ(out.summaries.rows(), config.layers);
    EXPECT_GT(out.y_hat, 0.0f);
    EXPECT_LT(out.y_hat, 1.0f);
  }
}

TEST(StcaForward, PermutationInvariantWithoutOrderFeatures) {
  auto config = small_config();
  config.layers = 1;
  config.use_position = false;
  config.use_time_delta = false;
  const auto params = verify::random_params(config, 7);
  std::mt19937_64 rng(7);
  auto h = make_history(12, rng);
  const TargetItem t{9, 99999, {}};
  const auto base = model::stca_forward<double>(h, t, params, config);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(h.begin(), h.end(), rng);
    const auto out = model::stca_forward<double>(h, t, params, config);
    EXPECT_NEAR(out.y_hat, base.y_hat, 1e-12);
  }
}

TEST(StcaForward, ExtraHistoryChangesPrediction) {
  const auto config = small_config();
  const auto params = verify::random_params(config, 8);
  std::mt19937_64 rng(8);
  const auto h = make_history(20, rng);
  const TargetItem t{9, 99999, {}};
  const std::span<const HistoryEvent> suffix(h.data() + 10, 10);
  const auto short_out = model::stca_forward<double>(suffix, t, params, config);
  const auto long_out = model::stca_forward<double>(h, t, params, config);
  EXPECT_GT(std::abs(short_out.y_hat - long_out.y_hat), 1e-9);
}

TEST(StcaForward, EmptyHistoryIsRejected) {
  const auto config = small_config();
  const auto params = verify::random_params(config, 9);
  EXPECT_THROW(model::stca_forward<double>({}, TargetItem{1, 1, {}}, params, config), EmptyHistoryError);
}

TEST(StcaForward, StandardAndReorderedNetworksAgree) {
  auto config = small_config();
  const auto params = verify::random_params(config, 10);
  std::mt19937_64 rng(10);
  const auto h = make_history(30, rng);
  const TargetItem t{2, 99999, {}};
  const auto a = model::stca_forward<double>(h, t, params, config);
  config.attention_path = model::AttentionPath::kStandard;
  const auto b = model::stca_forward<double>(h, t, params, config);
  EXPECT_NEAR(a.logit, b.logit, 1e-10 * std::max(1.0, std::abs(a.logit)));
}

TEST(StcaForward, CostIsAffineInLength) {
  auto config = small_config();
  config.layers = 1;
  config.max_position = 4096;
  const auto params = verify::random_params(config, 11);
  std::mt19937_64 rng(11);
  const auto h = make_history(400, rng);
  const TargetItem t{2, 99999, {}};
  auto macs = [&](std::size_t L) {
    numerics::CountingSession s;
    model::stca_forward<double>(std::span<const HistoryEvent>(h.data() + h.size() - L, L), t, params, config);
    return static_cast<std::int64_t>(s.snapshot().total_macs());
  };
  const std::size_t L = 100;
  EXPECT_EQ(macs(2 * L) - macs(L), macs(4 * L) - macs(3 * L));
}

TEST(StcaGradient, EveryParameterGroupMatchesFiniteDifferences) {
  const auto groups = verify::model_gradient_check({});
  ASSERT_FALSE(groups.empty());
  bool saw_fusion = false;
  for (const auto& g : groups) {
    EXPECT_LT(g.error, 1e-4) << g.name;
    saw_fusion |= g.name.find("fuse") != std::string::npos;
  }
  EXPECT_TRUE(saw_fusion);
}

TEST(Bce, HandValues) {
  EXPECT_NEAR(model::bce_loss(0.5, 1), std::log(2.0), 1e-12);
  EXPECT_NEAR(model::bce_loss(0.5, 0), 0.693147, 1e-6);
  EXPECT_NEAR(model::bce_loss(0.9, 1), 0.105361, 1e-6);
  EXPECT_NEAR(model::bce_loss(0.9, 0), 2.302585, 1e-6);
}

TEST(Bce, ClampKeepsLossFinite) {
  EXPECT_NEAR(model::bce_loss(0.0, 1), -std::log(1e-7), 1e-9);
  EXPECT_NEAR(model::bce_loss(1.0, 0), -std::log(1e-7), 1e-6);
  EXPECT_TRUE(std::isfinite(model::bce_with_logit<double>(1e4, 0.0)));
}

TEST(Bce, LogitFormMatchesProbabilityForm) {
  for (double l : {-5.0, -0.3, 0.0, 1.7, 6.0}) {
    const double p = 1.0 / (1.0 + std::exp(-l));
    for (double y : {0.0, 1.0}) EXPECT_NEAR(model::bce_with_logit<double>(l, y), model::bce_loss(p, y), 1e-12);
  }
}

TEST(Checkpoint, RoundTripPreservesConfigAndTensors) {
  const auto config = small_config();
  const auto params = model::StcaParams<float>::initialize(config, 12);
  std::stringstream buf;
  model::write_checkpoint(buf, config, params);
  const auto back = model::read_checkpoint(buf);
  EXPECT_EQ(back.config, config);
  const auto a = params.all();
  const auto b = back.params.all();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i]->name, b[i]->name);
    EXPECT_EQ(numerics::max_abs_diff(a[i]->value, b[i]->value), 0.0f);
  }
}

TEST(Checkpoint, BadMagicIsRejected) {
  std::stringstream buf("NOPE!garbage");
  EXPECT_THROW(model::read_checkpoint(buf), FormatError);
}

TEST(Checkpoint, TruncatedFileIsRejected) {
  const auto config = small_config();
  std::stringstream buf;
  model::write_checkpoint(buf, config, model::StcaParams<float>::initialize(config, 13));
  const auto s = buf.str();
  std::stringstream cut(s.substr(0, s.size() - 10));
  EXPECT_THROW(model::read_checkpoint(cut), FormatError);
}

TEST(Config, HeadsMustDivideWidth) {
  auto config = small_config();
  config.heads = 3;
  EXPECT_THROW(config.validate(), ConfigError);
}

}  // namespace
