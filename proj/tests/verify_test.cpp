#include <gtest/gtest.h>

#include <cmath>

#include "stca/verify/verify.hpp"

namespace {

using namespace stca::verify;

TEST(OracleResult, PassIffWithinTolerance) {
  EXPECT_TRUE(make_result("a", 1e-3, 1e-3, 1).pass);
  EXPECT_FALSE(make_result("a", 2e-3, 1e-3, 1).pass);
  EXPECT_FALSE(make_result("a", std::nan(""), 1.0, 1).pass);
}

TEST(RunAll, DefaultSeedPasses) {
  const auto results = run_all();
  EXPECT_GE(results.size(), 17u);
  for (const auto& r : results) EXPECT_TRUE(r.pass) << r.name << " error " << r.max_error;
  EXPECT_TRUE(all_passed(results));
}

TEST(RunAll, IsDeterministic) { EXPECT_EQ(run_all(), run_all()); }

TEST(RunAll, JsonCarriesEveryResult) {
  const auto results = run_all();
  const auto j = results_json(results);
  ASSERT_EQ(j.size(), results.size());
  for (const auto& r : j) EXPECT_EQ(r["status"], "pass") << r["name"];
}

class MutationTest : public ::testing::TestWithParam<AttentionMatrix> {};

TEST_P(MutationTest, CorruptedWeightIsDetected) {
  VerifyOptions opts;
  opts.mutation = Mutation{GetParam(), 0, 0.5};
  const auto results = run_all(opts);
  EXPECT_FALSE(all_passed(results));
  bool attention_failed = false;
  for (const auto& r : results) attention_failed |= r.name == "attention_equivalence" && !r.pass;
  EXPECT_TRUE(attention_failed);
}

INSTANTIATE_TEST_SUITE_P(EveryMatrix, MutationTest,
                         ::testing::Values(AttentionMatrix::kQuery, AttentionMatrix::kKey, AttentionMatrix::kValue,
                                           AttentionMatrix::kOutput));

}  // namespace
