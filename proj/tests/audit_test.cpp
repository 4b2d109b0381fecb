// Copyright 2026 The PSFC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <vector>

#include "psfc/audit.hpp"
#include "psfc/stats.hpp"

namespace psfc {
namespace {

using audit::FunctionMode;

RunReport report_for(int K, int N, int M) {
  ProtocolConfig c{K, N, M, 1, 5, 1};
  const PrimeModulus p(5);
  Rng rng(3);
  const auto f = audit::sample_functions(K, 1, p, rng);
  const auto w = audit::sample_inputs(M, 1, p, rng);
  auto t = SimTransport::with_servers(N, p, f);
  return run_protocol(c, Permutation::identity(K), w, t).report;
}

TEST(Stats, ChiSquare) {
  const std::vector<std::uint64_t> flat{1000, 1000, 1000, 1000};
  EXPECT_NEAR(stats::chi_square_uniform(flat).p_value, 1.0, 1e-12);
  const std::vector<std::uint64_t> skew{1200, 1000, 1000, 800};
  const auto r = stats::chi_square_uniform(skew);
  EXPECT_NEAR(r.statistic, 80.0, 1e-9);
  EXPECT_EQ(r.dof, 3.0);
  EXPECT_LT(r.p_value, 1e-15);
  // Statistic 3.8416 sits at the 0.95 quantile of chi2(1).
  const std::vector<std::uint64_t> edge{5098, 4902};
  EXPECT_NEAR(stats::chi_square_uniform(edge).p_value, 0.05, 1e-4);
}

TEST(Stats, TotalVariation) {
  const std::vector<std::uint64_t> a{1, 0}, b{0, 1}, c{2, 2};
  EXPECT_DOUBLE_EQ(stats::total_variation(a, b), 1.0);
  EXPECT_DOUBLE_EQ(stats::total_variation(a, c), 0.5);
  EXPECT_DOUBLE_EQ(stats::tv_to_uniform(c), 0.0);
  EXPECT_DOUBLE_EQ(stats::tv_to_uniform(a), 0.5);
}

TEST(FingerprintInvariance, Examples) {
  auto v = audit::fingerprint_invariance({3, 2, 2, 1, 5, 1});
  EXPECT_TRUE(v.invariant);
  EXPECT_EQ(v.sigmas_checked, 6u);
  EXPECT_EQ(v.reference[0], (std::vector<int>{1, 3, 1, 3, 1, 3, 1, 3}));
  EXPECT_EQ(v.reference[1], (std::vector<int>{2, 3, 2, 3, 2, 3, 2, 3}));
  EXPECT_TRUE(audit::fingerprint_invariance({4, 3, 2, 2, 5, 1}).invariant);
  auto chain = audit::fingerprint_invariance({2, 2, 3, 1, 5, 1});
  EXPECT_TRUE(chain.invariant);
  EXPECT_EQ(chain.reference[0], (std::vector<int>{1, 1, 1}));
}

TEST(FingerprintInvariance, SamplesLargeK) {
  audit::FingerprintOptions o{7, 3, 2, 1, 5, 1, 10};
  auto v = audit::fingerprint_invariance(o);
  EXPECT_TRUE(v.sampled);
  EXPECT_EQ(v.sigmas_checked, 10u);
  EXPECT_TRUE(v.invariant);
}

TEST(Uniformity, PassesOnTheRealScheme) {
  for (auto mode : {FunctionMode::kResample, FunctionMode::kFixed}) {
    audit::UniformityOptions o;
    o.trials = 40000;
    o.tv_threshold = 0.05;
    o.mode = mode;
    const auto v = audit::uniformity_test(o);
    EXPECT_TRUE(v.chi_pass) << v.min_p_value;
    EXPECT_TRUE(v.tv_pass) << v.max_pair_tv;
    EXPECT_EQ(v.sigmas.size(), 6u);
    EXPECT_GE(v.slot_pass_fraction, 0.9);
  }
}

TEST(Uniformity, GuardExceeded) {
  audit::UniformityOptions o;
  o.p = 37;
  o.trials = 10;
  try {
    audit::uniformity_test(o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGuardExceeded);
  }
}

TEST(Attack, TrivialForOneFunction) {
  audit::AttackOptions o;
  o.K = 1;
  o.N = 1;
  o.M = 1;
  o.trials = 20;
  const auto v = audit::attack_campaign(o);
  EXPECT_EQ(v.successes, 20u);
  EXPECT_TRUE(v.pass);
}

TEST(Attack, BreaksTheNaiveSchedule) {
  audit::AttackOptions o;
  o.negative_control = true;
  o.trials = 300;
  const auto v = audit::attack_campaign(o);
  EXPECT_GT(v.rate, 0.9);
  EXPECT_TRUE(v.pass);
}

TEST(Attack, NoBetterThanGuessingOnTheRealScheme) {
  audit::AttackOptions o;
  o.trials = 3000;
  const auto v = audit::attack_campaign(o);
  EXPECT_NEAR(v.expected, 1.0 / 6, 1e-12);
  EXPECT_TRUE(v.pass) << v.rate;
}

TEST(Rate, Examples) {
  for (int mp : {1, 10, 100}) {
    const auto v = audit::rate_report(report_for(4, 3, 2 * mp));
    EXPECT_EQ(v.measured, Rational::make(8ULL * mp, 9ULL * mp + 27));
    EXPECT_EQ(v.limit, Rational::make(8, 9));
    EXPECT_TRUE(v.ok);
  }
  EXPECT_EQ(audit::rate_report(report_for(3, 3, 4)).measured, (Rational{1, 1}));
  EXPECT_EQ(audit::rate_report(report_for(2, 5, 4)).measured, (Rational{1, 1}));
  EXPECT_EQ(audit::achievable_limit(3, 2), Rational::make(3, 4));
  EXPECT_DOUBLE_EQ(audit::capacity_lower_bound(3, 2), 0.75);
  EXPECT_DOUBLE_EQ(audit::capacity_lower_bound(2, 3), 1.0);
}

TEST(Converse, Examples) {
  const auto v = audit::converse_counts(report_for(4, 3, 4), 4, 4);
  EXPECT_TRUE(v.ok);
  EXPECT_EQ(v.D_k, (std::vector<std::uint64_t>{10, 10, 10, 15}));
  const auto chain = audit::converse_counts(report_for(3, 3, 4), 3, 4);
  EXPECT_EQ(chain.slack, (std::vector<std::int64_t>{0, 0, 0}));
  const auto fb = audit::converse_counts(report_for(3, 1, 2), 3, 2);
  EXPECT_EQ(fb.D_k, (std::vector<std::uint64_t>{12, 12, 12}));
}

TEST(RankDecay, Examples) {
  Rng rng(5);
  const auto tight = audit::rank_decay_experiment(1, 1, 2, 40000, rng);
  EXPECT_DOUBLE_EQ(tight.bound, 0.5);
  EXPECT_NEAR(tight.empirical, 0.5, 0.01);
  const auto a = audit::rank_decay_experiment(10, 3, 2, 20000, rng);
  EXPECT_DOUBLE_EQ(a.bound, 7.0 / 1024);
  EXPECT_TRUE(a.pass);
  const auto b = audit::rank_decay_experiment(8, 2, 5, 20000, rng);
  EXPECT_DOUBLE_EQ(b.bound, 24.0 / (390625.0 * 4));
  EXPECT_TRUE(b.pass);
  const auto certain = audit::rank_decay_experiment(2, 3, 5, 10, rng);
  EXPECT_TRUE(certain.certain);
  EXPECT_DOUBLE_EQ(certain.empirical, 1.0);
}

TEST(CheckJson, Shape) {
  audit::RankDecayResult r;
  r.pass = true;
  const auto j = audit::to_json(audit::as_check(r));
  EXPECT_EQ(j["check"], "rank_decay");
  EXPECT_TRUE(j.contains("statistic"));
  EXPECT_TRUE(j.contains("threshold"));
  EXPECT_EQ(j["pass"], true);
}

}  // namespace
}  // namespace psfc
