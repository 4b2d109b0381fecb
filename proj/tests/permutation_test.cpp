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

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "oracle.hpp"
#include "psfc/error.hpp"
#include "psfc/permutation.hpp"
#include "psfc/protocol_types.hpp"

namespace psfc {
namespace {

Permutation P(std::vector<int> m) { return Permutation(std::move(m)); }

TEST(Permutation, RejectsNonBijections) {
  EXPECT_THROW(P({1, 1}), Error);
  EXPECT_THROW(P({0, 1}), Error);
  EXPECT_THROW(P({1, 3}), Error);
  EXPECT_THROW(Permutation::parse_display("1,2,x"), Error);
  EXPECT_THROW(Permutation::parse_display(""), Error);
}

TEST(Permutation, DisplayOrderIsRightToLeft) {
  const auto s = Permutation::parse_display("1,3,4,2");
  EXPECT_EQ(s(4), 1);
  EXPECT_EQ(s(3), 3);
  EXPECT_EQ(s(2), 4);
  EXPECT_EQ(s(1), 2);
  EXPECT_EQ(s.to_display(), "(1 3 4 2)");
  EXPECT_EQ(s.to_cli(), "1,3,4,2");
  EXPECT_EQ(Permutation::parse_display("4 3 2 1"), Permutation::identity(4));
}

TEST(InversePermutation, Examples) {
  EXPECT_EQ(inverse_permutation(Permutation::identity(5)), Permutation::identity(5));
  EXPECT_EQ(inverse_permutation(P({2, 3, 1})), P({3, 1, 2}));
  EXPECT_EQ(inverse_permutation(P({1, 4, 3, 2})), P({1, 4, 3, 2}));
}

TEST(InversePermutation, IsAnInvolutionAndComposesToIdentity) {
  for (int k = 1; k <= 6; ++k) {
    for (const auto& s : enumerate_permutations(k)) {
      const auto pi = inverse_permutation(s);
      EXPECT_EQ(inverse_permutation(pi), s);
      for (int j = 1; j <= k; ++j) EXPECT_EQ(pi(s(j)), j);
    }
  }
}

TEST(EnumeratePermutations, Examples) {
  EXPECT_EQ(enumerate_permutations(1), std::vector<Permutation>{P({1})});
  EXPECT_EQ(enumerate_permutations(2), (std::vector<Permutation>{P({1, 2}), P({2, 1})}));
  EXPECT_EQ(enumerate_permutations(4).size(), 24u);
  const auto all = enumerate_permutations(5);
  EXPECT_EQ(std::set<Permutation>(all.begin(), all.end()).size(), 120u);
  EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
  try {
    enumerate_permutations(9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kKTooLarge);
  }
}

TEST(ComposeReference, Examples) {
  const PrimeModulus p(5);
  const std::vector<FieldMatrix> f{FieldMatrix::from_rows({{2}}, p),
                                   FieldMatrix::from_rows({{3}}, p)};
  EXPECT_EQ(compose_reference(f, Permutation::parse_display("1,2"), make_vector({4}, p), p),
            make_vector({4}, p));
  EXPECT_EQ(compose_reference(std::span(f).first(1), Permutation::identity(1),
                              make_vector({4}, p), p),
            make_vector({3}, p));
  EXPECT_THROW(compose_reference(f, Permutation::identity(3), make_vector({4}, p), p), Error);
}

TEST(ComposeReference, AppliesSigmaOneFirst) {
  const PrimeModulus p(7);
  Rng rng(3);
  std::vector<FieldMatrix> f;
  for (int k = 0; k < 3; ++k) f.push_back(sample_invertible_matrix(2, p, rng));
  const auto w = sample_uniform_vector(2, p, rng);
  for (const auto& s : enumerate_permutations(3)) {
    EXPECT_EQ(compose_reference(f, s, w, p), oracle::compose(f, s, w, 7));
  }
  // identity with K = 2 is F_2(F_1 w).
  EXPECT_EQ(compose_reference(std::span(f).first(2), Permutation::identity(2), w, p),
            mat_vec_mul(f[1], mat_vec_mul(f[0], w, p), p));
}

TEST(RandomPermutation, CoversSymmetricGroupUniformly) {
  Rng rng(17);
  std::map<Permutation, int> counts;
  const int draws = 60000;
  for (int i = 0; i < draws; ++i) ++counts[random_permutation(3, rng)];
  ASSERT_EQ(counts.size(), 6u);
  for (const auto& [s, c] : counts) EXPECT_NEAR(c / static_cast<double>(draws), 1.0 / 6, 0.01);
}

TEST(Rational, ReducesAndOrders) {
  EXPECT_EQ(Rational::make(8, 36), (Rational{2, 9}));
  EXPECT_EQ(Rational::make(0, 5), (Rational{0, 1}));
  EXPECT_EQ(Rational::make(800, 927).str(), "800/927");
  EXPECT_LT(Rational::make(1, 3), Rational::make(1, 2));
  EXPECT_THROW(Rational::make(1, 0), Error);
}

}  // namespace
}  // namespace psfc
