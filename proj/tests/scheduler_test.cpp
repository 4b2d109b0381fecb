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

#include <map>
#include <utility>
#include <vector>

#include "oracle.hpp"
#include "psfc/error.hpp"
#include "psfc/permutation.hpp"
#include "psfc/scheduler.hpp"

namespace psfc {
namespace {

std::vector<int> repeat(const std::vector<int>& unit, int times) {
  std::vector<int> out;
  for (int t = 0; t < times; ++t) out.insert(out.end(), unit.begin(), unit.end());
  return out;
}

const PlannedQuery* find_query(const QueryPlan& plan, int block, int server, int phase,
                               int nth = 0) {
  for (const auto& q : plan.queries) {
    if (q.block == block && q.server == server && q.phase == phase && nth-- == 0) return &q;
  }
  return nullptr;
}

TEST(BuildBlocks, FunctionAssignment) {
  const auto b43 = build_blocks(4, 3, 5);
  ASSERT_EQ(b43.size(), 8u);
  for (const auto& block : b43) {
    for (int n = 1; n <= 3; ++n) {
      EXPECT_EQ(block.servers[n - 1].phase1, (std::vector<int>{n, n}));
      EXPECT_EQ(block.servers[n - 1].phase2, (std::vector<int>{4}));
    }
    EXPECT_EQ(block.query_count(), 9u);
  }
  const auto b32 = build_blocks(3, 2, 1);
  EXPECT_EQ(b32.size(), 3u);
  EXPECT_EQ(b32[0].servers[0].phase1, std::vector<int>{1});
  EXPECT_EQ(b32[0].servers[0].phase2, std::vector<int>{3});
  EXPECT_EQ(b32[0].servers[1].phase1, std::vector<int>{2});
  EXPECT_EQ(b32[0].servers[1].phase2, std::vector<int>{3});
}

TEST(BuildBlocks, RejectsOtherRegimes) {
  for (auto [k, n] : std::vector<std::pair<int, int>>{{3, 3}, {2, 4}, {3, 1}}) {
    try {
      build_blocks(k, n, 2);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidRegime);
    }
  }
}

TEST(PlanVectors, MaskedPhaseTwoInputForOrder1342) {
  const auto sigma = Permutation::parse_display("1,3,4,2");
  const auto plan = plan_vectors(sigma, 4, 3, 2, build_blocks(4, 3, 2));
  const PlannedQuery* q = find_query(plan, 2, 1, 2);
  ASSERT_NE(q, nullptr);
  EXPECT_EQ(q->function, 4);
  EXPECT_EQ(q->input.kind, InputKind::kMaskedTaskInput);
  EXPECT_EQ(input_expr_string(q->input), "In1(R[1]^2)+Z[2,1]");
  // Server 3 receives the raw mask in the same slot.
  const PlannedQuery* raw = find_query(plan, 2, 3, 2);
  ASSERT_NE(raw, nullptr);
  EXPECT_EQ(input_expr_string(raw->input), "Z[2,1]");
}

TEST(PlanVectors, PhaseOneInputsForIdentityOrder) {
  const auto sigma = Permutation::parse_display("4,3,2,1");
  const auto plan = plan_vectors(sigma, 4, 3, 3, build_blocks(4, 3, 3));
  const PlannedQuery* a = find_query(plan, 2, 1, 1, 0);
  const PlannedQuery* b = find_query(plan, 2, 1, 1, 1);
  ASSERT_TRUE(a && b);
  EXPECT_EQ(input_expr_string(a->input), "W[2,1]");
  EXPECT_EQ(input_expr_string(b->input), "W[2,2]");
}

TEST(PlanVectors, OutOfRangeBatchesBecomePlaceholders) {
  const int K = 4, N = 3, Mp = 3;
  for (const auto& sigma : enumerate_permutations(K)) {
    const auto pi = inverse_permutation(sigma);
    const auto plan = plan_vectors(sigma, K, N, Mp, build_blocks(K, N, Mp));
    for (const auto& q : plan.queries) {
      if (q.phase == 2 && q.server == N) {
        EXPECT_EQ(q.input.kind, InputKind::kRawMask);
        continue;
      }
      const int batch = q.block - pi(q.function) + 1;
      const bool in_range = batch >= 1 && batch <= Mp;
      const bool placeholder = q.input.kind == InputKind::kPlaceholder ||
                               q.input.kind == InputKind::kMaskedPlaceholder;
      EXPECT_EQ(placeholder, !in_range) << "query " << q.seq;
      if (in_range) {
        EXPECT_EQ(q.input.task.batch, batch);
        EXPECT_EQ(q.input.task.step, pi(q.function));
      }
    }
  }
}

TEST(ScheduleChain, Examples) {
  const auto p1 = schedule_chain(Permutation::parse_display("2,1"), 2, 2);
  ASSERT_EQ(p1.queries.size(), 2u);
  EXPECT_EQ(p1.queries[0].server, 1);
  EXPECT_EQ(p1.queries[0].function, 1);
  EXPECT_EQ(p1.queries[0].input.position, 0);
  EXPECT_EQ(p1.queries[1].server, 2);
  EXPECT_EQ(p1.queries[1].function, 2);
  EXPECT_EQ(p1.queries[1].input.position, 1);

  const auto p2 = schedule_chain(Permutation::parse_display("1,2"), 2, 2);
  EXPECT_EQ(p2.queries[0].server, 2);
  EXPECT_EQ(p2.queries[0].function, 2);
  EXPECT_EQ(p2.queries[1].server, 1);
  EXPECT_EQ(p2.queries[1].function, 1);

  const auto p3 = schedule_chain(Permutation::identity(1), 1, 1);
  ASSERT_EQ(p3.queries.size(), 1u);
  EXPECT_EQ(p3.queries[0].server, 1);

  EXPECT_THROW(schedule_chain(Permutation::identity(3), 3, 2), Error);
}

TEST(ScheduleFallback, Counts) {
  EXPECT_EQ(schedule_fallback(1, 2).queries.size(), 4u);
  EXPECT_EQ(schedule_fallback(1, 3).queries.size(), 18u);
  EXPECT_TRUE(schedule_fallback(0, 3).queries.empty());
  for (const auto& q : schedule_fallback(2, 3).queries) EXPECT_EQ(q.server, 1);
  EXPECT_THROW(schedule_fallback(1, 9), Error);
}

TEST(QueryCount, Examples) {
  for (int mp : {1, 2, 5, 100}) EXPECT_EQ(query_count(4, 3, 2 * mp), 9u * mp + 27);
  EXPECT_EQ(query_count(2, 2, 7), 14u);
  EXPECT_EQ(query_count(3, 2, 5), 28u);
  EXPECT_EQ(query_count(2, 2, 1), 2u);
  EXPECT_EQ(query_count(3, 1, 2), 2u * 3 * 6);
  // M' = 0: only the fallback term.
  EXPECT_EQ(query_count(4, 3, 1), 4u * 24);
  // Remainder: one batch plus one leftover request.
  EXPECT_EQ(query_count(4, 3, 3), (1u + 3) * 3 * 3 + 4 * 24);
}

struct Dims {
  int K, N, M;
};

std::vector<Dims> grid() {
  std::vector<Dims> out;
  for (int K = 1; K <= 5; ++K)
    for (int N = 1; N <= K + 1; ++N)
      for (int M = 1; M <= 6; ++M) out.push_back({K, N, M});
  return out;
}

TEST(PlanProtocol, SizeMatchesQueryCountAndIsFeasible) {
  Rng rng(1);
  for (auto [K, N, M] : grid()) {
    for (int t = 0; t < 3; ++t) {
      const auto sigma = random_permutation(K, rng);
      const auto plan = plan_protocol(K, N, M, sigma);
      EXPECT_EQ(plan.queries.size(), query_count(K, N, M)) << K << " " << N << " " << M;
      EXPECT_EQ(plan.outputs.size(), static_cast<std::size_t>(M));
      const auto f = check_feasibility(plan);
      EXPECT_TRUE(f.ok) << K << " " << N << " " << M << ": " << f.detail;
    }
  }
}

TEST(PlanProtocol, PerFunctionCounts) {
  for (int K = 3; K <= 5; ++K) {
    for (int N = 2; N < K; ++N) {
      for (int Mp : {1, 3}) {
        const auto plan = plan_protocol(K, N, Mp * (N - 1), Permutation::identity(K));
        std::vector<std::size_t> dk(K, 0);
        for (const auto& q : plan.queries) ++dk[q.function - 1];
        for (int k = 1; k <= K; ++k) {
          const std::size_t expect = (k <= N ? N - 1 : N) * static_cast<std::size_t>(Mp + K - 1);
          EXPECT_EQ(dk[k - 1], expect);
        }
      }
    }
  }
}

TEST(Fingerprints, IndependentOfSigma) {
  for (int K = 1; K <= 5; ++K) {
    for (int N = 1; N <= K + 1; ++N) {
      for (int M = 1; M <= 4; ++M) {
        const auto all = enumerate_permutations(K);
        const auto ref = plan_fingerprints(plan_protocol(K, N, M, all.front()));
        for (const auto& s : all) {
          ASSERT_EQ(plan_fingerprints(plan_protocol(K, N, M, s)), ref)
              << K << " " << N << " " << M << " " << s.to_display();
        }
      }
    }
  }
}

TEST(Fingerprints, MatchBlockStructure) {
  const int Mp = 2;
  auto ex2 = plan_fingerprints(plan_protocol(3, 2, Mp, Permutation::identity(3)));
  EXPECT_EQ(ex2[0], repeat({1, 3}, Mp + 2));
  EXPECT_EQ(ex2[1], repeat({2, 3}, Mp + 2));
  auto ex3 = plan_fingerprints(plan_protocol(4, 3, 2 * Mp, Permutation::identity(4)));
  for (int n = 1; n <= 3; ++n) EXPECT_EQ(ex3[n - 1], repeat({n, n, 4}, Mp + 3));
  for (int K = 3; K <= 5; ++K) {
    for (int N = 2; N < K; ++N) {
      auto fp = plan_fingerprints(plan_protocol(K, N, N - 1, Permutation::identity(K)));
      for (int n = 1; n <= N; ++n) {
        EXPECT_EQ(fp[n - 1], repeat(oracle::block_fingerprint(K, N, n), K));
      }
    }
  }
  auto chain = plan_fingerprints(plan_protocol(2, 2, 3, Permutation::parse_display("1,2")));
  EXPECT_EQ(chain[0], repeat({1}, 3));
  EXPECT_EQ(chain[1], repeat({2}, 3));
}

TEST(Feasibility, DetectsBrokenPlans) {
  const auto good = plan_protocol(4, 3, 4, Permutation::parse_display("1,3,4,2"));
  ASSERT_TRUE(check_feasibility(good).ok);

  // Read a value before it exists: point an early task input at a later step.
  auto early = good;
  for (auto& q : early.queries) {
    if (q.input.kind == InputKind::kTaskInput) {
      q.input.task.step += 1;
      break;
    }
  }
  EXPECT_FALSE(check_feasibility(early).ok);

  // Reuse a mask from another block.
  auto mask = good;
  for (auto& q : mask.queries) {
    if (q.input.kind == InputKind::kMaskedTaskInput && q.block > 1) {
      q.input.mask.block -= 1;
      break;
    }
  }
  EXPECT_FALSE(check_feasibility(mask).ok);

  // Drop the last query.
  auto truncated = good;
  truncated.queries.pop_back();
  EXPECT_FALSE(check_feasibility(truncated).ok);
}

TEST(Feasibility, EachMaskFeedsExactlyNQueries) {
  for (const auto& sigma : enumerate_permutations(4)) {
    const auto plan = plan_protocol(4, 3, 4, sigma);
    std::map<MaskId, int> uses;
    for (const auto& q : plan.queries) {
      const auto k = q.input.kind;
      if (k == InputKind::kMaskedTaskInput || k == InputKind::kRawMask ||
          k == InputKind::kMaskedPlaceholder) {
        EXPECT_EQ(q.input.mask.block, q.block);
        ++uses[q.input.mask];
      }
    }
    EXPECT_EQ(uses.size(), static_cast<std::size_t>(plan.num_blocks * 1));
    for (const auto& [z, n] : uses) EXPECT_EQ(n, 3);
  }
}

TEST(PlanProtocol, OutputLayout) {
  const auto plan = plan_protocol(4, 3, 4, Permutation::identity(4));
  ASSERT_EQ(plan.outputs.size(), 4u);
  const std::vector<std::pair<int, int>> expect{{1, 1}, {1, 2}, {2, 1}, {2, 2}};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(plan.outputs[i].batch, expect[i].first);
    EXPECT_EQ(plan.outputs[i].component, expect[i].second);
  }
}

}  // namespace
}  // namespace psfc
