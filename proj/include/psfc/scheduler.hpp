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

// Query planning.
//
// Three regimes:
//   * K <= N: one chain per request; server n always evaluates F_n.
//   * K > N >= 2: M' = floor(M / (N-1)) batches run through M'+K-1 identical
//     blocks. In each block server n first evaluates F_n on N-1 inputs
//     (phase 1), then every server evaluates F_{N+1}, ..., F_K once each
//     (phase 2). Phase-2 inputs at servers 1..N-1 are masked with Z_{m,i};
//     server N receives Z_{m,i} itself so the client can cancel the image.
//   * Leftover requests (and all requests when N = 1): server 1 evaluates
//     every one of the K! composition chains.
//
// The plan is symbolic; the client materializes vectors at execution time.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "psfc/error.hpp"
#include "psfc/permutation.hpp"
#include "psfc/protocol_types.hpp"

namespace psfc {

/// Function rows one server evaluates in one block.
struct ServerRows {
  std::vector<int> phase1;
  std::vector<int> phase2;

  friend bool operator==(const ServerRows&, const ServerRows&) = default;
};

struct BlockPlan {
  int index = 0;
  std::vector<ServerRows> servers;  // servers[n-1]

  std::size_t query_count() const {
    std::size_t total = 0;
    for (const auto& s : servers) total += s.phase1.size() + s.phase2.size();
    return total;
  }
};

enum class InputKind {
  kRawInput,           // W_{b,i} = In_i(R_b^1)
  kTaskInput,          // In_i(R_b^k), k >= 2, read from out_i(R_b^{k-1})
  kMaskedTaskInput,    // In_i(R_b^k) + Z_{m,j}
  kRawMask,            // Z_{m,j}
  kPlaceholder,        // fresh Z_*
  kMaskedPlaceholder,  // fresh Z_* + Z_{m,j}
  kChainInput,         // value at `position` of a chain (position 0 = W)
};

struct InputExpr {
  InputKind kind = InputKind::kPlaceholder;
  TaskRef task;
  int component = 0;
  MaskId mask;
  int placeholder = 0;
  int request = 0;
  int chain = 0;
  int position = 0;
};

enum class OutputKind {
  kDiscard,
  kTaskOutput,        // out_i(R_b^k)
  kMaskedTaskOutput,  // F(In_i(R_b^k) + Z) awaiting the mask image
  kMaskImage,         // F_{N+j} Z_{m,j}
  kChainOutput,       // value at `position` of a chain
};

struct OutputSlot {
  OutputKind kind = OutputKind::kDiscard;
  TaskRef task;
  int component = 0;
  MaskId mask;
  int request = 0;
  int chain = 0;
  int position = 0;
};

struct PlannedQuery {
  std::size_t seq = 0;
  int server = 0;
  int function = 0;
  int block = 0;  // 0 for chain and fallback queries
  int phase = 0;  // 1 or 2 inside blocks, 0 otherwise
  InputExpr input;
  OutputSlot output;
};

/// Where decoded output m comes from.
struct OutputSource {
  enum class Kind { kTask, kChain } kind = Kind::kTask;
  int batch = 0;
  int component = 0;
  int request = 0;
  int chain = 0;
};

enum class Regime { kChain, kBlocks, kFallbackOnly };

struct QueryPlan {
  int K = 0;
  int N = 0;
  int M = 0;
  int M_prime = 0;
  int leftover = 0;
  Regime regime = Regime::kChain;
  int num_blocks = 0;
  int num_placeholders = 0;
  std::vector<PlannedQuery> queries;
  std::vector<OutputSource> outputs;  // size M, in input order
};

inline void validate_dims(int K, int N, int M) {
  if (K < 1 || N < 1 || M < 1) {
    throw Error(ErrorCode::kInvalidArgument, "K, N, M must all be >= 1");
  }
}

/// M'+K-1 identical blocks; no dependence on sigma.
inline std::vector<BlockPlan> build_blocks(int K, int N, int M_prime) {
  if (N < 2 || K <= N) {
    throw Error(ErrorCode::kInvalidRegime,
                "build_blocks needs K > N >= 2 (K=" + std::to_string(K) +
                    ", N=" + std::to_string(N) + ")");
  }
  if (M_prime < 1) throw Error(ErrorCode::kInvalidArgument, "M' must be >= 1");
  std::vector<BlockPlan> blocks;
  blocks.reserve(M_prime + K - 1);
  for (int m = 1; m <= M_prime + K - 1; ++m) {
    BlockPlan b{m, {}};
    for (int n = 1; n <= N; ++n) {
      ServerRows rows;
      rows.phase1.assign(N - 1, n);
      for (int k = N + 1; k <= K; ++k) rows.phase2.push_back(k);
      b.servers.push_back(std::move(rows));
    }
    blocks.push_back(std::move(b));
  }
  return blocks;
}

namespace detail {

class PlanBuilder {
 public:
  explicit PlanBuilder(QueryPlan& plan) : plan_(plan) {}

  void emit(int server, int function, int block, int phase, InputExpr in,
            OutputSlot out) {
    PlannedQuery q;
    q.seq = plan_.queries.size();
    q.server = server;
    q.function = function;
    q.block = block;
    q.phase = phase;
    q.input = in;
    q.output = out;
    plan_.queries.push_back(q);
  }

  int fresh_placeholder() { return ++plan_.num_placeholders; }

 private:
  QueryPlan& plan_;
};

}  // namespace detail

/// Vector assignment for the block regime; appends to `plan`.
///
/// In block m, task R^{pi_k}_{m - pi_k + 1} is the one F_k can serve. Any
/// batch index outside [1..M'] (before the pipeline fills or after it drains)
/// becomes a fresh placeholder; the query is still issued so the server-side
/// schedule never changes.
inline void plan_vectors_into(QueryPlan& plan, const Permutation& sigma, int K,
                              int N, int M_prime,
                              const std::vector<BlockPlan>& blocks) {
  if (sigma.size() != K) {
    throw Error(ErrorCode::kInvalidPermutation, "sigma has wrong length");
  }
  const Permutation pi = inverse_permutation(sigma);
  detail::PlanBuilder b(plan);
  auto task_for = [&](int m, int function) {
    return TaskRef{m - pi(function) + 1, pi(function)};
  };
  auto in_range = [&](const TaskRef& t) {
    return t.batch >= 1 && t.batch <= M_prime;
  };
  auto task_input = [&](const TaskRef& t, int component) {
    InputExpr e;
    e.kind = t.step == 1 ? InputKind::kRawInput : InputKind::kTaskInput;
    e.task = t;
    e.component = component;
    return e;
  };

  for (const BlockPlan& block : blocks) {
    const int m = block.index;
    for (int n = 1; n <= N; ++n) {
      const auto& rows = block.servers[n - 1].phase1;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const int component = static_cast<int>(r) + 1;
        const TaskRef t = task_for(m, rows[r]);
        if (!in_range(t)) {
          InputExpr e;
          e.kind = InputKind::kPlaceholder;
          e.placeholder = b.fresh_placeholder();
          b.emit(n, rows[r], m, 1, e, OutputSlot{});
          continue;
        }
        OutputSlot o;
        o.kind = OutputKind::kTaskOutput;
        o.task = t;
        o.component = component;
        b.emit(n, rows[r], m, 1, task_input(t, component), o);
      }
    }
    for (int n = 1; n <= N; ++n) {
      const auto& rows = block.servers[n - 1].phase2;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const MaskId mask{m, static_cast<int>(r) + 1};
        const int function = rows[r];
        if (n == N) {
          InputExpr e;
          e.kind = InputKind::kRawMask;
          e.mask = mask;
          OutputSlot o;
          o.kind = OutputKind::kMaskImage;
          o.mask = mask;
          b.emit(n, function, m, 2, e, o);
          continue;
        }
        const TaskRef t = task_for(m, function);
        if (!in_range(t)) {
          InputExpr e;
          e.kind = InputKind::kMaskedPlaceholder;
          e.placeholder = b.fresh_placeholder();
          e.mask = mask;
          b.emit(n, function, m, 2, e, OutputSlot{});
          continue;
        }
        InputExpr e = task_input(t, n);
        e.kind = InputKind::kMaskedTaskInput;
        e.mask = mask;
        OutputSlot o;
        o.kind = OutputKind::kMaskedTaskOutput;
        o.task = t;
        o.component = n;
        o.mask = mask;
        b.emit(n, function, m, 2, e, o);
      }
    }
  }
  plan.num_blocks = static_cast<int>(blocks.size());
}

inline QueryPlan plan_vectors(const Permutation& sigma, int K, int N,
                              int M_prime,
                              const std::vector<BlockPlan>& blocks) {
  QueryPlan plan;
  plan.K = K;
  plan.N = N;
  plan.M = M_prime * (N - 1);
  plan.M_prime = M_prime;
  plan.regime = Regime::kBlocks;
  plan_vectors_into(plan, sigma, K, N, M_prime, blocks);
  for (int batch = 1; batch <= M_prime; ++batch) {
    for (int j = 1; j <= N - 1; ++j) {
      plan.outputs.push_back({OutputSource::Kind::kTask, batch, j, 0, 0});
    }
  }
  return plan;
}

namespace detail {

inline void append_chain(QueryPlan& plan, const Permutation& sigma, int request) {
  PlanBuilder b(plan);
  for (int j = 1; j <= sigma.size(); ++j) {
    InputExpr e;
    e.kind = InputKind::kChainInput;
    e.request = request;
    e.chain = 0;
    e.position = j - 1;
    OutputSlot o;
    o.kind = OutputKind::kChainOutput;
    o.request = request;
    o.chain = 0;
    o.position = j;
    b.emit(sigma(j), sigma(j), 0, 0, e, o);
  }
}

inline void append_fallback(QueryPlan& plan, int K, int request) {
  PlanBuilder b(plan);
  const auto all = enumerate_permutations(K);
  for (std::size_t c = 0; c < all.size(); ++c) {
    for (int j = 1; j <= K; ++j) {
      InputExpr e;
      e.kind = InputKind::kChainInput;
      e.request = request;
      e.chain = static_cast<int>(c);
      e.position = j - 1;
      OutputSlot o;
      o.kind = OutputKind::kChainOutput;
      o.request = request;
      o.chain = static_cast<int>(c);
      o.position = j;
      b.emit(1, all[c](j), 0, 0, e, o);
    }
  }
}

inline int lex_rank(const Permutation& sigma) {
  const auto all = enumerate_permutations(sigma.size());
  for (std::size_t c = 0; c < all.size(); ++c) {
    if (all[c] == sigma) return static_cast<int>(c);
  }
  throw Error(ErrorCode::kInternal, "permutation not enumerated");
}

}  // namespace detail

/// K <= N: query j goes to server sigma_j with function sigma_j; its input is
/// the previous answer (W for j = 1). Servers K+1..N stay idle.
inline QueryPlan schedule_chain(const Permutation& sigma, int K, int N,
                                int request = 0) {
  if (K > N) throw Error(ErrorCode::kInvalidRegime, "schedule_chain needs K <= N");
  if (sigma.size() != K) {
    throw Error(ErrorCode::kInvalidPermutation, "sigma has wrong length");
  }
  QueryPlan plan;
  plan.K = K;
  plan.N = N;
  plan.M = 1;
  plan.regime = Regime::kChain;
  detail::append_chain(plan, sigma, request);
  plan.outputs.push_back({OutputSource::Kind::kChain, 0, 0, request, 0});
  return plan;
}

/// Every chain tau in lexicographic S_K for each of `r` requests, all at
/// server 1. Decoding picks the chain with tau == sigma.
inline QueryPlan schedule_fallback(int r, int K, int first_request = 0) {
  if (K > kMaxEnumerableK) throw Error(ErrorCode::kKTooLarge, "fallback");
  QueryPlan plan;
  plan.K = K;
  plan.N = 1;
  plan.M = r;
  plan.leftover = r;
  plan.regime = Regime::kFallbackOnly;
  for (int i = 0; i < r; ++i) detail::append_fallback(plan, K, first_request + i);
  return plan;
}

/// Total query count D for (K, N, M).
///
/// K <= N: K*M. N = 1: M*K*K!. Otherwise with M = M'(N-1) + r:
/// (M'+K-1)*N*(K-1) + r*K*K!, where the block term is dropped when M' = 0.
inline std::uint64_t query_count(int K, int N, int M) {
  validate_dims(K, N, M);
  const auto k = static_cast<std::uint64_t>(K);
  const auto n = static_cast<std::uint64_t>(N);
  const auto m = static_cast<std::uint64_t>(M);
  if (K <= N) return k * m;
  if (N == 1) return m * k * factorial(K);
  const std::uint64_t m_prime = m / (n - 1);
  const std::uint64_t r = m % (n - 1);
  const std::uint64_t blocks =
      m_prime == 0 ? 0 : (m_prime + k - 1) * n * (k - 1);
  return blocks + r * k * factorial(K);
}

/// Full plan for M requests under order sigma.
inline QueryPlan plan_protocol(int K, int N, int M, const Permutation& sigma) {
  validate_dims(K, N, M);
  if (sigma.size() != K) {
    throw Error(ErrorCode::kInvalidPermutation, "sigma has wrong length");
  }
  QueryPlan plan;
  plan.K = K;
  plan.N = N;
  plan.M = M;
  if (K <= N) {
    plan.regime = Regime::kChain;
    for (int req = 0; req < M; ++req) {
      detail::append_chain(plan, sigma, req);
      plan.outputs.push_back({OutputSource::Kind::kChain, 0, 0, req, 0});
    }
    return plan;
  }
  if (N == 1) {
    plan.regime = Regime::kFallbackOnly;
    plan.leftover = M;
  } else {
    plan.regime = Regime::kBlocks;
    plan.M_prime = M / (N - 1);
    plan.leftover = M % (N - 1);
  }
  if (plan.M_prime > 0) {
    plan_vectors_into(plan, sigma, K, N, plan.M_prime,
                      build_blocks(K, N, plan.M_prime));
    for (int batch = 1; batch <= plan.M_prime; ++batch) {
      for (int j = 1; j <= N - 1; ++j) {
        plan.outputs.push_back({OutputSource::Kind::kTask, batch, j, 0, 0});
      }
    }
  }
  if (plan.leftover > 0) {
    const int chain = detail::lex_rank(sigma);
    const int first = plan.M_prime * (N - 1);
    for (int req = first; req < M; ++req) {
      detail::append_fallback(plan, K, req);
      plan.outputs.push_back({OutputSource::Kind::kChain, 0, 0, req, chain});
    }
  }
  return plan;
}

/// (server, function) sequence seen by each server, servers[n-1].
inline std::vector<std::vector<int>> plan_fingerprints(const QueryPlan& plan) {
  std::vector<std::vector<int>> out(plan.N);
  for (const auto& q : plan.queries) out[q.server - 1].push_back(q.function);
  return out;
}

struct FeasibilityResult {
  bool ok = true;
  std::string detail;
};

/// Mechanical dependency check: every input of block m is a raw input, a
/// mask, a placeholder, or an output of a block < m; chains only read
/// positions already produced. Also checks that each task output is produced
/// exactly once, in block batch + step - 1, and that each mask Z_{m,i} feeds
/// exactly N queries, all in block m.
inline FeasibilityResult check_feasibility(const QueryPlan& plan) {
  std::map<std::tuple<int, int, int>, int> resolved;  // (batch, step, i) -> block
  std::map<MaskId, std::vector<int>> mask_uses;
  std::set<std::tuple<int, int, int>> chain_values;
  std::set<int> placeholders;
  auto fail = [](const PlannedQuery& q, const std::string& why) {
    return FeasibilityResult{false, "query " + std::to_string(q.seq) + ": " + why};
  };
  for (const auto& q : plan.queries) {
    const auto& in = q.input;
    switch (in.kind) {
      case InputKind::kRawInput:
        if (in.task.step != 1) return fail(q, "raw input with step != 1");
        break;
      case InputKind::kTaskInput:
      case InputKind::kMaskedTaskInput: {
        if (in.task.step == 1) {
          if (in.kind == InputKind::kTaskInput) return fail(q, "task input at step 1");
          break;
        }
        auto it = resolved.find({in.task.batch, in.task.step - 1, in.component});
        if (it == resolved.end()) return fail(q, "reads unresolved task output");
        if (it->second >= q.block) return fail(q, "reads output of same/later block");
        break;
      }
      case InputKind::kPlaceholder:
      case InputKind::kMaskedPlaceholder:
        if (!placeholders.insert(in.placeholder).second) {
          return fail(q, "placeholder reused");
        }
        break;
      case InputKind::kChainInput:
        if (in.position > 0 &&
            !chain_values.count({in.request, in.chain, in.position})) {
          return fail(q, "chain position not yet available");
        }
        break;
      case InputKind::kRawMask:
        break;
    }
    if (in.kind == InputKind::kMaskedTaskInput ||
        in.kind == InputKind::kMaskedPlaceholder ||
        in.kind == InputKind::kRawMask) {
      mask_uses[in.mask].push_back(q.block);
    }
    const auto& out = q.output;
    if (out.kind == OutputKind::kTaskOutput ||
        out.kind == OutputKind::kMaskedTaskOutput) {
      const std::tuple<int, int, int> key{out.task.batch, out.task.step,
                                          out.component};
      if (!resolved.emplace(key, q.block).second) {
        return fail(q, "task output written twice");
      }
      if (q.block != out.task.batch + out.task.step - 1) {
        return fail(q, "task resolved in unexpected block");
      }
    } else if (out.kind == OutputKind::kChainOutput) {
      chain_values.insert({out.request, out.chain, out.position});
    }
  }
  for (const auto& [mask, blocks] : mask_uses) {
    if (static_cast<int>(blocks.size()) != plan.N) {
      return {false, "mask used " + std::to_string(blocks.size()) + " times"};
    }
    for (int b : blocks) {
      if (b != mask.block) return {false, "mask used outside its block"};
    }
  }
  for (const auto& src : plan.outputs) {
    if (src.kind == OutputSource::Kind::kTask &&
        !resolved.count({src.batch, plan.K, src.component})) {
      return {false, "final output never produced"};
    }
  }
  return {};
}

inline std::string input_expr_string(const InputExpr& e) {
  auto task = [](const InputExpr& x) {
    return "In" + std::to_string(x.component) + "(R[" +
           std::to_string(x.task.batch) + "]^" + std::to_string(x.task.step) +
           ")";
  };
  auto mask = [](const MaskId& z) {
    return "Z[" + std::to_string(z.block) + "," + std::to_string(z.index) + "]";
  };
  switch (e.kind) {
    case InputKind::kRawInput:
      return "W[" + std::to_string(e.task.batch) + "," +
             std::to_string(e.component) + "]";
    case InputKind::kTaskInput:
      return task(e);
    case InputKind::kMaskedTaskInput:
      if (e.task.step == 1) {
        return "W[" + std::to_string(e.task.batch) + "," +
               std::to_string(e.component) + "]+" + mask(e.mask);
      }
      return task(e) + "+" + mask(e.mask);
    case InputKind::kRawMask:
      return mask(e.mask);
    case InputKind::kPlaceholder:
      return "Z*" + std::to_string(e.placeholder);
    case InputKind::kMaskedPlaceholder:
      return "Z*" + std::to_string(e.placeholder) + "+" + mask(e.mask);
    case InputKind::kChainInput:
      return "Chain[" + std::to_string(e.request) + "," +
             std::to_string(e.chain) + "," + std::to_string(e.position) + "]";
  }
  return "?";
}

inline nlohmann::json plan_to_json(const QueryPlan& plan) {
  nlohmann::json queries = nlohmann::json::array();
  for (const auto& q : plan.queries) {
    queries.push_back({{"seq", q.seq},
                       {"server", q.server},
                       {"function", q.function},
                       {"block", q.block},
                       {"phase", q.phase},
                       {"input_expr", input_expr_string(q.input)}});
  }
  return {{"K", plan.K},
          {"N", plan.N},
          {"M", plan.M},
          {"M_prime", plan.M_prime},
          {"leftover", plan.leftover},
          {"blocks", plan.num_blocks},
          {"queries", std::move(queries)}};
}

}  // namespace psfc
