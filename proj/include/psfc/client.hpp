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

// Protocol orchestration. The client never sees F_1..F_K: it only holds a
// Transport, and combines answers with field addition and subtraction.

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"
#include "psfc/error.hpp"
#include "psfc/field.hpp"
#include "psfc/permutation.hpp"
#include "psfc/protocol_types.hpp"
#include "psfc/rng.hpp"
#include "psfc/scheduler.hpp"
#include "psfc/server.hpp"
#include "psfc/transport.hpp"

namespace psfc {

struct ProtocolConfig {
  int K = 0;
  int N = 0;
  int M = 0;
  std::size_t L = 0;
  std::uint64_t p = kMersenne31;
  std::uint64_t seed = 0;

  void validate() const {
    if (K < 1 || N < 1 || M < 1 || L < 1) {
      throw Error(ErrorCode::kInvalidArgument, "K, N, M, L must all be >= 1");
    }
    PrimeModulus check(p);
    (void)check;
  }
};

/// out_i(R_m^k) = masked answer - mask image, by linearity of F.
inline FieldVector unmask(std::span<const FieldElement> masked_answer,
                          std::span<const FieldElement> mask_image,
                          const PrimeModulus& p) {
  return vec_sub(masked_answer, mask_image, p);
}

/// Resolved task outputs, mask images and chain values of one run.
class ValueStore {
 public:
  ValueStore(int K, int N, int M_prime)
      : K_(K), width_(N > 1 ? N - 1 : 1), M_prime_(M_prime),
        tasks_(static_cast<std::size_t>(M_prime) * K * width_) {}

  /// Write-once; task R_b^k may only be resolved during block b + k - 1.
  void put_task_output(TaskRef t, int component, FieldVector v, int block) {
    auto& slot = tasks_.at(task_index(t, component));
    if (slot) throw Error(ErrorCode::kInternal, "task output written twice");
    if (block != t.batch + t.step - 1) {
      throw Error(ErrorCode::kInternal, "task resolved in the wrong block");
    }
    slot = std::move(v);
  }

  bool has_task_output(TaskRef t, int component) const {
    return tasks_.at(task_index(t, component)).has_value();
  }

  const FieldVector& task_output(TaskRef t, int component) const {
    const auto& slot = tasks_.at(task_index(t, component));
    if (!slot) {
      throw Error(ErrorCode::kMissingValue,
                  "out" + std::to_string(component) + "(R[" +
                      std::to_string(t.batch) + "]^" + std::to_string(t.step) + ")");
    }
    return *slot;
  }

  void put_mask_image(MaskId z, FieldVector v) { mask_images_[z] = std::move(v); }

  const FieldVector& mask_image(MaskId z) const {
    auto it = mask_images_.find(z);
    if (it == mask_images_.end()) throw Error(ErrorCode::kMissingValue, "mask image");
    return it->second;
  }

  void put_chain(int request, int chain, int position, FieldVector v) {
    chains_[{request, chain, position}] = std::move(v);
  }

  const FieldVector& chain(int request, int chain, int position) const {
    auto it = chains_.find({request, chain, position});
    if (it == chains_.end()) throw Error(ErrorCode::kMissingValue, "chain value");
    return it->second;
  }

  void drop_chain(int request, int chain, int position) {
    chains_.erase({request, chain, position});
  }

 private:
  std::size_t task_index(TaskRef t, int component) const {
    if (t.batch < 1 || t.batch > M_prime_ || t.step < 1 || t.step > K_ ||
        component < 1 || component > width_) {
      throw Error(ErrorCode::kInternal, "task reference out of range");
    }
    return (static_cast<std::size_t>(t.batch - 1) * K_ + (t.step - 1)) * width_ +
           (component - 1);
  }

  int K_;
  int width_;
  int M_prime_;
  std::vector<std::optional<FieldVector>> tasks_;
  std::map<MaskId, FieldVector> mask_images_;
  std::map<std::tuple<int, int, int>, FieldVector> chains_;
};

/// Masks Z_{m,i} (drawn once, on first use) and fresh placeholders.
class MaskLedger {
 public:
  MaskLedger(std::size_t dim, const PrimeModulus& p, Rng& rng)
      : dim_(dim), p_(p), rng_(rng) {}

  const FieldVector& mask(MaskId z) {
    auto [it, inserted] = masks_.try_emplace(z);
    if (inserted) it->second.value = sample_uniform_vector(dim_, p_, rng_);
    ++it->second.uses;
    return it->second.value;
  }

  FieldVector placeholder() {
    ++placeholders_;
    return sample_uniform_vector(dim_, p_, rng_);
  }

  int uses(MaskId z) const {
    auto it = masks_.find(z);
    return it == masks_.end() ? 0 : it->second.uses;
  }

  std::size_t num_masks() const { return masks_.size(); }
  std::size_t num_placeholders() const { return placeholders_; }

 private:
  struct Entry {
    FieldVector value;
    int uses = 0;
  };
  std::size_t dim_;
  PrimeModulus p_;
  Rng& rng_;
  std::map<MaskId, Entry> masks_;
  std::size_t placeholders_ = 0;
};

/// Flattens final task outputs (and selected chain ends) into input order:
/// W_{b,j} maps to output (b-1)(N-1) + j - 1; leftover requests follow.
inline std::vector<FieldVector> decode_outputs(const ValueStore& store,
                                               const QueryPlan& plan) {
  std::vector<FieldVector> out;
  out.reserve(plan.outputs.size());
  for (const auto& src : plan.outputs) {
    if (src.kind == OutputSource::Kind::kTask) {
      out.push_back(store.task_output({src.batch, plan.K}, src.component));
    } else {
      out.push_back(store.chain(src.request, src.chain, plan.K));
    }
  }
  return out;
}

struct TranscriptEntry {
  std::size_t seq = 0;
  int server = 0;
  int function = 0;

  friend bool operator==(const TranscriptEntry&, const TranscriptEntry&) = default;
};

struct ExecutionResult {
  std::vector<FieldVector> outputs;
  std::vector<TranscriptEntry> transcript;
  std::vector<std::uint64_t> per_function;  // D_k at index k-1
};

/// Executes a QueryPlan against a Transport.
class ProtocolClient {
 public:
  ProtocolClient(QueryPlan plan, PrimeModulus p, std::size_t dim)
      : plan_(std::move(plan)), p_(p), dim_(dim) {}

  const QueryPlan& plan() const { return plan_; }

  ExecutionResult execute(std::span<const FieldVector> inputs, Transport& transport,
                          Rng& rng) const {
    if (static_cast<int>(inputs.size()) != plan_.M) {
      throw Error(ErrorCode::kDimensionMismatch, "expected M input vectors");
    }
    for (const auto& w : inputs) require_same_dim(w.size(), dim_, "input vector");
    if (transport.num_servers() < max_server()) {
      throw Error(ErrorCode::kInvalidArgument, "transport has too few servers");
    }

    ValueStore store(plan_.K, plan_.N, plan_.M_prime);
    MaskLedger masks(dim_, p_, rng);
    struct Pending {
      TaskRef task;
      int component;
      MaskId mask;
      FieldVector answer;
    };
    std::vector<Pending> pending;
    ExecutionResult result;
    result.per_function.assign(plan_.K, 0);
    result.transcript.reserve(plan_.queries.size());
    std::set<std::pair<int, int>> wanted_chains;
    for (const auto& src : plan_.outputs) {
      if (src.kind == OutputSource::Kind::kChain) wanted_chains.insert({src.request, src.chain});
    }

    int current_block = 0;
    auto finish_block = [&](int block) {
      for (auto& pm : pending) {
        store.put_task_output(pm.task, pm.component,
                              unmask(pm.answer, store.mask_image(pm.mask), p_),
                              block);
      }
      pending.clear();
    };

    for (const PlannedQuery& q : plan_.queries) {
      if (q.block != current_block) {
        finish_block(current_block);
        current_block = q.block;
      }
      FieldVector input = materialize(q, inputs, store, masks);
      FieldVector answer = transport.send(q.server, q.function, input);
      result.transcript.push_back({q.seq, q.server, q.function});
      ++result.per_function.at(q.function - 1);

      const OutputSlot& o = q.output;
      switch (o.kind) {
        case OutputKind::kDiscard:
          break;
        case OutputKind::kTaskOutput:
          store.put_task_output(o.task, o.component, std::move(answer), q.block);
          break;
        case OutputKind::kMaskedTaskOutput:
          pending.push_back({o.task, o.component, o.mask, std::move(answer)});
          break;
        case OutputKind::kMaskImage:
          store.put_mask_image(o.mask, std::move(answer));
          break;
        case OutputKind::kChainOutput:
          store.put_chain(o.request, o.chain, o.position, std::move(answer));
          if (o.position > 1) store.drop_chain(o.request, o.chain, o.position - 1);
          if (o.position == plan_.K && !wanted_chains.count({o.request, o.chain})) {
            store.drop_chain(o.request, o.chain, o.position);
          }
          break;
      }
    }
    finish_block(current_block);
    result.outputs = decode_outputs(store, plan_);
    return result;
  }

 private:
  int max_server() const {
    int s = 0;
    for (const auto& q : plan_.queries) s = std::max(s, q.server);
    return s;
  }

  FieldVector materialize(const PlannedQuery& q, std::span<const FieldVector> inputs,
                          const ValueStore& store, MaskLedger& masks) const {
    const InputExpr& e = q.input;
    auto raw = [&](int batch, int component) -> const FieldVector& {
      return inputs[static_cast<std::size_t>(batch - 1) * (plan_.N - 1) + component - 1];
    };
    auto task_value = [&]() -> const FieldVector& {
      if (e.task.step == 1) return raw(e.task.batch, e.component);
      const TaskRef prev{e.task.batch, e.task.step - 1};
      if (!store.has_task_output(prev, e.component)) {
        throw Error(ErrorCode::kDependencyViolation,
                    "query " + std::to_string(q.seq) + " reads unresolved value");
      }
      return store.task_output(prev, e.component);
    };
    switch (e.kind) {
      case InputKind::kRawInput:
        return raw(e.task.batch, e.component);
      case InputKind::kTaskInput:
        return task_value();
      case InputKind::kMaskedTaskInput:
        return vec_add(task_value(), masks.mask(e.mask), p_);
      case InputKind::kRawMask:
        return masks.mask(e.mask);
      case InputKind::kPlaceholder:
        return masks.placeholder();
      case InputKind::kMaskedPlaceholder: {
        FieldVector z = masks.placeholder();
        return vec_add(z, masks.mask(e.mask), p_);
      }
      case InputKind::kChainInput:
        if (e.position == 0) return inputs[e.request];
        return store.chain(e.request, e.chain, e.position);
    }
    throw Error(ErrorCode::kInternal, "unknown input kind");
  }

  QueryPlan plan_;
  PrimeModulus p_;
  std::size_t dim_;
};

struct RunReport {
  ProtocolConfig config;
  Permutation sigma;
  std::uint64_t D = 0;
  std::vector<std::uint64_t> D_k;
  Rational rate;
  std::vector<FieldVector> outputs;
  std::vector<TranscriptEntry> transcript;
  std::vector<MarginalQueryList> marginals;
};

struct RunResult {
  std::vector<FieldVector> outputs;
  RunReport report;
};

/// One full protocol run. Masks and placeholders come from the "client"
/// stream of config.seed, so the run is deterministic given (config, sigma,
/// inputs) and the transport's answers.
inline RunResult run_protocol(const ProtocolConfig& config, const Permutation& sigma,
                              std::span<const FieldVector> inputs, Transport& transport) {
  config.validate();
  const PrimeModulus p(config.p);
  ProtocolClient client(plan_protocol(config.K, config.N, config.M, sigma), p,
                        config.L);
  Rng rng = Rng(config.seed).split("client");
  ExecutionResult exec = client.execute(inputs, transport, rng);

  RunReport report;
  report.config = config;
  report.sigma = sigma;
  report.D = exec.transcript.size();
  report.D_k = std::move(exec.per_function);
  report.rate = Rational::make(static_cast<std::uint64_t>(config.K) * config.M, report.D);
  report.outputs = exec.outputs;
  report.transcript = std::move(exec.transcript);
  report.marginals = transport.capture();
  return {std::move(exec.outputs), std::move(report)};
}

inline nlohmann::json report_to_json(const RunReport& r) {
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& v : r.outputs) outputs.push_back(vector_to_json(v));
  nlohmann::json transcript = nlohmann::json::array();
  for (const auto& t : r.transcript) {
    transcript.push_back(nlohmann::json::array({t.seq, t.server, t.function}));
  }
  nlohmann::json marginals = nlohmann::json::array();
  for (const auto& m : r.marginals) marginals.push_back(marginal_to_json(m));
  return {
      {"config",
       {{"K", r.config.K},
        {"N", r.config.N},
        {"M", r.config.M},
        {"L", r.config.L},
        {"p", r.config.p},
        {"seed", r.config.seed}}},
      {"sigma", r.sigma.to_cli()},
      {"D", r.D},
      {"D_k", r.D_k},
      {"rate", {{"exact", r.rate.str()}, {"value", r.rate.value()}}},
      {"outputs", std::move(outputs)},
      {"transcript", std::move(transcript)},
      {"marginals", std::move(marginals)},
  };
}

/// Binary matrix file: M u32 LE, L u32 LE, then M*L elements u64 LE.
inline std::vector<std::uint8_t> encode_output_matrix(std::span<const FieldVector> rows) {
  std::vector<std::uint8_t> out;
  auto put = [&out](std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  const std::size_t dim = rows.empty() ? 0 : rows.front().size();
  put(rows.size(), 4);
  put(dim, 4);
  for (const auto& r : rows) {
    require_same_dim(r.size(), dim, "output matrix");
    for (auto x : r) put(x.value, 8);
  }
  return out;
}

}  // namespace psfc
