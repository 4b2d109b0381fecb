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

#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "psfc/error.hpp"
#include "psfc/field.hpp"
#include "psfc/protocol_types.hpp"

namespace psfc {

/// One honest-but-curious server. Holds every F_k and nothing about any
/// other server; its marginal list is its entire view of the protocol.
class ServerState {
 public:
  ServerState(int id, PrimeModulus p, std::vector<FieldMatrix> functions)
      : id_(id), p_(p), functions_(std::move(functions)) {
    marginal_.server = id;
    if (functions_.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "server needs at least one F_k");
    }
    for (const auto& f : functions_) {
      require_same_dim(f.dim(), functions_.front().dim(), "ServerState");
    }
  }

  int id() const { return id_; }
  int num_functions() const { return static_cast<int>(functions_.size()); }
  std::size_t dim() const { return functions_.front().dim(); }
  const PrimeModulus& modulus() const { return p_; }

  /// Returns F_k w and appends (k, w) to the marginal list.
  FieldVector serve_query(int function, std::span<const FieldElement> input) {
    if (function < 1 || function > num_functions()) {
      throw Error(ErrorCode::kUnknownFunction, std::to_string(function));
    }
    require_same_dim(input.size(), dim(), "serve_query");
    for (auto x : input) {
      if (!p_.canonical(x)) {
        throw Error(ErrorCode::kNonCanonicalElement, std::to_string(x.value));
      }
    }
    FieldVector answer = mat_vec_mul(functions_[function - 1], input, p_);
    marginal_.entries.push_back({function, FieldVector(input.begin(), input.end())});
    return answer;
  }

  const MarginalQueryList& marginal() const { return marginal_; }

  void reset_marginal() { marginal_.entries.clear(); }

 private:
  int id_;
  PrimeModulus p_;
  std::vector<FieldMatrix> functions_;
  MarginalQueryList marginal_;
};

/// Function indices of a marginal list, in arrival order.
inline std::vector<int> marginal_fingerprint(const MarginalQueryList& list) {
  std::vector<int> out;
  out.reserve(list.entries.size());
  for (const auto& e : list.entries) out.push_back(e.function);
  return out;
}

inline nlohmann::json vector_to_json(std::span<const FieldElement> v) {
  nlohmann::json arr = nlohmann::json::array();
  for (auto x : v) arr.push_back(x.value);
  return arr;
}

/// {server, entries: [{function, input: [ints]}]}
inline nlohmann::json marginal_to_json(const MarginalQueryList& list) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : list.entries) {
    entries.push_back({{"function", e.function}, {"input", vector_to_json(e.input)}});
  }
  return {{"server", list.server}, {"entries", std::move(entries)}};
}

}  // namespace psfc
