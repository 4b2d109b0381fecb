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

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psfc/error.hpp"
#include "psfc/field.hpp"

namespace psfc {

inline constexpr int kMaxEnumerableK = 8;

/// The composition order sigma, stored as the map k -> sigma_k (1-based).
///
/// Display order is right-to-left: "(sigma_K ... sigma_1)". The composite
/// applied to an input w is F_{sigma_K} ... F_{sigma_1} w, i.e. F_{sigma_1}
/// acts first.
class Permutation {
 public:
  Permutation() = default;

  /// `map[k-1]` is sigma_k. Throws InvalidPermutation unless a bijection on
  /// [1..K].
  explicit Permutation(std::vector<int> map) : map_(std::move(map)) {
    std::vector<bool> seen(map_.size() + 1, false);
    for (int v : map_) {
      if (v < 1 || v > static_cast<int>(map_.size()) || seen[v]) {
        throw Error(ErrorCode::kInvalidPermutation, to_display());
      }
      seen[v] = true;
    }
  }

  static Permutation identity(int k) {
    std::vector<int> m(k);
    std::iota(m.begin(), m.end(), 1);
    return Permutation(std::move(m));
  }

  /// Parses the right-to-left display order: "4,3,2,1" sets sigma_4=4, ...,
  /// sigma_1=1; "1,3,4,2" sets sigma_4=1, sigma_3=3, sigma_2=4, sigma_1=2.
  static Permutation parse_display(std::string_view text) {
    std::vector<int> display;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find_first_of(", ", pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view tok = text.substr(pos, end - pos);
      if (!tok.empty()) {
        int v = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) {
          throw Error(ErrorCode::kInvalidPermutation,
                      "bad token '" + std::string(tok) + "'");
        }
        display.push_back(v);
      }
      pos = end + 1;
    }
    if (display.empty()) throw Error(ErrorCode::kInvalidPermutation, "empty");
    std::reverse(display.begin(), display.end());
    return Permutation(std::move(display));
  }

  int size() const { return static_cast<int>(map_.size()); }

  /// sigma_k for k in [1..K].
  int operator()(int k) const { return map_[k - 1]; }

  std::span<const int> map() const { return map_; }

  /// "(sigma_K ... sigma_1)".
  std::string to_display() const {
    std::string s = "(";
    for (auto it = map_.rbegin(); it != map_.rend(); ++it) {
      if (it != map_.rbegin()) s += ' ';
      s += std::to_string(*it);
    }
    return s + ")";
  }

  /// Comma-separated display order, the form accepted by parse_display.
  std::string to_cli() const {
    std::string s;
    for (auto it = map_.rbegin(); it != map_.rend(); ++it) {
      if (!s.empty()) s += ',';
      s += std::to_string(*it);
    }
    return s;
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation&, const Permutation&) = default;

 private:
  std::vector<int> map_;
};

/// pi with pi_{sigma_k} = k.
inline Permutation inverse_permutation(const Permutation& sigma) {
  std::vector<int> inv(sigma.size());
  for (int k = 1; k <= sigma.size(); ++k) inv[sigma(k) - 1] = k;
  return Permutation(std::move(inv));
}

/// All K! permutations in lexicographic order of the map sequence.
inline std::vector<Permutation> enumerate_permutations(int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
  if (k > kMaxEnumerableK) {
    throw Error(ErrorCode::kKTooLarge, "K=" + std::to_string(k));
  }
  std::vector<int> m(k);
  std::iota(m.begin(), m.end(), 1);
  std::vector<Permutation> out;
  do {
    out.emplace_back(m);
  } while (std::next_permutation(m.begin(), m.end()));
  return out;
}

inline std::size_t factorial(int k) {
  std::size_t f = 1;
  for (int i = 2; i <= k; ++i) f *= static_cast<std::size_t>(i);
  return f;
}

/// Uniformly random permutation of [1..K] (Fisher-Yates).
inline Permutation random_permutation(int k, Rng& rng) {
  std::vector<int> m(k);
  std::iota(m.begin(), m.end(), 1);
  for (int i = k - 1; i > 0; --i) {
    std::swap(m[i], m[rng.uniform_below(static_cast<std::uint64_t>(i) + 1)]);
  }
  return Permutation(std::move(m));
}

/// Ground truth F_{sigma_K} ... F_{sigma_1} w by direct sequential
/// multiplication.
inline FieldVector compose_reference(std::span<const FieldMatrix> functions,
                                     const Permutation& sigma,
                                     std::span<const FieldElement> w,
                                     const PrimeModulus& p) {
  require_same_dim(functions.size(), static_cast<std::size_t>(sigma.size()),
                   "compose_reference");
  FieldVector acc(w.begin(), w.end());
  for (int k = 1; k <= sigma.size(); ++k) {
    acc = mat_vec_mul(functions[sigma(k) - 1], acc, p);
  }
  return acc;
}

}  // namespace psfc
