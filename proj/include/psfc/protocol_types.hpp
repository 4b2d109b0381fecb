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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "psfc/error.hpp"
#include "psfc/field.hpp"

namespace psfc {

/// R_m^k: applying the k-th function of the composition to batch m.
struct TaskRef {
  int batch = 0;
  int step = 0;

  friend auto operator<=>(const TaskRef&, const TaskRef&) = default;
};

/// Z_{m,i}: the i-th phase-2 mask of block m.
struct MaskId {
  int block = 0;
  int index = 0;

  friend auto operator<=>(const MaskId&, const MaskId&) = default;
};

/// (server, input, function) as issued by the client. `seq` is the global
/// issue index and never leaves the client.
struct Query {
  std::size_t seq = 0;
  int server = 0;
  int function = 0;
  FieldVector input;
};

struct Answer {
  std::size_t seq = 0;
  FieldVector vector;
};

struct MarginalEntry {
  int function = 0;
  FieldVector input;

  friend bool operator==(const MarginalEntry&, const MarginalEntry&) = default;
};

/// Everything server `server` observes, in its own arrival order.
struct MarginalQueryList {
  int server = 0;
  std::vector<MarginalEntry> entries;

  friend bool operator==(const MarginalQueryList&,
                         const MarginalQueryList&) = default;
};

/// Exact non-negative rational, always reduced.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static Rational make(std::uint64_t num, std::uint64_t den) {
    if (den == 0) throw Error(ErrorCode::kInvalidArgument, "zero denominator");
    const std::uint64_t g = std::gcd(num, den);
    return g == 0 ? Rational{0, 1} : Rational{num / g, den / g};
  }

  double value() const {
    return static_cast<double>(num) / static_cast<double>(den);
  }

  std::string str() const {
    return std::to_string(num) + "/" + std::to_string(den);
  }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a,
                                          const Rational& b) {
    const auto lhs = static_cast<unsigned __int128>(a.num) * b.den;
    const auto rhs = static_cast<unsigned __int128>(b.num) * a.den;
    return lhs <=> rhs;
  }
};

}  // namespace psfc
