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
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "psfc/error.hpp"
#include "psfc/rng.hpp"

namespace psfc {

#if !defined(__SIZEOF_INT128__)
#error "psfc requires unsigned __int128 (GCC/Clang)"
#endif

inline constexpr std::uint64_t kMersenne31 = (1ULL << 31) - 1;
inline constexpr std::uint64_t kModulusLimit = 1ULL << 61;

namespace detail {

inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b,
                             std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp,
                             std::uint64_t m) {
  std::uint64_t result = 1 % m;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return result;
}

// Deterministic Miller-Rabin; these bases are exact for all 64-bit inputs.
inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t q : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % q == 0) return n == q;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    std::uint64_t x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

}  // namespace detail

struct FieldElement {
  std::uint64_t value = 0;

  friend auto operator<=>(const FieldElement&, const FieldElement&) = default;
};

/// A prime p with 2 <= p < 2^61, verified at construction.
class PrimeModulus {
 public:
  explicit PrimeModulus(std::uint64_t p) : p_(p) {
    if (p >= kModulusLimit || !detail::is_prime(p)) {
      throw Error(ErrorCode::kNotPrime, std::to_string(p));
    }
  }

  std::uint64_t value() const { return p_; }

  /// Reduces an arbitrary integer to its canonical representative.
  FieldElement reduce(std::uint64_t x) const { return {x % p_}; }

  bool canonical(FieldElement a) const { return a.value < p_; }

  friend bool operator==(const PrimeModulus&, const PrimeModulus&) = default;

 private:
  std::uint64_t p_;
};

inline FieldElement ff_add(FieldElement a, FieldElement b,
                           const PrimeModulus& p) {
  std::uint64_t s = a.value + b.value;
  if (s >= p.value()) s -= p.value();
  return {s};
}

inline FieldElement ff_sub(FieldElement a, FieldElement b,
                           const PrimeModulus& p) {
  return {a.value >= b.value ? a.value - b.value : a.value + p.value() - b.value};
}

inline FieldElement ff_neg(FieldElement a, const PrimeModulus& p) {
  return {a.value == 0 ? 0 : p.value() - a.value};
}

inline FieldElement ff_mul(FieldElement a, FieldElement b,
                           const PrimeModulus& p) {
  return {detail::mul_mod(a.value, b.value, p.value())};
}

/// Multiplicative inverse via Fermat's little theorem.
inline FieldElement ff_inv(FieldElement a, const PrimeModulus& p) {
  if (a.value == 0) throw Error(ErrorCode::kInversionOfZero, "ff_inv(0)");
  return {detail::pow_mod(a.value, p.value() - 2, p.value())};
}

using FieldVector = std::vector<FieldElement>;

inline FieldVector make_vector(std::initializer_list<std::uint64_t> values,
                               const PrimeModulus& p) {
  FieldVector v;
  v.reserve(values.size());
  for (auto x : values) v.push_back(p.reduce(x));
  return v;
}

inline FieldVector zero_vector(std::size_t dim) { return FieldVector(dim); }

inline void require_same_dim(std::size_t a, std::size_t b, const char* where) {
  if (a != b) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(where) + ": " + std::to_string(a) +
                    " != " + std::to_string(b));
  }
}

inline FieldVector vec_add(std::span<const FieldElement> u,
                           std::span<const FieldElement> v,
                           const PrimeModulus& p) {
  require_same_dim(u.size(), v.size(), "vec_add");
  FieldVector out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = ff_add(u[i], v[i], p);
  return out;
}

inline FieldVector vec_sub(std::span<const FieldElement> u,
                           std::span<const FieldElement> v,
                           const PrimeModulus& p) {
  require_same_dim(u.size(), v.size(), "vec_sub");
  FieldVector out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = ff_sub(u[i], v[i], p);
  return out;
}

/// Square L x L matrix over GF(p), row-major.
class FieldMatrix {
 public:
  FieldMatrix() = default;
  explicit FieldMatrix(std::size_t dim) : dim_(dim), data_(dim * dim) {}

  /// Builds from rows; every row must have length rows.size().
  static FieldMatrix from_rows(
      std::initializer_list<std::initializer_list<std::uint64_t>> rows,
      const PrimeModulus& p) {
    FieldMatrix m(rows.size());
    std::size_t r = 0;
    for (const auto& row : rows) {
      require_same_dim(row.size(), rows.size(), "FieldMatrix::from_rows");
      std::size_t c = 0;
      for (auto x : row) m.at(r, c++) = p.reduce(x);
      ++r;
    }
    return m;
  }

  static FieldMatrix identity(std::size_t dim) {
    FieldMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m.at(i, i) = {1};
    return m;
  }

  std::size_t dim() const { return dim_; }

  FieldElement& at(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
  FieldElement at(std::size_t r, std::size_t c) const {
    return data_[r * dim_ + c];
  }

  std::span<const FieldElement> row(std::size_t r) const {
    return {data_.data() + r * dim_, dim_};
  }

  std::span<const FieldElement> elements() const { return data_; }

  friend bool operator==(const FieldMatrix&, const FieldMatrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<FieldElement> data_;
};

inline FieldVector mat_vec_mul(const FieldMatrix& a,
                               std::span<const FieldElement> w,
                               const PrimeModulus& p) {
  require_same_dim(a.dim(), w.size(), "mat_vec_mul");
  const std::size_t n = a.dim();
  FieldVector out(n);
  const std::uint64_t m = p.value();
  for (std::size_t r = 0; r < n; ++r) {
    // Each product is < 2^122, so 32 of them fit in 128 bits between reductions.
    unsigned __int128 acc = 0;
    auto row = a.row(r);
    for (std::size_t c = 0; c < n; ++c) {
      acc += static_cast<unsigned __int128>(row[c].value) * w[c].value;
      if ((c & 31) == 31) acc %= m;
    }
    out[r] = {static_cast<std::uint64_t>(acc % m)};
  }
  return out;
}

inline FieldMatrix mat_mul(const FieldMatrix& a, const FieldMatrix& b,
                           const PrimeModulus& p) {
  require_same_dim(a.dim(), b.dim(), "mat_mul");
  const std::size_t n = a.dim();
  FieldMatrix out(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      FieldElement acc{};
      for (std::size_t k = 0; k < n; ++k) {
        acc = ff_add(acc, ff_mul(a.at(r, k), b.at(k, c), p), p);
      }
      out.at(r, c) = acc;
    }
  }
  return out;
}

namespace detail {

// Row-reduces `rows` (each of equal width) in place and returns the rank.
inline std::size_t row_reduce(std::vector<FieldVector>& rows,
                              const PrimeModulus& p) {
  if (rows.empty()) return 0;
  const std::size_t width = rows.front().size();
  std::size_t rank = 0;
  for (std::size_t col = 0; col < width && rank < rows.size(); ++col) {
    std::size_t pivot = rank;
    while (pivot < rows.size() && rows[pivot][col].value == 0) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[rank], rows[pivot]);
    const FieldElement inv = ff_inv(rows[rank][col], p);
    for (auto& x : rows[rank]) x = ff_mul(x, inv, p);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r == rank || rows[r][col].value == 0) continue;
      const FieldElement factor = rows[r][col];
      for (std::size_t c = col; c < width; ++c) {
        rows[r][c] = ff_sub(rows[r][c], ff_mul(factor, rows[rank][c], p), p);
      }
    }
    ++rank;
  }
  return rank;
}

}  // namespace detail

/// Rank over GF(p) of the matrix whose columns are `cols`.
inline std::size_t rank(std::span<const FieldVector> cols,
                        const PrimeModulus& p) {
  if (cols.empty()) return 0;
  for (const auto& c : cols) require_same_dim(c.size(), cols[0].size(), "rank");
  // Row rank equals column rank; reduce the transpose directly.
  std::vector<FieldVector> rows(cols.begin(), cols.end());
  return detail::row_reduce(rows, p);
}

inline std::size_t matrix_rank(const FieldMatrix& a, const PrimeModulus& p) {
  std::vector<FieldVector> rows;
  rows.reserve(a.dim());
  for (std::size_t r = 0; r < a.dim(); ++r) {
    auto row = a.row(r);
    rows.emplace_back(row.begin(), row.end());
  }
  return detail::row_reduce(rows, p);
}

/// Gauss-Jordan inverse.
inline FieldMatrix mat_inv(const FieldMatrix& a, const PrimeModulus& p) {
  const std::size_t n = a.dim();
  std::vector<FieldVector> aug(n, FieldVector(2 * n));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) aug[r][c] = a.at(r, c);
    aug[r][n + r] = {1};
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && aug[pivot][col].value == 0) ++pivot;
    if (pivot == n) throw Error(ErrorCode::kSingularMatrix, "mat_inv");
    std::swap(aug[col], aug[pivot]);
    const FieldElement inv = ff_inv(aug[col][col], p);
    for (auto& x : aug[col]) x = ff_mul(x, inv, p);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || aug[r][col].value == 0) continue;
      const FieldElement factor = aug[r][col];
      for (std::size_t c = 0; c < 2 * n; ++c) {
        aug[r][c] = ff_sub(aug[r][c], ff_mul(factor, aug[col][c], p), p);
      }
    }
  }
  FieldMatrix out(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) out.at(r, c) = aug[r][n + c];
  }
  return out;
}

inline FieldVector sample_uniform_vector(std::size_t dim, const PrimeModulus& p,
                                         Rng& rng) {
  FieldVector v(dim);
  for (auto& x : v) x.value = rng.uniform_below(p.value());
  return v;
}

inline constexpr int kInvertibleSamplingCap = 10'000;

/// Uniform over GL(L, p): rejection from uniform L x L matrices.
inline FieldMatrix sample_invertible_matrix(std::size_t dim,
                                            const PrimeModulus& p, Rng& rng) {
  for (int attempt = 0; attempt < kInvertibleSamplingCap; ++attempt) {
    FieldMatrix m(dim);
    for (std::size_t r = 0; r < dim; ++r) {
      for (std::size_t c = 0; c < dim; ++c) {
        m.at(r, c).value = rng.uniform_below(p.value());
      }
    }
    if (matrix_rank(m, p) == dim) return m;
  }
  throw Error(ErrorCode::kInternal, "invertible sampling exceeded redraw cap");
}

}  // namespace psfc
