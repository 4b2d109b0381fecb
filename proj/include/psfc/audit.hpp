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

// Executable privacy and converse checks.
//
// Privacy is an exact distributional identity; a simulator can only test it.
// The checks are layered: exact structural invariants (fingerprints), Monte
// Carlo distribution tests on tiny fields, and a reverse-computation attacker.
// Every statistic is computed from what servers observe (marginal lists).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "psfc/client.hpp"
#include "psfc/error.hpp"
#include "psfc/field.hpp"
#include "psfc/permutation.hpp"
#include "psfc/rng.hpp"
#include "psfc/scheduler.hpp"
#include "psfc/server.hpp"
#include "psfc/stats.hpp"
#include "psfc/transport.hpp"

namespace psfc::audit {

/// Sigma values an audit iterates over: all of S_K when at most `max_count`,
/// otherwise the identity, the reversal and random fill (sampled = true).
inline std::vector<Permutation> audit_sigmas(int K, std::size_t max_count, Rng& rng,
                                             bool* sampled = nullptr) {
  const bool enumerable = K <= kMaxEnumerableK && factorial(K) <= max_count;
  if (sampled) *sampled = !enumerable;
  if (enumerable) return enumerate_permutations(K);
  std::set<Permutation> chosen;
  std::vector<Permutation> out;
  auto add = [&](Permutation s) {
    if (chosen.insert(s).second) out.push_back(std::move(s));
  };
  add(Permutation::identity(K));
  std::vector<int> rev(K);
  for (int k = 0; k < K; ++k) rev[k] = K - k;
  add(Permutation(rev));
  while (out.size() < std::max<std::size_t>(max_count, 2)) {
    add(random_permutation(K, rng));
  }
  return out;
}

inline std::vector<FieldMatrix> sample_functions(int K, std::size_t dim,
                                                 const PrimeModulus& p, Rng& rng) {
  std::vector<FieldMatrix> f;
  f.reserve(K);
  for (int k = 0; k < K; ++k) f.push_back(sample_invertible_matrix(dim, p, rng));
  return f;
}

inline std::vector<FieldVector> sample_inputs(int M, std::size_t dim,
                                              const PrimeModulus& p, Rng& rng) {
  std::vector<FieldVector> w;
  w.reserve(M);
  for (int m = 0; m < M; ++m) w.push_back(sample_uniform_vector(dim, p, rng));
  return w;
}

// ---------------------------------------------------------------------------
// Structural privacy: per-server function order does not depend on sigma.

struct FingerprintOptions {
  int K = 3;
  int N = 2;
  int M = 2;
  std::size_t L = 1;
  std::uint64_t p = 5;
  std::uint64_t seed = 1;
  std::size_t max_sigmas = 720;
};

struct FingerprintVerdict {
  bool invariant = true;
  bool sampled = false;
  std::size_t sigmas_checked = 0;
  std::vector<std::vector<int>> reference;  // reference[n-1]
  std::string evidence;
};

/// Runs the protocol for every sigma (or a sample when K! is too large) and
/// compares each server's observed function sequence.
inline FingerprintVerdict fingerprint_invariance(const FingerprintOptions& o) {
  const PrimeModulus p(o.p);
  Rng root(o.seed);
  Rng sigma_rng = root.split("sigmas");
  FingerprintVerdict v;
  const auto sigmas = audit_sigmas(o.K, o.max_sigmas, sigma_rng, &v.sampled);
  Rng data = root.split("data");
  const auto functions = sample_functions(o.K, o.L, p, data);
  const auto inputs = sample_inputs(o.M, o.L, p, data);
  ProtocolConfig config{o.K, o.N, o.M, o.L, o.p, o.seed};
  for (const auto& sigma : sigmas) {
    auto transport = SimTransport::with_servers(o.N, p, functions);
    run_protocol(config, sigma, inputs, transport);
    std::vector<std::vector<int>> prints;
    for (const auto& m : transport.capture()) prints.push_back(marginal_fingerprint(m));
    ++v.sigmas_checked;
    if (v.reference.empty()) {
      v.reference = std::move(prints);
    } else if (prints != v.reference) {
      v.invariant = false;
      v.evidence = "fingerprint differs for sigma " + sigma.to_display();
      return v;
    }
  }
  v.evidence = "identical across " + std::to_string(v.sigmas_checked) + " sigma";
  return v;
}

// ---------------------------------------------------------------------------
// Statistical privacy: sigma-conditioned distributions of server inputs.

enum class FunctionMode {
  kResample,  // fresh F_{1:K} every trial
  kFixed,     // one F_{1:K} for the whole audit (conditioning on F)
};

struct UniformityOptions {
  int K = 3;
  int N = 2;
  int M = 1;
  std::size_t L = 1;
  std::uint64_t p = 3;
  std::uint64_t trials = 100'000;
  double alpha = 0.01;
  double tv_threshold = 0.02;
  FunctionMode mode = FunctionMode::kResample;
  std::uint64_t seed = 11;
  std::size_t max_sigmas = 6;
  // Joint-tuple cell budget; 0 selects max(p^L, trials / 1250).
  std::uint64_t max_tuple_cells = 0;
};

inline constexpr std::uint64_t kMaxSlotCells = 32;
inline constexpr std::uint64_t kTrialsPerTupleCell = 1250;

struct ServerUniformity {
  int server = 0;
  std::size_t slots = 0;
  std::size_t tuple_slots = 0;
  std::uint64_t tuple_cells = 0;
  double max_pair_tv = 0;
  std::string worst_pair;
  double baseline_tv = 0;
  double min_slot_p = 1;
  double min_tuple_p = 1;
  double max_slot_tv_to_uniform = 0;
};

struct UniformityVerdict {
  UniformityOptions options;
  std::vector<Permutation> sigmas;
  std::vector<ServerUniformity> servers;
  double max_pair_tv = 0;
  double baseline_tv = 0;
  std::size_t tests = 0;
  double corrected_alpha = 0;
  double min_p_value = 1;
  double slot_pass_fraction = 1;  // uncorrected, at alpha
  bool tv_pass = false;
  bool chi_pass = false;
  bool pass = false;
};

namespace detail {

inline std::uint64_t ipow(std::uint64_t base, std::size_t exp) {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) r *= base;
  return r;
}

// Counts for one sigma: slot[n][j][cell] and tuple[n][cell].
struct Tally {
  std::vector<std::vector<std::vector<std::uint64_t>>> slot;
  std::vector<std::vector<std::uint64_t>> tuple;
};

}  // namespace detail

/// Monte-Carlo audit of server views across sigma.
///
/// For every sigma in the audit set, `trials` independent runs (fresh W,
/// masks, placeholders; F fresh or fixed per `mode`) are tallied per server:
/// each input slot's law on GF(p)^L, and the joint law of the first
/// `tuple_slots` inputs. Distributions are compared pairwise across sigma by
/// total variation; slots and tuples are tested for uniformity by chi-square
/// with a Bonferroni correction over all tests. A second, independent run of
/// the first sigma gives the same-sigma TV baseline.
inline UniformityVerdict uniformity_test(const UniformityOptions& o) {
  const PrimeModulus p(o.p);
  const std::uint64_t slot_cells = detail::ipow(o.p, o.L);
  if (o.L > 5 || slot_cells > kMaxSlotCells) {
    throw Error(ErrorCode::kGuardExceeded,
                "p^L = " + std::to_string(slot_cells) + " cells exceeds " +
                    std::to_string(kMaxSlotCells));
  }
  if (o.trials == 0) throw Error(ErrorCode::kInvalidArgument, "trials must be > 0");

  UniformityVerdict v;
  v.options = o;
  Rng root(o.seed);
  Rng sigma_rng = root.split("sigmas");
  v.sigmas = audit_sigmas(o.K, o.max_sigmas, sigma_rng);

  const std::uint64_t cell_budget =
      o.max_tuple_cells ? o.max_tuple_cells
                        : std::max<std::uint64_t>(slot_cells, o.trials / kTrialsPerTupleCell);

  // Slot counts per server come from the (sigma-independent) plan.
  const auto reference_prints =
      plan_fingerprints(plan_protocol(o.K, o.N, o.M, v.sigmas.front()));
  std::vector<std::size_t> slots(o.N), tuple_slots(o.N);
  for (int n = 0; n < o.N; ++n) {
    slots[n] = reference_prints[n].size();
    std::size_t w = 0;
    while (w < slots[n] && detail::ipow(slot_cells, w + 1) <= cell_budget) ++w;
    tuple_slots[n] = w;
  }

  Rng fixed_rng = root.split("fixed-functions");
  const auto fixed_functions = sample_functions(o.K, o.L, p, fixed_rng);

  auto run_sigma = [&](const Permutation& sigma, std::uint64_t stream) {
    detail::Tally t;
    t.slot.resize(o.N);
    t.tuple.resize(o.N);
    for (int n = 0; n < o.N; ++n) {
      t.slot[n].assign(slots[n], std::vector<std::uint64_t>(slot_cells, 0));
      t.tuple[n].assign(detail::ipow(slot_cells, tuple_slots[n]), 0);
    }
    const QueryPlan plan = plan_protocol(o.K, o.N, o.M, sigma);
    if (plan_fingerprints(plan) != reference_prints) {
      throw Error(ErrorCode::kInternal, "fingerprint changed with sigma");
    }
    ProtocolClient client(plan, p, o.L);
    Rng rng = root.split(stream);
    auto transport = SimTransport::with_servers(o.N, p, fixed_functions);
    for (std::uint64_t trial = 0; trial < o.trials; ++trial) {
      if (o.mode == FunctionMode::kResample) {
        transport = SimTransport::with_servers(o.N, p, sample_functions(o.K, o.L, p, rng));
      } else {
        transport.reset();
      }
      const auto inputs = sample_inputs(o.M, o.L, p, rng);
      client.execute(inputs, transport, rng);
      for (int n = 0; n < o.N; ++n) {
        const auto& entries = transport.server(n + 1).marginal().entries;
        std::uint64_t tuple_index = 0;
        for (std::size_t j = 0; j < entries.size(); ++j) {
          std::uint64_t cell = 0;
          for (std::size_t i = o.L; i-- > 0;) cell = cell * o.p + entries[j].input[i].value;
          ++t.slot[n][j][cell];
          if (j < tuple_slots[n]) tuple_index = tuple_index * slot_cells + cell;
        }
        ++t.tuple[n][tuple_index];
      }
    }
    return t;
  };

  std::vector<detail::Tally> tallies;
  for (std::size_t s = 0; s < v.sigmas.size(); ++s) tallies.push_back(run_sigma(v.sigmas[s], 1000 + s));
  const detail::Tally baseline = run_sigma(v.sigmas.front(), 999);

  std::vector<double> p_values;
  std::size_t slot_tests = 0, slot_passes = 0;
  for (int n = 0; n < o.N; ++n) {
    ServerUniformity su;
    su.server = n + 1;
    su.slots = slots[n];
    su.tuple_slots = tuple_slots[n];
    su.tuple_cells = tallies.front().tuple[n].size();
    for (std::size_t a = 0; a < tallies.size(); ++a) {
      for (std::size_t b = a + 1; b < tallies.size(); ++b) {
        const double tv = stats::total_variation(tallies[a].tuple[n], tallies[b].tuple[n]);
        if (tv >= su.max_pair_tv) {
          su.max_pair_tv = tv;
          su.worst_pair = v.sigmas[a].to_display() + " vs " + v.sigmas[b].to_display();
        }
      }
      for (const auto& counts : tallies[a].slot[n]) {
        const auto chi = stats::chi_square_uniform(counts);
        p_values.push_back(chi.p_value);
        su.min_slot_p = std::min(su.min_slot_p, chi.p_value);
        su.max_slot_tv_to_uniform =
            std::max(su.max_slot_tv_to_uniform, stats::tv_to_uniform(counts));
        ++slot_tests;
        if (chi.p_value >= o.alpha) ++slot_passes;
      }
      if (tallies[a].tuple[n].size() > 1) {
        const auto chi = stats::chi_square_uniform(tallies[a].tuple[n]);
        p_values.push_back(chi.p_value);
        su.min_tuple_p = std::min(su.min_tuple_p, chi.p_value);
      }
    }
    su.baseline_tv = stats::total_variation(tallies.front().tuple[n], baseline.tuple[n]);
    v.max_pair_tv = std::max(v.max_pair_tv, su.max_pair_tv);
    v.baseline_tv = std::max(v.baseline_tv, su.baseline_tv);
    v.servers.push_back(su);
  }
  v.tests = p_values.size();
  v.corrected_alpha = v.tests ? o.alpha / static_cast<double>(v.tests) : o.alpha;
  for (double pv : p_values) v.min_p_value = std::min(v.min_p_value, pv);
  v.slot_pass_fraction =
      slot_tests ? static_cast<double>(slot_passes) / static_cast<double>(slot_tests) : 1.0;
  v.tv_pass = v.max_pair_tv <= o.tv_threshold;
  v.chi_pass = v.min_p_value >= v.corrected_alpha;
  v.pass = v.tv_pass && v.chi_pass;
  return v;
}

// ---------------------------------------------------------------------------
// Reverse-computation attacker.

namespace detail {

// Ordered sequences of distinct function indices of length 0..max_len.
inline void function_sequences(int K, int max_len, std::vector<int>& cur,
                               std::vector<std::vector<int>>& out) {
  out.push_back(cur);
  if (static_cast<int>(cur.size()) == max_len) return;
  for (int k = 1; k <= K; ++k) {
    if (std::find(cur.begin(), cur.end(), k) != cur.end()) continue;
    cur.push_back(k);
    function_sequences(K, max_len, cur, out);
    cur.pop_back();
  }
}

inline bool contains_chain(const Permutation& sigma, const std::vector<int>& chain) {
  std::vector<int> pos(sigma.size() + 1);
  for (int k = 1; k <= sigma.size(); ++k) pos[sigma(k)] = k;
  for (std::size_t i = 1; i < chain.size(); ++i) {
    if (pos[chain[i]] != pos[chain[0]] + static_cast<int>(i)) return false;
  }
  return true;
}

}  // namespace detail

/// Guesses sigma from one server's marginal list and full knowledge of F.
///
/// For every earlier query j and later query j', the attacker checks whether
/// the later input equals the earlier answer pushed through a short sequence
/// of other functions: x_{j'} = F_{s_t} ... F_{s_1} F_{k_j} x_j. Each hit says
/// k_j, s_1, ..., s_t, k_{j'} are consecutive in the composition order. The
/// guess is uniform over the sigma consistent with every hit (over all of S_K
/// when there are no hits or they contradict each other).
inline Permutation sigma_attack(const MarginalQueryList& marginal,
                                std::span<const FieldMatrix> functions,
                                const PrimeModulus& p, Rng& rng) {
  const int K = static_cast<int>(functions.size());
  if (K <= 1) return Permutation::identity(std::max(K, 1));
  std::vector<std::vector<int>> seqs;
  std::vector<int> cur;
  detail::function_sequences(K, std::max(0, K - 2), cur, seqs);

  const auto& e = marginal.entries;
  std::vector<FieldVector> answers;
  answers.reserve(e.size());
  for (const auto& q : e) answers.push_back(mat_vec_mul(functions[q.function - 1], q.input, p));

  std::vector<std::vector<int>> chains;
  for (std::size_t j = 0; j < e.size(); ++j) {
    for (const auto& s : seqs) {
      std::vector<int> chain{e[j].function};
      chain.insert(chain.end(), s.begin(), s.end());
      FieldVector image = answers[j];
      for (int k : s) image = mat_vec_mul(functions[k - 1], image, p);
      for (std::size_t jj = j + 1; jj < e.size(); ++jj) {
        if (e[jj].input != image) continue;
        std::vector<int> full = chain;
        full.push_back(e[jj].function);
        std::vector<int> sorted = full;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;
        chains.push_back(std::move(full));
      }
    }
  }

  std::vector<Permutation> candidates;
  const auto all = K <= kMaxEnumerableK ? enumerate_permutations(K) : std::vector<Permutation>{};
  if (!chains.empty() && !all.empty()) {
    for (const auto& sigma : all) {
      bool ok = true;
      for (const auto& c : chains) ok = ok && detail::contains_chain(sigma, c);
      if (ok) candidates.push_back(sigma);
    }
  }
  if (candidates.empty()) {
    if (all.empty()) return random_permutation(K, rng);
    candidates = all;
  }
  return candidates[rng.uniform_below(candidates.size())];
}

/// Negative control: the naive chain where step j of each request goes to
/// server ((j-1) mod N) + 1 with input equal to the previous answer. Returns
/// the servers' marginal lists.
inline std::vector<MarginalQueryList> run_naive_chain(
    const std::vector<FieldMatrix>& functions, const Permutation& sigma,
    std::span<const FieldVector> inputs, int N, const PrimeModulus& p) {
  auto transport = SimTransport::with_servers(N, p, functions);
  for (const auto& w : inputs) {
    FieldVector v = w;
    for (int j = 1; j <= sigma.size(); ++j) {
      v = transport.send((j - 1) % N + 1, sigma(j), v);
    }
  }
  return transport.capture();
}

struct AttackOptions {
  int K = 3;
  int N = 2;
  int M = 2;
  std::size_t L = 2;
  std::uint64_t p = kMersenne31;
  std::uint64_t trials = 10'000;
  std::uint64_t seed = 7;
  bool negative_control = false;
  int target_server = 1;
};

struct AttackVerdict {
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double rate = 0;
  double expected = 0;  // 1/K! for the real scheme
  double sd = 0;
  bool negative_control = false;
  bool pass = false;
};

/// Success rate of sigma_attack on `target_server`, with sigma, F and W drawn
/// fresh per trial. Against the real scheme the rate must sit within three
/// binomial standard deviations of 1/K!; against the naive chain it must
/// exceed 0.9.
inline AttackVerdict attack_campaign(const AttackOptions& o) {
  const PrimeModulus p(o.p);
  Rng rng = Rng(o.seed).split(o.negative_control ? "attack-naive" : "attack-real");
  AttackVerdict v;
  v.trials = o.trials;
  v.negative_control = o.negative_control;
  ProtocolConfig config{o.K, o.N, o.M, o.L, o.p, o.seed};
  for (std::uint64_t t = 0; t < o.trials; ++t) {
    const Permutation sigma = random_permutation(o.K, rng);
    const auto functions = sample_functions(o.K, o.L, p, rng);
    const auto inputs = sample_inputs(o.M, o.L, p, rng);
    std::vector<MarginalQueryList> views;
    if (o.negative_control) {
      views = run_naive_chain(functions, sigma, inputs, o.N, p);
    } else {
      auto transport = SimTransport::with_servers(o.N, p, functions);
      config.seed = rng();
      run_protocol(config, sigma, inputs, transport);
      views = transport.capture();
    }
    const Permutation guess = sigma_attack(views.at(o.target_server - 1), functions, p, rng);
    if (guess == sigma) ++v.successes;
  }
  v.rate = static_cast<double>(v.successes) / static_cast<double>(v.trials);
  v.expected = 1.0 / static_cast<double>(factorial(o.K));
  v.sd = stats::binomial_se(v.expected, v.trials);
  v.pass = o.negative_control ? v.rate > 0.9 : std::abs(v.rate - v.expected) <= 3 * v.sd;
  return v;
}

// ---------------------------------------------------------------------------
// Rate and converse quantities.

/// (1 - 1/N) / (1 - 1/max(K, N)); equals 1 when K <= N.
inline double capacity_lower_bound(int K, int N) {
  if (K <= N) return 1.0;
  return (1.0 - 1.0 / N) / (1.0 - 1.0 / K);
}

/// Limit of the implemented scheme's rate as M grows.
inline Rational achievable_limit(int K, int N) {
  if (K <= N) return {1, 1};
  if (N == 1) return Rational::make(1, factorial(K));
  return Rational::make(static_cast<std::uint64_t>(K) * (N - 1),
                        static_cast<std::uint64_t>(N) * (K - 1));
}

struct RateVerdict {
  Rational measured;
  double lower_bound = 0;
  double upper_bound = 1;
  Rational limit;
  double gap = 0;  // lower_bound - measured
  bool exceeds_upper = false;
  bool exceeds_limit = false;
  bool ok = false;
};

inline RateVerdict rate_report(const RunReport& report) {
  RateVerdict v;
  const int K = report.config.K;
  const int N = report.config.N;
  v.measured = report.rate;
  v.lower_bound = capacity_lower_bound(K, N);
  v.limit = achievable_limit(K, N);
  v.gap = v.lower_bound - v.measured.value();
  v.exceeds_upper = v.measured > Rational{1, 1};
  v.exceeds_limit = v.measured > v.limit;
  v.ok = !v.exceeds_upper && !v.exceeds_limit;
  return v;
}

struct ConverseVerdict {
  std::vector<std::uint64_t> D_k;
  std::vector<std::int64_t> slack;  // D_k - M
  bool ok = true;
};

/// D_k >= M for every function k.
inline ConverseVerdict converse_counts(const RunReport& report, int K, int M) {
  ConverseVerdict v;
  v.D_k = report.D_k;
  if (static_cast<int>(v.D_k.size()) != K) {
    throw Error(ErrorCode::kDimensionMismatch, "D_k has wrong length");
  }
  for (auto d : v.D_k) {
    v.slack.push_back(static_cast<std::int64_t>(d) - M);
    v.ok = v.ok && static_cast<std::int64_t>(d) >= M;
  }
  return v;
}

struct RankDecayResult {
  std::size_t L = 0;
  std::size_t M = 0;
  std::uint64_t p = 0;
  std::uint64_t trials = 0;
  std::uint64_t deficient = 0;
  double empirical = 0;
  double bound = 0;
  double se = 0;
  double threshold = 0;
  bool certain = false;  // M > L: rank < M always
  bool pass = false;
};

/// (p^M - 1) / (p^L (p - 1)): union bound on P(rank(W) < M).
inline double rank_deficiency_bound(std::uint64_t p, std::size_t L, std::size_t M) {
  const long double q = static_cast<long double>(p);
  return static_cast<double>((std::pow(q, static_cast<long double>(M)) - 1) /
                             (std::pow(q, static_cast<long double>(L)) * (q - 1)));
}

/// Empirical P(rank(W) < M) for M uniform vectors in GF(p)^L, checked against
/// the union bound plus three binomial standard errors.
inline RankDecayResult rank_decay_experiment(std::size_t L, std::size_t M,
                                             std::uint64_t p_value,
                                             std::uint64_t trials, Rng& rng) {
  const PrimeModulus p(p_value);
  RankDecayResult r;
  r.L = L;
  r.M = M;
  r.p = p_value;
  r.trials = trials;
  r.bound = rank_deficiency_bound(p_value, L, M);
  if (M > L) {
    r.certain = true;
    r.empirical = 1.0;
    r.deficient = trials;
    r.threshold = 1.0;
    r.pass = true;
    return r;
  }
  std::vector<FieldVector> cols(M);
  for (std::uint64_t t = 0; t < trials; ++t) {
    for (auto& c : cols) c = sample_uniform_vector(L, p, rng);
    if (rank(cols, p) < M) ++r.deficient;
  }
  r.empirical = static_cast<double>(r.deficient) / static_cast<double>(trials);
  r.se = stats::binomial_se(std::min(r.bound, 1.0), trials);
  r.threshold = r.bound + 3 * r.se;
  r.pass = r.empirical <= r.threshold;
  return r;
}

// ---------------------------------------------------------------------------
// Reporting.

struct CheckResult {
  std::string check;
  double statistic = 0;
  double threshold = 0;
  bool pass = false;
  nlohmann::json details = nlohmann::json::object();
};

inline nlohmann::json to_json(const CheckResult& c) {
  return {{"check", c.check},
          {"statistic", c.statistic},
          {"threshold", c.threshold},
          {"pass", c.pass},
          {"details", c.details}};
}

inline CheckResult as_check(const FingerprintVerdict& v) {
  CheckResult c{"fingerprint_invariance", static_cast<double>(v.sigmas_checked), 0,
                v.invariant};
  c.details = {{"sampled", v.sampled}, {"evidence", v.evidence}, {"fingerprints", v.reference}};
  return c;
}

inline std::vector<CheckResult> as_checks(const UniformityVerdict& v) {
  CheckResult tv{"uniformity_tv", v.max_pair_tv, v.options.tv_threshold, v.tv_pass};
  CheckResult chi{"uniformity_chi_square", v.min_p_value, v.corrected_alpha, v.chi_pass};
  nlohmann::json servers = nlohmann::json::array();
  for (const auto& s : v.servers) {
    servers.push_back({{"server", s.server},
                       {"slots", s.slots},
                       {"tuple_slots", s.tuple_slots},
                       {"tuple_cells", s.tuple_cells},
                       {"max_pair_tv", s.max_pair_tv},
                       {"worst_pair", s.worst_pair},
                       {"baseline_tv", s.baseline_tv},
                       {"min_slot_p", s.min_slot_p},
                       {"min_tuple_p", s.min_tuple_p},
                       {"max_slot_tv_to_uniform", s.max_slot_tv_to_uniform}});
  }
  tv.details = {{"trials", v.options.trials},
                {"sigmas", v.sigmas.size()},
                {"baseline_tv", v.baseline_tv},
                {"mode", v.options.mode == FunctionMode::kResample ? "resample" : "fixed"},
                {"servers", servers}};
  chi.details = {{"tests", v.tests},
                 {"alpha", v.options.alpha},
                 {"slot_pass_fraction", v.slot_pass_fraction}};
  return {tv, chi};
}

inline CheckResult as_check(const AttackVerdict& v) {
  CheckResult c;
  c.check = v.negative_control ? "attack_negative_control" : "attack_real_scheme";
  c.statistic = v.rate;
  c.threshold = v.negative_control ? 0.9 : 3 * v.sd;
  c.pass = v.pass;
  c.details = {{"trials", v.trials},
               {"successes", v.successes},
               {"expected", v.expected},
               {"sd", v.sd}};
  return c;
}

inline CheckResult as_check(const ConverseVerdict& v) {
  std::int64_t min_slack = v.slack.empty() ? 0 : *std::min_element(v.slack.begin(), v.slack.end());
  CheckResult c{"converse_counts", static_cast<double>(min_slack), 0, v.ok};
  c.details = {{"D_k", v.D_k}, {"slack", v.slack}};
  return c;
}

inline CheckResult as_check(const RateVerdict& v) {
  CheckResult c{"rate", v.measured.value(), v.limit.value(), v.ok};
  c.details = {{"measured", v.measured.str()},
               {"lower_bound", v.lower_bound},
               {"upper_bound", v.upper_bound},
               {"limit", v.limit.str()},
               {"gap", v.gap}};
  return c;
}

inline CheckResult as_check(const RankDecayResult& r) {
  CheckResult c{"rank_decay", r.empirical, r.threshold, r.pass};
  c.details = {{"p", r.p}, {"L", r.L}, {"M", r.M}, {"trials", r.trials},
               {"bound", r.bound}, {"se", r.se}, {"certain", r.certain}};
  return c;
}

}  // namespace psfc::audit
