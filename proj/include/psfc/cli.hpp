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


// Command-line driver: run, audit, rate-table, demo and serve.

#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "psfc/audit.hpp"
#include "psfc/client.hpp"
#include "psfc/error.hpp"
#include "psfc/field.hpp"
#include "psfc/permutation.hpp"
#include "psfc/rng.hpp"
#include "psfc/scheduler.hpp"
#include "psfc/server.hpp"
#include "psfc/tcp.hpp"
#include "psfc/transport.hpp"

namespace psfc::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

inline constexpr std::size_t kMaxExhaustiveSigmas = 720;
inline constexpr std::size_t kUniformitySigmas = 6;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CliConfig {
  std::string subcommand;
  int K = 3;
  int N = 2;
  std::optional<int> M;
  std::size_t L = 1;
  std::uint64_t p = kMersenne31;
  std::uint64_t seed = 1;
  std::string sigma = "random";
  std::string transport = "sim";
  std::vector<std::string> servers;
  std::string report_path;
  std::string outputs_path;
  std::string plan_path;
  // audit
  std::uint64_t trials = 100'000;
  double alpha = 0.01;
  double tv_threshold = 0.02;
  bool negative_control = false;
  std::string f_mode = "both";
  std::uint64_t attack_trials = 10'000;
  std::uint64_t rank_trials = 100'000;
  std::string json_path;
  // rate-table
  int k_max = 5;
  int n_max = 5;
  std::vector<int> m_primes{1, 10, 100, 1000, 3000};
  std::string csv_path;
  // demo
  std::string demo;
  // serve
  int server_id = 1;
  std::uint16_t port = 0;
  std::string host = "127.0.0.1";
};

/// Public functions F_{1:K} and inputs W for a seed; every tool derives them
/// the same way so separately started servers agree with the client.
inline std::vector<FieldMatrix> seeded_functions(int K, std::size_t L, std::uint64_t p,
                                                 std::uint64_t seed) {
  Rng rng = Rng(seed).split("functions");
  return audit::sample_functions(K, L, PrimeModulus(p), rng);
}

inline std::vector<FieldVector> seeded_inputs(int M, std::size_t L, std::uint64_t p,
                                              std::uint64_t seed) {
  Rng rng = Rng(seed).split("inputs");
  return audit::sample_inputs(M, L, PrimeModulus(p), rng);
}

inline void validate(const CliConfig& c) {
  if (c.K < 1 || c.N < 1 || c.L < 1 || (c.M && *c.M < 1)) {
    throw UsageError("K, N, M and L must all be >= 1");
  }
  if (c.p >= kModulusLimit || !detail::is_prime(c.p)) {
    throw UsageError("p must be a prime below 2^61, got " + std::to_string(c.p));
  }
}

inline Permutation resolve_sigma(const CliConfig& c) {
  if (c.sigma == "random") {
    Rng rng = Rng(c.seed).split("sigma");
    return random_permutation(c.K, rng);
  }
  Permutation s;
  try {
    s = Permutation::parse_display(c.sigma);
  } catch (const Error& e) {
    throw UsageError(std::string("bad --sigma: ") + e.what());
  }
  if (s.size() != c.K) {
    throw UsageError("--sigma has " + std::to_string(s.size()) + " entries, K is " +
                     std::to_string(c.K));
  }
  return s;
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path);
  f << bytes;
}

inline std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// A transport plus whatever local servers back it.
struct TransportHandle {
  std::vector<std::unique_ptr<TcpServer>> local;
  std::unique_ptr<Transport> transport;

  TransportHandle() = default;
  TransportHandle(TransportHandle&&) = default;
  ~TransportHandle() {
    if (transport) transport->close();
    for (auto& s : local) s->stop();
  }
};

inline TransportHandle open_transport(const CliConfig& c,
                                      const std::vector<FieldMatrix>& functions) {
  TransportHandle h;
  const PrimeModulus p(c.p);
  if (c.transport == "sim") {
    h.transport = std::make_unique<SimTransport>(SimTransport::with_servers(c.N, p, functions));
    return h;
  }
  std::vector<std::string> addrs = c.servers;
  if (addrs.empty()) {
    for (int n = 1; n <= c.N; ++n) {
      h.local.push_back(std::make_unique<TcpServer>(ServerState(n, p, functions)));
      h.local.back()->start();
      addrs.push_back(h.local.back()->address());
    }
  } else if (static_cast<int>(addrs.size()) != c.N) {
    throw UsageError("--servers lists " + std::to_string(addrs.size()) +
                     " addresses, N is " + std::to_string(c.N));
  }
  h.transport = std::make_unique<TcpTransport>(addrs);
  return h;
}

inline int cmd_run(const CliConfig& c, std::ostream& out, std::ostream& err) {
  validate(c);
  const int M = c.M.value_or(1);
  const Permutation sigma = resolve_sigma(c);
  const PrimeModulus p(c.p);
  const auto functions = seeded_functions(c.K, c.L, c.p, c.seed);
  const auto inputs = seeded_inputs(M, c.L, c.p, c.seed);
  const ProtocolConfig config{c.K, c.N, M, c.L, c.p, c.seed};

  RunResult result;
  {
    TransportHandle h = open_transport(c, functions);
    result = run_protocol(config, sigma, inputs, *h.transport);
  }

  int status = kExitPass;
  for (int m = 0; m < M; ++m) {
    if (result.outputs[m] != compose_reference(functions, sigma, inputs[m], p)) {
      err << "output " << m << " does not match the reference composition\n";
      status = kExitFailure;
    }
  }
  const auto rate = audit::rate_report(result.report);
  const auto converse = audit::converse_counts(result.report, c.K, M);
  if (!rate.ok) {
    err << "rate " << rate.measured.str() << " violates its bound\n";
    status = kExitFailure;
  }
  if (!converse.ok) {
    err << "some D_k < M\n";
    status = kExitFailure;
  }

  const std::string report = report_to_json(result.report).dump(2) + "\n";
  if (c.report_path.empty()) {
    out << report;
  } else {
    write_file(c.report_path, report);
  }
  if (!c.outputs_path.empty()) {
    const auto bytes = encode_output_matrix(result.outputs);
    write_file(c.outputs_path, std::string(bytes.begin(), bytes.end()));
  }
  if (!c.plan_path.empty()) {
    write_file(c.plan_path, plan_to_json(plan_protocol(c.K, c.N, M, sigma)).dump(2) + "\n");
  }
  err << "sigma=" << sigma.to_display() << " D=" << result.report.D
      << " R=" << result.report.rate.str() << " outputs "
      << (status == kExitPass ? "match" : "MISMATCH") << "\n";
  return status;
}

inline void print_checks(const std::vector<audit::CheckResult>& checks, std::ostream& out) {
  char line[160];
  std::snprintf(line, sizeof line, "%-36s %12s %12s  %s\n", "check", "statistic", "threshold",
                "verdict");
  out << line;
  for (const auto& ch : checks) {
    std::snprintf(line, sizeof line, "%-36s %12.6g %12.6g  %s\n", ch.check.c_str(),
                  ch.statistic, ch.threshold, ch.pass ? "PASS" : "FAIL");
    out << line;
  }
}

inline int cmd_audit(const CliConfig& c, std::ostream& out, std::ostream& err) {
  validate(c);
  const int M = c.M.value_or(2 * std::max(c.N - 1, 1));
  if (c.f_mode != "resample" && c.f_mode != "fixed" && c.f_mode != "both") {
    throw UsageError("--f-mode must be resample, fixed or both");
  }
  const bool sampled =
      c.K > kMaxEnumerableK || factorial(c.K) > kMaxExhaustiveSigmas;
  if (sampled) {
    err << "warning: K! exceeds " << kMaxExhaustiveSigmas
        << "; auditing a sample of sigma instead of all of S_K\n";
  }

  std::vector<audit::CheckResult> checks;
  checks.push_back(audit::as_check(audit::fingerprint_invariance(
      {c.K, c.N, M, c.L, c.p, c.seed, kMaxExhaustiveSigmas})));

  std::uint64_t cells = 1;
  for (std::size_t i = 0; i < c.L && cells <= audit::kMaxSlotCells; ++i) cells *= c.p;
  if (cells > audit::kMaxSlotCells) {
    err << "warning: p^L exceeds " << audit::kMaxSlotCells
        << " cells; skipping the distribution tests (use a tiny field, e.g. --p 3 --l 1)\n";
  } else {
    std::vector<audit::FunctionMode> modes;
    if (c.f_mode != "fixed") modes.push_back(audit::FunctionMode::kResample);
    if (c.f_mode != "resample") modes.push_back(audit::FunctionMode::kFixed);
    for (auto mode : modes) {
      audit::UniformityOptions o;
      o.K = c.K;
      o.N = c.N;
      o.M = M;
      o.L = c.L;
      o.p = c.p;
      o.trials = c.trials;
      o.alpha = c.alpha;
      o.tv_threshold = c.tv_threshold;
      o.mode = mode;
      o.seed = c.seed;
      o.max_sigmas = kUniformitySigmas;
      for (auto ch : audit::as_checks(audit::uniformity_test(o))) {
        ch.check += mode == audit::FunctionMode::kResample ? "[F resampled]" : "[F fixed]";
        checks.push_back(std::move(ch));
      }
    }
  }

  audit::AttackOptions attack;
  attack.K = c.K;
  attack.N = c.N;
  attack.M = M;
  attack.trials = c.attack_trials;
  attack.seed = c.seed;
  checks.push_back(audit::as_check(audit::attack_campaign(attack)));
  if (c.negative_control) {
    attack.negative_control = true;
    const auto v = audit::attack_campaign(attack);
    err << "negative control: attacker recovers sigma at rate " << fixed(v.rate, 4)
        << " against the naive chain schedule\n";
    checks.push_back(audit::as_check(v));
  }

  {
    const PrimeModulus p(c.p);
    const auto functions = seeded_functions(c.K, c.L, c.p, c.seed);
    const auto inputs = seeded_inputs(M, c.L, c.p, c.seed);
    auto transport = SimTransport::with_servers(c.N, p, functions);
    const auto r = run_protocol({c.K, c.N, M, c.L, c.p, c.seed}, resolve_sigma(c), inputs,
                                transport);
    checks.push_back(audit::as_check(audit::converse_counts(r.report, c.K, M)));
    checks.push_back(audit::as_check(audit::rate_report(r.report)));
  }

  Rng rank_rng = Rng(c.seed).split("rank");
  for (auto [pv, L, m] : {std::tuple<std::uint64_t, std::size_t, std::size_t>{2, 10, 3},
                          {5, 8, 2}}) {
    auto ch = audit::as_check(audit::rank_decay_experiment(L, m, pv, c.rank_trials, rank_rng));
    ch.check += "(p=" + std::to_string(pv) + ",L=" + std::to_string(L) +
                ",M=" + std::to_string(m) + ")";
    checks.push_back(std::move(ch));
  }

  print_checks(checks, out);
  bool all = true;
  for (const auto& ch : checks) all = all && ch.pass;
  out << (all ? "all checks pass" : "audit FAILED") << "\n";
  if (!c.json_path.empty()) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& ch : checks) j.push_back(audit::to_json(ch));
    write_file(c.json_path, j.dump(2) + "\n");
  }
  return all ? kExitPass : kExitFailure;
}

inline int cmd_rate_table(const CliConfig& c, std::ostream& out) {
  if (c.k_max < 1 || c.n_max < 1 || c.m_primes.empty()) {
    throw UsageError("--k-max, --n-max must be >= 1 and --m-primes non-empty");
  }
  if (c.k_max > kMaxEnumerableK) {
    throw UsageError("--k-max above " + std::to_string(kMaxEnumerableK) +
                     " needs more than K! fallback chains");
  }
  std::ostringstream csv;
  csv << "K,N,M,D,R,R_exact,lower_bound,gap,limit\n";
  for (int K = 2; K <= c.k_max; ++K) {
    for (int N = 1; N <= c.n_max; ++N) {
      for (int mp : c.m_primes) {
        if (mp < 1) throw UsageError("--m-primes entries must be >= 1");
        const int M = N > 1 ? mp * (N - 1) : mp;
        const std::uint64_t D = query_count(K, N, M);
        const Rational R = Rational::make(static_cast<std::uint64_t>(K) * M, D);
        const double lower = audit::capacity_lower_bound(K, N);
        csv << K << ',' << N << ',' << M << ',' << D << ',' << fixed(R.value(), 9) << ','
            << R.str() << ',' << fixed(lower, 9) << ',' << fixed(lower - R.value(), 9) << ','
            << fixed(audit::achievable_limit(K, N).value(), 9) << '\n';
      }
    }
  }
  if (c.csv_path.empty()) {
    out << csv.str();
  } else {
    write_file(c.csv_path, csv.str());
  }
  return kExitPass;
}

/// In_i(R_b^k) written out as the composition it equals, e.g. "F4 F2 W[1,1]".
inline std::string symbolic_task(const TaskRef& t, int component, const Permutation& sigma) {
  std::string s;
  for (int k = t.step - 1; k >= 1; --k) s += "F" + std::to_string(sigma(k)) + " ";
  return s + "W[" + std::to_string(t.batch) + "," + std::to_string(component) + "]";
}

inline std::string symbolic_input(const InputExpr& e, const Permutation& sigma) {
  auto mask = [](const MaskId& z) {
    return "Z[" + std::to_string(z.block) + "," + std::to_string(z.index) + "]";
  };
  switch (e.kind) {
    case InputKind::kRawInput:
    case InputKind::kTaskInput:
      return symbolic_task(e.task, e.component, sigma);
    case InputKind::kMaskedTaskInput:
      return symbolic_task(e.task, e.component, sigma) + " + " + mask(e.mask);
    case InputKind::kRawMask:
      return mask(e.mask);
    case InputKind::kPlaceholder:
      return "Z*";
    case InputKind::kMaskedPlaceholder:
      return "Z* + " + mask(e.mask);
    case InputKind::kChainInput: {
      std::string s;
      for (int k = e.position; k >= 1; --k) s += "F" + std::to_string(sigma(k)) + " ";
      return s + "W[" + std::to_string(e.request + 1) + "]";
    }
  }
  return "?";
}

inline bool demo_run(int K, int N, int M, const Permutation& sigma, std::uint64_t expect_D,
                     std::ostream& out) {
  const std::uint64_t p = 5;
  const std::size_t L = 2;
  const std::uint64_t seed = 42;
  const auto plan = plan_protocol(K, N, M, sigma);
  out << "K=" << K << " N=" << N << " M=" << M << " sigma=" << sigma.to_display()
      << " pi=" << inverse_permutation(sigma).to_display() << "\n";
  if (plan.regime == Regime::kChain) {
    for (const auto& q : plan.queries) {
      out << "  server " << q.server << ": F" << q.function << "("
          << symbolic_input(q.input, sigma) << ")\n";
    }
  } else {
    for (int b = 1; b <= plan.num_blocks; ++b) {
      out << "  block " << b << "\n";
      for (int n = 1; n <= N; ++n) {
        out << "    server " << n << ":";
        for (const auto& q : plan.queries) {
          if (q.block == b && q.server == n) {
            out << "  F" << q.function << "(" << symbolic_input(q.input, sigma) << ")";
          }
        }
        out << "\n";
      }
    }
  }
  const auto functions = seeded_functions(K, L, p, seed);
  const auto inputs = seeded_inputs(M, L, p, seed);
  auto transport = SimTransport::with_servers(N, PrimeModulus(p), functions);
  const auto r = run_protocol({K, N, M, L, p, seed}, sigma, inputs, transport);
  bool ok = r.report.D == expect_D;
  for (int m = 0; m < M; ++m) {
    ok = ok && r.outputs[m] == compose_reference(functions, sigma, inputs[m], PrimeModulus(p));
  }
  out << "  queries: " << r.report.D << " (expected " << expect_D << "), outputs "
      << (ok ? "verified" : "WRONG") << "\n";
  return ok;
}

inline int cmd_demo(const CliConfig& c, std::ostream& out) {
  bool ok = true;
  if (c.demo == "example1") {
    for (const char* s : {"2,1", "1,2"}) {
      ok = demo_run(2, 2, 1, Permutation::parse_display(s), 2, out) && ok;
    }
  } else if (c.demo == "example3") {
    const int m_prime = 1;
    for (const char* s : {"1,3,4,2", "4,3,2,1"}) {
      ok = demo_run(4, 3, 2 * m_prime, Permutation::parse_display(s), 9 * m_prime + 27, out) &&
           ok;
    }
  } else {
    throw UsageError("unknown demo '" + c.demo + "' (try example1 or example3)");
  }
  return ok ? kExitPass : kExitFailure;
}

inline int cmd_serve(const CliConfig& c, std::ostream& out) {
  validate(c);
  if (c.server_id < 1) throw UsageError("--id must be >= 1");
  TcpServer server(ServerState(c.server_id, PrimeModulus(c.p),
                               seeded_functions(c.K, c.L, c.p, c.seed)),
                   c.port, c.host);
  out << "server " << c.server_id << " listening on " << c.host << ":" << server.port()
      << std::endl;
  server.serve_forever();
  return kExitPass;
}

inline void add_common(CLI::App* app, CliConfig& c) {
  app->add_option("--k", c.K, "number of basic functions K");
  app->add_option("--n", c.N, "number of servers N");
  app->add_option("--l", c.L, "vector dimension L");
  app->add_option("--p", c.p, "field prime p");
  app->add_option("--seed", c.seed, "root seed")->envname("PSFC_SEED");
}

inline int main(int argc, const char* const* argv, std::ostream& out = std::cout,
                std::ostream& err = std::cerr) {
  CliConfig c;
  CLI::App app{"Private sequential function computation over GF(p)"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run the protocol once and emit a RunReport");
  add_common(run, c);
  run->add_option("--m", c.M, "number of requests M");
  run->add_option("--sigma", c.sigma,
                  "composition order in display order sigma_K,...,sigma_1 "
                  "(\"1,3,4,2\" means F_2 first, then F_4, F_3, F_1), or \"random\"");
  run->add_option("--transport", c.transport, "sim or tcp")
      ->check(CLI::IsMember({"sim", "tcp"}));
  run->add_option("--servers", c.servers, "host:port per server (tcp); omit to spawn locally")
      ->delimiter(',');
  run->add_option("--emit-report", c.report_path, "RunReport JSON path (default stdout)");
  run->add_option("--emit-outputs", c.outputs_path, "binary output matrix path");
  run->add_option("--emit-plan", c.plan_path, "query plan JSON path");

  auto* aud = app.add_subcommand("audit", "privacy and converse checks");
  add_common(aud, c);
  aud->add_option("--m", c.M, "number of requests M (default 2(N-1))");
  aud->add_option("--sigma", c.sigma, "order used for the converse/rate run");
  aud->add_option("--trials", c.trials, "Monte-Carlo trials per sigma");
  aud->add_option("--alpha", c.alpha, "chi-square significance (family-wise)");
  aud->add_option("--tv-threshold", c.tv_threshold, "max total variation between sigma");
  aud->add_option("--f-mode", c.f_mode, "resample, fixed or both");
  aud->add_option("--attack-trials", c.attack_trials, "attacker trials");
  aud->add_option("--rank-trials", c.rank_trials, "rank-decay trials");
  aud->add_flag("--negative-control", c.negative_control,
                "also attack the naive chain schedule (expected to break)");
  aud->add_option("--json", c.json_path, "write check results as JSON");

  auto* rate = app.add_subcommand("rate-table", "CSV of rates against the bounds");
  rate->add_option("--k-max", c.k_max, "largest K");
  rate->add_option("--n-max", c.n_max, "largest N");
  rate->add_option("--m-primes", c.m_primes, "batch counts M'")->delimiter(',');
  rate->add_option("--output", c.csv_path, "CSV path (default stdout)");

  auto* demo = app.add_subcommand("demo", "replay the worked examples");
  demo->add_option("name", c.demo, "example1 or example3")->required();

  auto* serve = app.add_subcommand("serve", "serve one F-holding server over TCP");
  add_common(serve, c);
  serve->add_option("--id", c.server_id, "server index n");
  serve->add_option("--port", c.port, "TCP port (0 = ephemeral)");
  serve->add_option("--host", c.host, "IPv4 address to bind");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitUsage;
  }

  // Distribution tests need a tiny field; the audit defaults to GF(3).
  if (aud->parsed() && aud->get_option("--p")->count() == 0) c.p = 3;

  try {
    if (run->parsed()) return cmd_run(c, out, err);
    if (aud->parsed()) return cmd_audit(c, out, err);
    if (rate->parsed()) return cmd_rate_table(c, out);
    if (demo->parsed()) return cmd_demo(c, out);
    if (serve->parsed()) return cmd_serve(c, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace psfc::cli
