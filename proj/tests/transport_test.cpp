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

#include <vector>

#include "psfc/error.hpp"
#include "psfc/field.hpp"
#include "psfc/server.hpp"
#include "psfc/tcp.hpp"
#include "psfc/transport.hpp"

namespace psfc {
namespace {

// Clean EOF or reset: either way the server hung up.
bool dropped(const net::Socket& sock) {
  std::uint8_t byte;
  try {
    return !sock.read_exact(&byte, 1);
  } catch (const Error& e) {
    return e.code() == ErrorCode::kChannelClosed;
  }
}

std::vector<FieldMatrix> scalar_functions(const PrimeModulus& p) {
  return {FieldMatrix::from_rows({{1}}, p), FieldMatrix::from_rows({{3}}, p)};
}

TEST(ServerState, ServesAndRecords) {
  const PrimeModulus p(5);
  ServerState s(1, p, scalar_functions(p));
  EXPECT_EQ(s.serve_query(1, make_vector({4}, p)), make_vector({4}, p));
  EXPECT_EQ(s.serve_query(2, make_vector({4}, p)), make_vector({2}, p));
  EXPECT_EQ(marginal_fingerprint(s.marginal()), (std::vector<int>{1, 2}));
  EXPECT_EQ(s.marginal().entries[1].input, make_vector({4}, p));
}

TEST(ServerState, RejectsBadQueries) {
  const PrimeModulus p(5);
  ServerState s(1, p, scalar_functions(p));
  auto code = [&](int f, FieldVector v) {
    try {
      s.serve_query(f, v);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInternal;
  };
  EXPECT_EQ(code(0, {{1}}), ErrorCode::kUnknownFunction);
  EXPECT_EQ(code(3, {{1}}), ErrorCode::kUnknownFunction);
  EXPECT_EQ(code(1, {{1}, {1}}), ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code(1, {{5}}), ErrorCode::kNonCanonicalElement);
  EXPECT_TRUE(s.marginal().entries.empty());
}

TEST(ServerState, EmptyFingerprint) {
  const PrimeModulus p(5);
  ServerState s(2, p, scalar_functions(p));
  EXPECT_TRUE(marginal_fingerprint(s.marginal()).empty());
}

TEST(SimTransport, PerServerFifo) {
  const PrimeModulus p(7);
  auto t = SimTransport::with_servers(2, p, scalar_functions(p));
  t.send(1, 1, make_vector({1}, p));
  t.send(2, 2, make_vector({2}, p));
  t.send(1, 2, make_vector({3}, p));
  t.send(2, 1, make_vector({4}, p));
  t.send(1, 1, make_vector({5}, p));
  const auto views = t.capture();
  ASSERT_EQ(views.size(), 2u);
  EXPECT_EQ(views[0].server, 1);
  std::vector<std::uint64_t> s1, s2;
  for (const auto& e : views[0].entries) s1.push_back(e.input[0].value);
  for (const auto& e : views[1].entries) s2.push_back(e.input[0].value);
  EXPECT_EQ(s1, (std::vector<std::uint64_t>{1, 3, 5}));
  EXPECT_EQ(s2, (std::vector<std::uint64_t>{2, 4}));
}

TEST(SimTransport, ClosedChannel) {
  const PrimeModulus p(7);
  auto t = SimTransport::with_servers(1, p, scalar_functions(p));
  t.close();
  try {
    t.send(1, 1, make_vector({1}, p));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kChannelClosed);
  }
}

TEST(TcpTransport, MatchesSimulatedServers) {
  const PrimeModulus p(kMersenne31);
  Rng rng(4);
  std::vector<FieldMatrix> f;
  for (int k = 0; k < 3; ++k) f.push_back(sample_invertible_matrix(3, p, rng));
  TcpServer a(ServerState(1, p, f));
  TcpServer b(ServerState(2, p, f));
  a.start();
  b.start();
  auto sim = SimTransport::with_servers(2, p, f);
  {
    TcpTransport tcp({a.address(), b.address()});
    for (int i = 0; i < 20; ++i) {
      const int server = 1 + static_cast<int>(rng.uniform_below(2));
      const int fn = 1 + static_cast<int>(rng.uniform_below(3));
      const auto w = sample_uniform_vector(3, p, rng);
      EXPECT_EQ(tcp.send(server, fn, w), sim.send(server, fn, w));
    }
    EXPECT_EQ(tcp.capture(), sim.capture());
    tcp.close();
    EXPECT_THROW(tcp.send(1, 1, zero_vector(3)), Error);
  }
  a.stop();
  b.stop();
  EXPECT_EQ(a.marginal(), sim.capture()[0]);
  EXPECT_EQ(b.marginal(), sim.capture()[1]);
}

TEST(TcpServer, DropsConnectionOnMalformedFrame) {
  const PrimeModulus p(5);
  TcpServer server(ServerState(1, p, scalar_functions(p)));
  server.start();
  auto sock = net::connect_to(server.address());
  const std::vector<std::uint8_t> junk{'J', 'U', 'N', 'K', 0, 0, 0, 0, 0, 0, 0, 0};
  sock.write_all(junk);
  EXPECT_TRUE(dropped(sock));
  // The server keeps accepting new connections.
  TcpTransport t({server.address()});
  EXPECT_EQ(t.send(1, 2, make_vector({4}, p)), make_vector({2}, p));
  server.stop();
}

TEST(TcpServer, RejectsOutOfOrderSeq) {
  const PrimeModulus p(5);
  TcpServer server(ServerState(1, p, scalar_functions(p)));
  server.start();
  auto sock = net::connect_to(server.address());
  sock.write_all(encode_message({MessageKind::kQuery, 5, 1, {{1}}}));
  EXPECT_TRUE(dropped(sock));
  server.stop();
  EXPECT_TRUE(server.marginal().entries.empty());
}

}  // namespace
}  // namespace psfc
