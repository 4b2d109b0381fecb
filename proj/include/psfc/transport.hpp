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

#include "psfc/error.hpp"
#include "psfc/field.hpp"
#include "psfc/protocol_types.hpp"
#include "psfc/server.hpp"

namespace psfc {

/// Client-side view of the N servers.
///
/// Only (function index, input vector) crosses to a server. Each server sees
/// its own queries in the order the client issued them to it; nothing about
/// other servers or global positions is exposed. `send` is synchronous.
class Transport {
 public:
  virtual ~Transport() = default;

  virtual int num_servers() const = 0;
  virtual FieldVector send(int server, int function,
                           std::span<const FieldElement> input) = 0;
  /// What each server has received so far, servers[n-1].
  virtual std::vector<MarginalQueryList> capture() const = 0;
  virtual void close() = 0;
};

/// In-process transport; owns the server states directly.
class SimTransport final : public Transport {
 public:
  explicit SimTransport(std::vector<ServerState> servers)
      : servers_(std::move(servers)) {}

  /// N identical-knowledge servers holding `functions`.
  static SimTransport with_servers(int n, const PrimeModulus& p,
                                   const std::vector<FieldMatrix>& functions) {
    std::vector<ServerState> servers;
    servers.reserve(n);
    for (int id = 1; id <= n; ++id) servers.emplace_back(id, p, functions);
    return SimTransport(std::move(servers));
  }

  int num_servers() const override { return static_cast<int>(servers_.size()); }

  FieldVector send(int server, int function,
                   std::span<const FieldElement> input) override {
    if (closed_) throw Error(ErrorCode::kChannelClosed, "sim transport closed");
    if (server < 1 || server > num_servers()) {
      throw Error(ErrorCode::kInvalidArgument, "no server " + std::to_string(server));
    }
    return servers_[server - 1].serve_query(function, input);
  }

  std::vector<MarginalQueryList> capture() const override {
    std::vector<MarginalQueryList> out;
    out.reserve(servers_.size());
    for (const auto& s : servers_) out.push_back(s.marginal());
    return out;
  }

  void close() override { closed_ = true; }

  /// Clears every marginal list so the transport can be reused across trials.
  void reset() {
    for (auto& s : servers_) s.reset_marginal();
    closed_ = false;
  }

  const ServerState& server(int id) const { return servers_.at(id - 1); }

 private:
  std::vector<ServerState> servers_;
  bool closed_ = false;
};

}  // namespace psfc
