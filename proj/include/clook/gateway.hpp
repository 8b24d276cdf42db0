// Copyright 2026 The Clook Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CLOOK_GATEWAY_HPP_
#define CLOOK_GATEWAY_HPP_

// Live gateway: one clock driven in real time, newline-delimited JSON over
// plain TCP. Every line is one JSON object.
//
// client -> gateway   {"type":"faces","count":1,"t":1712345678901}
// gateway -> client   {"type":"display","tod_ms":37800000,"mode":"NORMAL"}   10 Hz
//                     {"type":"step","t_ms":...,"event":"planned",...}
//                     {"type":"presence","t_ms":...,"event":"state","state":"SHOWING"}
//                     {"type":"error","message":"..."}
//
// mode is NORMAL, FAST, FROZEN or REMOTE. A malformed line gets an error
// reply and the connection stays open. If no faces message arrives for
// sim.staleness_ms the clock sees a face count of 0.
//
// With a peer address the gateway dials it and exchanges presence messages
// ({"v":1,"type":"HELLO",...}) on that connection; presence lines arriving
// on any accepted connection are also taken as coming from the peer.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "clook/config.hpp"

namespace clook {

struct HostPort {
  std::string host;
  std::uint16_t port = 0;
};

/// Parses "host:port" (host may be empty for all interfaces).
/// Throws ValidationError.
HostPort parse_host_port(const std::string& addr);

struct GatewayOptions {
  std::string listen = "127.0.0.1:7420";
  std::optional<std::string> peer;
  int tz_offset_minutes = 0;
  SimConfig config;
  /// Defaults to the bound listen address.
  std::string local_id;
};

class Gateway {
 public:
  explicit Gateway(GatewayOptions options);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Binds and starts serving. Throws Error when the address is unusable.
  void start();
  /// Idempotent; joins every thread.
  void stop();
  /// Blocks until stop() is called from elsewhere.
  void wait();

  /// Actual bound port (useful with port 0).
  std::uint16_t port() const;
  const std::string& local_id() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace clook

#endif  // CLOOK_GATEWAY_HPP_
