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

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <thread>

#include <catch_amalgamated.hpp>
#include <spdlog/spdlog.h>

#include "clook/gateway.hpp"

using clook::Gateway;
using clook::GatewayOptions;
using clook::Json;
using Clock = std::chrono::steady_clock;
using namespace std::chrono_literals;

namespace {

const bool kQuietLogs = [] {
  spdlog::set_level(spdlog::level::warn);
  return true;
}();

class Client {
 public:
  explicit Client(std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    REQUIRE(::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  }
  ~Client() { close(); }
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  void close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

  void send_line(const std::string& line) {
    const std::string out = line + "\n";
    REQUIRE(::send(fd_, out.data(), out.size(), MSG_NOSIGNAL) == static_cast<ssize_t>(out.size()));
  }

  void send_faces(int count) { send_line(Json{{"type", "faces"}, {"count", count}}.dump()); }

  /// Next line, or nullopt once `deadline` passes.
  std::optional<Json> next(Clock::time_point deadline) {
    for (;;) {
      if (auto nl = buf_.find('\n'); nl != std::string::npos) {
        const std::string line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        return Json::parse(line);
      }
      const auto left =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
      if (left <= 0) return std::nullopt;
      pollfd p{fd_, POLLIN, 0};
      if (::poll(&p, 1, static_cast<int>(left)) <= 0) continue;
      char chunk[4096];
      const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n <= 0) return std::nullopt;
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  /// Waits for a line matching `pred`; returns it or nullopt on timeout.
  std::optional<Json> wait_for(std::chrono::milliseconds within,
                               const std::function<bool(const Json&)>& pred,
                               const std::function<void()>& tick = {}) {
    const auto deadline = Clock::now() + within;
    auto next_tick = Clock::now();
    while (Clock::now() < deadline) {
      if (tick && Clock::now() >= next_tick) {
        tick();
        next_tick += 100ms;
      }
      const auto until = tick ? std::min(deadline, next_tick) : deadline;
      if (auto j = next(until); j && pred(*j)) return j;
    }
    return std::nullopt;
  }

 private:
  int fd_ = -1;
  std::string buf_;
};

bool display_mode(const Json& j, const char* mode) {
  return j.value("type", "") == "display" && j.value("mode", "") == mode;
}

GatewayOptions local_options(const std::string& id = {}) {
  GatewayOptions o;
  o.listen = "127.0.0.1:0";
  o.local_id = id;
  return o;
}

}  // namespace

TEST_CASE("parse_host_port") {
  const auto hp = clook::parse_host_port("127.0.0.1:7420");
  CHECK(hp.host == "127.0.0.1");
  CHECK(hp.port == 7420);
  CHECK(clook::parse_host_port(":0").host.empty());
  for (const char* bad : {"", "localhost", "h:", "h:x", "h:70000", "h:-1"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(clook::parse_host_port(bad), clook::ValidationError);
  }
}

TEST_CASE("faces=1 reaches NORMAL within the hold time") {
  Gateway gw(local_options());
  gw.start();
  Client c(gw.port());
  REQUIRE(c.wait_for(1s, [](const Json& j) { return display_mode(j, "FAST"); }));

  const auto t0 = Clock::now();
  const auto got = c.wait_for(3s, [](const Json& j) { return display_mode(j, "NORMAL"); },
                              [&] { c.send_faces(1); });
  REQUIRE(got);
  const auto took = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0);
  CHECK(took.count() <= 500 + 200);
  CHECK(got->at("tod_ms").is_number_integer());
  gw.stop();
}

TEST_CASE("two faces freeze the display") {
  Gateway gw(local_options());
  gw.start();
  Client c(gw.port());
  REQUIRE(c.wait_for(3s, [](const Json& j) { return display_mode(j, "FROZEN"); },
                     [&] { c.send_faces(2); }));
}

TEST_CASE("input goes stale after the client disappears") {
  GatewayOptions o = local_options();
  o.config.staleness_ms = 600;
  Gateway gw(o);
  gw.start();
  Client watcher(gw.port());
  {
    Client camera(gw.port());
    REQUIRE(watcher.wait_for(3s, [](const Json& j) { return display_mode(j, "NORMAL"); },
                             [&] { camera.send_faces(1); }));
  }
  const auto t0 = Clock::now();
  REQUIRE(watcher.wait_for(3s, [](const Json& j) { return display_mode(j, "FAST"); }));
  const auto took = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0);
  // staleness, then the hold before AWAY is confirmed
  CHECK(took.count() >= 600 + 500 - 150);
  CHECK(took.count() <= 600 + 500 + 300);
}

TEST_CASE("malformed lines get an error and the connection stays up") {
  Gateway gw(local_options());
  gw.start();
  Client c(gw.port());
  auto is_error = [](const Json& j) { return j.value("type", "") == "error"; };
  for (const char* bad : {
           "this is not json",
           "[1,2,3]",
           R"({"count":1})",
           R"({"type":"faces","count":99})",
           R"({"type":"faces","count":"1"})",
           R"({"type":"faces","count":1,"t":"now"})",
           R"({"type":"launch"})",
           R"({"v":1,"type":"GAZE","seq":1})",
       }) {
    CAPTURE(bad);
    c.send_line(bad);
    const auto err = c.wait_for(2s, is_error);
    REQUIRE(err);
    CHECK_FALSE(err->at("message").get<std::string>().empty());
  }
  REQUIRE(c.wait_for(3s, [](const Json& j) { return display_mode(j, "NORMAL"); },
                     [&] { c.send_faces(1); }));
}

TEST_CASE("displays arrive at about 10 Hz") {
  Gateway gw(local_options());
  gw.start();
  Client c(gw.port());
  c.wait_for(300ms, [](const Json&) { return false; });
  int displays = 0;
  const auto deadline = Clock::now() + 1s;
  while (auto j = c.next(deadline)) {
    if (j->value("type", "") == "display") ++displays;
  }
  CHECK(displays >= 8);
  CHECK(displays <= 12);
}

TEST_CASE("steps are pushed to clients") {
  Gateway gw(local_options());
  gw.start();
  Client c(gw.port());
  const auto step = c.wait_for(3s, [](const Json& j) { return j.value("type", "") == "step"; });
  REQUIRE(step);
  CHECK(step->contains("t_ms"));
  CHECK(step->contains("event"));
}

TEST_CASE("two peered gateways both show REMOTE") {
  GatewayOptions oa = local_options("boston");
  oa.tz_offset_minutes = -240;
  Gateway a(oa);
  a.start();
  GatewayOptions ob = local_options("beijing");
  ob.tz_offset_minutes = 480;
  ob.peer = "127.0.0.1:" + std::to_string(a.port());
  Gateway b(ob);
  b.start();

  Client ca(a.port());
  Client cb(b.port());
  // Heartbeats flowing means the pair has introduced itself.
  auto heartbeat = [](const Json& j) {
    return j.value("type", "") == "presence" && j.value("event", "") == "rx" &&
           j.at("msg").value("type", "") == "GAZE";
  };
  REQUIRE(ca.wait_for(5s, heartbeat));
  REQUIRE(cb.wait_for(5s, heartbeat));

  const auto t0 = Clock::now();
  bool a_remote = false;
  bool b_remote = false;
  auto feed = [&] {
    ca.send_faces(1);
    cb.send_faces(1);
  };
  auto next_feed = Clock::now();
  const auto deadline = t0 + 5s;
  std::optional<std::chrono::milliseconds> a_at, b_at;
  while ((!a_remote || !b_remote) && Clock::now() < deadline) {
    if (Clock::now() >= next_feed) {
      feed();
      next_feed += 100ms;
    }
    const auto until = std::min(deadline, next_feed);
    if (auto j = ca.next(until); j && display_mode(*j, "REMOTE") && !a_remote) {
      a_remote = true;
      a_at = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0);
    }
    if (auto j = cb.next(std::min(deadline, next_feed)); j && display_mode(*j, "REMOTE") &&
                                                         !b_remote) {
      b_remote = true;
      b_at = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0);
    }
  }
  REQUIRE(a_at);
  REQUIRE(b_at);
  CHECK(a_at->count() <= 3'000);
  CHECK(b_at->count() <= 3'000);
}
