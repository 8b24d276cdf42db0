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

#include "clook/gateway.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

#include <spdlog/spdlog.h>

#include "clook/clock_node.hpp"

namespace clook {

HostPort parse_host_port(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw ValidationError("address '" + addr + "' must be host:port");
  HostPort hp;
  hp.host = addr.substr(0, colon);
  const std::string port = addr.substr(colon + 1);
  if (port.empty() || port.size() > 5 ||
      port.find_first_not_of("0123456789") != std::string::npos || std::stoi(port) > 65535) {
    throw ValidationError("address '" + addr + "' has an invalid port");
  }
  hp.port = static_cast<std::uint16_t>(std::stoi(port));
  return hp;
}

namespace {

using SteadyClock = std::chrono::steady_clock;

sockaddr_in resolve(const HostPort& hp) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(hp.port);
  if (hp.host.empty() || hp.host == "0.0.0.0" || hp.host == "*") {
    sa.sin_addr.s_addr = htonl(INADDR_ANY);
    return sa;
  }
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(hp.host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    throw Error("cannot resolve host '" + hp.host + "'");
  }
  sa.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  freeaddrinfo(res);
  return sa;
}

struct Conn {
  int fd = -1;
  bool dialed = false;
  std::atomic<bool> peer{false};
  std::atomic<bool> open{true};
  std::mutex write_mu;

  bool write_line(const std::string& line) {
    if (!open) return false;
    std::lock_guard lk(write_mu);
    std::string buf = line + '\n';
    std::size_t off = 0;
    while (off < buf.size()) {
      const ssize_t n = ::send(fd, buf.data() + off, buf.size() - off, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        close();
        return false;
      }
      off += static_cast<std::size_t>(n);
    }
    return true;
  }

  void close() {
    if (open.exchange(false)) ::shutdown(fd, SHUT_RDWR);
  }
};

struct Input {
  enum class Kind : std::uint8_t { Faces, Presence } kind = Kind::Faces;
  int count = 0;
  PresenceMessage msg;
};

struct TimerEntry {
  Millis at;
  std::uint64_t seq;
  NodeTimer timer;
  bool operator>(const TimerEntry& o) const {
    return at != o.at ? at > o.at : seq > o.seq;
  }
};

}  // namespace

struct Gateway::Impl final : NodeHost {
  GatewayOptions opts;
  int listen_fd = -1;
  std::uint16_t bound_port = 0;
  std::string id;
  std::atomic<bool> running{false};
  bool started = false;

  std::mutex conns_mu;
  std::vector<std::shared_ptr<Conn>> conns;
  std::vector<std::thread> readers;
  std::shared_ptr<Conn> dialed;

  std::mutex q_mu;
  std::condition_variable q_cv;
  std::deque<Input> inbox;

  std::thread accept_thread;
  std::thread engine_thread;
  std::thread dial_thread;

  // Engine-thread state.
  SteadyClock::time_point epoch;
  std::chrono::system_clock::time_point utc_epoch;
  std::unique_ptr<ClockNode> node;
  std::priority_queue<TimerEntry, std::vector<TimerEntry>, std::greater<>> timers;
  std::uint64_t timer_seq = 0;

  explicit Impl(GatewayOptions o) : opts(std::move(o)) {}

  Millis now_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(SteadyClock::now() - epoch)
        .count();
  }

  // NodeHost, engine thread only.
  void schedule(Millis at, std::size_t, NodeTimer timer) override {
    timers.push({at, timer_seq++, timer});
  }

  void send_presence(std::size_t, const PresenceMessage& msg, Millis) override {
    std::shared_ptr<Conn> target;
    {
      std::lock_guard lk(conns_mu);
      if (dialed && dialed->open) {
        target = dialed;
      } else {
        for (const auto& c : conns) {
          if (c->peer && c->open) {
            target = c;
            break;
          }
        }
      }
    }
    if (target) target->write_line(to_wire(msg));
  }

  void emit(TraceEvent ev) override {
    const char* type = nullptr;
    if (ev.kind == TraceKind::Step) type = "step";
    if (ev.kind == TraceKind::Presence) type = "presence";
    if (type == nullptr) return;
    Json j{{"type", type}, {"t_ms", ev.t_ms}};
    for (auto it = ev.payload.begin(); it != ev.payload.end(); ++it) j[it.key()] = it.value();
    broadcast(j.dump());
  }

  Millis utc_at(Millis t) const override {
    const auto utc = utc_epoch + std::chrono::milliseconds(t);
    return std::chrono::duration_cast<std::chrono::milliseconds>(utc.time_since_epoch()).count();
  }

  void broadcast(const std::string& line) {
    std::vector<std::shared_ptr<Conn>> targets;
    {
      std::lock_guard lk(conns_mu);
      for (const auto& c : conns) {
        if (!c->peer && c->open) targets.push_back(c);
      }
    }
    for (const auto& c : targets) c->write_line(line);
  }

  void post(Input in) {
    {
      std::lock_guard lk(q_mu);
      inbox.push_back(std::move(in));
    }
    q_cv.notify_one();
  }

  void handle_line(Conn& conn, const std::string& line) {
    auto reply_error = [&](const std::string& message) {
      if (!conn.dialed) conn.write_line(Json{{"type", "error"}, {"message", message}}.dump());
    };
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception&) {
      reply_error("malformed JSON");
      return;
    }
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
      reply_error("message must be an object with a string \"type\"");
      return;
    }
    const std::string type = j["type"].get<std::string>();
    if (is_presence_type(type)) {
      try {
        Input in{Input::Kind::Presence, 0, parse_wire(line)};
        conn.peer = true;
        post(std::move(in));
      } catch (const ValidationError& e) {
        reply_error(e.what());
      }
      return;
    }
    if (type == "faces") {
      auto count = j.find("count");
      if (count == j.end() || !count->is_number_integer() || count->get<std::int64_t>() < 0 ||
          count->get<std::int64_t>() > kMaxFaceCount) {
        reply_error("faces.count must be an integer in [0, 64]");
        return;
      }
      if (auto t = j.find("t"); t != j.end() && !t->is_number()) {
        reply_error("faces.t must be a number");
        return;
      }
      post(Input{Input::Kind::Faces, count->get<int>(), {}});
      return;
    }
    // A dialed peer also sees our own pushes echoed back as a client would.
    if (conn.dialed) return;
    reply_error("unknown message type '" + type + "'");
  }

  void read_loop(const std::shared_ptr<Conn>& conn) {
    std::string buf;
    char chunk[4096];
    while (running && conn->open) {
      const ssize_t n = ::recv(conn->fd, chunk, sizeof chunk, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) break;
      buf.append(chunk, static_cast<std::size_t>(n));
      std::size_t nl;
      while ((nl = buf.find('\n')) != std::string::npos) {
        std::string line = buf.substr(0, nl);
        buf.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) handle_line(*conn, line);
      }
      if (buf.size() > (1u << 20)) {
        if (!conn->dialed) conn->write_line(R"({"type":"error","message":"line too long"})");
        buf.clear();
      }
    }
    conn->close();
    spdlog::debug("gateway {}: connection closed", id);
  }

  std::shared_ptr<Conn> add_conn(int fd, bool is_dialed) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    auto conn = std::make_shared<Conn>();
    conn->fd = fd;
    conn->dialed = is_dialed;
    std::lock_guard lk(conns_mu);
    conns.erase(std::remove_if(conns.begin(), conns.end(), [](const auto& c) { return !c->open; }),
                conns.end());
    conns.push_back(conn);
    return conn;
  }

  void accept_loop() {
    while (running) {
      const int fd = ::accept(listen_fd, nullptr, nullptr);
      if (fd < 0) {
        if (errno == EINTR) continue;
        break;
      }
      if (!running) {
        ::close(fd);
        break;
      }
      auto conn = add_conn(fd, false);
      spdlog::info("gateway {}: client connected", id);
      std::lock_guard lk(conns_mu);
      readers.emplace_back([this, conn] { read_loop(conn); });
    }
  }

  void dial_loop(const HostPort& peer) {
    while (running) {
      const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
      sockaddr_in sa{};
      bool ok = false;
      try {
        sa = resolve(peer);
        ok = fd >= 0 && ::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa) == 0;
      } catch (const Error& e) {
        spdlog::warn("gateway {}: {}", id, e.what());
      }
      if (ok) {
        auto conn = add_conn(fd, true);
        {
          std::lock_guard lk(conns_mu);
          dialed = conn;
        }
        spdlog::info("gateway {}: connected to peer {}:{}", id, peer.host, peer.port);
        read_loop(conn);
      } else if (fd >= 0) {
        ::close(fd);
      }
      std::unique_lock lk(q_mu);
      q_cv.wait_for(lk, std::chrono::milliseconds(250), [this] { return !running; });
    }
  }

  void engine_loop() {
    const Millis staleness = opts.config.staleness_ms;
    Millis last_t = now_ms();
    node->start(last_t);
    Millis next_display = last_t;
    Millis last_obs = -1;
    Millis last_faces = last_t;
    bool input_live = false;

    while (running) {
      Millis wake = next_display;
      if (!timers.empty()) wake = std::min(wake, timers.top().at);
      if (input_live) wake = std::min(wake, last_faces + staleness);
      std::deque<Input> batch;
      {
        std::unique_lock lk(q_mu);
        q_cv.wait_until(lk, epoch + std::chrono::milliseconds(wake),
                        [this] { return !inbox.empty() || !running; });
        batch.swap(inbox);
      }
      if (!running) break;
      const Millis now = std::max(now_ms(), last_t);
      last_t = now;
      try {
        for (auto& in : batch) {
          if (in.kind == Input::Kind::Presence) {
            node->receive(in.msg, now);
            continue;
          }
          last_faces = now;
          input_live = true;
          // Two frames inside one millisecond: keep the first.
          if (now <= last_obs) continue;
          node->observe(now, in.count);
          last_obs = now;
        }
        while (!timers.empty() && timers.top().at <= now) {
          const NodeTimer t = timers.top().timer;
          timers.pop();
          node->fire(t, now);
        }
        if (input_live && now >= last_faces + staleness) {
          input_live = false;
          spdlog::info("gateway {}: no faces for {} ms, treating as away", id, staleness);
          if (now > last_obs) {
            node->observe(now, 0);
            last_obs = now;
          }
        }
      } catch (const Error& e) {
        spdlog::error("gateway {}: {}", id, e.what());
      }
      if (now >= next_display) {
        broadcast(Json{{"type", "display"},
                       {"tod_ms", std::llround(node->displayed_tod(now))},
                       {"mode", to_string(node->mode(now))}}
                      .dump());
        next_display += 100;
        if (next_display <= now) next_display = now + 100;
      }
    }
  }
};

Gateway::Gateway(GatewayOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Gateway::~Gateway() { stop(); }

void Gateway::start() {
  Impl& g = *impl_;
  if (g.started) return;
  g.opts.config.validate();
  const HostPort hp = parse_host_port(g.opts.listen);
  std::optional<HostPort> peer;
  if (g.opts.peer) peer = parse_host_port(*g.opts.peer);

  g.listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (g.listen_fd < 0) throw Error(std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(g.listen_fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in sa = resolve(hp);
  if (::bind(g.listen_fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0 ||
      ::listen(g.listen_fd, 16) != 0) {
    const std::string err = std::strerror(errno);
    ::close(g.listen_fd);
    g.listen_fd = -1;
    throw Error("cannot listen on " + g.opts.listen + ": " + err);
  }
  socklen_t len = sizeof sa;
  ::getsockname(g.listen_fd, reinterpret_cast<sockaddr*>(&sa), &len);
  g.bound_port = ntohs(sa.sin_port);
  g.id = g.opts.local_id.empty()
             ? (hp.host.empty() ? "0.0.0.0" : hp.host) + ":" + std::to_string(g.bound_port)
             : g.opts.local_id;

  NodeSetup setup;
  setup.id = g.id;
  setup.tz_offset_minutes = g.opts.tz_offset_minutes;
  setup.warp = g.opts.config.warp;
  setup.drive = g.opts.config.drive;
  setup.link = g.opts.config.link;
  setup.hold_ms = g.opts.config.hold_ms;
  // Always ready for a peer: one may dial in even without --peer.
  PeerConfig pc = g.opts.config.peer;
  pc.local_id = g.id;
  pc.peer_id.clear();
  pc.tz_offset_minutes = g.opts.tz_offset_minutes;
  setup.peer = pc;
  g.epoch = SteadyClock::now();
  g.utc_epoch = std::chrono::system_clock::now();
  g.node = std::make_unique<ClockNode>(std::move(setup), 0, g);

  g.running = true;
  g.started = true;
  g.engine_thread = std::thread([&g] { g.engine_loop(); });
  g.accept_thread = std::thread([&g] { g.accept_loop(); });
  if (peer) g.dial_thread = std::thread([&g, p = *peer] { g.dial_loop(p); });
  spdlog::info("gateway {} listening on port {}", g.id, g.bound_port);
}

void Gateway::stop() {
  Impl& g = *impl_;
  if (!g.started) return;
  g.started = false;
  g.running = false;
  g.q_cv.notify_all();
  if (g.listen_fd >= 0) {
    ::shutdown(g.listen_fd, SHUT_RDWR);
    ::close(g.listen_fd);
    g.listen_fd = -1;
  }
  if (g.accept_thread.joinable()) g.accept_thread.join();
  {
    std::lock_guard lk(g.conns_mu);
    for (auto& c : g.conns) c->close();
  }
  if (g.dial_thread.joinable()) g.dial_thread.join();
  if (g.engine_thread.joinable()) g.engine_thread.join();
  std::vector<std::thread> readers;
  {
    std::lock_guard lk(g.conns_mu);
    readers.swap(g.readers);
  }
  for (auto& t : readers) t.join();
  std::lock_guard lk(g.conns_mu);
  for (auto& c : g.conns) ::close(c->fd);
  g.conns.clear();
  g.dialed.reset();
}

void Gateway::wait() {
  Impl& g = *impl_;
  std::unique_lock lk(g.q_mu);
  g.q_cv.wait(lk, [&g] { return !g.running; });
}

std::uint16_t Gateway::port() const { return impl_->bound_port; }

const std::string& Gateway::local_id() const { return impl_->id; }

}  // namespace clook
