#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <iostream>
#include <thread>

#include <json.hpp>

#include "agents.hpp"
#include "error.hpp"

namespace gridbench {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

[[noreturn]] void sys_fail(const std::string& what) {
  fail(ErrorCode::kIo, what + ": " + std::strerror(errno));
}

class SocketChannel final : public LineChannel {
 public:
  SocketChannel(int fd, pid_t child) : fd_(fd), child_(child) {}

  ~SocketChannel() override {
    ::close(fd_);
    if (child_ > 0) reap();
  }

  void send_line(const std::string& line) override {
    std::string data = line;
    data.push_back('\n');
    std::size_t sent = 0;
    while (sent < data.size()) {
      const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        if (errno == EPIPE || errno == ECONNRESET) {
          fail(ErrorCode::kProtocol, "peer closed the connection");
        }
        sys_fail("send");
      }
      sent += static_cast<std::size_t>(n);
    }
  }

  std::optional<std::string> receive_line(std::chrono::milliseconds timeout) override {
    const auto deadline = Clock::now() + timeout;
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      if (closed_) return std::nullopt;
      const auto left =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
      if (left.count() <= 0) {
        fail(ErrorCode::kProtocol,
             "no reply within " + std::to_string(timeout.count()) + " ms");
      }
      pollfd p{fd_, POLLIN, 0};
      const int r = ::poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
      if (r < 0) {
        if (errno == EINTR) continue;
        sys_fail("poll");
      }
      if (r == 0) continue;
      char chunk[4096];
      const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n < 0) {
        if (errno == EINTR) continue;
        if (errno == ECONNRESET) {
          closed_ = true;
          continue;
        }
        sys_fail("recv");
      }
      if (n == 0) {
        closed_ = true;
        // A final unterminated line is still a line.
        if (!buffer_.empty()) buffer_.push_back('\n');
        continue;
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  void reap() {
    for (int i = 0; i < 100; ++i) {
      if (::waitpid(child_, nullptr, WNOHANG) != 0) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    ::kill(child_, SIGKILL);
    ::waitpid(child_, nullptr, 0);
  }

  int fd_;
  pid_t child_;
  std::string buffer_;
  bool closed_ = false;
};

addrinfo* resolve(const std::string& host, int port, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* result = nullptr;
  const std::string service = std::to_string(port);
  const int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(),
                               &hints, &result);
  if (rc != 0) {
    fail(ErrorCode::kIo, "cannot resolve '" + host + "': " + ::gai_strerror(rc));
  }
  return result;
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

std::string flat_name(const std::string& building, std::string_view name) {
  return building + "." + std::string(name);
}

std::string excerpt(const std::string& line) {
  return line.size() > 80 ? line.substr(0, 80) + "..." : line;
}

}  // namespace

TcpListener::TcpListener(const std::string& host, int port) {
  addrinfo* info = resolve(host, port, true);
  fd_ = ::socket(info->ai_family, info->ai_socktype | SOCK_CLOEXEC, info->ai_protocol);
  if (fd_ < 0) {
    ::freeaddrinfo(info);
    sys_fail("socket");
  }
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(fd_, info->ai_addr, info->ai_addrlen) != 0) {
    ::freeaddrinfo(info);
    ::close(fd_);
    sys_fail("bind " + host + ":" + std::to_string(port));
  }
  ::freeaddrinfo(info);
  if (::listen(fd_, 1) != 0) {
    ::close(fd_);
    sys_fail("listen");
  }
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<LineChannel> TcpListener::accept(std::chrono::milliseconds timeout) {
  pollfd p{fd_, POLLIN, 0};
  int r;
  do {
    r = ::poll(&p, 1, static_cast<int>(timeout.count()));
  } while (r < 0 && errno == EINTR);
  if (r < 0) sys_fail("poll");
  if (r == 0) {
    fail(ErrorCode::kProtocol, "no agent connected to port " + std::to_string(port_) +
                                   " within " + std::to_string(timeout.count()) + " ms");
  }
  const int client = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
  if (client < 0) sys_fail("accept");
  set_nodelay(client);
  return std::make_unique<SocketChannel>(client, 0);
}

std::unique_ptr<LineChannel> accept_tcp_channel(const std::string& host, int port,
                                                std::chrono::milliseconds timeout) {
  TcpListener listener(host, port);
  std::cerr << "gridbench: waiting for agent on " << host << ":" << listener.port() << "\n";
  return listener.accept(timeout);
}

std::unique_ptr<LineChannel> connect_tcp_channel(const std::string& host, int port,
                                                 std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    addrinfo* info = resolve(host, port, false);
    const int fd = ::socket(info->ai_family, info->ai_socktype | SOCK_CLOEXEC, info->ai_protocol);
    if (fd < 0) {
      ::freeaddrinfo(info);
      sys_fail("socket");
    }
    const int rc = ::connect(fd, info->ai_addr, info->ai_addrlen);
    ::freeaddrinfo(info);
    if (rc == 0) {
      set_nodelay(fd);
      return std::make_unique<SocketChannel>(fd, 0);
    }
    ::close(fd);
    if (Clock::now() >= deadline) sys_fail("connect " + host + ":" + std::to_string(port));
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

std::unique_ptr<LineChannel> spawn_process_channel(const std::string& command) {
  int sv[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) sys_fail("socketpair");
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(sv[0]);
    ::close(sv[1]);
    sys_fail("fork");
  }
  if (pid == 0) {
    ::dup2(sv[1], STDIN_FILENO);
    ::dup2(sv[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(sv[1]);
  return std::make_unique<SocketChannel>(sv[0], pid);
}

ExternalAddress parse_external_address(const std::string& text) {
  ExternalAddress addr;
  if (text.rfind("exec:", 0) == 0) {
    addr.kind = ExternalAddress::Kind::kExec;
    addr.command = text.substr(5);
    if (addr.command.empty()) fail(ErrorCode::kInvalidArgument, "empty exec command");
    return addr;
  }
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) {
    fail(ErrorCode::kInvalidArgument, "external address '" + text + "' is not HOST:PORT");
  }
  if (colon > 0) addr.host = text.substr(0, colon);
  const std::string port = text.substr(colon + 1);
  if (port.empty() || port.size() > 5 ||
      !std::all_of(port.begin(), port.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
      std::stoi(port) > 65535) {
    fail(ErrorCode::kInvalidArgument, "bad port in external address '" + text + "'");
  }
  addr.port = std::stoi(port);
  return addr;
}

ExternalAgent::ExternalAgent(std::unique_ptr<LineChannel> channel,
                             std::chrono::milliseconds timeout)
    : channel_(std::move(channel)), timeout_(timeout) {
  if (!channel_) fail(ErrorCode::kInvalidArgument, "external agent without a channel");
}

ExternalAgent::~ExternalAgent() {
  if (greeted_ && !finished_) {
    try {
      channel_->send_line(json{{"type", "end"}, {"kpis", nullptr}}.dump());
    } catch (...) {
    }
  }
}

std::string ExternalAgent::receive(const std::string& expected_type, std::size_t step) {
  const std::string where = " at step " + std::to_string(step);
  std::optional<std::string> line;
  try {
    line = channel_->receive_line(timeout_);
  } catch (const Error& e) {
    fail(ErrorCode::kProtocol, "external agent" + where + ": " + e.what());
  }
  if (!line) fail(ErrorCode::kProtocol, "external agent disconnected" + where);
  json msg;
  try {
    msg = json::parse(*line);
  } catch (const json::parse_error&) {
    fail(ErrorCode::kProtocol, "external agent sent malformed JSON" + where + ": " + excerpt(*line));
  }
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
    fail(ErrorCode::kProtocol, "external agent message without a type" + where);
  }
  const auto type = msg["type"].get<std::string>();
  if (type != expected_type) {
    fail(ErrorCode::kProtocol, "external agent sent '" + type + "', expected '" +
                                   expected_type + "'" + where);
  }
  return *line;
}

void ExternalAgent::handshake(const Environment& env) {
  json names = json::array();
  for (const auto& setup : env.config().buildings) {
    for (auto name : env.config().observations) {
      names.push_back(flat_name(setup.building_id, to_string(name)));
    }
  }
  json actions = json::array();
  json ranges = json::array();
  for (const auto& slot : action_slots(env.config())) {
    actions.push_back(slot.name);
    ranges.push_back({slot.low, slot.high});
  }
  json hello = {{"type", "hello"},
                {"version", kProtocolVersion},
                {"observation_names", names},
                {"action_names", actions},
                {"ranges", ranges}};
  try {
    channel_->send_line(hello.dump());
  } catch (const Error& e) {
    fail(ErrorCode::kProtocol, std::string("external agent during handshake: ") + e.what());
  }
  const auto reply = json::parse(receive("hello_ack", env.current_step()));
  if (reply.contains("version") && reply["version"] != kProtocolVersion) {
    fail(ErrorCode::kProtocol, "external agent speaks protocol version " +
                                   reply["version"].dump() + ", expected " +
                                   std::to_string(kProtocolVersion));
  }
  if (reply.contains("agent_name") && reply["agent_name"].is_string()) {
    peer_name_ = reply["agent_name"].get<std::string>();
  }
  greeted_ = true;
}

void ExternalAgent::begin_episode(const Environment& env, bool training) {
  if (finished_) fail(ErrorCode::kState, "external agent session already ended");
  if (!greeted_) handshake(env);
  training_ = training;
  pending_reward_ = 0.0;
}

ActionVector ExternalAgent::act(const Environment& env,
                                const std::vector<ObservationVector>& observations) {
  const std::size_t step = env.current_step();
  json values = json::array();
  for (const auto& o : observations) {
    for (double v : o.values) values.push_back(v);
  }
  json msg = {{"type", "obs"},   {"step", step},          {"values", values},
              {"reward", pending_reward_}, {"done", false}, {"training", training_}};
  try {
    channel_->send_line(msg.dump());
  } catch (const Error& e) {
    fail(ErrorCode::kProtocol, "external agent at step " + std::to_string(step) + ": " + e.what());
  }

  const auto reply = json::parse(receive("act", step));
  const auto slots = action_slots(env.config());
  const auto& raw = reply.contains("values") ? reply["values"] : json();
  if (!raw.is_array()) {
    fail(ErrorCode::kProtocol, "external agent act without a values array at step " +
                                   std::to_string(step));
  }
  if (raw.size() != slots.size()) {
    fail(ErrorCode::kProtocol, "external agent sent " + std::to_string(raw.size()) +
                                   " action values, expected " + std::to_string(slots.size()) +
                                   " at step " + std::to_string(step));
  }
  last_clamped_.clear();
  std::vector<double> flat(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!raw[i].is_number()) {
      fail(ErrorCode::kProtocol, "external agent action " + slots[i].name +
                                     " is not a number at step " + std::to_string(step));
    }
    const double v = raw[i].get<double>();
    flat[i] = std::clamp(v, slots[i].low, slots[i].high);
    if (flat[i] != v) {
      last_clamped_.push_back(slots[i].name + ": " + raw[i].dump() + " -> " +
                              json(flat[i]).dump());
    }
  }
  return unflatten_actions(env.config(), flat);
}

void ExternalAgent::observe(const Environment& env, const StepOutcome& outcome) {
  pending_reward_ = outcome.district_reward;
  if (!outcome.done) return;
  json values = json::array();
  for (const auto& o : outcome.observations) {
    for (double v : o.values) values.push_back(v);
  }
  json msg = {{"type", "obs"},   {"step", env.current_step()}, {"values", values},
              {"reward", pending_reward_}, {"done", true},   {"training", training_}};
  try {
    channel_->send_line(msg.dump());
  } catch (const Error& e) {
    fail(ErrorCode::kProtocol,
         "external agent at step " + std::to_string(env.current_step()) + ": " + e.what());
  }
}

void ExternalAgent::end_episode(const Environment&) {}

void ExternalAgent::finish(const std::string& kpis_json) {
  if (finished_) return;
  finished_ = true;
  json kpis = kpis_json.empty() ? json() : json::parse(kpis_json);
  try {
    channel_->send_line(json{{"type", "end"}, {"kpis", kpis}}.dump());
  } catch (const Error&) {
  }
}

}  // namespace gridbench
