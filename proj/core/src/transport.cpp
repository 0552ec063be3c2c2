// SPDX-License-Identifier: Apache-2.0
#include "adlm/transport.hpp"

#include <netdb.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include "adlm/error.hpp"

namespace adlm {

namespace {

std::string errno_text() { return std::strerror(errno); }

void write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError("bridge write failed: " + errno_text());
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

// Buffered line reader over a file descriptor.
class FdLineReader {
 public:
  std::string read_line(int fd) {
    for (;;) {
      const auto nl = buf_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      char chunk[4096];
      const ssize_t n = ::read(fd, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError("bridge read failed: " + errno_text());
      }
      if (n == 0) throw TransportError("bridge closed the connection");
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  std::string buf_;
};

class SocketTransport final : public LineTransport {
 public:
  explicit SocketTransport(int fd) : fd_(fd) {}
  ~SocketTransport() override { ::close(fd_); }
  SocketTransport(const SocketTransport&) = delete;
  SocketTransport& operator=(const SocketTransport&) = delete;

  void send_line(std::string_view line) override {
    std::string framed(line);
    framed.push_back('\n');
    write_all(fd_, framed);
  }
  std::string read_line() override { return reader_.read_line(fd_); }

 private:
  int fd_;
  FdLineReader reader_;
};

class ProcessTransport final : public LineTransport {
 public:
  ProcessTransport(pid_t pid, int to_child, int from_child) : pid_(pid), to_child_(to_child), from_child_(from_child) {}
  ~ProcessTransport() override {
    ::close(to_child_);
    ::close(from_child_);
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
  ProcessTransport(const ProcessTransport&) = delete;
  ProcessTransport& operator=(const ProcessTransport&) = delete;

  void send_line(std::string_view line) override {
    std::string framed(line);
    framed.push_back('\n');
    write_all(to_child_, framed);
  }
  std::string read_line() override { return reader_.read_line(from_child_); }

 private:
  pid_t pid_;
  int to_child_;
  int from_child_;
  FdLineReader reader_;
};

}  // namespace

std::unique_ptr<LineTransport> connect_tcp(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw TransportError("cannot resolve bridge host '" + host + "': " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw TransportError("cannot connect to bridge at " + host + ":" + service);
  return std::make_unique<SocketTransport>(fd);
}

std::unique_ptr<LineTransport> spawn_process(const std::string& command) {
  // A dead child must surface as a read/write error, not a signal.
  ::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe(in_pipe) != 0) throw TransportError("pipe failed: " + errno_text());
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw TransportError("pipe failed: " + errno_text());
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw TransportError("fork failed: " + errno_text());
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  return std::make_unique<ProcessTransport>(pid, in_pipe[1], out_pipe[0]);
}

std::unique_ptr<LineTransport> open_endpoint(std::string_view endpoint) {
  constexpr std::string_view kStdio = "stdio:";
  constexpr std::string_view kTcp = "tcp://";
  if (endpoint.starts_with(kStdio)) {
    const auto cmd = endpoint.substr(kStdio.size());
    if (cmd.empty()) throw InvalidArgument("bridge endpoint 'stdio:' needs a command");
    return spawn_process(std::string(cmd));
  }
  if (endpoint.starts_with(kTcp)) endpoint.remove_prefix(kTcp.size());
  const auto colon = endpoint.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw InvalidArgument("bridge endpoint '" + std::string(endpoint) + "' is not host:port or stdio:<command>");
  }
  const auto port_text = endpoint.substr(colon + 1);
  unsigned port = 0;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port == 0 || port > 65535) {
    throw InvalidArgument("bridge endpoint has an invalid port: '" + std::string(port_text) + "'");
  }
  return connect_tcp(std::string(endpoint.substr(0, colon)), static_cast<std::uint16_t>(port));
}

}  // namespace adlm
