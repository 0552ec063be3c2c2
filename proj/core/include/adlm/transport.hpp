// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace adlm {

/// Bidirectional newline-delimited byte channel. Not thread-safe; callers
/// serialize access.
class LineTransport {
 public:
  virtual ~LineTransport() = default;
  /// Writes `line` followed by '\n'. Throws TransportError on failure.
  virtual void send_line(std::string_view line) = 0;
  /// Blocks for the next line, without the terminator. Throws TransportError
  /// on EOF or failure.
  virtual std::string read_line() = 0;
};

/// TCP connection to host:port.
std::unique_ptr<LineTransport> connect_tcp(const std::string& host, std::uint16_t port);

/// Spawns `/bin/sh -c command` and talks to it over its stdin/stdout.
std::unique_ptr<LineTransport> spawn_process(const std::string& command);

/// Endpoint syntax: "tcp://host:port", "host:port", or "stdio:<command>".
std::unique_ptr<LineTransport> open_endpoint(std::string_view endpoint);

}  // namespace adlm
