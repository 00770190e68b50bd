#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "codrill/scenario/scenario.hpp"

namespace codrill::session {

struct ServeOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8765;                  ///< 0 picks a free port
  std::optional<std::filesystem::path> out;   ///< session log; later sessions get a -<id> suffix
  std::optional<double> snapshot_rate;
  double time_scale = 1.0;                    ///< simulated seconds per wall second
  double tick_period = 0.005;                 ///< s between pacing steps
  std::size_t max_sessions = 0;               ///< stop after this many sessions end, 0 = never
  std::size_t max_backlog = 256;              ///< queued snapshots kept per client
};

/// WebSocket server. Each connection runs its own LiveSession on the server's
/// single I/O thread; sessions share no state.
class SessionServer {
 public:
  /// Binds immediately. Throws ConfigurationError when the port is busy.
  SessionServer(scenario::Scenario scenario, ServeOptions options);
  ~SessionServer();

  std::uint16_t port() const;
  /// Serves until stop() or until max_sessions sessions have ended.
  void run();
  /// Thread-safe.
  void stop();
  /// Paths of session logs written so far. Thread-safe.
  std::vector<std::filesystem::path> saved_logs() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace codrill::session
