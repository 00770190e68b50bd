#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include <json.hpp>

#include "codrill/scenario/simulation.hpp"
#include "codrill/session/messages.hpp"

namespace codrill::session {

/// Hand force from a live client. The latest steer received before a control
/// tick is applied there and held. Once no steer has arrived for longer than
/// the dead-man timeout, the held wrench decays exponentially to zero.
class LiveInput : public scenario::InputSource {
 public:
  LiveInput(scenario::LiveParams params, double control_dt);

  /// Queues an already clamped command received at simulated time `t`.
  void submit(const SteerCommand& command, double t);
  scenario::HandCommand next(const scenario::HumanObservation& obs, std::uint64_t control_tick) override;
  bool deadman_engaged() const { return engaged_; }

 private:
  scenario::LiveParams params_;
  double control_dt_;
  std::optional<std::pair<SteerCommand, double>> pending_;
  std::optional<double> last_received_;
  scenario::HandCommand held_;
  bool engaged_ = false;
};

/// Maps wall-clock time to simulated time. The simulation may run at most
/// `max_catch_up` seconds ahead in one step; time lost beyond that is dropped
/// rather than replayed in a burst.
class Pacer {
 public:
  explicit Pacer(double max_catch_up, double time_scale = 1.0);
  double target(double wall, double sim_now);
  double dropped() const { return dropped_; }

 private:
  double max_catch_up_;
  double time_scale_;
  double offset_ = 0.0;
  double dropped_ = 0.0;
};

struct SessionOptions {
  int id = 1;
  std::optional<double> snapshot_rate;  ///< overrides the scenario's live snapshot rate
};

/// One live session: a simulation driven by a LiveInput, decimated snapshots
/// and the run log's events as outgoing messages. Not thread-safe apart from
/// submit().
class LiveSession {
 public:
  explicit LiveSession(const scenario::Scenario& scenario, SessionOptions options = {});

  const Hello& hello() const { return hello_; }
  /// Clamps and queues a command for the next control tick. Thread-safe.
  SteerCommand submit(const SteerCommand& command);
  /// Runs sim ticks until simulated time reaches `t`.
  void advance_to(double t);
  void advance(double seconds) { advance_to(time() + seconds); }
  double time() const { return sim_.time(); }

  /// Outgoing messages in order. Events are never dropped; a consumer that
  /// falls behind may discard snapshots.
  std::vector<nlohmann::json> drain();
  const std::optional<Snapshot>& last_snapshot() const { return last_snapshot_; }
  const scenario::Simulation& simulation() const { return sim_; }

  /// The recorded run log. The session is finished afterwards.
  scenario::RunLog finish();

 private:
  void emit_events();
  void emit_snapshot();

  scenario::Simulation sim_;
  LiveInput* input_ = nullptr;
  Hello hello_;
  double snapshot_rate_ = 60.0;
  std::uint64_t seq_ = 0;
  std::size_t events_sent_ = 0;
  std::optional<Snapshot> last_snapshot_;
  std::vector<nlohmann::json> outbox_;
  std::mutex ingress_mutex_;
  std::vector<SteerCommand> ingress_;
  bool finished_ = false;
};

}  // namespace codrill::session
