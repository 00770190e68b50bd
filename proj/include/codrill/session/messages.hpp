#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "codrill/scenario/runlog.hpp"
#include "codrill/scenario/scenario.hpp"

/// Live-session wire format. Every message is one JSON text frame carrying
/// "type" and "protocol". Server to client: hello, snapshot, event, error.
/// Client to server: steer.
///
/// hello
///   session             int, session id on this server
///   scenario, seed      scenario name and run seed
///   controller_enabled  bool
///   rates               {sim, control, sensor} [Hz]
///   snapshot_rate       Hz
///   max_force           per-component clamp applied to steer force and torque
///   deadman             s without steer before F_H decays to zero
///   sigma               {high, contact, low}
///   contact_threshold   C [N]
///   structures          [{index, name, lambda, limit = lambda + margin, critical}]
///   volume              {dims [nx, ny, nz], spacing [mm]}
///
/// snapshot
///   seq        int, shared counter over snapshots and events
///   t          s, simulated time of the last control tick
///   tip        [x, y, z] mm, anatomy frame
///   distances  [d_n] mm, structure-table order (null when unavailable)
///   force      |F_T| as sensed [N]
///   hand       applied F_H [fx, fy, fz] N
///   sigma, regime ("FREE", "CONTACT", "OVERFORCE"), structure (0 = none)
///   carved     voxels removed so far
///   deadman    bool, dead-man decay engaged
///   slice      {plane "xy", origin [x, y, z] mm, spacing mm, size [nx, ny]}
///
/// event
///   seq, t, kind, structure, value, detail (copied from the run log event)
///
/// steer
///   t       client timestamp [s], informational
///   force   [fx, fy, fz] N, anatomy frame
///   torque  optional [tx, ty, tz] N*mm
///   drill   optional bool, default false
///
/// error
///   code, message
namespace codrill::session {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kMaxMessageBytes = 64 * 1024;

struct SteerCommand {
  double client_time = 0.0;
  Eigen::Vector3d force = Eigen::Vector3d::Zero();
  Eigen::Vector3d torque = Eigen::Vector3d::Zero();
  bool drill = false;
};

struct SliceDescriptor {
  std::string plane = "xy";
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  double spacing = 0.0;
  int nx = 0;
  int ny = 0;
};

struct Snapshot {
  std::uint64_t seq = 0;
  double t = 0.0;
  Eigen::Vector3d tip = Eigen::Vector3d::Zero();
  std::vector<double> distances;
  double force = 0.0;
  Eigen::Vector3d hand = Eigen::Vector3d::Zero();
  double sigma = 0.0;
  std::string regime = "FREE";
  int structure = 0;
  std::uint64_t carved = 0;
  bool deadman = false;
  SliceDescriptor slice;
};

struct Hello {
  int session = 0;
  std::string scenario;
  std::uint64_t seed = 0;
  bool controller_enabled = true;
  scenario::Rates rates;
  double snapshot_rate = 60.0;
  double max_force = 15.0;
  double deadman = 0.2;
  double sigma_high = 1.7;
  double sigma_contact = 0.7;
  double sigma_low = 0.3;
  double contact_threshold = 0.3;
  double margin = 0.2;
  twin::StructureTable structures;
  std::array<int, 3> dims{};
  double spacing = 0.0;
};

nlohmann::json to_json(const Hello& h);
nlohmann::json to_json(const Snapshot& s);
nlohmann::json to_json(const SteerCommand& c);
nlohmann::json event_message(std::uint64_t seq, const scenario::RunEvent& e);
nlohmann::json error_message(std::string_view code, std::string_view message);

/// Message type of a frame. Throws FormatError on malformed JSON or a missing
/// type, SchemaVersionError on a protocol mismatch.
std::string message_type(const nlohmann::json& j);
nlohmann::json parse_frame(std::string_view text);

/// Throws FormatError unless `j` is a well-formed steer message with finite values.
SteerCommand steer_from_json(const nlohmann::json& j);
Snapshot snapshot_from_json(const nlohmann::json& j);
Hello hello_from_json(const nlohmann::json& j);

/// Component-wise clamp of force and torque to [-max, max].
SteerCommand clamp(SteerCommand c, double max);

}  // namespace codrill::session
