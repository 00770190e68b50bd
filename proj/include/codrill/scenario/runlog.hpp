#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "codrill/control/controller.hpp"
#include "codrill/robot/kinematics.hpp"
#include "codrill/scenario/scenario.hpp"
#include "codrill/twin/structure.hpp"

namespace codrill::scenario {

inline constexpr std::uint32_t kRunLogFormatVersion = 1;

enum RecordFlag : std::uint8_t {
  kFlagNormalFallback = 1 << 0,
  kFlagOutOfBounds = 1 << 1,
  kFlagStaleEstimate = 1 << 2,
  kFlagJointLimit = 1 << 3,
  kFlagStructureFallback = 1 << 4,
  kFlagDeadman = 1 << 5,
};

/// One control tick.
struct RunRecord {
  double t = 0.0;
  Eigen::VectorXd q;
  Eigen::Vector3d tip = Eigen::Vector3d::Zero();      ///< anatomy frame [mm]
  Eigen::Vector3d tip_rpy = Eigen::Vector3d::Zero();
  robot::Vector6d hand = robot::Vector6d::Zero();     ///< F_H, anatomy frame [force; torque]
  Eigen::Vector3d force_true = Eigen::Vector3d::Zero();      ///< F_T, tip frame
  Eigen::Vector3d force_estimate = Eigen::Vector3d::Zero();  ///< sensed F_T, tip frame
  std::vector<double> distances;                      ///< d_n, structure-table order
  double sigma = 0.0;
  control::Regime regime = control::Regime::free;
  std::int32_t structure = 0;                         ///< controller S, 0 = none
  bool drill = false;
  std::uint8_t flags = 0;
  std::uint64_t carved = 0;                           ///< voxels removed so far
};

struct RunEvent {
  double t = 0.0;
  std::string kind;
  std::int32_t structure = 0;
  double value = 0.0;
  std::string detail;

  bool operator==(const RunEvent&) const = default;
};

struct RunHeader {
  std::string name;
  nlohmann::json scenario;      ///< canonical scenario document, null for external traces
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::string comparison_key;
  bool controller_enabled = true;
  twin::StructureTable structures;
  Rates rates;
  double record_dt = 0.002;     ///< s between records
  std::vector<std::string> joints;
  bool has_structure = true;    ///< records carry the controller's S
  bool has_distances = true;
};

struct RunLog {
  RunHeader header;
  std::vector<RunRecord> records;
  std::vector<RunEvent> events;
};

nlohmann::json header_to_json(const RunHeader& h);
RunHeader header_from_json(const nlohmann::json& j);

/// Binary layout (little endian):
///   char[8]  "CDRUNLOG"
///   u32      format version
///   u64+utf8 JSON header
///   u64      record count, then per record:
///            f64 t, f64 q[joints], f64 tip[3], f64 rpy[3], f64 F_H[6],
///            f64 F_T[3], f64 F_T_est[3], f64 d[structures], f64 sigma,
///            u8 regime, i32 S, u8 drill, u8 flags, u64 carved
///   u64      event count, then per event:
///            f64 t, u64+utf8 kind, i32 structure, f64 value, u64+utf8 detail
void write_runlog(std::ostream& out, const RunLog& log);
RunLog read_runlog(std::istream& in);
void save_runlog(const std::filesystem::path& path, const RunLog& log);

/// Loads either format: binary by magic, otherwise CSV.
RunLog load_runlog(const std::filesystem::path& path);

/// First line "# " + JSON header (events included), then a column header
/// line and one row per record.
void write_csv(std::ostream& out, const RunLog& log);
void save_csv(const std::filesystem::path& path, const RunLog& log);

/// Missing columns default to zero; a missing estimate copies the true force
/// and a missing structure column clears has_structure.
RunLog read_csv(std::istream& in);

/// Exact byte image of the binary form.
std::string serialize(const RunLog& log);

}  // namespace codrill::scenario
