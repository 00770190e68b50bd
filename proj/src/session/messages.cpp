#include "codrill/session/messages.hpp"

#include <algorithm>
#include <cmath>

#include "codrill/common/error.hpp"

namespace codrill::session {

using nlohmann::json;

namespace {

json vec(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

json envelope(std::string_view type) { return {{"type", type}, {"protocol", kProtocolVersion}}; }

Eigen::Vector3d vec_from(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 3) throw FormatError(std::string(field) + " must be an array of 3 numbers");
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) throw FormatError(std::string(field) + " must hold numbers");
    v[i] = j[static_cast<std::size_t>(i)].get<double>();
  }
  if (!v.allFinite()) throw FormatError(std::string(field) + " must be finite");
  return v;
}

}  // namespace

json to_json(const Hello& h) {
  json structures = json::array();
  for (const auto& s : h.structures)
    structures.push_back({{"index", s.index},
                          {"name", s.name},
                          {"lambda", s.lambda},
                          {"limit", s.lambda + h.margin},
                          {"critical", s.critical}});
  json j = envelope("hello");
  j["session"] = h.session;
  j["scenario"] = h.scenario;
  j["seed"] = h.seed;
  j["controller_enabled"] = h.controller_enabled;
  j["rates"] = {{"sim", h.rates.sim}, {"control", h.rates.control}, {"sensor", h.rates.sensor}};
  j["snapshot_rate"] = h.snapshot_rate;
  j["max_force"] = h.max_force;
  j["deadman"] = h.deadman;
  j["sigma"] = {{"high", h.sigma_high}, {"contact", h.sigma_contact}, {"low", h.sigma_low}};
  j["contact_threshold"] = h.contact_threshold;
  j["structures"] = structures;
  j["volume"] = {{"dims", h.dims}, {"spacing", h.spacing}};
  return j;
}

json to_json(const Snapshot& s) {
  json j = envelope("snapshot");
  j["seq"] = s.seq;
  j["t"] = s.t;
  j["tip"] = vec(s.tip);
  j["distances"] = s.distances;
  j["force"] = s.force;
  j["hand"] = vec(s.hand);
  j["sigma"] = s.sigma;
  j["regime"] = s.regime;
  j["structure"] = s.structure;
  j["carved"] = s.carved;
  j["deadman"] = s.deadman;
  j["slice"] = {{"plane", s.slice.plane},
                {"origin", vec(s.slice.origin)},
                {"spacing", s.slice.spacing},
                {"size", {s.slice.nx, s.slice.ny}}};
  return j;
}

json to_json(const SteerCommand& c) {
  json j = envelope("steer");
  j["t"] = c.client_time;
  j["force"] = vec(c.force);
  j["torque"] = vec(c.torque);
  j["drill"] = c.drill;
  return j;
}

json event_message(std::uint64_t seq, const scenario::RunEvent& e) {
  json j = envelope("event");
  j["seq"] = seq;
  j["t"] = e.t;
  j["kind"] = e.kind;
  j["structure"] = e.structure;
  j["value"] = e.value;
  j["detail"] = e.detail;
  return j;
}

json error_message(std::string_view code, std::string_view message) {
  json j = envelope("error");
  j["code"] = code;
  j["message"] = message;
  return j;
}

std::string message_type(const json& j) {
  if (!j.is_object()) throw FormatError("message must be a JSON object");
  auto type = j.find("type");
  if (type == j.end() || !type->is_string()) throw FormatError("message has no string 'type'");
  auto protocol = j.find("protocol");
  if (protocol == j.end() || !protocol->is_number_integer())
    throw FormatError("message has no integer 'protocol'");
  if (protocol->get<int>() != kProtocolVersion)
    throw SchemaVersionError("protocol " + std::to_string(protocol->get<int>()) + " is not supported (expected " +
                             std::to_string(kProtocolVersion) + ")");
  return type->get<std::string>();
}

json parse_frame(std::string_view text) {
  if (text.size() > kMaxMessageBytes) throw FormatError("message exceeds 64 KiB");
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw FormatError("message is not valid JSON");
  message_type(j);
  return j;
}

SteerCommand steer_from_json(const json& j) {
  if (message_type(j) != "steer") throw FormatError("expected a steer message");
  for (const auto& [key, value] : j.items())
    if (key != "type" && key != "protocol" && key != "t" && key != "force" && key != "torque" && key != "drill")
      throw FormatError("steer has unknown field '" + key + "'");
  SteerCommand c;
  if (j.contains("t")) {
    if (!j["t"].is_number()) throw FormatError("steer.t must be a number");
    c.client_time = j["t"].get<double>();
    if (!std::isfinite(c.client_time)) throw FormatError("steer.t must be finite");
  }
  if (!j.contains("force")) throw FormatError("steer needs 'force'");
  c.force = vec_from(j["force"], "steer.force");
  if (j.contains("torque")) c.torque = vec_from(j["torque"], "steer.torque");
  if (j.contains("drill")) {
    if (!j["drill"].is_boolean()) throw FormatError("steer.drill must be a boolean");
    c.drill = j["drill"].get<bool>();
  }
  return c;
}

Snapshot snapshot_from_json(const json& j) {
  if (message_type(j) != "snapshot") throw FormatError("expected a snapshot message");
  try {
    Snapshot s;
    s.seq = j.at("seq").get<std::uint64_t>();
    s.t = j.at("t").get<double>();
    s.tip = vec_from(j.at("tip"), "snapshot.tip");
    if (!j.at("distances").is_null()) s.distances = j.at("distances").get<std::vector<double>>();
    s.force = j.at("force").get<double>();
    s.hand = vec_from(j.at("hand"), "snapshot.hand");
    s.sigma = j.at("sigma").get<double>();
    s.regime = j.at("regime").get<std::string>();
    s.structure = j.at("structure").get<int>();
    s.carved = j.at("carved").get<std::uint64_t>();
    s.deadman = j.at("deadman").get<bool>();
    const auto& slice = j.at("slice");
    s.slice.plane = slice.at("plane").get<std::string>();
    s.slice.origin = vec_from(slice.at("origin"), "snapshot.slice.origin");
    s.slice.spacing = slice.at("spacing").get<double>();
    s.slice.nx = slice.at("size").at(0).get<int>();
    s.slice.ny = slice.at("size").at(1).get<int>();
    return s;
  } catch (const json::exception& e) {
    throw FormatError(std::string("snapshot: ") + e.what());
  }
}

Hello hello_from_json(const json& j) {
  if (message_type(j) != "hello") throw FormatError("expected a hello message");
  try {
    Hello h;
    h.session = j.at("session").get<int>();
    h.scenario = j.at("scenario").get<std::string>();
    h.seed = j.at("seed").get<std::uint64_t>();
    h.controller_enabled = j.at("controller_enabled").get<bool>();
    h.rates.sim = j.at("rates").at("sim").get<double>();
    h.rates.control = j.at("rates").at("control").get<double>();
    h.rates.sensor = j.at("rates").at("sensor").get<double>();
    h.snapshot_rate = j.at("snapshot_rate").get<double>();
    h.max_force = j.at("max_force").get<double>();
    h.deadman = j.at("deadman").get<double>();
    h.sigma_high = j.at("sigma").at("high").get<double>();
    h.sigma_contact = j.at("sigma").at("contact").get<double>();
    h.sigma_low = j.at("sigma").at("low").get<double>();
    h.contact_threshold = j.at("contact_threshold").get<double>();
    for (const auto& s : j.at("structures")) {
      twin::StructureSpec spec;
      spec.index = s.at("index").get<int>();
      spec.name = s.at("name").get<std::string>();
      spec.lambda = s.at("lambda").get<double>();
      spec.critical = s.at("critical").get<bool>();
      h.margin = s.at("limit").get<double>() - spec.lambda;
      h.structures.push_back(spec);
    }
    h.dims = j.at("volume").at("dims").get<std::array<int, 3>>();
    h.spacing = j.at("volume").at("spacing").get<double>();
    return h;
  } catch (const json::exception& e) {
    throw FormatError(std::string("hello: ") + e.what());
  }
}

SteerCommand clamp(SteerCommand c, double max) {
  c.force = c.force.cwiseMax(-max).cwiseMin(max);
  c.torque = c.torque.cwiseMax(-max).cwiseMin(max);
  return c;
}

}  // namespace codrill::session
