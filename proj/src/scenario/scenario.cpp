#include "codrill/scenario/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "codrill/common/error.hpp"
#include "codrill/common/rng.hpp"
#include "codrill/twin/volume_io.hpp"

namespace codrill::scenario {

using nlohmann::json;

std::string_view to_string(SegmentType type) {
  switch (type) {
    case SegmentType::approach: return "approach";
    case SegmentType::press: return "press";
    case SegmentType::sweep: return "sweep";
    case SegmentType::retract: return "retract";
    case SegmentType::idle: return "idle";
  }
  return "unknown";
}

robot::KinematicChain default_scene_chain() {
  robot::KinematicChain chain = robot::default_chain();
  chain.base = twin::RigidTransform::from_translation(Eigen::Vector3d(12.0, 12.0, 225.0));
  return chain;
}

std::uint64_t Scenario::sim_ticks() const {
  return static_cast<std::uint64_t>(std::llround(std::floor(duration * rates.sim + 1e-9)));
}

std::uint64_t Scenario::control_divisor() const {
  return static_cast<std::uint64_t>(std::llround(rates.sim / rates.control));
}

namespace {

// Reads one JSON object, recording type errors and unknown keys as issues.
class Fields {
 public:
  Fields(const json& j, std::string path, std::vector<std::string>& issues)
      : j_(j), path_(std::move(path)), issues_(issues) {
    if (!j_.is_object()) issues_.push_back(path_ + " must be an object");
  }

  ~Fields() {
    if (!j_.is_object()) return;
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) issues_.push_back(path_ + "." + key + " is not a recognised field");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.is_object() && j_.contains(key) && !j_.at(key).is_null();
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string sub(const std::string& key) const { return path_ + "." + key; }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number()) {
      issues_.push_back(sub(key) + " must be a number");
      return fallback;
    }
    return v.get<double>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) {
      issues_.push_back(sub(key) + " must be true or false");
      return fallback;
    }
    return v.get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_string()) {
      issues_.push_back(sub(key) + " must be a string");
      return fallback;
    }
    return v.get<std::string>();
  }

  std::optional<Eigen::Vector3d> vec3(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const auto& v = j_.at(key);
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number()) {
      issues_.push_back(sub(key) + " must be an array of 3 numbers");
      return std::nullopt;
    }
    return Eigen::Vector3d(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
  }

  std::vector<std::string>& issues() { return issues_; }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string>& issues_;
  std::set<std::string> seen_;
};

std::string resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal().string();
}

twin::RigidTransform read_transform(Fields& f, const std::string& key, const twin::RigidTransform& fallback) {
  if (!f.has(key)) return fallback;
  Fields t(f.at(key), f.sub(key), f.issues());
  const Eigen::Vector3d xyz = t.vec3("xyz").value_or(Eigen::Vector3d::Zero());
  const Eigen::Vector3d rpy = t.vec3("rpy").value_or(Eigen::Vector3d::Zero());
  return twin::RigidTransform::from_rpy(xyz, rpy);
}

json vec_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

interaction::SensorModel read_sensor(Fields& parent, const std::string& key, interaction::SensorModel model,
                                     double default_rate) {
  model.rate_hz = default_rate;
  if (!parent.has(key)) return model;
  Fields f(parent.at(key), parent.sub(key), parent.issues());
  model.rate_hz = f.number("rate", default_rate);
  model.noise_std = f.number("noise_std", model.noise_std);
  model.bias_drift = f.number("bias_drift", model.bias_drift);
  model.mounting = read_transform(f, "mounting", model.mounting);
  return model;
}

json sensor_json(const interaction::SensorModel& m) {
  return {{"rate", m.rate_hz},
          {"noise_std", m.noise_std},
          {"bias_drift", m.bias_drift},
          {"mounting", robot::transform_to_json(m.mounting)}};
}

TargetSpec read_target(Fields& seg, std::vector<std::string>& issues) {
  TargetSpec t;
  if (!seg.has("target")) {
    issues.push_back(seg.sub("target") + " is required for approach segments");
    return t;
  }
  const json& j = seg.at("target");
  if (j.is_array()) {
    Fields wrapper(json{{"point", j}}, seg.sub("target"), issues);
    t.point = wrapper.vec3("point");
    return t;
  }
  Fields f(j, seg.sub("target"), issues);
  t.point = f.vec3("point");
  if (f.has("structure")) t.structure = static_cast<int>(f.number("structure", 0));
  t.from = f.vec3("from").value_or(Eigen::Vector3d::Zero());
  t.standoff = f.number("standoff", 0.0);
  t.offset = f.vec3("offset").value_or(Eigen::Vector3d::Zero());
  if (f.has("via_height")) t.via_height = f.number("via_height", 0.0);
  if (!t.point && !t.structure) issues.push_back(seg.sub("target") + " needs a point or a structure");
  return t;
}

json target_json(const TargetSpec& t) {
  json j = json::object();
  if (t.point) j["point"] = vec_json(*t.point);
  if (t.structure) j["structure"] = *t.structure;
  j["from"] = vec_json(t.from);
  j["standoff"] = t.standoff;
  j["offset"] = vec_json(t.offset);
  if (t.via_height) j["via_height"] = *t.via_height;
  return j;
}

Segment read_segment(const json& j, const std::string& path, std::vector<std::string>& issues) {
  Fields f(j, path, issues);
  Segment s;
  const std::string type = f.text("type", "");
  if (type == "approach") s.type = SegmentType::approach;
  else if (type == "press") s.type = SegmentType::press;
  else if (type == "sweep") s.type = SegmentType::sweep;
  else if (type == "retract") s.type = SegmentType::retract;
  else if (type == "idle") s.type = SegmentType::idle;
  else issues.push_back(path + ".type must be one of approach, press, sweep, retract, idle");
  s.duration = f.number("duration", 0.0);
  s.drill = f.boolean("drill", false);
  s.force = f.number("force", 0.0);
  if (f.has("push")) s.push = f.number("push", 0.0);
  if (f.has("gain")) s.gain = f.number("gain", 0.0);
  s.direction = f.vec3("direction");
  if (f.has("structure")) s.structure = static_cast<int>(f.number("structure", 0));
  s.velocity = f.vec3("velocity").value_or(Eigen::Vector3d::Zero());
  s.distance = f.number("distance", 0.0);
  if (s.type == SegmentType::approach) s.target = read_target(f, issues);
  return s;
}

json segment_json(const Segment& s) {
  json j = {{"type", to_string(s.type)}, {"duration", s.duration}, {"drill", s.drill}};
  switch (s.type) {
    case SegmentType::approach: j["target"] = target_json(s.target); break;
    case SegmentType::press:
    case SegmentType::sweep:
      j["force"] = s.force;
      if (s.push) j["push"] = *s.push;
      if (s.gain) j["gain"] = *s.gain;
      if (s.direction) j["direction"] = vec_json(*s.direction);
      if (s.structure) j["structure"] = *s.structure;
      if (s.type == SegmentType::sweep) j["velocity"] = vec_json(s.velocity);
      break;
    case SegmentType::retract:
      j["distance"] = s.distance;
      if (s.direction) j["direction"] = vec_json(*s.direction);
      break;
    case SegmentType::idle: break;
  }
  return j;
}

}  // namespace

Scenario scenario_from_json(const json& j, const std::filesystem::path& base_dir) {
  std::vector<std::string> issues;
  Scenario s;
  {
    Fields root(j, "scenario", issues);
    const double version = root.number("format_version", kScenarioFormatVersion);
    if (version != kScenarioFormatVersion)
      throw SchemaVersionError("scenario format_version " + std::to_string(static_cast<int>(version)) +
                               " is not supported (expected " + std::to_string(kScenarioFormatVersion) + ")");
    s.name = root.text("name", s.name);
    const double seed = root.number("seed", 1.0);
    if (seed < 0 || seed != std::floor(seed)) issues.push_back("scenario.seed must be a non-negative integer");
    s.seed = static_cast<std::uint64_t>(std::max(0.0, seed));
    s.duration = root.number("duration", 0.0);

    if (root.has("rates")) {
      Fields r(root.at("rates"), "scenario.rates", issues);
      s.rates.sim = r.number("sim", s.rates.sim);
      s.rates.control = r.number("control", s.rates.control);
      s.rates.sensor = r.number("sensor", s.rates.sensor);
    }

    if (root.has("anatomy")) {
      Fields a(root.at("anatomy"), "scenario.anatomy", issues);
      if (a.has("file")) s.anatomy.file = resolve(base_dir, a.text("file", ""));
      if (a.has("phantom")) {
        Fields p(a.at("phantom"), "scenario.anatomy.phantom", issues);
        if (p.has("dims")) {
          const auto& d = p.at("dims");
          if (d.is_array() && d.size() == 3 && d[0].is_number_integer() && d[1].is_number_integer() &&
              d[2].is_number_integer())
            s.anatomy.phantom.dims = {d[0].get<int>(), d[1].get<int>(), d[2].get<int>()};
          else
            issues.push_back("scenario.anatomy.phantom.dims must be 3 integers");
        }
        s.anatomy.phantom.spacing = p.number("spacing", s.anatomy.phantom.spacing);
        s.anatomy.phantom.jitter = p.number("jitter", s.anatomy.phantom.jitter);
        if (p.has("seed")) {
          s.anatomy.phantom_seed_from_run = false;
          s.anatomy.phantom.seed = static_cast<std::uint64_t>(p.number("seed", 1.0));
        }
      }
      if (a.has("structures")) s.anatomy.structure_overrides = a.at("structures");
    }

    if (root.has("robot")) {
      Fields r(root.at("robot"), "scenario.robot", issues);
      if (r.has("chain")) {
        const auto& c = r.at("chain");
        try {
          if (c.is_string()) {
            s.chain_file = resolve(base_dir, c.get<std::string>());
            s.chain = robot::load_chain(*s.chain_file);
          } else {
            s.chain = robot::chain_from_json(c);
          }
        } catch (const ValidationError& e) {
          for (const auto& i : e.issues()) issues.push_back("scenario.robot.chain: " + i);
        } catch (const Error& e) {
          issues.push_back(std::string("scenario.robot.chain: ") + e.what());
        }
      }
      s.chain.base = read_transform(r, "base", s.chain.base);
      if (r.has("gains")) {
        const auto& g = r.at("gains");
        if (g.is_array() && g.size() == 6) {
          for (int i = 0; i < 6; ++i) s.chain.gains[i] = g[static_cast<std::size_t>(i)].get<double>();
        } else {
          issues.push_back("scenario.robot.gains must have 6 numbers");
        }
      }
      s.initial_q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.chain.dof()));
      if (r.has("initial_q")) {
        const auto& q = r.at("initial_q");
        if (q.is_array() && q.size() == s.chain.dof()) {
          for (std::size_t i = 0; i < q.size(); ++i) s.initial_q[static_cast<Eigen::Index>(i)] = q[i].get<double>();
        } else {
          issues.push_back("scenario.robot.initial_q must have one entry per joint");
        }
      }
      s.admittance.damping = r.number("damping", s.admittance.damping);
    }

    if (root.has("controller")) {
      Fields c(root.at("controller"), "scenario.controller", issues);
      auto& p = s.controller;
      p.enabled = c.boolean("enabled", p.enabled);
      p.sigma_high = c.number("sigma_high", p.sigma_high);
      p.sigma_contact = c.number("sigma_contact", p.sigma_contact);
      p.sigma_low = c.number("sigma_low", p.sigma_low);
      p.eta = c.number("eta", p.eta);
      p.contact_threshold = c.number("contact_threshold", p.contact_threshold);
      p.activation_margin = c.number("activation_margin", p.activation_margin);
      p.hysteresis = c.number("hysteresis", p.hysteresis);
      if (c.has("slew_limit")) {
        const auto& v = c.at("slew_limit");
        if (v.is_string() && v.get<std::string>() == "none") p.slew_limit = std::numeric_limits<double>::infinity();
        else p.slew_limit = c.number("slew_limit", p.slew_limit);
      }
      p.disabled_sigma = c.number("disabled_sigma", p.disabled_sigma);
      const std::string law = c.text("law", "integral");
      if (law == "integral") p.law = control::SigmaLaw::integral;
      else if (law == "literal") p.law = control::SigmaLaw::literal;
      else issues.push_back("scenario.controller.law must be integral or literal");
    }

    s.drill_sensor.id = "drill";
    s.wrist_sensor.id = "wrist";
    if (root.has("sensors")) {
      Fields f(root.at("sensors"), "scenario.sensors", issues);
      s.drill_sensor = read_sensor(f, "drill", s.drill_sensor, s.rates.sensor);
      s.wrist_sensor = read_sensor(f, "wrist", s.wrist_sensor, s.rates.sensor);
    } else {
      s.drill_sensor.rate_hz = s.wrist_sensor.rate_hz = s.rates.sensor;
    }

    if (root.has("ablation")) {
      Fields a(root.at("ablation"), "scenario.ablation", issues);
      s.ablation.rate = a.number("rate", s.ablation.rate);
      s.ablation.cut_threshold = a.number("cut_threshold", s.ablation.cut_threshold);
      s.ablation.burr_radius = a.number("burr_radius", s.ablation.burr_radius);
    }

    if (root.has("input")) {
      Fields in(root.at("input"), "scenario.input", issues);
      const std::string type = in.text("type", "scripted");
      if (type == "scripted") s.input = InputKind::scripted;
      else if (type == "replay") s.input = InputKind::replay;
      else if (type == "live") s.input = InputKind::live;
      else issues.push_back("scenario.input.type must be scripted, replay or live");
      if (in.has("log")) s.replay_log = resolve(base_dir, in.text("log", ""));
      if (in.has("human")) {
        Fields h(in.at("human"), "scenario.input.human", issues);
        auto& hp = s.trajectory.human;
        hp.force_gain = h.number("force_gain", hp.force_gain);
        hp.delay = h.number("delay", hp.delay);
        hp.max_push = h.number("max_push", hp.max_push);
        hp.position_gain = h.number("position_gain", hp.position_gain);
        hp.max_force = h.number("max_force", hp.max_force);
        hp.variability = h.number("variability", hp.variability);
        if (h.has("tremor")) {
          Fields t(h.at("tremor"), "scenario.input.human.tremor", issues);
          hp.tremor.std = t.number("std", hp.tremor.std);
          hp.tremor.band_low = t.number("band_low", hp.tremor.band_low);
          hp.tremor.band_high = t.number("band_high", hp.tremor.band_high);
        }
      }
      if (in.has("segments")) {
        const auto& segs = in.at("segments");
        if (!segs.is_array()) {
          issues.push_back("scenario.input.segments must be an array");
        } else {
          for (std::size_t i = 0; i < segs.size(); ++i)
            s.trajectory.segments.push_back(
                read_segment(segs[i], "scenario.input.segments[" + std::to_string(i) + "]", issues));
        }
      }
      if (in.has("live")) {
        Fields l(in.at("live"), "scenario.input.live", issues);
        s.live.max_force = l.number("max_force", s.live.max_force);
        s.live.deadman = l.number("deadman", s.live.deadman);
        s.live.decay_time = l.number("decay_time", s.live.decay_time);
        s.live.snapshot_rate = l.number("snapshot_rate", s.live.snapshot_rate);
        s.live.max_catch_up = l.number("max_catch_up", s.live.max_catch_up);
      }
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  validate_scenario(s);
  return s;
}

json scenario_to_json(const Scenario& s) {
  json anatomy = json::object();
  if (s.anatomy.file) anatomy["file"] = *s.anatomy.file;
  json phantom = {{"dims", {s.anatomy.phantom.dims[0], s.anatomy.phantom.dims[1], s.anatomy.phantom.dims[2]}},
                  {"spacing", s.anatomy.phantom.spacing},
                  {"jitter", s.anatomy.phantom.jitter}};
  if (!s.anatomy.phantom_seed_from_run) phantom["seed"] = s.anatomy.phantom.seed;
  anatomy["phantom"] = phantom;
  anatomy["structures"] = s.anatomy.structure_overrides;

  json gains = json::array();
  for (int i = 0; i < 6; ++i) gains.push_back(s.chain.gains[i]);
  json q = json::array();
  for (Eigen::Index i = 0; i < s.initial_q.size(); ++i) q.push_back(s.initial_q[i]);
  json chain = robot::chain_to_json(s.chain);
  chain.erase("base");
  chain.erase("gains");

  const auto& c = s.controller;
  json controller = {{"enabled", c.enabled},
                     {"sigma_high", c.sigma_high},
                     {"sigma_contact", c.sigma_contact},
                     {"sigma_low", c.sigma_low},
                     {"eta", c.eta},
                     {"contact_threshold", c.contact_threshold},
                     {"activation_margin", c.activation_margin},
                     {"hysteresis", c.hysteresis},
                     {"disabled_sigma", c.disabled_sigma},
                     {"law", control::to_string(c.law)}};
  if (std::isfinite(c.slew_limit)) controller["slew_limit"] = c.slew_limit;
  else controller["slew_limit"] = "none";

  const auto& h = s.trajectory.human;
  json human = {{"force_gain", h.force_gain},
                {"delay", h.delay},
                {"max_push", h.max_push},
                {"position_gain", h.position_gain},
                {"max_force", h.max_force},
                {"variability", h.variability},
                {"tremor", {{"std", h.tremor.std}, {"band_low", h.tremor.band_low}, {"band_high", h.tremor.band_high}}}};
  json segments = json::array();
  for (const auto& seg : s.trajectory.segments) segments.push_back(segment_json(seg));
  const char* input_type = s.input == InputKind::scripted ? "scripted" : s.input == InputKind::replay ? "replay" : "live";
  json input = {{"type", input_type},
                {"human", human},
                {"segments", segments},
                {"live",
                 {{"max_force", s.live.max_force},
                  {"deadman", s.live.deadman},
                  {"decay_time", s.live.decay_time},
                  {"snapshot_rate", s.live.snapshot_rate},
                  {"max_catch_up", s.live.max_catch_up}}}};
  if (s.replay_log) input["log"] = *s.replay_log;

  return {{"format_version", kScenarioFormatVersion},
          {"name", s.name},
          {"seed", s.seed},
          {"duration", s.duration},
          {"rates", {{"sim", s.rates.sim}, {"control", s.rates.control}, {"sensor", s.rates.sensor}}},
          {"anatomy", anatomy},
          {"robot",
           {{"chain", chain},
            {"base", robot::transform_to_json(s.chain.base)},
            {"gains", gains},
            {"initial_q", q},
            {"damping", s.admittance.damping}}},
          {"controller", controller},
          {"sensors", {{"drill", sensor_json(s.drill_sensor)}, {"wrist", sensor_json(s.wrist_sensor)}}},
          {"ablation",
           {{"rate", s.ablation.rate},
            {"cut_threshold", s.ablation.cut_threshold},
            {"burr_radius", s.ablation.burr_radius}}},
          {"input", input}};
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open scenario file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("scenario file " + path.string() + ": " + e.what());
  }
  return scenario_from_json(j, path.parent_path());
}

void validate_scenario(const Scenario& s) {
  std::vector<std::string> issues;
  auto divides = [](double fast, double slow) {
    const double r = fast / slow;
    return std::abs(r - std::round(r)) < 1e-9;
  };
  const auto& r = s.rates;
  if (!(r.sim > 0 && r.control > 0 && r.sensor > 0)) issues.push_back("rates must be positive");
  if (!(r.sim >= r.control && r.control >= r.sensor)) issues.push_back("rates must satisfy sim >= control >= sensor");
  if (r.control > 0 && !divides(r.sim, r.control)) issues.push_back("rates.control must divide rates.sim");
  for (const auto* m : {&s.drill_sensor, &s.wrist_sensor}) {
    if (!(m->rate_hz > 0) || m->rate_hz > r.sim || !divides(r.sim, m->rate_hz))
      issues.push_back("sensors." + m->id + ".rate must divide rates.sim");
    if (!(m->noise_std >= 0)) issues.push_back("sensors." + m->id + ".noise_std must be >= 0");
  }
  if (!(s.duration >= 0) || !std::isfinite(s.duration)) issues.push_back("duration must be finite and >= 0");
  if (!(s.admittance.damping >= 0)) issues.push_back("robot.damping must be >= 0");
  try {
    s.controller.validate();
  } catch (const ValidationError& e) {
    issues.insert(issues.end(), e.issues().begin(), e.issues().end());
  }
  try {
    s.chain.validate();
  } catch (const ValidationError& e) {
    for (const auto& i : e.issues()) issues.push_back("robot.chain: " + i);
  }
  if (static_cast<std::size_t>(s.initial_q.size()) == s.chain.dof()) {
    for (std::size_t i = 0; i < s.chain.dof(); ++i) {
      const double q = s.initial_q[static_cast<Eigen::Index>(i)];
      if (q < s.chain.joints[i].lower || q > s.chain.joints[i].upper)
        issues.push_back("robot.initial_q[" + std::to_string(i) + "] is outside the joint limits");
    }
  } else {
    issues.push_back("robot.initial_q must have one entry per joint");
  }
  if (!(s.ablation.rate >= 0)) issues.push_back("ablation.rate must be >= 0");
  if (!(s.ablation.cut_threshold >= 0)) issues.push_back("ablation.cut_threshold must be >= 0");
  if (!(s.ablation.burr_radius > 0)) issues.push_back("ablation.burr_radius must be > 0");
  const auto& ph = s.anatomy.phantom;
  if (!s.anatomy.file) {
    if (ph.dims[0] < 4 || ph.dims[1] < 4 || ph.dims[2] < 4) issues.push_back("anatomy.phantom.dims must be >= 4");
    if (!(ph.spacing > 0)) issues.push_back("anatomy.phantom.spacing must be > 0");
  }

  const auto& h = s.trajectory.human;
  if (!(h.force_gain > 0)) issues.push_back("input.human.force_gain must be > 0");
  if (!(h.delay >= 0)) issues.push_back("input.human.delay must be >= 0");
  if (!(h.max_push > 0)) issues.push_back("input.human.max_push must be > 0");
  if (!(h.position_gain > 0)) issues.push_back("input.human.position_gain must be > 0");
  if (!(h.max_force > 0)) issues.push_back("input.human.max_force must be > 0");
  if (!(h.variability >= 0 && h.variability < 0.5)) issues.push_back("input.human.variability must be in [0, 0.5)");
  if (!(h.tremor.std >= 0)) issues.push_back("input.human.tremor.std must be >= 0");
  if (!(h.tremor.band_low > 0 && h.tremor.band_low <= h.tremor.band_high))
    issues.push_back("input.human.tremor band must satisfy 0 < band_low <= band_high");
  if (h.tremor.band_high >= r.control / 2) issues.push_back("input.human.tremor.band_high must be below control Nyquist");

  for (std::size_t i = 0; i < s.trajectory.segments.size(); ++i) {
    const auto& seg = s.trajectory.segments[i];
    const std::string tag = "input.segments[" + std::to_string(i) + "]";
    if (!(seg.duration > 0) || !std::isfinite(seg.duration)) issues.push_back(tag + ".duration must be > 0");
    if ((seg.type == SegmentType::press || seg.type == SegmentType::sweep) && !(seg.force > 0))
      issues.push_back(tag + ".force must be > 0");
    if (seg.push && !(*seg.push > 0)) issues.push_back(tag + ".push must be > 0");
    if (seg.gain && !(*seg.gain > 0)) issues.push_back(tag + ".gain must be > 0");
    if (seg.direction && !(seg.direction->norm() > 1e-9)) issues.push_back(tag + ".direction must be non-zero");
    if (seg.type == SegmentType::retract && !(seg.distance >= 0)) issues.push_back(tag + ".distance must be >= 0");
    if (!seg.velocity.allFinite()) issues.push_back(tag + ".velocity must be finite");
  }
  if (s.input == InputKind::replay && !s.replay_log) issues.push_back("input.log is required for replay input");
  if (!(s.live.max_force > 0)) issues.push_back("input.live.max_force must be > 0");
  if (!(s.live.deadman > 0)) issues.push_back("input.live.deadman must be > 0");
  if (!(s.live.decay_time > 0)) issues.push_back("input.live.decay_time must be > 0");
  if (!(s.live.snapshot_rate > 0 && s.live.snapshot_rate <= r.sim))
    issues.push_back("input.live.snapshot_rate must be in (0, rates.sim]");
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

std::uint64_t config_hash(const Scenario& s) { return fnv1a64(scenario_to_json(s).dump()); }

std::string comparison_key(const Scenario& s) {
  json j = scenario_to_json(s);
  j["controller"].erase("enabled");
  std::ostringstream out;
  out << std::hex << fnv1a64(j.dump()) << "-" << std::dec << s.seed;
  return out.str();
}

twin::LabeledVolume build_volume(const Scenario& s) {
  twin::LabeledVolume v;
  if (s.anatomy.file) {
    v = twin::load_volume(*s.anatomy.file);
  } else {
    twin::PhantomSpec spec = s.anatomy.phantom;
    if (s.anatomy.phantom_seed_from_run) spec.seed = s.seed;
    v = twin::generate_phantom(spec);
  }
  std::vector<std::string> issues;
  const auto& overrides = s.anatomy.structure_overrides;
  if (!overrides.is_array()) {
    issues.push_back("anatomy.structures must be an array");
  } else {
    for (std::size_t i = 0; i < overrides.size(); ++i) {
      Fields f(overrides[i], "anatomy.structures[" + std::to_string(i) + "]", issues);
      const int index = static_cast<int>(f.number("index", -1));
      auto it = std::find_if(v.structures.begin(), v.structures.end(),
                             [&](const twin::StructureSpec& spec) { return spec.index == index; });
      if (it == v.structures.end()) {
        issues.push_back(f.sub("index") + " does not name a structure of the anatomy");
        continue;
      }
      it->name = f.text("name", it->name);
      it->gamma = f.number("gamma", it->gamma);
      it->lambda = f.number("lambda", it->lambda);
      it->stiffness = f.number("stiffness", it->stiffness);
      it->damping = f.number("damping", it->damping);
      it->critical = f.boolean("critical", it->critical);
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  twin::validate_structures(v.structures);
  return v;
}

}  // namespace codrill::scenario
