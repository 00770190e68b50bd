#include "codrill/scenario/runlog.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "codrill/common/binary_io.hpp"
#include "codrill/common/error.hpp"

namespace codrill::scenario {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'C', 'D', 'R', 'U', 'N', 'L', 'O', 'G'};

json structures_json(const twin::StructureTable& specs) {
  json out = json::array();
  for (const auto& s : specs)
    out.push_back({{"index", s.index},
                   {"name", s.name},
                   {"gamma", s.gamma},
                   {"lambda", s.lambda},
                   {"stiffness", s.stiffness},
                   {"damping", s.damping},
                   {"critical", s.critical}});
  return out;
}

twin::StructureTable structures_from(const json& j) {
  twin::StructureTable out;
  for (const auto& s : j) {
    twin::StructureSpec spec;
    spec.index = s.at("index").get<int>();
    spec.name = s.value("name", std::string{});
    spec.gamma = s.value("gamma", 0.0);
    spec.lambda = s.at("lambda").get<double>();
    spec.stiffness = s.value("stiffness", 1.0);
    spec.damping = s.value("damping", 0.0);
    spec.critical = s.value("critical", false);
    out.push_back(spec);
  }
  return out;
}

control::Regime regime_from(std::uint8_t v) {
  if (v > 2) throw FormatError("regime code " + std::to_string(v) + " is out of range");
  return static_cast<control::Regime>(v);
}

control::Regime regime_from(std::string_view s) {
  if (s == "FREE" || s == "0") return control::Regime::free;
  if (s == "CONTACT" || s == "1") return control::Regime::contact;
  if (s == "OVERFORCE" || s == "2") return control::Regime::overforce;
  throw FormatError("unknown regime '" + std::string(s) + "'");
}

std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

double parse_double(std::string_view s, std::size_t line) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw FormatError("line " + std::to_string(line) + ": '" + std::string(s) + "' is not a number");
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> columns(const RunHeader& h) {
  std::vector<std::string> c{"t"};
  for (const auto& j : h.joints) c.push_back("q_" + j);
  for (const char* n : {"tip_x", "tip_y", "tip_z", "tip_roll", "tip_pitch", "tip_yaw", "fh_x", "fh_y", "fh_z",
                        "fh_tx", "fh_ty", "fh_tz", "ft_x", "ft_y", "ft_z", "ft_est_x", "ft_est_y", "ft_est_z"})
    c.emplace_back(n);
  if (h.has_distances)
    for (const auto& s : h.structures) c.push_back("d_" + std::to_string(s.index));
  c.emplace_back("sigma");
  c.emplace_back("regime");
  if (h.has_structure) c.emplace_back("structure");
  for (const char* n : {"drill", "flags", "carved"}) c.emplace_back(n);
  return c;
}

json events_json(const std::vector<RunEvent>& events) {
  json out = json::array();
  for (const auto& e : events)
    out.push_back({{"t", e.t}, {"kind", e.kind}, {"structure", e.structure}, {"value", e.value}, {"detail", e.detail}});
  return out;
}

}  // namespace

json header_to_json(const RunHeader& h) {
  return {{"format_version", kRunLogFormatVersion},
          {"name", h.name},
          {"scenario", h.scenario},
          {"seed", h.seed},
          {"config_hash", h.config_hash},
          {"comparison_key", h.comparison_key},
          {"controller_enabled", h.controller_enabled},
          {"structures", structures_json(h.structures)},
          {"rates", {{"sim", h.rates.sim}, {"control", h.rates.control}, {"sensor", h.rates.sensor}}},
          {"record_dt", h.record_dt},
          {"joints", h.joints},
          {"has_structure", h.has_structure},
          {"has_distances", h.has_distances}};
}

RunHeader header_from_json(const json& j) {
  try {
    const auto version = j.value("format_version", kRunLogFormatVersion);
    if (version != kRunLogFormatVersion)
      throw SchemaVersionError("run log format_version " + std::to_string(version) + " is not supported");
    RunHeader h;
    h.name = j.value("name", std::string{});
    h.scenario = j.value("scenario", json());
    h.seed = j.value("seed", std::uint64_t{0});
    h.config_hash = j.value("config_hash", std::uint64_t{0});
    h.comparison_key = j.value("comparison_key", std::string{});
    h.controller_enabled = j.value("controller_enabled", true);
    h.structures = structures_from(j.at("structures"));
    if (j.contains("rates")) {
      const auto& r = j.at("rates");
      h.rates.sim = r.value("sim", h.rates.sim);
      h.rates.control = r.value("control", h.rates.control);
      h.rates.sensor = r.value("sensor", h.rates.sensor);
    }
    h.record_dt = j.value("record_dt", 1.0 / h.rates.control);
    h.joints = j.value("joints", std::vector<std::string>{});
    h.has_structure = j.value("has_structure", true);
    h.has_distances = j.value("has_distances", true);
    return h;
  } catch (const json::exception& e) {
    throw FormatError(std::string("run log header: ") + e.what());
  }
}

void write_runlog(std::ostream& out, const RunLog& log) {
  const auto& h = log.header;
  const std::size_t dof = h.joints.size();
  const std::size_t n = h.structures.size();
  out.write(kMagic, sizeof(kMagic));
  io::put_uint<std::uint32_t>(out, kRunLogFormatVersion);
  io::put_bytes(out, header_to_json(h).dump());
  io::put_uint<std::uint64_t>(out, log.records.size());
  for (const auto& r : log.records) {
    if (static_cast<std::size_t>(r.q.size()) != dof || (h.has_distances && r.distances.size() != n))
      throw ConfigurationError("run log record does not match the header layout");
    io::put_f64(out, r.t);
    for (std::size_t i = 0; i < dof; ++i) io::put_f64(out, r.q[static_cast<Eigen::Index>(i)]);
    for (int i = 0; i < 3; ++i) io::put_f64(out, r.tip[i]);
    for (int i = 0; i < 3; ++i) io::put_f64(out, r.tip_rpy[i]);
    for (int i = 0; i < 6; ++i) io::put_f64(out, r.hand[i]);
    for (int i = 0; i < 3; ++i) io::put_f64(out, r.force_true[i]);
    for (int i = 0; i < 3; ++i) io::put_f64(out, r.force_estimate[i]);
    if (h.has_distances)
      for (double d : r.distances) io::put_f64(out, d);
    io::put_f64(out, r.sigma);
    io::put_uint<std::uint8_t>(out, static_cast<std::uint8_t>(r.regime));
    io::put_i32(out, r.structure);
    io::put_uint<std::uint8_t>(out, r.drill ? 1 : 0);
    io::put_uint<std::uint8_t>(out, r.flags);
    io::put_uint<std::uint64_t>(out, r.carved);
  }
  io::put_uint<std::uint64_t>(out, log.events.size());
  for (const auto& e : log.events) {
    io::put_f64(out, e.t);
    io::put_bytes(out, e.kind);
    io::put_i32(out, e.structure);
    io::put_f64(out, e.value);
    io::put_bytes(out, e.detail);
  }
}

RunLog read_runlog(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw FormatError("not a run log (bad magic)");
  const auto version = io::get_uint<std::uint32_t>(in);
  if (version != kRunLogFormatVersion)
    throw SchemaVersionError("run log format version " + std::to_string(version) + " is not supported (expected " +
                             std::to_string(kRunLogFormatVersion) + ")");
  RunLog log;
  const std::string text = io::get_bytes(in, 1ULL << 28);
  try {
    log.header = header_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw FormatError(std::string("run log header: ") + e.what());
  }
  const auto& h = log.header;
  const std::size_t dof = h.joints.size();
  const std::size_t n = h.structures.size();
  const auto count = io::get_uint<std::uint64_t>(in);
  if (count > (1ULL << 32)) throw FormatError("record count is implausible");
  log.records.reserve(static_cast<std::size_t>(count));
  for (std::uint64_t k = 0; k < count; ++k) {
    RunRecord r;
    r.t = io::get_f64(in);
    r.q.resize(static_cast<Eigen::Index>(dof));
    for (std::size_t i = 0; i < dof; ++i) r.q[static_cast<Eigen::Index>(i)] = io::get_f64(in);
    for (int i = 0; i < 3; ++i) r.tip[i] = io::get_f64(in);
    for (int i = 0; i < 3; ++i) r.tip_rpy[i] = io::get_f64(in);
    for (int i = 0; i < 6; ++i) r.hand[i] = io::get_f64(in);
    for (int i = 0; i < 3; ++i) r.force_true[i] = io::get_f64(in);
    for (int i = 0; i < 3; ++i) r.force_estimate[i] = io::get_f64(in);
    if (h.has_distances) {
      r.distances.resize(n);
      for (auto& d : r.distances) d = io::get_f64(in);
    }
    r.sigma = io::get_f64(in);
    r.regime = regime_from(io::get_uint<std::uint8_t>(in));
    r.structure = io::get_i32(in);
    r.drill = io::get_uint<std::uint8_t>(in) != 0;
    r.flags = io::get_uint<std::uint8_t>(in);
    r.carved = io::get_uint<std::uint64_t>(in);
    log.records.push_back(std::move(r));
  }
  const auto events = io::get_uint<std::uint64_t>(in);
  if (events > (1ULL << 32)) throw FormatError("event count is implausible");
  for (std::uint64_t k = 0; k < events; ++k) {
    RunEvent e;
    e.t = io::get_f64(in);
    e.kind = io::get_bytes(in, 1 << 20);
    e.structure = io::get_i32(in);
    e.value = io::get_f64(in);
    e.detail = io::get_bytes(in, 1 << 20);
    log.events.push_back(std::move(e));
  }
  return log;
}

std::string serialize(const RunLog& log) {
  std::ostringstream out(std::ios::binary);
  write_runlog(out, log);
  return out.str();
}

void save_runlog(const std::filesystem::path& path, const RunLog& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("cannot write " + path.string());
  write_runlog(out, log);
  if (!out) throw ConfigurationError("failed writing " + path.string());
}

RunLog load_runlog(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot open run log " + path.string());
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  const bool binary = in.gcount() == sizeof(magic) && std::memcmp(magic, kMagic, sizeof(magic)) == 0;
  in.clear();
  in.seekg(0);
  return binary ? read_runlog(in) : read_csv(in);
}

void write_csv(std::ostream& out, const RunLog& log) {
  const auto& h = log.header;
  json header = header_to_json(h);
  header["events"] = events_json(log.events);
  out << "# " << header.dump() << "\n";
  const auto cols = columns(h);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  std::string row;
  for (const auto& r : log.records) {
    row.clear();
    auto add = [&](const std::string& s) {
      if (!row.empty()) row += ',';
      row += s;
    };
    add(fmt(r.t));
    for (Eigen::Index i = 0; i < r.q.size(); ++i) add(fmt(r.q[i]));
    for (int i = 0; i < 3; ++i) add(fmt(r.tip[i]));
    for (int i = 0; i < 3; ++i) add(fmt(r.tip_rpy[i]));
    for (int i = 0; i < 6; ++i) add(fmt(r.hand[i]));
    for (int i = 0; i < 3; ++i) add(fmt(r.force_true[i]));
    for (int i = 0; i < 3; ++i) add(fmt(r.force_estimate[i]));
    if (h.has_distances)
      for (double d : r.distances) add(fmt(d));
    add(fmt(r.sigma));
    add(std::string(control::to_string(r.regime)));
    if (h.has_structure) add(std::to_string(r.structure));
    add(r.drill ? "1" : "0");
    add(std::to_string(r.flags));
    add(std::to_string(r.carved));
    out << row << "\n";
  }
}

void save_csv(const std::filesystem::path& path, const RunLog& log) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write " + path.string());
  write_csv(out, log);
}

RunLog read_csv(std::istream& in) {
  RunLog log;
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw FormatError("CSV run log must start with '# {header}'");
  json header;
  try {
    header = json::parse(line.substr(2));
  } catch (const json::exception& e) {
    throw FormatError(std::string("CSV run log header: ") + e.what());
  }
  log.header = header_from_json(header);
  if (header.contains("events")) {
    for (const auto& e : header.at("events"))
      log.events.push_back({e.value("t", 0.0), e.value("kind", std::string{}), e.value("structure", 0),
                            e.value("value", 0.0), e.value("detail", std::string{})});
  }
  if (!std::getline(in, line)) throw FormatError("CSV run log has no column header");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::map<std::string, std::size_t> col;
  {
    const auto names = split(line);
    for (std::size_t i = 0; i < names.size(); ++i) col[std::string(names[i])] = i;
  }
  auto& h = log.header;
  if (!col.count("t")) throw FormatError("CSV run log has no 't' column");
  if (!col.count("ft_x") || !col.count("ft_y") || !col.count("ft_z"))
    throw FormatError("CSV run log needs ft_x, ft_y and ft_z columns");
  h.has_structure = col.count("structure") > 0;
  h.has_distances = !h.structures.empty();
  for (const auto& s : h.structures)
    if (!col.count("d_" + std::to_string(s.index))) h.has_distances = false;
  std::vector<std::string> joints;
  for (const auto& j : h.joints)
    if (col.count("q_" + j)) joints.push_back(j);
  h.joints = joints;
  const bool has_estimate = col.count("ft_est_x") && col.count("ft_est_y") && col.count("ft_est_z");

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line);
    auto get = [&](const std::string& name, double fallback = 0.0) {
      auto it = col.find(name);
      if (it == col.end()) return fallback;
      if (it->second >= cells.size()) throw FormatError("line " + std::to_string(lineno) + " has too few fields");
      return parse_double(cells[it->second], lineno);
    };
    RunRecord r;
    r.t = get("t");
    r.q.resize(static_cast<Eigen::Index>(h.joints.size()));
    for (std::size_t i = 0; i < h.joints.size(); ++i) r.q[static_cast<Eigen::Index>(i)] = get("q_" + h.joints[i]);
    const char* tip[] = {"tip_x", "tip_y", "tip_z"};
    const char* rpy[] = {"tip_roll", "tip_pitch", "tip_yaw"};
    const char* hand[] = {"fh_x", "fh_y", "fh_z", "fh_tx", "fh_ty", "fh_tz"};
    const char* ft[] = {"ft_x", "ft_y", "ft_z"};
    const char* est[] = {"ft_est_x", "ft_est_y", "ft_est_z"};
    for (int i = 0; i < 3; ++i) r.tip[i] = get(tip[i]);
    for (int i = 0; i < 3; ++i) r.tip_rpy[i] = get(rpy[i]);
    for (int i = 0; i < 6; ++i) r.hand[i] = get(hand[i]);
    for (int i = 0; i < 3; ++i) r.force_true[i] = get(ft[i]);
    for (int i = 0; i < 3; ++i) r.force_estimate[i] = has_estimate ? get(est[i]) : r.force_true[i];
    if (h.has_distances)
      for (const auto& s : h.structures) r.distances.push_back(get("d_" + std::to_string(s.index)));
    r.sigma = get("sigma");
    if (auto it = col.find("regime"); it != col.end()) {
      if (it->second >= cells.size()) throw FormatError("line " + std::to_string(lineno) + " has too few fields");
      std::string_view v = cells[it->second];
      r.regime = regime_from(v);
    }
    r.structure = static_cast<std::int32_t>(get("structure"));
    r.drill = get("drill") != 0.0;
    r.flags = static_cast<std::uint8_t>(get("flags"));
    r.carved = static_cast<std::uint64_t>(get("carved"));
    log.records.push_back(std::move(r));
  }
  return log;
}

}  // namespace codrill::scenario
