#include "codrill/twin/volume_io.hpp"

#include <fstream>
#include <cstring>

#include <json.hpp>

#include "codrill/common/binary_io.hpp"
#include "codrill/common/error.hpp"

namespace codrill::twin {

namespace {
constexpr char kMagic[8] = {'C', 'D', 'V', 'O', 'L', '\0', '\0', '\0'};

StructureTable structures_from_json(const nlohmann::json& j) {
  StructureTable out;
  for (const auto& s : j.at("structures")) {
    StructureSpec spec;
    spec.index = s.at("index").get<int>();
    spec.name = s.value("name", std::string{});
    spec.gamma = s.at("gamma").get<double>();
    spec.lambda = s.at("lambda").get<double>();
    spec.stiffness = s.value("stiffness", 1.0);
    spec.damping = s.value("damping", 0.0);
    spec.critical = s.value("critical", false);
    out.push_back(spec);
  }
  return out;
}
}  // namespace

void write_volume(std::ostream& out, const LabeledVolume& volume) {
  volume.validate();
  out.write(kMagic, sizeof(kMagic));
  io::put_uint<std::uint32_t>(out, kVolumeFormatVersion);
  for (int a = 0; a < 3; ++a) io::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(volume.dims[a]));
  for (int a = 0; a < 3; ++a) io::put_f64(out, volume.spacing[a]);
  for (int a = 0; a < 3; ++a) io::put_f64(out, volume.origin[a]);
  io::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(volume.structures.size()));
  for (const auto& s : volume.structures) {
    io::put_uint<std::uint8_t>(out, static_cast<std::uint8_t>(s.index));
    io::put_uint<std::uint8_t>(out, s.critical ? 1 : 0);
    io::put_uint<std::uint16_t>(out, static_cast<std::uint16_t>(s.name.size()));
    out.write(s.name.data(), static_cast<std::streamsize>(s.name.size()));
    io::put_f64(out, s.gamma);
    io::put_f64(out, s.lambda);
    io::put_f64(out, s.stiffness);
    io::put_f64(out, s.damping);
  }
  out.write(reinterpret_cast<const char*>(volume.labels.data()), static_cast<std::streamsize>(volume.labels.size()));
}

LabeledVolume read_volume(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw FormatError("not a labeled volume file");
  const auto version = io::get_uint<std::uint32_t>(in);
  if (version != kVolumeFormatVersion)
    throw SchemaVersionError("volume format version " + std::to_string(version) + " is not supported");
  LabeledVolume v;
  for (int a = 0; a < 3; ++a) v.dims[a] = static_cast<int>(io::get_uint<std::uint32_t>(in));
  for (int a = 0; a < 3; ++a) v.spacing[a] = io::get_f64(in);
  for (int a = 0; a < 3; ++a) v.origin[a] = io::get_f64(in);
  const auto count = io::get_uint<std::uint32_t>(in);
  if (count > 255) throw FormatError("structure count out of range");
  for (std::uint32_t n = 0; n < count; ++n) {
    StructureSpec s;
    s.index = io::get_uint<std::uint8_t>(in);
    s.critical = io::get_uint<std::uint8_t>(in) != 0;
    const auto len = io::get_uint<std::uint16_t>(in);
    s.name.resize(len);
    if (len && !in.read(s.name.data(), len)) throw FormatError("unexpected end of file");
    s.gamma = io::get_f64(in);
    s.lambda = io::get_f64(in);
    s.stiffness = io::get_f64(in);
    s.damping = io::get_f64(in);
    v.structures.push_back(std::move(s));
  }
  for (int a = 0; a < 3; ++a)
    if (v.dims[a] <= 0 || v.dims[a] > 4096) throw FormatError("volume dims out of range");
  v.labels.resize(v.voxel_count());
  if (!in.read(reinterpret_cast<char*>(v.labels.data()), static_cast<std::streamsize>(v.labels.size())))
    throw FormatError("label data truncated");
  v.validate();
  return v;
}

void save_volume(const std::filesystem::path& path, const LabeledVolume& volume) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io_error", "cannot write " + path.string());
  write_volume(out, volume);
}

LabeledVolume load_volume(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot read " + path.string());
  LabeledVolume v = read_volume(in);
  std::filesystem::path sidecar = path;
  sidecar += ".json";
  if (std::filesystem::exists(sidecar)) {
    std::ifstream js(sidecar);
    try {
      v.structures = structures_from_json(nlohmann::json::parse(js));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("structure sidecar " + sidecar.string() + ": " + e.what());
    }
    v.validate();
  }
  return v;
}

}  // namespace codrill::twin
