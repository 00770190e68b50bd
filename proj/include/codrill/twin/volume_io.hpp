#pragma once

#include <filesystem>
#include <iosfwd>

#include "codrill/twin/labeled_volume.hpp"

namespace codrill::twin {

/// Labeled volume file (".cdvol"), all integers and doubles little-endian:
///
///   char[8]  magic "CDVOL\0\0\0"
///   u32      version (1)
///   u32      dims x, y, z
///   f64      spacing x, y, z   [mm]
///   f64      origin x, y, z    [mm]
///   u32      structure count
///   per structure:
///     u8 index, u8 critical, u16 name length, name bytes (UTF-8),
///     f64 gamma, f64 lambda, f64 stiffness, f64 damping
///   u8[x*y*z] labels, x fastest
///
/// If "<path>.json" exists next to the file, its "structures" array replaces
/// the embedded structure table.
inline constexpr std::uint32_t kVolumeFormatVersion = 1;

void write_volume(std::ostream& out, const LabeledVolume& volume);
LabeledVolume read_volume(std::istream& in);

void save_volume(const std::filesystem::path& path, const LabeledVolume& volume);
LabeledVolume load_volume(const std::filesystem::path& path);

}  // namespace codrill::twin
