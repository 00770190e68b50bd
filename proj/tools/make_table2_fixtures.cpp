// Writes the reference contact-force traces for the with/without-assist
// comparison. Each structure contributes a free stretch followed by 1000
// contact samples, of which round(p * 1000) lie above the safety limit.

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "codrill/common/rng.hpp"
#include "codrill/scenario/runlog.hpp"
#include "codrill/twin/structure.hpp"

namespace {

using codrill::scenario::RunHeader;

constexpr int kContactSamples = 1000;
constexpr int kFreeSamples = 250;
constexpr double kMargin = 0.2;
constexpr double kContactThreshold = 0.3;

struct Arm {
  const char* file;
  const char* name;
  bool assisted;
  std::array<double, 5> proportions;
};

const Arm kArms[] = {
    {"table2_wo.csv", "table2_wo", false, {0.726, 0.549, 0.567, 0.372, 0.209}},
    {"table2_w.csv", "table2_w", true, {0.322, 0.370, 0.382, 0.243, 0.042}},
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void write_arm(const std::filesystem::path& dir, const Arm& arm) {
  RunHeader h;
  h.name = arm.name;
  h.seed = 0;
  h.comparison_key = "reference-pair";
  h.controller_enabled = arm.assisted;
  h.structures = codrill::twin::default_structures();
  h.has_distances = false;
  auto header = codrill::scenario::header_to_json(h);
  header["events"] = nlohmann::json::array();

  std::ofstream out(dir / arm.file);
  out << "# " << header.dump() << "\n";
  out << "t,ft_x,ft_y,ft_z,structure\n";
  codrill::RandomStream rng(arm.assisted ? 2 : 1, "reference");
  long tick = 0;
  auto row = [&](double force, int structure) {
    out << num(static_cast<double>(tick) * h.record_dt) << ",0,0," << num(force) << "," << structure << "\n";
    ++tick;
  };
  for (std::size_t slot = 0; slot < h.structures.size(); ++slot) {
    const auto& s = h.structures[slot];
    const double limit = s.lambda + kMargin;
    const long above = std::lround(arm.proportions[slot] * kContactSamples);
    for (int k = 0; k < kFreeSamples; ++k) row(0.05 + 0.1 * rng.uniform(), 0);
    for (long k = 0; k < kContactSamples; ++k) {
      const bool over = (k + 1) * above / kContactSamples > k * above / kContactSamples;
      const double f = over ? limit + 0.02 + 0.4 * rng.uniform()
                            : kContactThreshold + 0.02 + (limit - kContactThreshold - 0.04) * rng.uniform();
      row(f, s.index);
    }
  }
  for (int k = 0; k < kFreeSamples; ++k) row(0.05 + 0.1 * rng.uniform(), 0);
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "fixtures";
  std::filesystem::create_directories(dir);
  for (const auto& arm : kArms) write_arm(dir, arm);
  std::cout << "wrote " << (dir / kArms[0].file).string() << " and " << (dir / kArms[1].file).string() << "\n";
  return 0;
}
