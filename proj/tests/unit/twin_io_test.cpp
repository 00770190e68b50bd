#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "codrill/common/error.hpp"
#include "codrill/twin/anatomy.hpp"
#include "codrill/twin/phantom.hpp"
#include "codrill/twin/volume_io.hpp"

using namespace codrill;
using namespace codrill::twin;

TEST(VolumeIo, RoundTripPreservesEverything) {
  const LabeledVolume v = generate_phantom({{12, 10, 8}, 0.5, 3, 0.2});
  std::stringstream buf;
  write_volume(buf, v);
  const LabeledVolume r = read_volume(buf);
  EXPECT_EQ(r.dims, v.dims);
  EXPECT_EQ(r.spacing, v.spacing);
  EXPECT_EQ(r.origin, v.origin);
  EXPECT_EQ(r.labels, v.labels);
  ASSERT_EQ(r.structures.size(), v.structures.size());
  for (std::size_t i = 0; i < v.structures.size(); ++i) {
    EXPECT_EQ(r.structures[i].name, v.structures[i].name);
    EXPECT_EQ(r.structures[i].gamma, v.structures[i].gamma);
    EXPECT_EQ(r.structures[i].lambda, v.structures[i].lambda);
    EXPECT_EQ(r.structures[i].critical, v.structures[i].critical);
  }
}

TEST(VolumeIo, BadMagicRejected) {
  std::stringstream buf("NOTAVOLUMEFILE----------------");
  EXPECT_THROW(read_volume(buf), FormatError);
}

TEST(VolumeIo, VersionMismatchRejected) {
  const LabeledVolume v = generate_phantom({{6, 6, 6}, 0.5, 3, 0.0});
  std::stringstream buf;
  write_volume(buf, v);
  std::string bytes = buf.str();
  bytes[8] = 9;
  std::stringstream bad(bytes);
  EXPECT_THROW(read_volume(bad), SchemaVersionError);
}

TEST(VolumeIo, TruncatedFileRejected) {
  const LabeledVolume v = generate_phantom({{6, 6, 6}, 0.5, 3, 0.0});
  std::stringstream buf;
  write_volume(buf, v);
  std::stringstream cut(buf.str().substr(0, buf.str().size() - 10));
  EXPECT_THROW(read_volume(cut), FormatError);
}

TEST(VolumeIo, SidecarOverridesStructureTable) {
  const auto dir = std::filesystem::temp_directory_path() / "codrill_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "v.cdvol";
  const LabeledVolume v = generate_phantom({{8, 8, 8}, 0.5, 3, 0.0});
  save_volume(path, v);
  {
    std::ofstream side(path.string() + ".json");
    side << R"({"structures": [
      {"index": 1, "name": "Facial Nerve", "gamma": 2.0, "lambda": 0.5, "stiffness": 3.0, "damping": 0.0, "critical": true},
      {"index": 2, "name": "Tegmen", "gamma": 1.5, "lambda": 0.8, "stiffness": 4.0, "damping": 0.0, "critical": true},
      {"index": 3, "name": "Sigmoid", "gamma": 1.5, "lambda": 0.8, "stiffness": 2.5, "damping": 0.0, "critical": true},
      {"index": 4, "name": "Cortical", "gamma": 0.0, "lambda": 1.3, "stiffness": 5.0, "damping": 0.0, "critical": false},
      {"index": 5, "name": "Trabecular", "gamma": 0.0, "lambda": 1.3, "stiffness": 3.5, "damping": 0.0, "critical": false}
    ]})";
  }
  const LabeledVolume r = load_volume(path);
  EXPECT_DOUBLE_EQ(r.structures[0].gamma, 2.0);
  EXPECT_DOUBLE_EQ(r.structures[0].lambda, 0.5);
  std::filesystem::remove_all(dir);
}

TEST(Phantom, DeterministicForSeed) {
  const PhantomSpec spec;
  EXPECT_EQ(generate_phantom(spec).labels, generate_phantom(spec).labels);
  PhantomSpec other = spec;
  other.seed = 2;
  EXPECT_NE(generate_phantom(spec).labels, generate_phantom(other).labels);
}

TEST(Phantom, EveryStructureIsPresentAndExposed) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    PhantomSpec spec;
    spec.seed = seed;
    const LabeledVolume v = generate_phantom(spec);
    EXPECT_NO_THROW(v.validate());
    const Eigen::Vector3d above = v.origin + v.spacing.cwiseProduct(Eigen::Vector3d(
                                                  v.dims[0] / 2.0, v.dims[1] / 2.0, v.dims[2] - 1.0));
    for (int idx = 1; idx <= 5; ++idx) {
      EXPECT_GT(v.count(static_cast<std::uint8_t>(idx)), 0u) << "seed " << seed << " structure " << idx;
      EXPECT_NO_THROW(exposed_surface_point(v, idx, above)) << "seed " << seed << " structure " << idx;
    }
    AnatomyModel model(v);
    EXPECT_FALSE(model.sdf().any_absent());
  }
}
