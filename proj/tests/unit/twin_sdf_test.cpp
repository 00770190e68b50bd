#include <gtest/gtest.h>

#include <cmath>

#include "codrill/common/error.hpp"
#include "codrill/common/rng.hpp"
#include "codrill/twin/anatomy.hpp"
#include "codrill/twin/sdf.hpp"
#include "support/oracles.hpp"

using namespace codrill;
using namespace codrill::twin;

namespace {

StructureTable two_structures() {
  return {{1, "A", 1.0, 0.8, 2.0, 0.0, true}, {2, "B", 0.0, 1.3, 2.0, 0.0, false}};
}

LabeledVolume empty_volume(Index3 dims, double spacing = 1.0) {
  return LabeledVolume(dims, Eigen::Vector3d::Constant(spacing), Eigen::Vector3d::Zero(), two_structures());
}

// Random blobs (spheres and boxes) plus scattered voxels for both structures.
LabeledVolume random_volume(RandomStream& rng, int max_dim) {
  Index3 dims;
  for (auto& d : dims) d = 2 + static_cast<int>(rng.uniform() * (max_dim - 1));
  const Eigen::Vector3d spacing(rng.uniform(0.3, 1.5), rng.uniform(0.3, 1.5), rng.uniform(0.3, 1.5));
  LabeledVolume v(dims, spacing, Eigen::Vector3d(rng.uniform(-5, 5), 0.0, 1.0), two_structures());
  const int blobs = 1 + static_cast<int>(rng.uniform() * 4);
  for (int b = 0; b < blobs; ++b) {
    const std::uint8_t label = rng.uniform() < 0.5 ? 1 : 2;
    const Eigen::Vector3d c(rng.uniform(0, dims[0]), rng.uniform(0, dims[1]), rng.uniform(0, dims[2]));
    const double r = rng.uniform(0.5, 0.4 * max_dim);
    const bool sphere = rng.uniform() < 0.5;
    for (int k = 0; k < dims[2]; ++k)
      for (int j = 0; j < dims[1]; ++j)
        for (int i = 0; i < dims[0]; ++i) {
          const Eigen::Vector3d d = Eigen::Vector3d(i, j, k) - c;
          if (sphere ? d.norm() <= r : d.cwiseAbs().maxCoeff() <= r) v.at(i, j, k) = label;
        }
  }
  const int scattered = static_cast<int>(rng.uniform() * 10);
  for (int s = 0; s < scattered; ++s) {
    const std::size_t idx = static_cast<std::size_t>(rng.uniform() * v.labels.size());
    v.labels[idx] = static_cast<std::uint8_t>(rng.uniform() * 3);
  }
  return v;
}

}  // namespace

TEST(BuildSdf, SingleVoxelIsNonPositiveAtItsCentre) {
  auto v = empty_volume({9, 9, 9});
  v.at(4, 4, 4) = 1;
  const SdfSet sdf = build_sdf(v);
  EXPECT_LE(sdf.field(1)->values[v.linear(4, 4, 4)], 0.0);
  EXPECT_LE(interpolate(sdf, *sdf.field(1), v.center(4, 4, 4)), 0.0);
}

TEST(BuildSdf, SingleVoxelTwoVoxelsAway) {
  auto v = empty_volume({9, 9, 9});
  v.at(3, 4, 5) = 1;
  const SdfSet sdf = build_sdf(v);
  EXPECT_DOUBLE_EQ(sdf.field(1)->values[v.linear(5, 4, 5)], 2.0);
}

TEST(BuildSdf, DisjointHalvesMatchBruteForce) {
  auto v = empty_volume({16, 16, 16});
  for (int k = 0; k < 16; ++k)
    for (int j = 0; j < 16; ++j)
      for (int i = 0; i < 16; ++i) v.at(i, j, k) = i < 8 ? 1 : 2;
  const SdfSet sdf = build_sdf(v);
  for (int idx : {1, 2}) {
    const auto expected = codrill::testing::brute_force_sdf(v, idx);
    EXPECT_EQ(sdf.field(idx)->values, expected) << "structure " << idx;
  }
}

TEST(BuildSdf, RandomGridsMatchBruteForceAndSign) {
  RandomStream rng(11, "sdf-property");
  for (int trial = 0; trial < 40; ++trial) {
    const LabeledVolume v = random_volume(rng, 14);
    const SdfSet sdf = build_sdf(v);
    for (int idx : {1, 2}) {
      const auto expected = codrill::testing::brute_force_sdf(v, idx);
      const auto& got = sdf.field(idx)->values;
      for (std::size_t i = 0; i < got.size(); ++i) {
        if (std::isinf(expected[i])) {
          ASSERT_TRUE(std::isinf(got[i]));
          continue;
        }
        ASSERT_NEAR(got[i], expected[i], 1e-9) << "trial " << trial << " voxel " << i;
        ASSERT_EQ(got[i] <= 0.0, v.labels[i] == idx) << "sign at voxel " << i;
      }
    }
  }
}

TEST(BuildSdf, AbsentStructureIsInfiniteAndFlagged) {
  auto v = empty_volume({5, 5, 5});
  v.at(1, 1, 1) = 2;
  const SdfSet sdf = build_sdf(v);
  EXPECT_TRUE(sdf.field(1)->absent);
  EXPECT_TRUE(std::isinf(sdf.field(1)->values[0]));
  EXPECT_FALSE(sdf.field(2)->absent);
  EXPECT_TRUE(sdf.any_absent());
}

TEST(BuildSdf, UndeclaredLabelRejected) {
  auto v = empty_volume({4, 4, 4});
  v.at(0, 0, 0) = 7;
  EXPECT_THROW(build_sdf(v), ValidationError);
}

TEST(QueryDistances, GridNodeReturnsStoredValue) {
  RandomStream rng(5, "node");
  const LabeledVolume v = random_volume(rng, 10);
  const SdfSet sdf = build_sdf(v);
  for (int k = 0; k < v.dims[2]; ++k)
    for (int j = 0; j < v.dims[1]; ++j)
      for (int i = 0; i < v.dims[0]; ++i) {
        const auto q = query_distances(sdf, v.center(i, j, k));
        for (std::size_t s = 0; s < sdf.fields.size(); ++s) {
          if (!sdf.fields[s].absent) {
            ASSERT_NEAR(q.distances[s], sdf.fields[s].values[v.linear(i, j, k)], 1e-9);
          }
        }
        ASSERT_FALSE(q.out_of_bounds);
      }
}

TEST(QueryDistances, MidpointInterpolatesLinearly) {
  auto v = empty_volume({6, 3, 3});
  v.at(0, 1, 1) = 1;
  const SdfSet sdf = build_sdf(v);
  // Nodes (1,1,1) and (2,1,1) hold 1.0 and 2.0.
  const auto q = query_distances(sdf, Eigen::Vector3d(1.5, 1.0, 1.0));
  EXPECT_DOUBLE_EQ(q.distances[0], 1.5);
  EXPECT_EQ(q.nearest, 1);
  EXPECT_DOUBLE_EQ(q.min_distance, 1.5);
}

TEST(QueryDistances, OutOfBoundsClampsAndFlags) {
  auto v = empty_volume({6, 6, 6});
  v.at(0, 0, 0) = 1;
  const SdfSet sdf = build_sdf(v);
  const auto q = query_distances(sdf, Eigen::Vector3d(-10.0, 0.0, 0.0));
  EXPECT_TRUE(q.out_of_bounds);
  EXPECT_DOUBLE_EQ(q.distances[0], 0.0);
  EXPECT_TRUE(q.clamped_point.isApprox(Eigen::Vector3d::Zero()));
}

TEST(QueryDistances, RandomTipsWithinResolutionOfPointDistance) {
  RandomStream rng(3, "tips");
  auto v = empty_volume({16, 16, 16}, 0.5);
  for (int k = 0; k < 16; ++k)
    for (int j = 0; j < 16; ++j)
      for (int i = 0; i < 16; ++i) {
        if (std::hypot(i - 7.5, k - 4.0) < 3.0) v.at(i, j, k) = 1;
        if (k > 11) v.at(i, j, k) = 2;
      }
  const SdfSet sdf = build_sdf(v);
  const double diagonal = v.spacing.norm();
  const double max_gradient = std::sqrt(3.0);
  for (int n = 0; n < 200; ++n) {
    const Eigen::Vector3d p(rng.uniform(0, 7.5), rng.uniform(0, 7.5), rng.uniform(0, 7.5));
    const auto q = query_distances(sdf, p);
    for (int idx : {1, 2}) {
      const double exact = codrill::testing::brute_force_point_distance(v, idx, p);
      const double got = q.distances[idx - 1];
      if (got > 0.0) {
        ASSERT_NEAR(got, exact, max_gradient * diagonal) << p.transpose();
      }
    }
  }
}

TEST(QueryDistances, LipschitzAlongRays) {
  RandomStream rng(8, "rays");
  for (int trial = 0; trial < 10; ++trial) {
    const LabeledVolume v = random_volume(rng, 14);
    const SdfSet sdf = build_sdf(v);
    const Eigen::Vector3d extent =
        v.spacing.cwiseProduct(Eigen::Vector3d(v.dims[0] - 1, v.dims[1] - 1, v.dims[2] - 1));
    const double diagonal = v.spacing.norm();
    for (int r = 0; r < 20; ++r) {
      const Eigen::Vector3d a = v.origin + extent.cwiseProduct(Eigen::Vector3d(rng.uniform(), rng.uniform(), rng.uniform()));
      const Eigen::Vector3d b = v.origin + extent.cwiseProduct(Eigen::Vector3d(rng.uniform(), rng.uniform(), rng.uniform()));
      const auto qa = query_distances(sdf, a);
      const auto qb = query_distances(sdf, b);
      for (std::size_t s = 0; s < sdf.fields.size(); ++s) {
        if (sdf.fields[s].absent) continue;
        EXPECT_LE(std::abs(qa.distances[s] - qb.distances[s]), (a - b).norm() + diagonal);
      }
    }
  }
}

// --- carving -----------------------------------------------------------------

namespace {

LabeledVolume carve_fixture() {
  StructureTable specs = {{1, "Nerve", 1.5, 0.8, 3.0, 0.0, true}, {4, "Bone", 0.0, 1.3, 5.0, 0.0, false}};
  LabeledVolume v({20, 20, 16}, Eigen::Vector3d::Constant(0.5), Eigen::Vector3d::Zero(), specs);
  for (int k = 0; k < 16; ++k)
    for (int j = 0; j < 20; ++j)
      for (int i = 0; i < 20; ++i) {
        if (k < 10) v.at(i, j, k) = 4;
        if (std::hypot(i - 10.0, k - 4.0) < 2.0) v.at(i, j, k) = 1;
      }
  return v;
}

}  // namespace

TEST(Carve, FarFromBoneIsNoOp) {
  AnatomyModel m(carve_fixture());
  const SdfSet before = m.sdf();
  const auto r = m.carve(Eigen::Vector3d(5.0, 5.0, 7.5), 0.5);
  EXPECT_EQ(r.removed, 0u);
  EXPECT_FALSE(r.breach);
  for (std::size_t s = 0; s < before.fields.size(); ++s) EXPECT_EQ(m.sdf().fields[s].values, before.fields[s].values);
}

TEST(Carve, OnlyCriticalVoxelsIsBreachNoOp) {
  LabeledVolume v = carve_fixture();
  AnatomyModel m(v);
  // Centre of the nerve, radius small enough to stay inside it.
  const auto r = m.carve(v.center(10, 5, 4), 0.4);
  EXPECT_EQ(r.removed, 0u);
  EXPECT_TRUE(r.breach);
  EXPECT_EQ(m.volume().labels, v.labels);
}

TEST(Carve, RemovingAllBoneMakesFieldAbsent) {
  AnatomyModel m(carve_fixture());
  const auto r = m.carve(Eigen::Vector3d(4.75, 4.75, 2.25), 20.0);
  EXPECT_GT(r.removed, 0u);
  EXPECT_TRUE(r.breach);
  EXPECT_EQ(m.volume().count(4), 0u);
  EXPECT_TRUE(m.sdf().field(4)->absent);
  EXPECT_TRUE(std::isinf(m.query(Eigen::Vector3d(1, 1, 1)).distances[1]));
  EXPECT_FALSE(m.sdf().field(1)->absent);
}

TEST(Carve, CarveSequencesMatchFullRebuildExactly) {
  RandomStream rng(21, "carve");
  for (int trial = 0; trial < 6; ++trial) {
    AnatomyModel m(carve_fixture());
    for (int step = 0; step < 25; ++step) {
      const Eigen::Vector3d c(rng.uniform(0, 9.5), rng.uniform(0, 9.5), rng.uniform(0, 6.0));
      m.carve(c, rng.uniform(0.3, 2.0));
      const SdfSet rebuilt = build_sdf(m.volume());
      for (std::size_t s = 0; s < rebuilt.fields.size(); ++s) {
        ASSERT_EQ(m.sdf().fields[s].absent, rebuilt.fields[s].absent);
        ASSERT_EQ(m.sdf().fields[s].values, rebuilt.fields[s].values) << "trial " << trial << " step " << step;
      }
    }
  }
}

TEST(Carve, RejectsNonPositiveRadius) {
  AnatomyModel m(carve_fixture());
  EXPECT_THROW(m.carve(Eigen::Vector3d::Zero(), 0.0), ConfigurationError);
}
