#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "semreg/semantic.hpp"
#include "semreg/spatial_index.hpp"
#include "test_support.hpp"

using namespace semreg;
using semreg::test::alphabet_of;
using semreg::test::make_cloud;
using semreg::test::random_points;
using semreg::test::random_transform;

namespace {

BmrSignature random_signature(std::mt19937_64& rng, std::size_t labels, int rings, double density) {
  std::bernoulli_distribution bit(density);
  BmrSignature s(labels, rings);
  for (LabelId t = 0; t < labels; ++t)
    for (int k = 1; k <= rings; ++k)
      if (bit(rng)) s.set(t, k);
  return s;
}

// Points on a sphere of radius r around c.
std::vector<Point3> shell(const Point3& c, double r, std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Point3> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(c + r * Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized());
  return out;
}

}  // namespace

// --- Local-SS -------------------------------------------------------------

TEST(LocalSignature, FullCoverageHasAllPresentLabels) {
  std::mt19937_64 rng(1);
  const auto cloud = make_cloud(random_points(30, rng, -1, 1), std::vector<LabelId>(30, 0), alphabet_of(5));
  auto c = cloud;
  c.labels[3] = 2;
  c.labels[9] = 4;
  const SpatialIndex idx(c.points);
  const auto sig = compute_local_ss(c, idx, Point3::Zero(), 100.0);
  EXPECT_EQ(sig.members(), (std::vector<LabelId>{0, 2, 4}));
}

TEST(LocalSignature, IsolatedKeypointHasEmptySignature) {
  const auto c = make_cloud({Point3(0, 0, 0)}, {1}, alphabet_of(3));
  const SpatialIndex idx(c.points);
  EXPECT_TRUE(compute_local_ss(c, idx, Point3(10, 0, 0), 1.0).empty());
}

TEST(LocalSignature, HandBuiltSixPointCloud) {
  const auto c = make_cloud({Point3(0, 0, 0), Point3(0.5, 0, 0), Point3(0, 0.7, 0), Point3(0, 0, 0.9),
                             Point3(2, 0, 0), Point3(0, 3, 0)},
                            {0, 0, 1, 1, 2, 2}, alphabet_of(3));
  const SpatialIndex idx(c.points);
  const double r = 1.0;  // includes the first four points
  std::set<LabelId> oracle;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c.points[i].norm() <= r) oracle.insert(c.labels[i]);
  const auto sig = compute_local_ss(c, idx, Point3::Zero(), r);
  EXPECT_EQ(sig.members(), std::vector<LabelId>(oracle.begin(), oracle.end()));
  EXPECT_EQ(sig.members(), (std::vector<LabelId>{0, 1}));
}

TEST(LocalSignature, NonPositiveRadiusThrows) {
  const auto c = make_cloud({Point3(0, 0, 0)}, {0}, alphabet_of(1));
  const SpatialIndex idx(c.points);
  EXPECT_THROW(compute_local_ss(c, idx, Point3::Zero(), 0.0), InvalidArgument);
  EXPECT_THROW(compute_local_ss(c, idx, Point3::Zero(), -1.0), InvalidArgument);
}

TEST(LocalSignature, MonotoneInRadius) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<LabelId> lab(0, 6);
  auto pts = random_points(2000, rng);
  std::vector<LabelId> labels(pts.size());
  for (auto& l : labels) l = lab(rng);
  const auto c = make_cloud(pts, labels, alphabet_of(7));
  const SpatialIndex idx(c.points);
  for (const auto& q : random_points(100, rng)) {
    const auto a = compute_local_ss(c, idx, q, 0.5);
    const auto b = compute_local_ss(c, idx, q, 1.0);
    const auto d = compute_local_ss(c, idx, q, 2.5);
    EXPECT_TRUE(a.is_subset_of(b));
    EXPECT_TRUE(b.is_subset_of(d));
  }
}

TEST(LsConsistency, SharedLabel) {
  EXPECT_TRUE(ls_consistent(LabelSet(6, {0, 2}), LabelSet(6, {2, 5})));
}

TEST(LsConsistency, DisjointLabels) { EXPECT_FALSE(ls_consistent(LabelSet(6, {0}), LabelSet(6, {1}))); }

TEST(LsConsistency, MatchesSetIntersectionOracle) {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution bit(0.15);
  for (int trial = 0; trial < 200; ++trial) {
    LabelSet a(70), b(70);
    std::set<LabelId> sa, sb;
    for (LabelId i = 0; i < 70; ++i) {
      if (bit(rng)) a.insert(i), sa.insert(i);
      if (bit(rng)) b.insert(i), sb.insert(i);
    }
    std::vector<LabelId> both;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(both));
    EXPECT_EQ(ls_consistent(a, b), !both.empty());
  }
}

TEST(LabelSetTest, InsertOutsideAlphabetThrows) {
  LabelSet s(3);
  EXPECT_THROW(s.insert(3), InvalidArgument);
}

// --- Landmarks ------------------------------------------------------------

TEST(Landmarks, NoPointsOfSelectedCategory) {
  const auto c = make_cloud({Point3(0, 0, 0), Point3(1, 0, 0)}, {0, 0}, alphabet_of(2));
  const std::vector<LabelId> cats{1};
  EXPECT_TRUE(cluster_landmarks(c, ClusterParams{}, cats).empty());
}

TEST(Landmarks, TwoSeparatedBlobsGiveTwoCentroids) {
  std::mt19937_64 rng(4);
  auto a = random_points(10, rng, -0.2, 0.2);
  auto b = random_points(10, rng, -0.2, 0.2);
  for (auto& p : b) p += Eigen::Vector3d(5, 0, 0);
  std::vector<Point3> pts = a;
  pts.insert(pts.end(), b.begin(), b.end());
  const auto c = make_cloud(pts, std::vector<LabelId>(20, 1), alphabet_of(2));
  ClusterParams params;
  params.radius[1] = 0.5;
  const std::vector<LabelId> cats{1};
  const auto lm = cluster_landmarks(c, params, cats);
  ASSERT_EQ(lm.size(), 2u);
  Point3 ma = Point3::Zero(), mb = Point3::Zero();
  for (const auto& p : a) ma += p / 10.0;
  for (const auto& p : b) mb += p / 10.0;
  EXPECT_LT((lm.centers[0] - ma).norm(), 1e-12);
  EXPECT_LT((lm.centers[1] - mb).norm(), 1e-12);
  EXPECT_EQ(lm.cluster_sizes, (std::vector<std::size_t>{10, 10}));
  EXPECT_EQ(lm.labels, (std::vector<LabelId>{1, 1}));
}

TEST(Landmarks, RadiusBelowSpacingFiltersEverything) {
  std::vector<Point3> pts;
  for (int i = 0; i < 10; ++i) pts.emplace_back(i * 1.0, 0, 0);
  const auto c = make_cloud(pts, std::vector<LabelId>(10, 0), alphabet_of(1));
  ClusterParams params;
  params.default_radius = 0.5;
  params.min_cluster_size = 5;
  const std::vector<LabelId> cats{0};
  EXPECT_TRUE(cluster_landmarks(c, params, cats).empty());
}

TEST(Landmarks, PerCategoryRadius) {
  // spacing 0.8: one chain under radius 1.0, singletons under radius 0.5
  std::vector<Point3> pts;
  std::vector<LabelId> labels;
  for (int i = 0; i < 12; ++i) {
    pts.emplace_back(i * 0.8, 0, 0);
    labels.push_back(0);
    pts.emplace_back(i * 0.8, 10, 0);
    labels.push_back(1);
  }
  const auto c = make_cloud(pts, labels, alphabet_of(2));
  ClusterParams params;
  params.radius[0] = 1.0;
  params.radius[1] = 0.5;
  const std::vector<LabelId> cats{0, 1};
  const auto lm = cluster_landmarks(c, params, cats);
  ASSERT_EQ(lm.size(), 1u);
  EXPECT_EQ(lm.labels[0], 0u);
}

TEST(Landmarks, EmptyCategoryListThrows) {
  const auto c = make_cloud({Point3(0, 0, 0)}, {0}, alphabet_of(1));
  EXPECT_THROW(cluster_landmarks(c, ClusterParams{}, std::vector<LabelId>{}), InvalidArgument);
}

TEST(Landmarks, InvariantToPointOrder) {
  std::mt19937_64 rng(5);
  std::vector<Point3> pts;
  std::vector<LabelId> labels;
  for (int blob = 0; blob < 6; ++blob) {
    const Point3 c(blob * 4.0, blob % 2 ? 3.0 : -3.0, 0.0);
    for (const auto& p : random_points(15, rng, -0.3, 0.3)) {
      pts.push_back(c + p);
      labels.push_back(static_cast<LabelId>(blob % 3));
    }
  }
  const auto cloud = make_cloud(pts, labels, alphabet_of(3));
  const std::vector<LabelId> cats{0, 1, 2};
  const auto ref = cluster_landmarks(cloud, ClusterParams{}, cats);
  ASSERT_EQ(ref.size(), 6u);
  std::vector<std::size_t> perm(pts.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(perm.begin(), perm.end(), rng);
    auto shuffled = cloud;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      shuffled.points[i] = cloud.points[perm[i]];
      shuffled.labels[i] = cloud.labels[perm[i]];
    }
    const auto lm = cluster_landmarks(shuffled, ClusterParams{}, cats);
    EXPECT_EQ(lm.centers, ref.centers);
    EXPECT_EQ(lm.labels, ref.labels);
    EXPECT_EQ(lm.cluster_sizes, ref.cluster_sizes);
  }
}

TEST(Landmarks, ClusterSizesRespectMinimum) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<LabelId> lab(0, 2);
  auto pts = random_points(600, rng, 0, 8);
  std::vector<LabelId> labels(pts.size());
  for (auto& l : labels) l = lab(rng);
  const auto c = make_cloud(pts, labels, alphabet_of(3));
  ClusterParams params;
  params.min_cluster_size = 7;
  params.default_radius = 0.6;
  const std::vector<LabelId> cats{0, 1, 2};
  for (auto n : cluster_landmarks(c, params, cats).cluster_sizes) EXPECT_GE(n, 7u);
}

TEST(Landmarks, VoxelLandmarksOnePerCell) {
  const auto c = make_cloud({Point3(0.1, 0.1, 0.1), Point3(0.2, 0.1, 0.1), Point3(0.1, 0.1, 0.1), Point3(1.1, 0, 0)},
                            {0, 0, 1, 0}, alphabet_of(2));
  const auto lm = voxel_landmarks(c, 0.5);
  ASSERT_EQ(lm.size(), 3u);
  EXPECT_EQ(lm.labels, (std::vector<LabelId>{0, 0, 1}));
  EXPECT_LT((lm.centers[0] - Point3(0.15, 0.1, 0.1)).norm(), 1e-12);
  EXPECT_THROW(voxel_landmarks(c, 0.0), InvalidArgument);
}

// --- Rings and BMR-SS -----------------------------------------------------

TEST(RingIndex, ZeroIsFirstRing) { EXPECT_EQ(ring_index(0.0, BmrConfig{33, 1.5}), 1); }

TEST(RingIndex, ExactWidthStartsSecondRing) { EXPECT_EQ(ring_index(1.5, BmrConfig{33, 1.5}), 2); }

TEST(RingIndex, BeyondLastRing) {
  const BmrConfig cfg{33, 1.5};
  EXPECT_FALSE(ring_index(33 * 1.5, cfg).has_value());
  EXPECT_FALSE(ring_index(100.0, cfg).has_value());
  EXPECT_EQ(ring_index(33 * 1.5 - 1e-9, cfg), 33);
}

TEST(RingIndex, BoundariesAreHalfOpenForAwkwardWidths) {
  for (double width : {0.1, 0.2, 0.3, 1.5, 0.7}) {
    const BmrConfig cfg{40, width};
    for (int k = 0; k < 40; ++k) {
      const double d = k * width;
      EXPECT_EQ(ring_index(d, cfg), k + 1) << "width " << width << " k " << k;
      EXPECT_EQ(ring_index(std::nextafter((k + 1) * width, 0.0), cfg), k + 1);
    }
  }
}

TEST(RingIndex, NegativeDistanceIsOutOfRange) { EXPECT_FALSE(ring_index(-0.1, BmrConfig{}).has_value()); }

TEST(BmrConfigTest, Validation) {
  EXPECT_THROW((BmrConfig{0, 1.0}.validate()), InvalidArgument);
  EXPECT_THROW((BmrConfig{3, 0.0}.validate()), InvalidArgument);
  EXPECT_NO_THROW((BmrConfig{1, 0.1}.validate()));
}

TEST(Bmr, NoLandmarksGivesZeroMatrix) {
  const auto s = compute_bmr_ss(Point3::Zero(), LandmarkSet{}, BmrConfig{33, 1.5}, 8);
  EXPECT_EQ(s.popcount(), 0u);
  EXPECT_EQ(s.labels(), 8u);
  EXPECT_EQ(s.rings(), 33);
}

TEST(Bmr, SingleLandmarkSetsOneBit) {
  LandmarkSet lm;
  lm.push_back(Point3(2.0, 0, 0), 3, 10);
  const auto s = compute_bmr_ss(Point3::Zero(), lm, BmrConfig{33, 1.5}, 8);
  EXPECT_EQ(s.popcount(), 1u);
  EXPECT_TRUE(s.get(3, 2));
}

TEST(Bmr, LandmarkAtOuterRadiusIgnored) {
  LandmarkSet lm;
  lm.push_back(Point3(10.0 * 0.5, 0, 0), 0, 10);
  EXPECT_EQ(compute_bmr_ss(Point3::Zero(), lm, BmrConfig{10, 0.5}, 1).popcount(), 0u);
}

TEST(Bmr, OutOfRangeAccessThrows) {
  BmrSignature s(3, 4);
  EXPECT_THROW(s.set(3, 1), InvalidArgument);
  EXPECT_THROW(s.get(0, 0), InvalidArgument);
  EXPECT_THROW(s.get(0, 5), InvalidArgument);
}

TEST(Bmr, RotationInvariance) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<LabelId> lab(0, 7);
  LandmarkSet lm;
  for (const auto& p : random_points(40, rng, -30, 30)) lm.push_back(p, lab(rng), 10);
  const BmrConfig cfg{33, 1.5};
  const auto keypoints = random_points(20, rng, -20, 20);
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = random_transform(rng, 50.0);
    LandmarkSet moved = lm;
    for (auto& c : moved.centers) c = t(c);
    for (const auto& k : keypoints) {
      const auto a = compute_bmr_ss(k, lm, cfg, 8);
      const auto b = compute_bmr_ss(t(k), moved, cfg, 8);
      // a landmark within rounding of a ring boundary may legitimately flip
      bool near_boundary = false;
      for (const auto& c : lm.centers) {
        const double d = (c - k).norm() / cfg.width;
        near_boundary |= std::abs(d - std::round(d)) < 1e-9;
      }
      if (!near_boundary) {
        EXPECT_EQ(a, b);
      }
    }
  }
}

// --- Scene similarity and RWS --------------------------------------------

TEST(SceneSimilarity, ZeroSignatures) { EXPECT_EQ(scene_similarity(BmrSignature(5, 7), BmrSignature(5, 7)), 0u); }

TEST(SceneSimilarity, SelfSimilarityIsPopcount) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    const auto s = random_signature(rng, 8, 33, 0.2);
    EXPECT_EQ(scene_similarity(s, s), s.popcount());
  }
}

TEST(SceneSimilarity, FourteenSharedCells) {
  BmrSignature a(8, 33), b(8, 33);
  for (int k = 1; k <= 14; ++k) {
    a.set(static_cast<LabelId>(k % 8), k);
    b.set(static_cast<LabelId>(k % 8), k);
  }
  a.set(0, 30);
  b.set(1, 30);
  EXPECT_EQ(scene_similarity(a, b), 14u);
}

TEST(SceneSimilarity, MatchesDoubleSumOracle) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t labels = 1 + trial % 9;
    const int rings = 1 + trial % 40;
    const auto a = random_signature(rng, labels, rings, 0.3);
    const auto b = random_signature(rng, labels, rings, 0.3);
    std::size_t oracle = 0;
    for (LabelId t = 0; t < labels; ++t)
      for (int k = 1; k <= rings; ++k) oracle += (a.get(t, k) ? 1 : 0) * (b.get(t, k) ? 1 : 0);
    EXPECT_EQ(scene_similarity(a, b), oracle);
    EXPECT_EQ(scene_similarity(a, b), scene_similarity(b, a));
    EXPECT_LE(scene_similarity(a, b), std::min(a.popcount(), b.popcount()));
  }
}

TEST(SceneSimilarity, DimensionMismatchThrows) {
  EXPECT_THROW(scene_similarity(BmrSignature(3, 4), BmrSignature(3, 5)), InvalidArgument);
  EXPECT_THROW(scene_similarity(BmrSignature(3, 4), BmrSignature(4, 4)), InvalidArgument);
}

TEST(Rws, BothBitsSet) {
  BmrSignature a(3, 4), b(3, 4);
  a.set(1, 2);
  b.set(1, 2);
  EXPECT_TRUE(rws_consistent(a, b, 1, 2));
}

TEST(Rws, OneBitUnset) {
  BmrSignature a(3, 4), b(3, 4);
  a.set(1, 2);
  EXPECT_FALSE(rws_consistent(a, b, 1, 2));
}

TEST(Rws, OutOfRangeThrows) {
  BmrSignature a(3, 4), b(3, 4);
  EXPECT_THROW(rws_consistent(a, b, 3, 1), InvalidArgument);
  EXPECT_THROW(rws_consistent(a, b, 0, 0), InvalidArgument);
}

TEST(Rws, CountEqualsSceneSimilarity) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_signature(rng, 6, 12, 0.4);
    const auto b = random_signature(rng, 6, 12, 0.4);
    std::size_t n = 0;
    for (LabelId t = 0; t < 6; ++t)
      for (int k = 1; k <= 12; ++k) n += rws_consistent(a, b, t, k);
    EXPECT_EQ(n, scene_similarity(a, b));
  }
}

// --- Saliency -------------------------------------------------------------

TEST(Saliency, CategoryWithoutLandmarksIsFullySalient) {
  std::mt19937_64 rng(11);
  const auto c = make_cloud(random_points(50, rng), std::vector<LabelId>(50, 0), alphabet_of(3));
  LandmarkSet lm;
  lm.push_back(Point3::Zero(), 0, 10);
  const auto w = compute_saliency(c, lm, BmrConfig{5, 2.0});
  for (int k = 0; k < 5; ++k) {
    EXPECT_EQ(w(1, k), 1.0);
    EXPECT_EQ(w(2, k), 1.0);
  }
}

TEST(Saliency, ShellCoveringEveryPointIsZero) {
  std::mt19937_64 rng(12);
  const auto pts = shell(Point3::Zero(), 2.5, 40, rng);  // ring 2 for L = 2
  const auto c = make_cloud(pts, std::vector<LabelId>(pts.size(), 0), alphabet_of(1));
  LandmarkSet lm;
  lm.push_back(Point3::Zero(), 0, 10);
  const auto w = compute_saliency(c, lm, BmrConfig{4, 2.0});
  EXPECT_EQ(w(0, 1), 0.0);
  EXPECT_EQ(w(0, 0), 1.0);
}

TEST(Saliency, OverlappingShellsCountedOnce) {
  // 100 points: 20 only near landmark A's ring, 10 in both shells, 70 far away
  std::mt19937_64 rng(13);
  const Point3 a(0, 0, 0), b(3, 0, 0);
  std::vector<Point3> pts;
  for (int i = 0; i < 20; ++i) pts.push_back(Point3(-1.5, 0, 0) + 0.01 * Point3::Random());
  for (int i = 0; i < 10; ++i) pts.push_back(Point3(1.5, 0, 0) + 0.01 * Point3::Random());  // 1.5 from both
  for (int i = 0; i < 70; ++i) pts.push_back(Point3(100, 100, 0) + Point3::Random());
  const auto c = make_cloud(pts, std::vector<LabelId>(100, 0), alphabet_of(2));
  LandmarkSet lm;
  lm.push_back(a, 1, 10);
  lm.push_back(b, 1, 10);
  const auto w = compute_saliency(c, lm, BmrConfig{2, 1.0});  // ring 2 = [1, 2)
  EXPECT_DOUBLE_EQ(w(1, 1), 0.70);
  EXPECT_DOUBLE_EQ(w(1, 0), 1.0);
}

TEST(Saliency, EntriesInUnitInterval) {
  std::mt19937_64 rng(14);
  std::uniform_int_distribution<LabelId> lab(0, 3);
  auto pts = random_points(400, rng, 0, 20);
  std::vector<LabelId> labels(pts.size());
  for (auto& l : labels) l = lab(rng);
  const auto c = make_cloud(pts, labels, alphabet_of(4));
  LandmarkSet lm;
  for (const auto& p : random_points(10, rng, 0, 20)) lm.push_back(p, lab(rng), 10);
  const auto w = compute_saliency(c, lm, BmrConfig{8, 2.0});
  EXPECT_GE(w.minCoeff(), 0.0);
  EXPECT_LE(w.maxCoeff(), 1.0);
}

TEST(Saliency, EmptyCloudThrows) {
  LabeledPointCloud c;
  c.alphabet = alphabet_of(1);
  EXPECT_THROW(compute_saliency(c, LandmarkSet{}, BmrConfig{}), InvalidArgument);
}

TEST(CategorySelection, DenseGroundExcludedRareObjectIncluded) {
  // label 0: ground patches on a 3 m grid; label 1: a single pole
  std::mt19937_64 rng(15);
  std::vector<Point3> pts;
  std::vector<LabelId> labels;
  for (int x = -10; x <= 10; ++x)
    for (int y = -10; y <= 10; ++y)
      for (const auto& p : random_points(10, rng, -0.1, 0.1)) {
        pts.push_back(Point3(3.0 * x, 3.0 * y, 0) + p);
        labels.push_back(0);
      }
  for (int z = 0; z < 20; ++z) {
    pts.emplace_back(1.5, 1.5, 2.0 + z * 0.2);
    labels.push_back(1);
  }
  const auto c = make_cloud(pts, labels, alphabet_of(2));
  const std::vector<LabelId> cats{0, 1};
  const auto lm = cluster_landmarks(c, ClusterParams{}, cats);
  const auto w = compute_saliency(c, lm, BmrConfig{33, 1.5});
  EXPECT_LT(w.row(0).mean(), 0.5);
  EXPECT_GE(w.row(1).mean(), 0.5);
  EXPECT_EQ(select_landmark_categories(c, lm, BmrConfig{33, 1.5}, 0.5), (std::vector<LabelId>{1}));
}

TEST(CategorySelection, DynamicCategoriesRemoved) {
  std::vector<Point3> pts;
  for (int z = 0; z < 20; ++z) pts.emplace_back(0, 0, z * 0.2);
  const auto c = make_cloud(pts, std::vector<LabelId>(20, 1), LabelAlphabet({"ground", "car"}, {false, true}));
  const std::vector<LabelId> cats{1};
  const auto lm = cluster_landmarks(c, ClusterParams{}, cats);
  ASSERT_EQ(lm.size(), 1u);
  // the ground category has no landmarks at all and stays fully salient
  EXPECT_EQ(select_landmark_categories(c, lm, BmrConfig{}, 0.5), (std::vector<LabelId>{0}));
}

TEST(CategorySelection, ThresholdOutOfRangeThrows) {
  const auto c = make_cloud({Point3::Zero()}, {0}, alphabet_of(1));
  EXPECT_THROW(select_landmark_categories(c, LandmarkSet{}, BmrConfig{}, 1.5), InvalidArgument);
}
