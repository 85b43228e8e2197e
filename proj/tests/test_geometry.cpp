#include "brepchain/geometry.hpp"
#include "brepchain/primitives.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace brepchain;

namespace {

std::vector<Vec3> circle_samples(double r = 0.3) {
  Curve c{Circle{Vec3(0.5, 0.5, 0.5), Vec3::UnitZ(), Vec3::UnitX(), r}, 0.0, 2 * M_PI, true};
  return sample_curve(c);
}

std::vector<Vec3> cylinder_grid() {
  Surface s{Cylinder{Vec3(0.5, 0.5, 0.0), Vec3::UnitZ(), Vec3::UnitX(), 0.25}, {0.0, 2 * M_PI, 0.2, 0.8}, true};
  return sample_grid(s);
}

std::vector<Vec3> plane_grid(double z = 0.0) {
  Surface s{Plane{Vec3(0, 0, z), Vec3::UnitX(), Vec3::UnitY()}, {0.0, 1.0, 0.0, 1.0}, false};
  return sample_grid(s);
}

}  // namespace

TEST(VertexDistance, Examples) {
  EXPECT_EQ(vertex_distance(Vec3::Zero(), Vec3::Zero()), 0.0);
  EXPECT_EQ(vertex_distance(Vec3(1, 0, 0), Vec3::Zero()), 1.0);
  EXPECT_NEAR(vertex_distance(Vec3(0.3, 0.4, 0), Vec3::Zero()), 0.25, 1e-15);
}

TEST(CurveDistance, IdenticalAndReversed) {
  std::mt19937_64 rng(1);
  auto a = oracle::random_points(rng, kCurveSamples);
  std::vector<Vec3> rev(a.rbegin(), a.rend());
  EXPECT_EQ(curve_distance({a, false}, {a, false}), 0.0);
  EXPECT_EQ(curve_distance({a, false}, {rev, false}), 0.0);
}

TEST(CurveDistance, RolledCircle) {
  auto a = circle_samples();
  std::vector<Vec3> b(a.size());
  for (size_t k = 0; k < a.size(); ++k) b[k] = a[(k + 7) % a.size()];
  EXPECT_EQ(curve_distance({a, true}, {b, true}), 0.0);
}

TEST(CurveDistance, TranslatedCircleIsSquaredShift) {
  auto a = circle_samples();
  for (double t : {0.01, 0.05, 0.2}) {
    std::vector<Vec3> b = a;
    for (auto& p : b) p.x() += t;
    double d = curve_distance({a, true}, {b, true});
    EXPECT_NEAR(d, oracle::brute_curve_distance(a, b, true), 1e-15);
    EXPECT_NEAR(d, t * t, 1e-12 * t * t);
  }
}

TEST(CurveDistance, MatchesBruteForceOnRandomCurves) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    bool closed = trial % 2;
    auto a = oracle::random_points(rng, kCurveSamples);
    auto b = oracle::random_points(rng, kCurveSamples);
    EXPECT_NEAR(curve_distance({a, closed}, {b, closed}), oracle::brute_curve_distance(a, b, closed), 1e-14);
  }
}

TEST(PatchDistance, IdenticalAndReversed) {
  auto g = plane_grid();
  std::vector<Vec3> rev(g.size());
  for (int i = 0; i < kPatchSide; ++i)
    for (int j = 0; j < kPatchSide; ++j) rev[static_cast<size_t>(i * 10 + j)] = g[static_cast<size_t>((9 - i) * 10 + j)];
  EXPECT_EQ(patch_distance({g, false}, {g, false}), 0.0);
  EXPECT_EQ(patch_distance({g, false}, {rev, false}), 0.0);
}

TEST(PatchDistance, RolledCylinder) {
  auto g = cylinder_grid();
  std::vector<Vec3> rolled(g.size());
  for (int i = 0; i < kPatchSide; ++i)
    for (int j = 0; j < kPatchSide; ++j)
      rolled[static_cast<size_t>(i * 10 + j)] = g[static_cast<size_t>(((i + 3) % 10) * 10 + j)];
  EXPECT_EQ(patch_distance({g, true}, {rolled, true}), 0.0);
  EXPECT_EQ(oracle::brute_patch_distance(g, rolled, true), 0.0);
}

TEST(PatchDistance, MatchesBruteForceOnRandomGrids) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    bool closed = trial % 2;
    auto a = oracle::random_points(rng, kPatchSamples);
    auto b = oracle::random_points(rng, kPatchSamples);
    EXPECT_NEAR(patch_distance({a, closed}, {b, closed}), oracle::brute_patch_distance(a, b, closed), 1e-14);
  }
}

TEST(Proximity, Examples) {
  auto c = circle_samples();
  std::vector<Vec3> corner{c[4]};
  EXPECT_EQ(proximity(corner, c), 0.0);
  std::vector<Vec3> single{Vec3(0.1, 0.2, 0.3)};
  std::vector<Vec3> q{Vec3(0.1, 0.2, 0.3 + 0.25)};
  EXPECT_NEAR(proximity(q, single), 0.25, 1e-15);
}

TEST(Proximity, SegmentOverOffsetPlane) {
  const double h = 0.07;
  auto grid = plane_grid(h);
  Curve line{Line{Vec3(0, 0, 0), Vec3::UnitX()}, 0.0, 1.0, false};
  // Samples chosen on the grid's x/y lattice so every nearest point sits
  // directly above.
  std::vector<Vec3> seg;
  for (int k = 0; k < kPatchSide; ++k) seg.push_back(evaluate(line, grid[static_cast<size_t>(k * 10)].x()));
  double direct = 0.0;
  for (const auto& p : seg) {
    double best = 1e9;
    for (const auto& g : grid) best = std::min(best, (p - g).norm());
    direct += best;
  }
  direct /= static_cast<double>(seg.size());
  EXPECT_NEAR(proximity(seg, grid), direct, 1e-15);
  EXPECT_NEAR(proximity(seg, grid), h, 1e-12);
}

TEST(Fitness, Values) {
  EXPECT_EQ(fitness_score(0.0), 1.0);
  EXPECT_NEAR(fitness_score(0.1), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(fitness_score(0.2), std::exp(-4.0), 1e-15);
  EXPECT_NEAR(fitness_score(0.1), 0.36788, 1e-5);
  EXPECT_NEAR(fitness_score(0.2), 0.01832, 1e-5);
}

TEST(Chamfer, Examples) {
  std::vector<Vec3> a{Vec3::Zero()}, b{Vec3(1, 0, 0)}, ab{Vec3::Zero(), Vec3(1, 0, 0)};
  EXPECT_EQ(chamfer_distance(ab, ab), 0.0);
  EXPECT_EQ(chamfer_distance(a, b), 1.0);
  // Directed means are 0.5 (ab -> a) and 0 (a -> ab); the symmetric form halves their sum.
  EXPECT_DOUBLE_EQ(chamfer_distance(ab, a), 0.25);
  EXPECT_DOUBLE_EQ(chamfer_distance(a, ab), 0.25);
  std::vector<Vec3> empty;
  EXPECT_THROW(chamfer_distance(empty, a), ArgumentError);
}

TEST(Hausdorff, Simple) {
  std::vector<Vec3> a{Vec3::Zero(), Vec3(2, 0, 0)}, b{Vec3::Zero()};
  EXPECT_DOUBLE_EQ(hausdorff_distance(a, b), 2.0);
}

TEST(Primitives, SampleCounts) {
  auto c = circle_samples();
  EXPECT_EQ(c.size(), static_cast<size_t>(kCurveSamples));
  for (const auto& p : c) EXPECT_NEAR((p - Vec3(0.5, 0.5, 0.5)).norm(), 0.3, 1e-14);
  // Closed: no duplicated endpoint, uniform spacing across the seam.
  double step = (c[1] - c[0]).norm();
  EXPECT_NEAR((c.back() - c.front()).norm(), step, 1e-12);
  EXPECT_EQ(cylinder_grid().size(), static_cast<size_t>(kPatchSamples));
}

TEST(Primitives, AnalyticProjection) {
  Surface plane{Plane{}, {-1, 1, -1, 1}, false};
  auto pr = project(plane, Vec3(0, 0, 1));
  EXPECT_NEAR(pr.distance, 1.0, 1e-15);
  EXPECT_NEAR(pr.foot.norm(), 0.0, 1e-15);
  Surface cyl{Cylinder{Vec3::Zero(), Vec3::UnitZ(), Vec3::UnitX(), 0.2}, {0, 2 * M_PI, -1, 1}, true};
  EXPECT_NEAR(project(cyl, Vec3(0.2 + 0.05, 0, 0.3)).distance, 0.05, 1e-14);
  EXPECT_NEAR(project(cyl, Vec3(0, -0.2 - 0.1, 0.0)).distance, 0.1, 1e-14);
}

TEST(Primitives, TypeNamesRoundTrip) {
  for (int t = 0; t < kCurveTypeCount; ++t) {
    auto ct = static_cast<CurveType>(t);
    EXPECT_EQ(parse_curve_type(to_string(ct)), ct);
  }
  for (int t = 0; t < kPatchTypeCount; ++t) {
    auto pt = static_cast<PatchType>(t);
    EXPECT_EQ(parse_patch_type(to_string(pt)), pt);
  }
  EXPECT_FALSE(parse_patch_type("blob").has_value());
}
