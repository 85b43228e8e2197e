#include "brepchain/matching.hpp"
#include "brepchain/synth.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace brepchain;

namespace {

ChainComplex cube() { return generate_gt({ShapeKind::Cube}); }

GroupMatching manual(std::vector<int> pred_to_gt, int num_gt, std::vector<double> dist) {
  GroupMatching m;
  m.pred_to_gt = std::move(pred_to_gt);
  m.gt_to_pred.assign(static_cast<size_t>(num_gt), -1);
  for (size_t i = 0; i < m.pred_to_gt.size(); ++i)
    if (m.pred_to_gt[i] >= 0) m.gt_to_pred[static_cast<size_t>(m.pred_to_gt[i])] = static_cast<int>(i);
  m.distance = std::move(dist);
  return m;
}

GroupMatching identity(int n) {
  std::vector<int> p(static_cast<size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  return manual(p, n, std::vector<double>(static_cast<size_t>(n), 0.0));
}

CurveGeometry line_curve(CurveType type, bool closed) {
  CurveGeometry c;
  c.type = type;
  c.closed = closed;
  for (int k = 0; k < kCurveSamples; ++k) c.samples.emplace_back(k / 29.0, 0, 0);
  return c;
}

PatchGeometry plane_patch(double z) {
  PatchGeometry p;
  p.type = PatchType::Plane;
  Surface s{Plane{Vec3(0, 0, z), Vec3::UnitX(), Vec3::UnitY()}, {0, 1, 0, 1}, false};
  p.grid = sample_grid(s);
  p.primitive = s;
  return p;
}

}  // namespace

TEST(Hungarian, IdentityFavoring) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Ones(3, 3) - Eigen::MatrixXd::Identity(3, 3);
  auto a = hungarian_match(c);
  EXPECT_EQ(a.row_to_col, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(a.total_cost, 0.0);
}

TEST(Hungarian, SingleCell) {
  Eigen::MatrixXd c(1, 1);
  c << 4.5;
  auto a = hungarian_match(c);
  EXPECT_EQ(a.row_to_col, std::vector<int>{0});
  EXPECT_EQ(a.total_cost, 4.5);
}

TEST(Hungarian, RandomIntegerMatricesMatchPermutationOracle) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> cost(0, 50), dim(1, 6);
  for (int trial = 0; trial < 200; ++trial) {
    int r = trial < 50 ? 5 : dim(rng), c = trial < 50 ? 5 : dim(rng);
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = cost(rng);
    auto a = hungarian_match(m);
    EXPECT_EQ(a.total_cost, oracle::brute_assignment(m));
    // The reported total is the cost of the reported map.
    double s = 0.0;
    int assigned = 0;
    std::vector<int> used(static_cast<size_t>(c), 0);
    for (int i = 0; i < r; ++i) {
      int j = a.row_to_col[static_cast<size_t>(i)];
      if (j < 0) continue;
      ++assigned;
      EXPECT_EQ(used[static_cast<size_t>(j)]++, 0);
      s += m(i, j);
    }
    EXPECT_EQ(assigned, std::min(r, c));
    EXPECT_EQ(s, a.total_cost);
  }
}

TEST(Hungarian, EmptyAndNaN) {
  EXPECT_TRUE(hungarian_match(Eigen::MatrixXd(0, 3)).row_to_col.empty());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(1, 0) = std::nan("");
  EXPECT_THROW(hungarian_match(m), ArgumentError);
}

TEST(MatchingCost, Corners) {
  SoftCorner p{1.0, Vec3(0.2, 0.3, 0.4)};
  EXPECT_EQ(matching_cost(p, CornerGeometry{Vec3(0.2, 0.3, 0.4)}), 0.0);
  EXPECT_NEAR(matching_cost(p, CornerGeometry{Vec3(0.3, 0.3, 0.4)}), 3.0, 1e-12);
  SoftCorner half{0.5, Vec3(0.2, 0.3, 0.4)};
  EXPECT_NEAR(matching_cost(half, CornerGeometry{Vec3(0.2, 0.3, 0.4)}), std::log(2.0), 1e-15);
}

TEST(MatchingCost, CertainExactElementsCostNothing) {
  ChainComplex c = cube();
  ProbabilisticComplex p = to_probabilistic(c);
  for (int i = 0; i < c.num_edges(); ++i) EXPECT_EQ(matching_cost(p.curves[i], c.edges[i]), 0.0);
  for (int i = 0; i < c.num_faces(); ++i) EXPECT_EQ(matching_cost(p.patches[i], c.faces[i]), 0.0);
}

TEST(FScore, Examples) {
  ChainComplex c = cube();
  Matching m = match_by_distance(c, c);
  auto f = evaluate_fscore(m.patches, 6, 6);
  EXPECT_EQ(f.f, 1.0);
  EXPECT_EQ(evaluate_fscore(manual({}, 3, {}), 0, 3).f, 0.0);

  // Two predictions, one matched within delta.
  auto g = manual({0, -1}, 1, {0.05 * 0.05, std::nan("")});
  auto s = evaluate_fscore(g, 2, 1, 0.1);
  const double P = 1.0 / 2.0, R = 1.0 / 1.0;
  EXPECT_DOUBLE_EQ(s.precision, P);
  EXPECT_DOUBLE_EQ(s.recall, R);
  EXPECT_DOUBLE_EQ(s.f, 2 * P * R / (P + R));
  EXPECT_NEAR(s.f, 2.0 / 3.0, 1e-15);
  // Matched but beyond delta is not a true positive.
  auto far = manual({0}, 1, {0.2 * 0.2});
  EXPECT_EQ(evaluate_fscore(far, 1, 1, 0.1).f, 0.0);
}

TEST(TypeAccuracy, Fractions) {
  std::vector<CurveGeometry> gt_edges, pred_edges;
  for (int i = 0; i < 4; ++i) gt_edges.push_back(line_curve(CurveType::Line, false));
  pred_edges = gt_edges;
  ChainComplex gt = make_complex({}, gt_edges, {});
  Matching m;
  m.curves = identity(4);
  m.patches = identity(0);
  m.corners = identity(0);
  EXPECT_EQ(type_accuracy(make_complex({}, pred_edges, {}), gt, m).curve_type, 1.0);
  pred_edges[2].type = CurveType::Circle;
  auto acc = type_accuracy(make_complex({}, pred_edges, {}), gt, m);
  EXPECT_EQ(acc.curve_type, 0.75);
  EXPECT_EQ(acc.curve_openness, 1.0);
  EXPECT_FALSE(acc.patch_type.has_value());
  for (auto& e : pred_edges) e.type = CurveType::BSpline;
  EXPECT_EQ(type_accuracy(make_complex({}, pred_edges, {}), gt, m).curve_type, 0.0);
}

TEST(TopologyError, PerfectAndUnmatched) {
  ChainComplex c = cube();
  Matching m = match_by_distance(c, c);
  EXPECT_EQ(topology_error(c.fe, c.fe, m.patches, m.curves), 0.0);
  GroupMatching none_rows = manual({}, 6, {}), none_cols = manual({}, 12, {});
  EXPECT_EQ(topology_error(BinaryMatrix(0, 0), c.fe, none_rows, none_cols), 1.0);
}

TEST(TopologyError, CubeMissingVertex) {
  ChainComplex gt = cube();
  const int removed = 3;
  std::vector<CornerGeometry> verts;
  for (int k = 0; k < gt.num_vertices(); ++k)
    if (k != removed) verts.push_back(gt.vertices[k]);
  ChainComplex pred = make_complex(verts, gt.edges, gt.faces);
  pred.fe = gt.fe;
  for (int e = 0; e < gt.num_edges(); ++e)
    for (int k = 0, col = 0; k < gt.num_vertices(); ++k) {
      if (k == removed) continue;
      pred.ev.set(e, col++, gt.ev(e, k));
    }
  Matching m = match_by_distance(pred, gt);

  // Oracle: gt vertex k maps to prediction k (k < removed) or k - 1.
  int wrong = 0;
  for (int e = 0; e < gt.num_edges(); ++e)
    for (int k = 0; k < gt.num_vertices(); ++k) {
      if (k == removed) {
        ++wrong;
        continue;
      }
      int pk = k < removed ? k : k - 1;
      wrong += gt.ev(e, k) != pred.ev(e, pk);
    }
  const double expected = static_cast<double>(wrong) / (12.0 * 8.0);
  EXPECT_DOUBLE_EQ(topology_error(pred.ev, gt.ev, m.curves, m.corners), expected);
  EXPECT_DOUBLE_EQ(expected, 0.125);
}

TEST(LossTerms, CertainPredictionIsZero) {
  ChainComplex c = cube();
  ProbabilisticComplex p = to_probabilistic(c);
  Matching m = match_for_training(p, c);
  auto L = loss_terms(p, c, m);
  EXPECT_EQ(L.val, 0.0);
  EXPECT_EQ(L.cls, 0.0);
  EXPECT_EQ(L.geo, 0.0);
  EXPECT_EQ(L.topo, 0.0);
  EXPECT_EQ(L.total, 0.0);
}

TEST(LossTerms, HalfValidCorner) {
  ChainComplex gt = make_complex({CornerGeometry{Vec3(0.5, 0.5, 0.5)}}, {}, {});
  ProbabilisticComplex p;
  p.corners.push_back({0.5, Vec3(0.5, 0.5, 0.5)});
  p.fe.resize(0, 0);
  p.ev.resize(0, 1);
  p.fv.resize(0, 1);
  Matching m = match_for_training(p, gt);
  ASSERT_EQ(m.corners.pred_to_gt, std::vector<int>{0});
  auto L = loss_terms(p, gt, m);
  // Binary cross-entropy over the single slot with a valid target.
  EXPECT_NEAR(L.val, -std::log(0.5) / 1.0, 1e-15);
  EXPECT_EQ(L.geo, 0.0);
}

TEST(LossTerms, ConfidentWrongClosednessIsCapped) {
  CurveGeometry closed_gt = line_curve(CurveType::Line, true);
  ChainComplex gt = make_complex({}, {closed_gt}, {});
  ProbabilisticComplex p;
  SoftCurve sc;
  sc.validness = 1.0;
  sc.openness = 1.0;
  sc.type_probs = {1, 0, 0, 0};
  sc.samples = closed_gt.samples;
  p.curves.push_back(sc);
  p.fe.resize(0, 1);
  p.ev.resize(1, 0);
  p.fv.resize(0, 0);
  Matching m = match_for_training(p, gt);
  auto L = loss_terms(p, gt, m);
  EXPECT_EQ(L.cls, kLogCap);
}

TEST(LossTerms, RejectsOutOfRangeProbability) {
  ChainComplex c = cube();
  ProbabilisticComplex p = to_probabilistic(c);
  Matching m = match_for_training(p, c);
  p.corners[0].validness = 1.5;
  EXPECT_THROW(loss_terms(p, c, m), ArgumentError);
}

TEST(PatchResidual, ExactAndOffset) {
  PatchGeometry gtp = plane_patch(0.0);
  ChainComplex gt = make_complex({}, {}, {gtp});
  auto rr = patch_residual_and_recall(gt, gt, identity(1), {gtp.grid});
  EXPECT_EQ(rr.residual, 0.0);
  EXPECT_EQ(rr.recall, 1.0);
  ChainComplex pred = make_complex({}, {}, {plane_patch(0.01)});
  Matching m = match_by_distance(pred, gt);
  auto off = patch_residual_and_recall(pred, gt, m.patches, {gtp.grid});
  EXPECT_NEAR(off.residual, 0.01, 1e-15);
}

TEST(PCoverage, Examples) {
  PatchGeometry p = plane_patch(0.0);
  std::vector<Vec3> on, off, half;
  for (int k = 0; k < 20; ++k) {
    Vec3 q(0.05 * k, 0.5, 0.0);
    on.push_back(q);
    off.push_back(q + Vec3(0, 0, 0.1));
    half.push_back(k % 2 ? q : q + Vec3(0, 0, 0.1));
  }
  EXPECT_EQ(p_coverage(on, {p}), 1.0);
  EXPECT_EQ(p_coverage(off, {p}), 0.0);
  int direct = 0;
  for (const auto& q : half) direct += std::abs(q.z()) < 0.01;
  EXPECT_EQ(p_coverage(half, {p}), direct / 20.0);
  EXPECT_EQ(p_coverage(half, {p}), 0.5);
  EXPECT_EQ(p_coverage(on, {}), 0.0);
  EXPECT_THROW(p_coverage(std::vector<Vec3>{}, {p}), ArgumentError);
}

TEST(PatchPatch, Shapes) {
  BinaryMatrix ff = patch_patch_matrix(cube());
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(ff.row_sum(i), 4);
    EXPECT_FALSE(ff(i, i));
  }
  BinaryMatrix s = patch_patch_matrix(generate_gt({ShapeKind::Sphere}));
  EXPECT_EQ(s.rows(), 1);
  EXPECT_EQ(s.count(), 0);
  ChainComplex cc = generate_gt({ShapeKind::CappedCylinder});
  BinaryMatrix f = patch_patch_matrix(cc);
  // Oracle: FE FE^T off the diagonal.
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      int s2 = 0;
      for (int e = 0; e < cc.num_edges(); ++e) s2 += cc.fe(a, e) * cc.fe(b, e);
      EXPECT_EQ(f(a, b), a != b && s2 >= 1);
    }
  EXPECT_TRUE(f(0, 1) && f(0, 2));
  EXPECT_FALSE(f(1, 2));
}

TEST(SegmentationAdjacency, TouchingSegments) {
  PointSet a, b, c;
  for (int k = 0; k < 10; ++k) {
    a.emplace_back(0.01 * k, 0, 0);
    b.emplace_back(0.1 + 0.01 * k, 0, 0);
    c.emplace_back(5 + 0.01 * k, 0, 0);
  }
  BinaryMatrix adj = segmentation_adjacency({a, b, c}, 3);
  EXPECT_TRUE(adj(0, 1));
  EXPECT_FALSE(adj(0, 2));
  EXPECT_FALSE(adj(1, 2));
}

TEST(Evaluate, SelfComparison) {
  for (const auto& spec : shape_families()) {
    ChainComplex c = generate_gt(spec);
    auto r = evaluate(c, c);
    EXPECT_EQ(r.patch.f, 1.0) << to_string(spec);
    EXPECT_EQ(r.curve.f, 1.0);
    EXPECT_EQ(r.corner.f, 1.0);
    EXPECT_EQ(r.topology_error_fe + r.topology_error_ev + r.topology_error_fv + r.topology_error_ff, 0.0);
    EXPECT_EQ(r.validity_ratio, 1.0);
  }
}
