#include "brepchain/extraction.hpp"
#include "brepchain/matching.hpp"
#include "brepchain/synth.hpp"
#include "oracles.hpp"
#include "random_models.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace brepchain;

namespace {

std::vector<Vec3> line_samples(const Vec3& a, const Vec3& b) {
  std::vector<Vec3> s;
  for (int k = 0; k < kCurveSamples; ++k) s.push_back(a + (b - a) * (k / 29.0));
  return s;
}

SoftCurve soft_line(const Vec3& a, const Vec3& b, double validness) {
  SoftCurve c;
  c.validness = validness;
  c.openness = 1.0;
  c.type_probs = {1, 0, 0, 0};
  c.samples = line_samples(a, b);
  return c;
}

ProbabilisticComplex sphere_only(double validness) {
  ChainComplex s = generate_gt({ShapeKind::Sphere});
  ProbabilisticComplex p = to_probabilistic(s);
  p.patches[0].validness = validness;
  return p;
}

// Appends a curve copied from `src` (samples shifted by `shift`) together with
// its incidence column/row.
int append_curve_copy(ProbabilisticComplex& p, int src, const Vec3& shift, double validness) {
  SoftCurve c = p.curves[static_cast<size_t>(src)];
  for (auto& q : c.samples) q += shift;
  c.validness = validness;
  p.curves.push_back(c);
  const int n = p.num_curves();
  p.fe.conservativeResize(Eigen::NoChange, n);
  p.fe.col(n - 1) = p.fe.col(src);
  p.ev.conservativeResize(n, Eigen::NoChange);
  p.ev.row(n - 1) = p.ev.row(src);
  return n - 1;
}

}  // namespace

TEST(Combine, Products) {
  ProbabilisticComplex p = to_probabilistic(generate_gt({ShapeKind::Cube}));
  ProbabilisticComplex same = combine_probabilities(p);
  EXPECT_EQ(same.fe, p.fe);
  EXPECT_EQ(same.ev, p.ev);
  EXPECT_EQ(same.fv, p.fv);

  int edge = -1;
  for (int j = 0; j < p.num_curves() && edge < 0; ++j)
    if (p.fe(0, j) == 1.0) edge = j;
  p.fe(0, edge) = 0.8;
  p.patches[0].validness = 0.5;
  p.curves[static_cast<size_t>(edge)].validness = 0.5;
  ProbabilisticComplex c = combine_probabilities(p);
  EXPECT_NEAR(c.fe(0, edge), 0.2, 1e-15);

  p.patches[0].validness = 0.0;
  c = combine_probabilities(p);
  EXPECT_EQ(c.fe.row(0).norm(), 0.0);
  EXPECT_EQ(c.fv.row(0).norm(), 0.0);
}

TEST(Nms, NoDuplicatesIsIdentity) {
  ProbabilisticComplex p = to_probabilistic(generate_gt({ShapeKind::LBracket}));
  ProbabilisticComplex q = nms(p);
  EXPECT_EQ(q.fe, p.fe);
  EXPECT_EQ(q.ev, p.ev);
  EXPECT_EQ(q.fv, p.fv);
  for (int i = 0; i < p.num_curves(); ++i) EXPECT_EQ(q.curves[i].validness, p.curves[i].validness);
  for (int i = 0; i < p.num_patches(); ++i) EXPECT_EQ(q.patches[i].validness, p.patches[i].validness);
}

TEST(Nms, CoincidentCurvesSuppressed) {
  ProbabilisticComplex p = to_probabilistic(generate_gt({ShapeKind::Cube}));
  int dup = append_curve_copy(p, 0, Vec3::Zero(), 0.9);
  ProbabilisticComplex q = nms(p);
  EXPECT_EQ(q.curves[static_cast<size_t>(dup)].validness, 0.0);
  EXPECT_EQ(q.curves[0].validness, 1.0);
  EXPECT_EQ(q.fe.col(dup).norm(), 0.0);
  EXPECT_EQ(q.ev.row(dup).norm(), 0.0);
}

TEST(Nms, DifferentTopologyRetained) {
  ProbabilisticComplex p = to_probabilistic(generate_gt({ShapeKind::Cube}));
  int dup = append_curve_copy(p, 0, Vec3::Zero(), 0.9);
  int face = -1;
  for (int i = 0; i < p.num_patches() && face < 0; ++i)
    if (p.fe(i, dup) == 1.0) face = i;
  p.fe(face, dup) = 0.2;  // rounds to 0, unlike the original
  ProbabilisticComplex q = nms(p);
  EXPECT_EQ(q.curves[static_cast<size_t>(dup)].validness, 0.9);
  EXPECT_EQ(q.curves[0].validness, 1.0);
}

TEST(Nms, DistantCopyRetained) {
  ProbabilisticComplex p = to_probabilistic(generate_gt({ShapeKind::Cube}));
  // Cube edges are axis-aligned, so a diagonal shift moves the copy off its line.
  int dup = append_curve_copy(p, 0, Vec3(0.2, 0.2, 0.2), 0.9);
  EXPECT_EQ(nms(p).curves[static_cast<size_t>(dup)].validness, 0.9);
}

TEST(Proximity, CornerToCurveFitness) {
  ProbabilisticComplex p;
  p.curves.push_back(soft_line(Vec3(0, 0, 0), Vec3(1, 0, 0), 1.0));
  auto samples = p.curves[0].samples;
  p.corners.push_back({1.0, samples[5]});
  p.corners.push_back({1.0, samples[5] + Vec3(0, 0.1, 0)});
  p.corners.push_back({1.0, samples[5] + Vec3(0, 0.5, 0)});
  p.fe.resize(0, 1);
  p.ev = Eigen::MatrixXd::Zero(1, 3);
  p.fv.resize(0, 3);
  ProximityMatrices s = proximity_matrices(p);
  EXPECT_EQ(s.ev(0, 0), 1.0);
  EXPECT_NEAR(s.ev(0, 1), std::exp(-1.0), 1e-14);
  EXPECT_LT(s.ev(0, 2), 1e-10);
}

TEST(BuildIlp, SphereOnly) {
  ProbabilisticComplex p = combine_probabilities(sphere_only(0.9));
  BuiltIlp b = build_ilp(p, proximity_matrices(p));
  ASSERT_EQ(b.model.num_variables(), 1);
  const Variable& f = b.model.variables()[0];
  EXPECT_EQ(f.kind, VarKind::F);
  EXPECT_NEAR(f.objective, 10 * 0.5 * (2 * 0.9 - 1), 1e-15);
  IlpSolution sol = solve_ilp(b.model);
  EXPECT_EQ(sol.x[0], 1);
  EXPECT_NEAR(sol.objective, 4.0, 1e-14);
  EXPECT_EQ(sol.status, SolveStatus::Optimal);
}

TEST(BuildIlp, EmptyCandidates) {
  ProbabilisticComplex p = sphere_only(0.2);
  try {
    build_ilp(p, proximity_matrices(p));
    FAIL() << "expected failure";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.kind(), SolverFailure::EmptyCandidates);
    EXPECT_NE(std::string(e.what()).find("relax"), std::string::npos);
  }
}

TEST(BuildIlp, EdgeWithoutFaces) {
  ProbabilisticComplex p;
  p.curves.push_back(soft_line(Vec3(0.2, 0.2, 0.2), Vec3(0.8, 0.2, 0.2), 0.9));
  p.fe.resize(0, 1);
  p.ev.resize(1, 0);
  p.fv.resize(0, 0);
  BuiltIlp b = build_ilp(p, proximity_matrices(p));
  int e = b.model.find(VarKind::E, 0);
  ASSERT_GE(e, 0);
  // Oracle: no assignment with E = 1 is feasible.
  const int n = b.model.num_variables();
  for (std::uint64_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<std::uint8_t> x(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) x[static_cast<size_t>(v)] = (mask >> v) & 1u;
    if (x[static_cast<size_t>(e)]) EXPECT_FALSE(oracle::feasible(b.model, x));
  }
  IlpSolution sol = solve_ilp(b.model);
  EXPECT_EQ(sol.x[static_cast<size_t>(e)], 0);
}

TEST(BuildIlp, CappedCylinderOptimumMatchesEnumeration) {
  ChainComplex gt = generate_gt({ShapeKind::CappedCylinder});
  CorruptionParams cp;
  cp.beta = 0.1;
  cp.topology_beta = 0.1;
  cp.seed = 3;
  ProbabilisticComplex p = combine_probabilities(corrupt(gt, cp));
  BuiltIlp b = build_ilp(p, proximity_matrices(p));
  ASSERT_LE(b.model.num_variables(), 20);
  auto best = oracle::brute_ilp(b.model);
  ASSERT_TRUE(best.has_value());
  IlpSolution sol = solve_ilp(b.model);
  EXPECT_NEAR(sol.objective, *best, 1e-12);
  ExtractionResult r = extract_complex(corrupt(gt, cp));
  EXPECT_EQ(r.complex.num_faces(), 3);
  EXPECT_EQ(r.complex.num_edges(), 2);
  EXPECT_EQ(r.complex.num_vertices(), 0);
  EXPECT_TRUE(is_valid_topology(r.complex));
  EXPECT_EQ(r.complex.fe, gt.fe);
}

TEST(SolveIlp, AllNegativeGivesZero) {
  IlpModel m;
  for (int v = 0; v < 5; ++v) m.add_variable(VarKind::F, v, -1, -1, -1.0 - v);
  m.add_constraint({{0, 1.0}, {1, 1.0}}, Sense::LessEqual, 1.0);
  IlpSolution sol = solve_ilp(m);
  for (auto b : sol.x) EXPECT_EQ(b, 0);
  EXPECT_EQ(sol.objective, 0.0);
}

TEST(SolveIlp, Infeasible) {
  IlpModel m;
  m.add_variable(VarKind::F, 0, -1, -1, 1.0);
  m.add_constraint({{0, 1.0}}, Sense::GreaterEqual, 2.0);
  try {
    solve_ilp(m);
    FAIL() << "expected failure";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.kind(), SolverFailure::Infeasible);
  }
}

TEST(SolveIlp, RandomModelsMatchEnumeration) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 150; ++trial) {
    IlpModel m = testing_models::generic_model(rng, 1 + trial % 14);
    auto best = oracle::brute_ilp(m);
    for (bool bnb : {false, true}) {
      SolveOptions o;
      o.force_branch_and_bound = bnb;
      if (!best) {
        EXPECT_THROW(solve_ilp(m, o), SolverError);
        continue;
      }
      IlpSolution sol = solve_ilp(m, o);
      EXPECT_EQ(sol.objective, *best) << "trial " << trial << " bnb " << bnb;
      EXPECT_TRUE(oracle::feasible(m, sol.x));
    }
  }
}

TEST(SolveIlp, ExtractionModelsMatchEnumeration) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = testing_models::soft_instance(rng, 16);
    const IlpModel& m = inst.built.model;
    auto best = oracle::brute_ilp(m);
    ASSERT_TRUE(best.has_value());  // all-zero is always feasible
    for (bool bnb : {false, true}) {
      SolveOptions o;
      o.force_branch_and_bound = bnb;
      IlpSolution sol = solve_ilp(m, o);
      EXPECT_EQ(sol.objective, *best);
      EXPECT_TRUE(oracle::feasible(m, sol.x));
      EXPECT_TRUE(testing_models::auxiliaries_exact(m, sol.x));
    }
  }
}

TEST(SolveIlp, LargerModelsBranchAndBoundAgreesWithEnumerationOfComponents) {
  // Extraction programs over two disjoint shapes: the solver decomposes
  // components, while forced branch and bound searches the whole program.
  ChainComplex gt = generate_gt({ShapeKind::Cube});
  CorruptionParams cp;
  cp.beta = 0.2;
  cp.topology_beta = 0.2;
  cp.seed = 17;
  ProbabilisticComplex p = combine_probabilities(corrupt(gt, cp));
  BuiltIlp b = build_ilp(p, proximity_matrices(p));
  SolveOptions bnb;
  bnb.force_branch_and_bound = true;
  IlpSolution a = solve_ilp(b.model), c = solve_ilp(b.model, bnb);
  EXPECT_NEAR(a.objective, c.objective, 1e-9);
  EXPECT_TRUE(oracle::feasible(b.model, a.x));
  EXPECT_TRUE(oracle::feasible(b.model, c.x));
}

TEST(Extract, MildCubeRecoversTopology) {
  ChainComplex gt = generate_gt({ShapeKind::Cube});
  CorruptionParams cp;
  cp.sigma_g = 0.005;
  cp.beta = 0.15;
  cp.topology_beta = 0.15;
  cp.seed = 5;
  ExtractionResult r = extract_complex(corrupt(gt, cp));
  EXPECT_TRUE(is_valid_topology(r.complex));
  Matching m = match_by_distance(r.complex, gt);
  EXPECT_EQ(topology_error(r.complex.fe, gt.fe, m.patches, m.curves), 0.0);
  EXPECT_EQ(topology_error(r.complex.ev, gt.ev, m.curves, m.corners), 0.0);
  EXPECT_EQ(topology_error(r.complex.fv, gt.fv, m.patches, m.corners), 0.0);
}

TEST(Extract, SphereOnly) {
  ExtractionResult r = extract_complex(sphere_only(0.9));
  EXPECT_EQ(r.complex.num_faces(), 1);
  EXPECT_EQ(r.complex.num_edges(), 0);
  EXPECT_TRUE(r.complex.faces[0].u_closed);
  EXPECT_TRUE(is_valid_topology(r.complex));
}

TEST(Extract, RedundantFaceRemoved) {
  ChainComplex gt = generate_gt({ShapeKind::Cube});
  ProbabilisticComplex p = to_probabilistic(gt);
  // A diagonal plane through edge 0, claimed by the prediction as a third face.
  const auto& e0 = gt.edges[0].samples;
  Vec3 a = e0.front(), b = e0.back();
  Vec3 dir = (b - a).normalized();
  Vec3 out = any_perpendicular(dir);
  SoftPatch extra;
  extra.validness = 0.7;
  extra.type_probs = {1, 0, 0, 0, 0, 0};
  for (int i = 0; i < kPatchSide; ++i)
    for (int j = 0; j < kPatchSide; ++j)
      extra.grid.push_back(a + (b - a) * (i / 9.0) + out * (0.3 * j / 9.0));
  p.patches.push_back(extra);
  const int nf = p.num_patches();
  p.fe.conservativeResize(nf, Eigen::NoChange);
  p.fe.row(nf - 1).setZero();
  p.fe(nf - 1, 0) = 0.7;
  p.fv.conservativeResize(nf, Eigen::NoChange);
  p.fv.row(nf - 1).setZero();
  ExtractionResult r = extract_complex(p);
  EXPECT_EQ(r.complex.num_faces(), 6);
  for (int src : r.patch_source) EXPECT_NE(src, nf - 1);
  EXPECT_EQ(r.complex.fe, gt.fe);
  EXPECT_TRUE(is_valid_topology(r.complex));
}

TEST(Extract, RetryWithRelaxedCutoff) {
  ExtractionResult r = extract_complex(sphere_only(0.2));
  EXPECT_TRUE(r.retried);
  EXPECT_EQ(r.cutoff_used, 0.1);
  // Validness 0.2 has a negative unary objective, so nothing is selected.
  EXPECT_EQ(r.complex.num_faces(), 0);
  ExtractionOptions o;
  o.retry = false;
  EXPECT_THROW(extract_complex(sphere_only(0.2), o), SolverError);
}

TEST(Extract, SpuriousCopiesAbsent) {
  for (const auto& spec : shape_families()) {
    ChainComplex gt = generate_gt(spec);
    CorruptionParams cp;
    cp.beta = 0.1;
    cp.topology_beta = 0.1;
    cp.spurious = 3;
    cp.far = 2;
    cp.seed = 41;
    ProbabilisticComplex p = corrupt(gt, cp);
    ExtractionResult r = extract_complex(p);
    for (int s : r.patch_source) EXPECT_LT(s, gt.num_faces()) << to_string(spec);
    for (int s : r.curve_source) EXPECT_LT(s, gt.num_edges()) << to_string(spec);
    for (int s : r.corner_source) EXPECT_LT(s, gt.num_vertices()) << to_string(spec);
    EXPECT_TRUE(is_valid_topology(r.complex));
  }
}
