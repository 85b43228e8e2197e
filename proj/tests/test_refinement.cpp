#include "brepchain/extraction.hpp"
#include "brepchain/refinement.hpp"
#include "brepchain/synth.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace brepchain;

namespace {

double segment_distance(const Vec3& x, const Vec3& a, const Vec3& b) {
  Vec3 d = b - a;
  double t = std::clamp((x - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  return (x - (a + t * d)).norm();
}

CurveGeometry curve_of(const Curve& c) {
  CurveGeometry g;
  g.type = curve_type_of(c.shape);
  g.closed = c.closed;
  g.samples = sample_curve(c);
  g.primitive = c;
  return g;
}

PatchGeometry patch_of(const Surface& s) {
  PatchGeometry g;
  g.type = patch_type_of(s.shape);
  g.u_closed = s.u_closed;
  g.grid = sample_grid(s);
  g.primitive = s;
  return g;
}

// Quarter cylinder around the z axis through (0.5, 0.5) bounded by two
// vertical lines and two quarter arcs.
ChainComplex quarter_cylinder(double line_tilt_deg = 0.0) {
  const Vec3 c(0.5, 0.5, 0.0);
  const double r = 0.3, z0 = 0.2, z1 = 0.8;
  Surface side{Cylinder{c, Vec3::UnitZ(), Vec3::UnitX(), r}, {0.0, M_PI / 2, z0, z1}, false};
  Vec3 p00 = c + Vec3(r, 0, z0), p01 = c + Vec3(r, 0, z1), p10 = c + Vec3(0, r, z0), p11 = c + Vec3(0, r, z1);
  const double tilt = line_tilt_deg * M_PI / 180.0;
  Vec3 dir(std::sin(tilt), 0, std::cos(tilt));
  Curve l0{Line{p00, dir}, 0.0, z1 - z0, false};
  Curve l1{Line{p10, dir}, 0.0, z1 - z0, false};
  Curve a0{Circle{Vec3(0.5, 0.5, z0), Vec3::UnitZ(), Vec3::UnitX(), r}, 0.0, M_PI / 2, false};
  Curve a1{Circle{Vec3(0.5, 0.5, z1), Vec3::UnitZ(), Vec3::UnitX(), r}, 0.0, M_PI / 2, false};
  ChainComplex q = make_complex({{p00}, {p01}, {p10}, {p11}}, {curve_of(l0), curve_of(l1), curve_of(a0), curve_of(a1)},
                                {patch_of(side)});
  for (int e = 0; e < 4; ++e) q.fe.set(0, e, true);
  return q;
}

std::vector<Vec3> noisy(std::vector<Vec3> pts, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, sigma);
  for (auto& p : pts) p += Vec3(g(rng), g(rng), g(rng));
  return pts;
}

std::vector<Vec3> sphere_points(const Vec3& c, double r, int n, std::mt19937_64& rng) {
  std::vector<Vec3> p;
  for (int k = 0; k < n; ++k) p.push_back(c + r * oracle::random_unit(rng));
  return p;
}

std::vector<Vec3> cylinder_points(const Vec3& base, const Vec3& axis, double r, double h, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2 * M_PI), v(0.0, h);
  Vec3 e1 = any_perpendicular(axis), e2 = axis.cross(e1);
  std::vector<Vec3> p;
  for (int k = 0; k < n; ++k) {
    double a = u(rng);
    p.push_back(base + v(rng) * axis + r * (std::cos(a) * e1 + std::sin(a) * e2));
  }
  return p;
}

}  // namespace

TEST(FitSurface, ExactPlane) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FittingProblem p;
  std::vector<Vec3> pts;
  for (int k = 0; k < 100; ++k) pts.emplace_back(u(rng), u(rng), 0.5);
  p.add(pts, 1.0);
  SurfaceFit f = fit_surface(PatchType::Plane, p);
  const auto& pl = std::get<Plane>(f.surface.shape);
  EXPECT_NEAR(oracle::angle_deg(pl.normal(), Vec3::UnitZ()), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(pl.offset()), 0.5, 1e-12);
  EXPECT_LT(f.rms, 1e-12);
}

TEST(FitSurface, DegeneratePlaneThrows) {
  FittingProblem p;
  std::vector<Vec3> pts(10, Vec3(0.5, 0.5, 0.5));
  p.add(pts, 1.0);
  EXPECT_THROW(fit_surface(PatchType::Plane, p), FitError);
}

TEST(FitSurface, NoisySphereMonteCarlo) {
  int good = 0;
  const Vec3 c(0.5, 0.5, 0.5);
  for (int trial = 0; trial < 100; ++trial) {
    std::mt19937_64 rng(1000 + trial);
    FittingProblem p;
    p.add(noisy(sphere_points(c, 0.3, 200, rng), 0.01, rng), 1.0);
    SurfaceFit f = fit_surface(PatchType::Sphere, p);
    const auto& s = std::get<Sphere>(f.surface.shape);
    good += (s.center - c).norm() <= 0.005 && std::abs(s.radius - 0.3) <= 0.005;
  }
  EXPECT_GE(good, 95);
}

TEST(FitSurface, CylinderWithAxisConstraintMonteCarlo) {
  int good = 0;
  const Vec3 axis = Vec3(1, 2, 2).normalized();
  for (int trial = 0; trial < 100; ++trial) {
    std::mt19937_64 rng(2000 + trial);
    FittingProblem p;
    Vec3 base = Vec3(0.5, 0.5, 0.5) - 0.3 * axis;
    p.add(noisy(cylinder_points(base, axis, 0.2, 0.6, 200, rng), 0.01, rng), 1.0);
    p.axis = AxisConstraint{axis, std::nullopt};
    SurfaceFit f = fit_surface(PatchType::Cylinder, p, true);
    const auto& cy = std::get<Cylinder>(f.surface.shape);
    EXPECT_LE(cy.axis.normalized().cross(axis).norm(), 1e-9);
    good += std::abs(cy.radius - 0.2) / 0.2 < 0.01;
  }
  EXPECT_GE(good, 95);
}

TEST(FitCurve, ExactLineAndCircle) {
  Curve circle{Circle{Vec3(0.5, 0.5, 0.3), Vec3(0, 1, 1).normalized(), Vec3::UnitX(), 0.25}, 0.0, 2 * M_PI, true};
  FittingProblem p;
  p.add(sample_curve(circle), 1.0);
  CurveFit f = fit_curve(CurveType::Circle, p, true);
  const auto& c = std::get<Circle>(f.curve.shape);
  EXPECT_NEAR(c.radius, 0.25, 1e-9);
  EXPECT_LT((c.center - Vec3(0.5, 0.5, 0.3)).norm(), 1e-9);
  EXPECT_LT(f.rms, 1e-9);

  FittingProblem q;
  q.add(sample_curve(Curve{Line{Vec3(0.1, 0.2, 0.3), Vec3(1, 1, 0).normalized()}, 0.0, 0.5, false}), 1.0);
  CurveFit g = fit_curve(CurveType::Line, q, false);
  EXPECT_NEAR(oracle::angle_deg(std::get<Line>(g.curve.shape).direction, Vec3(1, 1, 0)), 0.0, 1e-6);
  EXPECT_LT(g.rms, 1e-9);
}

TEST(AxisCues, CappedCylinderUsesCircleNormal) {
  ChainComplex c = generate_gt({ShapeKind::CappedCylinder});
  AxisCue cue = axis_cues(c, 0);
  ASSERT_TRUE(cue.constraint.has_value());
  EXPECT_LT(oracle::angle_deg(cue.constraint->direction, Vec3::UnitZ()), 1e-9);
}

TEST(AxisCues, QuarterCylinderParallelToLines) {
  AxisCue cue = axis_cues(quarter_cylinder(), 0);
  ASSERT_TRUE(cue.constraint.has_value());
  EXPECT_LT(oracle::angle_deg(cue.constraint->direction, Vec3::UnitZ()), 1e-9);
}

TEST(AxisCues, ContradictoryCuesGiveWarning) {
  AxisCue cue = axis_cues(quarter_cylinder(20.0), 0);
  EXPECT_FALSE(cue.constraint.has_value());
  EXPECT_FALSE(cue.warning.empty());
}

TEST(AxisCues, PlaneFaceHasNone) {
  ChainComplex c = generate_gt({ShapeKind::CappedCylinder});
  AxisCue cue = axis_cues(c, 1);
  EXPECT_FALSE(cue.constraint.has_value());
  EXPECT_TRUE(cue.warning.empty());
  EXPECT_FALSE(axis_cues(generate_gt({ShapeKind::Cube}), 0).constraint.has_value());
}

TEST(Assignment, NearestWithinThreshold) {
  Surface a{Plane{Vec3(0, 0, 0.25), Vec3::UnitX(), Vec3::UnitY()}, {0, 1, 0, 1}, false};
  Surface b{Plane{Vec3(0, 0, 0.75), Vec3::UnitX(), Vec3::UnitY()}, {0, 1, 0, 1}, false};
  std::vector<PatchGeometry> patches{patch_of(a), patch_of(b)};
  std::vector<Vec3> pts{Vec3(0.5, 0.5, 0.255), Vec3(0.5, 0.5, 0.30), Vec3(0.5, 0.5, 0.5)};
  auto r = assign_points_to_patches(pts, patches, 0.02);
  EXPECT_EQ(r[0], std::vector<int>{0});
  EXPECT_TRUE(r[1].empty());
  // The middle point is equidistant; the lower index wins.
  auto wide = assign_points_to_patches(pts, patches, 0.5);
  EXPECT_EQ(wide[0], (std::vector<int>{0, 1, 2}));
  EXPECT_TRUE(wide[1].empty());
}

TEST(Projection, AnalyticCases) {
  Surface plane{Plane{}, {-1, 1, -1, 1}, false};
  auto pr = project_point_to_patch(Vec3(0, 0, 1), patch_of(plane));
  EXPECT_NEAR(pr.distance, 1.0, 1e-15);
  EXPECT_LT(pr.foot.norm(), 1e-15);
  Surface cyl{Cylinder{Vec3::Zero(), Vec3::UnitZ(), Vec3::UnitX(), 0.3}, {0, 2 * M_PI, -1, 1}, true};
  EXPECT_NEAR(project_point_to_patch(Vec3(0, 0.3 + 0.04, 0.1), patch_of(cyl)).distance, 0.04, 1e-14);
}

TEST(Projection, SplineAgainstDenseSampling) {
  SplineSurface sp;
  sp.nu = sp.nv = 4;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      sp.control.emplace_back(0.2 + 0.2 * i, 0.2 + 0.2 * j, 0.4 + 0.15 * std::sin(1.7 * i + 0.9 * j));
  Surface s{sp, {0, 1, 0, 1}, false};
  PatchGeometry g = patch_of(s);
  std::mt19937_64 rng(8);
  for (int q = 0; q < 2; ++q) {
    Vec3 x = oracle::random_points(rng, 1)[0] * 0.6 + Vec3(0.2, 0.2, 0.2);
    double dense = 1e9;
    const int n = 1000;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        dense = std::min(dense, (evaluate_normalized(s, i / (n - 1.0), j / (n - 1.0)) - x).squaredNorm());
    dense = std::sqrt(dense);
    double d = project_point_to_patch(x, g).distance;
    EXPECT_NEAR(d, dense, 1e-4);
    for (const auto& p : g.grid) EXPECT_LE(d, (p - x).norm() + 1e-12);
  }
}

TEST(Projection, NeverFartherThanGridSamples) {
  std::mt19937_64 rng(4);
  for (const auto& spec : shape_families()) {
    ChainComplex c = generate_gt(spec);
    for (const auto& f : c.faces)
      for (const auto& x : oracle::random_points(rng, 20)) {
        double d = project_point_to_patch(x, f).distance;
        for (const auto& p : f.grid) EXPECT_LE(d, (p - x).norm() + 1e-12);
      }
  }
}

TEST(Refine, ZeroIterationsIsIdentity) {
  ChainComplex c = generate_gt({ShapeKind::Cube});
  CorruptionParams cp;
  cp.sigma_g = 0.01;
  cp.seed = 2;
  ChainComplex in = extract_complex(corrupt(c, cp)).complex;
  PointCloud pc = sample_point_cloud(c, 2000, 0.0, {}, 1);
  RefineOptions o;
  o.k1 = o.k2 = 0;
  RefineResult r = refine(in, pc.points, o);
  ASSERT_EQ(r.complex.num_faces(), in.num_faces());
  for (int i = 0; i < in.num_faces(); ++i) EXPECT_EQ(r.complex.faces[i].grid, in.faces[i].grid);
  for (int i = 0; i < in.num_edges(); ++i) EXPECT_EQ(r.complex.edges[i].samples, in.edges[i].samples);
  for (int i = 0; i < in.num_vertices(); ++i) EXPECT_EQ(r.complex.vertices[i].point, in.vertices[i].point);
}

TEST(Refine, CubeFromPerturbedGeometry) {
  ChainComplex gt = generate_gt({ShapeKind::Cube});
  CorruptionParams cp;
  cp.sigma_g = 0.01;
  cp.seed = 6;
  ExtractionResult ex = extract_complex(corrupt(gt, cp));
  PointCloud pc = sample_point_cloud(gt, 4000, 0.0, {}, 3);
  RefineResult r = refine(ex.complex, pc.points);
  EXPECT_EQ(r.complex.fe, ex.complex.fe);
  EXPECT_EQ(r.complex.ev, ex.complex.ev);
  EXPECT_EQ(r.complex.fv, ex.complex.fv);
  // Extracted faces keep their source index, which for real elements is the
  // ground-truth label of the sampled points.
  for (int i = 0; i < r.complex.num_faces(); ++i) {
    const auto& f = r.complex.faces[static_cast<size_t>(i)];
    ASSERT_TRUE(f.primitive.has_value());
    EXPECT_EQ(f.type, PatchType::Plane);
    double worst = 0.0;
    for (size_t q = 0; q < pc.points.size(); ++q)
      if (pc.labels[q] == ex.patch_source[static_cast<size_t>(i)])
        worst = std::max(worst, project_point_to_patch(pc.points[q], f).distance);
    EXPECT_LT(worst, 1e-3);
  }
  for (int k = 0; k < r.complex.num_vertices(); ++k) {
    double best = 1e9;
    for (const auto& v : gt.vertices) best = std::min(best, (v.point - r.complex.vertices[k].point).norm());
    EXPECT_LT(best, 1e-3);
  }
  EXPECT_EQ(validity_assessment(r.complex).ratio, 1.0);
}

TEST(Refine, CappedCylinderWithNoise) {
  ChainComplex gt = generate_gt({ShapeKind::CappedCylinder});
  for (std::uint64_t seed : {1u, 2u}) {
    CorruptionParams cp;
    cp.sigma_g = 0.01;
    cp.seed = seed;
    ExtractionResult ex = extract_complex(corrupt(gt, cp));
    PointCloud pc = sample_point_cloud(gt, 4000, 0.01, {}, seed);
    RefineResult r = refine(ex.complex, pc.points);
    int cyl = -1;
    for (int i = 0; i < r.complex.num_faces(); ++i)
      if (r.complex.faces[i].type == PatchType::Cylinder) cyl = i;
    ASSERT_GE(cyl, 0);
    const auto& cy = std::get<Cylinder>(r.complex.faces[static_cast<size_t>(cyl)].primitive->shape);
    EXPECT_LT(std::abs(cy.radius - 0.3) / 0.3, 0.02);
    for (const auto& e : r.complex.edges) {
      ASSERT_TRUE(e.primitive.has_value());
      const auto& circle = std::get<Circle>(e.primitive->shape);
      EXPECT_LT(oracle::angle_deg(circle.normal, cy.axis), 1.0);
      // Concentric: the circle center lies on the axis to within the angle
      // tolerance over the cylinder's extent.
      Vec3 off = circle.center - cy.point;
      double radial = (off - off.dot(cy.axis.normalized()) * cy.axis.normalized()).norm();
      EXPECT_LT(radial, std::tan(M_PI / 180.0) * 0.6);
      EXPECT_TRUE(e.closed);
      double median = (e.samples[1] - e.samples[0]).norm();
      EXPECT_LE((e.samples.back() - e.samples.front()).norm(), 2 * median);
    }
  }
}

TEST(Validity, ExactShapesAreValid) {
  for (const auto& spec : shape_families()) {
    auto v = validity_assessment(generate_gt(spec));
    EXPECT_EQ(v.ratio, 1.0) << to_string(spec);
    EXPECT_TRUE(v.violations.empty());
  }
}

TEST(Validity, DisplacedCubeCorner) {
  ChainComplex c = generate_gt({ShapeKind::Cube});
  const int moved = 0;
  const Vec3 orig = c.vertices[moved].point;
  const Vec3 outward = (orig - Vec3(0.5, 0.5, 0.5)).normalized();
  c.vertices[moved].point = orig + 0.1 * outward;
  auto v = validity_assessment(c, 0.03);

  // Oracle: direct count over the incidences with elementary distances.
  int pairs = 0, bad = 0;
  for (int e = 0; e < c.num_edges(); ++e)
    for (int k = 0; k < c.num_vertices(); ++k) {
      if (!c.ev(e, k)) continue;
      ++pairs;
      const auto& s = c.edges[e].samples;
      bad += segment_distance(c.vertices[k].point, s.front(), s.back()) > 0.03;
    }
  for (int f = 0; f < c.num_faces(); ++f)
    for (int k = 0; k < c.num_vertices(); ++k) {
      if (!c.fv(f, k)) continue;
      ++pairs;
      // Axis-aligned square faces: clamp into the face's bounding box.
      Vec3 lo = c.faces[f].grid.front().cwiseMin(c.faces[f].grid.back());
      Vec3 hi = c.faces[f].grid.front().cwiseMax(c.faces[f].grid.back());
      Vec3 p = c.vertices[k].point;
      bad += (p - p.cwiseMax(lo).cwiseMin(hi)).norm() > 0.03;
    }
  pairs += c.fe.count();  // edges lie on their faces
  EXPECT_EQ(bad, 6);
  EXPECT_EQ(v.pairs, pairs);
  EXPECT_EQ(static_cast<int>(v.violations.size()), bad);
  EXPECT_DOUBLE_EQ(v.ratio, static_cast<double>(pairs - bad) / pairs);
  for (const auto& viol : v.violations) EXPECT_EQ(viol.lower, moved);
}
