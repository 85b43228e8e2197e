#pragma once

// Primitive fitting, topology-driven axis cues, geometric refinement of a
// solved complex and validity assessment.

#include "brepchain/complex.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace brepchain {

struct PatchProjection {
  Vec3 foot = Vec3::Zero();
  double distance = 0.0;
};

/// Closed-form for analytic primitives; splines use seeded Newton refinement;
/// a bare sample grid is treated as its triangulation.
PatchProjection project_point_to_patch(const Vec3& x, const PatchGeometry& patch);

/// Closest point on a curve's primitive, or on its sample polyline.
Vec3 project_point_to_curve(const Vec3& x, const CurveGeometry& curve);

struct AxisConstraint {
  Vec3 direction = Vec3::UnitZ();
  /// When set the axis must also pass through this point.
  std::optional<Vec3> point;
};

/// Weighted targets for one fit.
struct FittingProblem {
  PointSet points;
  std::vector<double> weights;
  /// Optional unoriented normals, one per point.
  PointSet normals;
  std::optional<AxisConstraint> axis;
  /// Per point: whether it bounds the fitted parameter domain. Stabilization
  /// targets usually do not.
  std::vector<std::uint8_t> bounds;

  void add(std::span<const Vec3> pts, double weight, bool bounds_domain = true);
  double total_weight() const;
};

struct SurfaceFit {
  Surface surface;
  double rms = 0.0;  // weighted root-mean-square distance
  bool converged = true;
};

struct CurveFit {
  Curve curve;
  double rms = 0.0;
  bool converged = true;
};

struct FitOptions {
  int max_iterations = 100;
  /// Normals from k nearest neighbours when the problem carries none.
  int normal_neighbors = 16;
};

/// Weighted least-squares surface fit. The returned surface's domain is the
/// bounding box of the targets' parameters. `previous`, when given, supplies
/// the parameter frame (reference directions) and, for splines, the initial
/// parameterization. Throws FitError on a degenerate configuration.
SurfaceFit fit_surface(PatchType kind, const FittingProblem& problem, bool u_closed = false,
                       const Surface* previous = nullptr, const FitOptions& options = {});

/// Weighted least-squares curve fit; domain from the targets' parameters.
CurveFit fit_curve(CurveType kind, const FittingProblem& problem, bool closed, const Curve* previous = nullptr,
                   const FitOptions& options = {});

/// Unoriented normals from principal component analysis of k neighbours.
PointSet estimate_normals(std::span<const Vec3> points, int k = 16);

struct AxisCue {
  std::optional<AxisConstraint> constraint;
  std::string warning;
};

/// Axis constraint for a cylinder or cone face derived from the primitives of
/// its boundary lines and circles.
AxisCue axis_cues(const ChainComplex& c, int face);

/// For each patch, the input points whose closest patch it is, dropping
/// points farther than `threshold`. Ties go to the lower patch index.
std::vector<std::vector<int>> assign_points_to_patches(std::span<const Vec3> points,
                                                       const std::vector<PatchGeometry>& patches,
                                                       double threshold = 0.02);

struct RefineOptions {
  int k1 = 3;
  int k2 = 5;
  double point_weight = 1.0;
  double adjacency_weight = 5.0;
  double stabilization_weight = 0.1;
  double assignment_threshold = 0.02;
  bool use_axis_cues = true;
  FitOptions fit;
};

struct RefineReport {
  /// Global energy after initialization and after every sub-fit. Within a
  /// stage it is non-increasing by construction: a sub-fit that would raise
  /// it is rejected. energy[stage2_begin] follows the conversion to typed
  /// primitives, which is not guarded.
  std::vector<double> energy;
  std::size_t stage2_begin = 0;
  /// Sub-fits rejected by the energy guard.
  int rejected = 0;
  /// Elements whose fit failed or was rejected, e.g. "patch 2: ...".
  std::vector<std::string> flags;
  std::vector<std::string> warnings;
};

struct RefineResult {
  ChainComplex complex;
  RefineReport report;
};

/// Two-stage refinement: K1 rounds with spline patches (plane and sphere stay
/// analytic), conversion to typed primitives, then K2 typed rounds.
/// Topology is never modified. K1 = K2 = 0 returns the input unchanged.
RefineResult refine(const ChainComplex& c, std::span<const Vec3> points, const RefineOptions& options = {});

struct Violation {
  char kind[3] = {0, 0, 0};  // "EV", "FV" or "FE"
  int higher = -1;           // edge (EV) or face (FV, FE)
  int lower = -1;            // vertex (EV, FV) or edge (FE)
  double distance = 0.0;
};

struct ValidityResult {
  double ratio = 1.0;
  int pairs = 0;
  std::vector<Violation> violations;
};

/// Mean distance from the lower element's samples to the higher element's
/// geometry for every adjacent pair; pairs above `threshold` are violations.
ValidityResult validity_assessment(const ChainComplex& c, double threshold = 0.03);

}  // namespace brepchain
