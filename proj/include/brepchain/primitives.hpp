#pragma once

// Typed geometric primitives for curves and patches, their parameterization,
// sampling and closest-point projection.

#include "brepchain/types.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace brepchain {

enum class CurveType { Line = 0, Circle = 1, BSpline = 2, Ellipse = 3 };
enum class PatchType { Plane = 0, Cylinder = 1, Torus = 2, BSpline = 3, Cone = 4, Sphere = 5 };

inline constexpr int kCurveTypeCount = 4;
inline constexpr int kPatchTypeCount = 6;

std::string_view to_string(CurveType type);
std::string_view to_string(PatchType type);
std::optional<CurveType> parse_curve_type(std::string_view name);
std::optional<PatchType> parse_patch_type(std::string_view name);

// ---------------------------------------------------------------------------
// Surfaces. Each shape has a natural (u, v) parameterization; a Surface couples
// a shape with the rectangular parameter domain that the patch occupies.
//
//   Plane     u, v  : coordinates along e1, e2 from origin
//   Sphere    u = longitude around axis (from ref), v = latitude in [-pi/2, pi/2]
//   Cylinder  u = angle around axis (from ref),    v = height along axis
//   Cone      u = angle around axis (from ref),    v = height from apex (> 0)
//   Torus     u = angle around axis (from ref),    v = tube angle
//   Spline    u, v in [0, 1]
// ---------------------------------------------------------------------------

struct Plane {
  Vec3 origin = Vec3::Zero();
  Vec3 e1 = Vec3::UnitX();
  Vec3 e2 = Vec3::UnitY();
  Vec3 normal() const { return e1.cross(e2).normalized(); }
  double offset() const { return normal().dot(origin); }
};

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  Vec3 axis = Vec3::UnitZ();
  Vec3 ref = Vec3::UnitX();
};

struct Cylinder {
  Vec3 point = Vec3::Zero();  // any point on the axis
  Vec3 axis = Vec3::UnitZ();
  Vec3 ref = Vec3::UnitX();
  double radius = 1.0;
};

struct Cone {
  Vec3 apex = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();  // opens towards +axis
  Vec3 ref = Vec3::UnitX();
  double half_angle = 0.5;
};

struct Torus {
  Vec3 center = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
  Vec3 ref = Vec3::UnitX();
  double major_radius = 1.0;
  double minor_radius = 0.25;
};

/// Tensor-product cubic B-spline. Non-periodic directions are clamped (with
/// four control points this is a single Bezier span); a periodic u direction
/// uses uniform periodic knots.
struct SplineSurface {
  int nu = 4;
  int nv = 4;
  bool u_periodic = false;
  std::vector<Vec3> control;  // row-major, index iu * nv + iv
  const Vec3& at(int iu, int iv) const { return control[static_cast<size_t>(iu * nv + iv)]; }
};

using SurfaceShape = std::variant<Plane, Sphere, Cylinder, Cone, Torus, SplineSurface>;

struct ParamBox {
  double u0 = 0.0, u1 = 1.0, v0 = 0.0, v1 = 1.0;
};

struct Surface {
  SurfaceShape shape;
  ParamBox domain;
  bool u_closed = false;
};

PatchType patch_type_of(const SurfaceShape& shape);

Vec3 evaluate(const Surface& s, double u, double v);
/// Evaluates with (s, t) in [0, 1] mapped onto the domain.
Vec3 evaluate_normalized(const Surface& s, double su, double tv);
void derivatives(const Surface& s, double u, double v, Vec3& p, Vec3& du, Vec3& dv);
Vec3 surface_normal(const Surface& s, double u, double v);

/// Normalized grid parameter of index k along an axis with `side` samples.
double grid_parameter(int k, int side, bool periodic);

/// side x side samples, row-major by u. A u-closed surface omits the duplicated
/// seam row.
std::vector<Vec3> sample_grid(const Surface& s, int side = kPatchSide);

// ---------------------------------------------------------------------------
// Curves.
//   Line     t = arc length from origin along the unit direction
//   Circle   t = angle from ref
//   Ellipse  t = eccentric angle from major_dir
//   Spline   t in [0, 1]
// ---------------------------------------------------------------------------

struct Line {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
};

struct Circle {
  Vec3 center = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  Vec3 ref = Vec3::UnitX();
  double radius = 1.0;
};

struct Ellipse {
  Vec3 center = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  Vec3 major_dir = Vec3::UnitX();
  double major_radius = 1.0;
  double minor_radius = 0.5;
};

/// Cubic B-spline curve: clamped when open, uniform periodic when closed.
struct SplineCurve {
  std::vector<Vec3> control;
  bool periodic = false;
};

using CurveShape = std::variant<Line, Circle, Ellipse, SplineCurve>;

struct Curve {
  CurveShape shape;
  double t0 = 0.0;
  double t1 = 1.0;
  bool closed = false;
};

CurveType curve_type_of(const CurveShape& shape);

Vec3 evaluate(const Curve& c, double t);
Vec3 curve_tangent(const Curve& c, double t);
/// n samples; closed curves omit the duplicated endpoint.
std::vector<Vec3> sample_curve(const Curve& c, int n = kCurveSamples);

// ---------------------------------------------------------------------------
// B-spline basis helpers (shared by evaluation and least-squares fitting).
// ---------------------------------------------------------------------------

/// Nonzero basis values for parameter t in [0, 1]; writes the first control
/// index into `first` and 4 values (and optional first derivatives).
void cubic_basis(int count, bool periodic, double t, int& first, double values[4],
                 double derivs[4] = nullptr);

// ---------------------------------------------------------------------------
// Projection.
// ---------------------------------------------------------------------------

struct SurfaceProjection {
  Vec3 foot = Vec3::Zero();
  double u = 0.0;
  double v = 0.0;
  double distance = 0.0;
};

struct CurveProjection {
  Vec3 foot = Vec3::Zero();
  double t = 0.0;
  double distance = 0.0;
};

/// Parameters of the closest point on the unbounded analytic shape, before
/// any domain wrapping. Returns false for splines.
bool surface_parameters(const Surface& s, const Vec3& x, double& u, double& v);

/// Closest point on the bounded patch (shape restricted to its domain).
SurfaceProjection project(const Surface& s, const Vec3& x);
/// Closest point on the bounded curve (restricted to [t0, t1] when open).
CurveProjection project(const Curve& c, const Vec3& x);

/// Closest point on the triangulated sample grid; (u, v) are normalized grid
/// parameters in [0, 1].
SurfaceProjection project_to_grid(std::span<const Vec3> grid, bool u_closed, const Vec3& x);
/// Closest point on the polyline through curve samples; t is normalized.
CurveProjection project_to_polyline(std::span<const Vec3> samples, bool closed, const Vec3& x);

/// Closest point of a triangle to x.
Vec3 closest_point_on_triangle(const Vec3& x, const Vec3& a, const Vec3& b, const Vec3& c);

/// Any unit vector perpendicular to n.
Vec3 any_perpendicular(const Vec3& n);

}  // namespace brepchain
