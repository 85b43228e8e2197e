#include "fit_common.hpp"

#include <cmath>
#include <numbers>

namespace brepchain {

namespace {

constexpr double kCueToleranceDeg = 10.0;

std::optional<Line> as_line(const CurveGeometry& e) {
  if (e.primitive) {
    if (const auto* l = std::get_if<Line>(&e.primitive->shape)) return *l;
    return std::nullopt;
  }
  if (e.type != CurveType::Line || e.samples.size() < 2) return std::nullopt;
  std::vector<double> w(e.samples.size(), 1.0);
  auto pca = fit::weighted_pca(e.samples, w);
  return Line{pca.centroid, pca.largest().normalized()};
}

std::optional<Circle> as_circle(const CurveGeometry& e) {
  if (e.primitive) {
    if (const auto* c = std::get_if<Circle>(&e.primitive->shape)) return *c;
    return std::nullopt;
  }
  if (e.type != CurveType::Circle) return std::nullopt;
  FittingProblem p;
  p.add(e.samples, 1.0);
  try {
    auto f = fit_curve(CurveType::Circle, p, e.closed);
    return std::get<Circle>(f.curve.shape);
  } catch (const FitError&) {
    return std::nullopt;
  }
}

/// Sign-aligned mean of unit directions.
Vec3 mean_direction(const std::vector<Vec3>& dirs) {
  Vec3 s = Vec3::Zero();
  for (const auto& d : dirs) s += d.dot(dirs.front()) < 0 ? Vec3(-d) : d;
  return s.normalized();
}

double angle_deg(const Vec3& a, const Vec3& b) {
  double c = std::min(1.0, std::abs(a.normalized().dot(b.normalized())));
  return std::acos(c) * 180.0 / std::numbers::pi;
}

}  // namespace

AxisCue axis_cues(const ChainComplex& c, int face) {
  if (face < 0 || face >= c.num_faces()) throw ArgumentError("axis_cues: face index out of range");
  AxisCue cue;
  const PatchType type = c.faces[static_cast<size_t>(face)].type;
  if (type != PatchType::Cylinder && type != PatchType::Cone) return cue;

  std::vector<Vec3> line_dirs, circle_normals;
  std::vector<Vec3> circle_centers;
  for (int e = 0; e < c.num_edges(); ++e) {
    if (!c.fe(face, e)) continue;
    const auto& edge = c.edges[static_cast<size_t>(e)];
    if (auto l = as_line(edge)) {
      line_dirs.push_back(l->direction.normalized());
    } else if (auto ci = as_circle(edge)) {
      circle_normals.push_back(ci->normal.normalized());
      circle_centers.push_back(ci->center);
    }
  }
  const std::string where = "face " + std::to_string(face) + ": ";

  if (type == PatchType::Cylinder) {
    if (line_dirs.empty() && circle_normals.empty()) return cue;
    if (!line_dirs.empty() && !circle_normals.empty()) {
      Vec3 l = mean_direction(line_dirs), n = mean_direction(circle_normals);
      double ang = angle_deg(l, n);
      if (ang > kCueToleranceDeg) {
        cue.warning = where + "boundary lines and circle normals disagree by " + std::to_string(ang) +
                      " degrees; no axis constraint";
        return cue;
      }
      cue.constraint = AxisConstraint{l, std::nullopt};
      return cue;
    }
    cue.constraint = AxisConstraint{line_dirs.empty() ? mean_direction(circle_normals) : mean_direction(line_dirs),
                                    std::nullopt};
    return cue;
  }

  // Cone: through the first boundary circle's center, normal to its plane.
  if (circle_normals.empty()) return cue;
  Vec3 n = mean_direction(circle_normals);
  for (const auto& m : circle_normals) {
    double ang = angle_deg(m, n);
    if (ang > kCueToleranceDeg) {
      cue.warning = where + "boundary circles are not parallel (" + std::to_string(ang) +
                    " degrees); no axis constraint";
      return cue;
    }
  }
  cue.constraint = AxisConstraint{circle_normals.front(), circle_centers.front()};
  return cue;
}

}  // namespace brepchain
