#include "brepchain/tessellation.hpp"

#include <algorithm>
#include <cmath>

namespace brepchain {

namespace {

// Piecewise-linear surface over the grid, split along the (iu, iv)-(iu+1, iv+1)
// diagonal. This is the same surface grid projection measures against.
Vec3 grid_surface(const PatchGeometry& patch, double s, double t) {
  const int side = kPatchSide;
  const int urows = patch.u_closed ? side : side - 1;
  double fu = std::clamp(s, 0.0, 1.0) * urows;
  double fv = std::clamp(t, 0.0, 1.0) * (side - 1);
  int iu = std::min(static_cast<int>(fu), urows - 1);
  int iv = std::min(static_cast<int>(fv), side - 2);
  double a = fu - iu, b = fv - iv;
  auto at = [&](int i, int j) -> const Vec3& { return patch.grid[static_cast<size_t>((i % side) * side + j)]; };
  const Vec3& p00 = at(iu, iv);
  const Vec3& p11 = at(iu + 1, iv + 1);
  if (a >= b) return p00 + a * (at(iu + 1, iv) - p00) + b * (p11 - at(iu + 1, iv));
  return p00 + a * (p11 - at(iu, iv + 1)) + b * (at(iu, iv + 1) - p00);
}

}  // namespace

Vec3 patch_point(const PatchGeometry& patch, double s, double t) {
  if (patch.primitive) return evaluate_normalized(*patch.primitive, s, t);
  return grid_surface(patch, s, t);
}

Vec2 patch_parameter(const PatchGeometry& patch, const Vec3& x) {
  if (patch.primitive) {
    const auto& surf = *patch.primitive;
    auto proj = project(surf, x);
    const auto& d = surf.domain;
    double su = d.u1 > d.u0 ? (proj.u - d.u0) / (d.u1 - d.u0) : 0.0;
    double tv = d.v1 > d.v0 ? (proj.v - d.v0) / (d.v1 - d.v0) : 0.0;
    return {su, tv};
  }
  auto proj = project_to_grid(patch.grid, patch.u_closed, x);
  return {proj.u, proj.v};
}

Vec3 patch_normal(const PatchGeometry& patch, double s, double t) {
  if (patch.primitive) {
    const auto& d = patch.primitive->domain;
    return surface_normal(*patch.primitive, d.u0 + s * (d.u1 - d.u0), d.v0 + t * (d.v1 - d.v0));
  }
  const double h = 1e-4;
  double s0 = std::max(0.0, s - h), s1 = std::min(1.0, s + h);
  double t0 = std::max(0.0, t - h), t1 = std::min(1.0, t + h);
  Vec3 du = grid_surface(patch, s1, t) - grid_surface(patch, s0, t);
  Vec3 dv = grid_surface(patch, s, t1) - grid_surface(patch, s, t0);
  Vec3 n = du.cross(dv);
  return n.norm() > 0 ? n.normalized() : Vec3::UnitZ();
}

std::vector<const CurveGeometry*> boundary_curves(const ChainComplex& c, int face) {
  std::vector<const CurveGeometry*> out;
  for (int j = 0; j < c.num_edges(); ++j)
    if (c.fe(face, j)) out.push_back(&c.edges[static_cast<size_t>(j)]);
  return out;
}

TrimRegion TrimRegion::build(const PatchGeometry& patch, std::span<const CurveGeometry* const> boundary) {
  TrimRegion region;
  if (patch.u_closed || boundary.empty()) return region;
  for (const CurveGeometry* curve : boundary) {
    std::vector<Vec3> pts = curve->primitive ? sample_curve(*curve->primitive, 120) : curve->samples;
    if (pts.size() < 2) continue;
    std::vector<Vec2> uv;
    uv.reserve(pts.size());
    for (const auto& p : pts) uv.push_back(patch_parameter(patch, p));
    const size_t segs = curve->closed ? uv.size() : uv.size() - 1;
    for (size_t i = 0; i < segs; ++i) region.segments_.push_back({uv[i], uv[(i + 1) % uv.size()]});
  }
  if (region.segments_.empty()) return region;
  // Loops that enclose nothing (e.g. degenerate projections) disable trimming.
  int inside = 0;
  constexpr int kProbe = 24;
  for (int i = 0; i < kProbe; ++i)
    for (int j = 0; j < kProbe; ++j)
      if (region.raw_contains({(i + 0.5) / kProbe, (j + 0.5) / kProbe})) ++inside;
  region.active_ = inside > 0;
  return region;
}

bool TrimRegion::raw_contains(const Vec2& st) const {
  // Even-odd rule with a horizontal ray towards +s.
  bool odd = false;
  for (const auto& seg : segments_) {
    const Vec2& a = seg[0];
    const Vec2& b = seg[1];
    if ((a.y() > st.y()) == (b.y() > st.y())) continue;
    double x = a.x() + (st.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
    if (x > st.x()) odd = !odd;
  }
  return odd;
}

bool TrimRegion::contains(const Vec2& st) const { return !active_ || raw_contains(st); }

PatchMesh tessellate_patch(const PatchGeometry& patch, const TrimRegion& trim, int resolution) {
  PatchMesh mesh;
  const int n = std::max(2, resolution);
  const int urows = patch.u_closed ? n : n;  // lattice rows
  auto sparam = [&](int i) { return patch.u_closed ? static_cast<double>(i) / n : static_cast<double>(i) / (n - 1); };
  for (int i = 0; i < urows; ++i)
    for (int j = 0; j < n; ++j) {
      double s = sparam(i), t = static_cast<double>(j) / (n - 1);
      mesh.vertices.push_back(patch_point(patch, s, t));
      mesh.params.push_back({s, t});
    }
  auto id = [&](int i, int j) { return (i % urows) * n + j; };
  const int cells_u = patch.u_closed ? n : n - 1;
  for (int i = 0; i < cells_u; ++i) {
    double s0 = sparam(i), s1 = patch.u_closed && i + 1 == n ? 1.0 : sparam(i + 1);
    for (int j = 0; j + 1 < n; ++j) {
      double t0 = static_cast<double>(j) / (n - 1), t1 = static_cast<double>(j + 1) / (n - 1);
      std::array<int, 3> tri_a = {id(i, j), id(i + 1, j), id(i + 1, j + 1)};
      std::array<int, 3> tri_b = {id(i, j), id(i + 1, j + 1), id(i, j + 1)};
      Vec2 ca((s0 + 2 * s1) / 3, (2 * t0 + t1) / 3);
      Vec2 cb((2 * s0 + s1) / 3, (t0 + 2 * t1) / 3);
      if (trim.contains(ca)) mesh.triangles.push_back(tri_a);
      if (trim.contains(cb)) mesh.triangles.push_back(tri_b);
    }
  }
  return mesh;
}

}  // namespace brepchain
