#pragma once

// Patch tessellation and approximate trimming by boundary curve loops. Used
// for mesh export and for area-weighted point sampling.

#include "brepchain/complex.hpp"

#include <array>
#include <span>
#include <vector>

namespace brepchain {

/// Point on a patch at normalized parameters (s, t) in [0, 1]^2. Uses the
/// typed primitive when present, else bilinear interpolation of the grid.
Vec3 patch_point(const PatchGeometry& patch, double s, double t);

/// Normalized parameters of the closest point on the patch.
Vec2 patch_parameter(const PatchGeometry& patch, const Vec3& x);

/// Unit normal at normalized parameters.
Vec3 patch_normal(const PatchGeometry& patch, double s, double t);

/// Boundary loops mapped into the patch's normalized parameter square; a
/// parameter point is inside when a ray from it crosses the loops an odd
/// number of times. Orientation is never needed.
class TrimRegion {
 public:
  TrimRegion() = default;
  static TrimRegion build(const PatchGeometry& patch, std::span<const CurveGeometry* const> boundary);

  /// False when trimming does not apply (u-closed patch, no boundary, or the
  /// loops enclose nothing); then every parameter point counts as inside.
  bool active() const { return active_; }
  bool contains(const Vec2& st) const;

 private:
  bool raw_contains(const Vec2& st) const;
  bool active_ = false;
  std::vector<std::array<Vec2, 2>> segments_;
};

/// Boundary curves of face `face` (its FE row).
std::vector<const CurveGeometry*> boundary_curves(const ChainComplex& c, int face);

struct PatchMesh {
  std::vector<Vec3> vertices;
  std::vector<Vec2> params;
  std::vector<std::array<int, 3>> triangles;
};

/// resolution x resolution parameter lattice (seam row shared when u-closed),
/// two triangles per cell; triangles whose centroid lies outside the trim
/// region are culled.
PatchMesh tessellate_patch(const PatchGeometry& patch, const TrimRegion& trim, int resolution);

}  // namespace brepchain
