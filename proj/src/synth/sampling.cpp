#include "brepchain/synth.hpp"
#include "brepchain/tessellation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace brepchain {

namespace {

constexpr int kSamplingResolution = 40;

struct Triangle {
  int face;
  Vec2 a, b, c;  // normalized patch parameters
};

}  // namespace

PointCloud sample_point_cloud(const ChainComplex& c, int n, double sigma, std::span<const HalfSpace> mask,
                              std::uint64_t seed) {
  if (n < 0) throw ArgumentError("sample_point_cloud: negative point count");
  if (!(sigma >= 0)) throw ArgumentError("sample_point_cloud: noise must be non-negative");
  c.validate();
  std::vector<Triangle> tris;
  std::vector<double> cumulative;
  double total = 0.0;
  for (int f = 0; f < c.num_faces(); ++f) {
    const auto& face = c.faces[static_cast<size_t>(f)];
    auto boundary = boundary_curves(c, f);
    TrimRegion trim = TrimRegion::build(face, boundary);
    PatchMesh mesh = tessellate_patch(face, trim, kSamplingResolution);
    for (const auto& t : mesh.triangles) {
      const Vec3& p0 = mesh.vertices[static_cast<size_t>(t[0])];
      const Vec3& p1 = mesh.vertices[static_cast<size_t>(t[1])];
      const Vec3& p2 = mesh.vertices[static_cast<size_t>(t[2])];
      double area = 0.5 * (p1 - p0).cross(p2 - p0).norm();
      if (!(area > 0)) continue;
      total += area;
      tris.push_back({f, mesh.params[static_cast<size_t>(t[0])], mesh.params[static_cast<size_t>(t[1])],
                      mesh.params[static_cast<size_t>(t[2])]});
      cumulative.push_back(total);
    }
  }
  PointCloud out;
  if (tris.empty()) return out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  out.points.reserve(static_cast<size_t>(n));
  out.labels.reserve(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    double pick = unit(rng) * total;
    size_t idx = static_cast<size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
    idx = std::min(idx, tris.size() - 1);
    const Triangle& t = tris[idx];
    double r1 = std::sqrt(unit(rng)), r2 = unit(rng);
    Vec2 st = (1 - r1) * t.a + r1 * (1 - r2) * t.b + r1 * r2 * t.c;
    const auto& face = c.faces[static_cast<size_t>(t.face)];
    Vec3 x = patch_point(face, st.x(), st.y());
    double offset = gauss(rng);
    if (sigma > 0) x += sigma * offset * patch_normal(face, st.x(), st.y());
    bool removed = false;
    for (const auto& h : mask) removed |= h.normal.dot(x) > h.offset;
    if (removed) continue;
    out.points.push_back(x);
    out.labels.push_back(t.face);
  }
  return out;
}

}  // namespace brepchain
