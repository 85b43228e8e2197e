#include "fit_common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace brepchain {

void FittingProblem::add(std::span<const Vec3> pts, double weight, bool bounds_domain) {
  for (const auto& p : pts) {
    points.push_back(p);
    weights.push_back(weight);
    bounds.push_back(bounds_domain ? 1 : 0);
  }
}

double FittingProblem::total_weight() const {
  double t = 0.0;
  for (double w : weights) t += w;
  return t;
}

PointSet estimate_normals(std::span<const Vec3> points, int k) {
  const int n = static_cast<int>(points.size());
  PointSet normals(static_cast<size_t>(n), Vec3::UnitZ());
  const int kk = std::min(std::max(k, 3), n);
  std::vector<std::pair<double, int>> d(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) d[static_cast<size_t>(j)] = {(points[i] - points[j]).squaredNorm(), j};
    std::partial_sort(d.begin(), d.begin() + kk, d.end());
    Vec3 c = Vec3::Zero();
    for (int q = 0; q < kk; ++q) c += points[static_cast<size_t>(d[static_cast<size_t>(q)].second)];
    c /= kk;
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int q = 0; q < kk; ++q) {
      Vec3 e = points[static_cast<size_t>(d[static_cast<size_t>(q)].second)] - c;
      cov += e * e.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    normals[static_cast<size_t>(i)] = es.eigenvectors().col(0);
  }
  return normals;
}

PatchProjection project_point_to_patch(const Vec3& x, const PatchGeometry& patch) {
  if (patch.primitive) {
    auto r = project(*patch.primitive, x);
    return {r.foot, r.distance};
  }
  auto r = project_to_grid(patch.grid, patch.u_closed, x);
  return {r.foot, r.distance};
}

Vec3 project_point_to_curve(const Vec3& x, const CurveGeometry& curve) {
  if (curve.primitive) return project(*curve.primitive, x).foot;
  return project_to_polyline(curve.samples, curve.closed, x).foot;
}

std::vector<std::vector<int>> assign_points_to_patches(std::span<const Vec3> points,
                                                       const std::vector<PatchGeometry>& patches, double threshold) {
  std::vector<std::vector<int>> out(patches.size());
  for (size_t q = 0; q < points.size(); ++q) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t f = 0; f < patches.size(); ++f) {
      double d = project_point_to_patch(points[q], patches[f]).distance;
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(f);
      }
    }
    if (best >= 0 && best_d <= threshold) out[static_cast<size_t>(best)].push_back(static_cast<int>(q));
  }
  return out;
}

}  // namespace brepchain
