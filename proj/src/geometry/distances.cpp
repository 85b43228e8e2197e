#include "brepchain/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace brepchain {

double vertex_distance(const Vec3& p, const Vec3& q) { return (p - q).squaredNorm(); }

double curve_distance(const CurveSamples& a, const CurveSamples& b) {
  const int n = static_cast<int>(a.points.size());
  if (n == 0 || b.points.size() != a.points.size())
    throw ArgumentError("curve_distance: sample counts must match and be nonzero");
  const int rolls = b.closed ? n : 1;
  double best = std::numeric_limits<double>::infinity();
  for (int reversed = 0; reversed < 2; ++reversed) {
    for (int roll = 0; roll < rolls; ++roll) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        int j = reversed ? n - 1 - i : i;
        j = (j + roll) % n;
        sum += (a.points[static_cast<size_t>(i)] - b.points[static_cast<size_t>(j)]).squaredNorm();
      }
      best = std::min(best, sum);
    }
  }
  return best / n;
}

double patch_distance(const PatchSamples& a, const PatchSamples& b) {
  const int side = kPatchSide;
  if (a.grid.size() != static_cast<size_t>(kPatchSamples) || b.grid.size() != a.grid.size())
    throw ArgumentError("patch_distance: both grids must be 10x10");
  // Both axes are rolled for closed patches.
  const int rolls = b.u_closed ? side : 1;
  double best = std::numeric_limits<double>::infinity();
  for (int flip = 0; flip < 4; ++flip) {
    const bool rev_x = flip & 1, rev_y = flip & 2;
    for (int rx = 0; rx < rolls; ++rx) {
      for (int ry = 0; ry < rolls; ++ry) {
        double sum = 0.0;
        for (int i = 0; i < side; ++i) {
          int bi = ((rev_x ? side - 1 - i : i) + rx) % side;
          for (int j = 0; j < side; ++j) {
            int bj = ((rev_y ? side - 1 - j : j) + ry) % side;
            sum += (a.grid[static_cast<size_t>(i * side + j)] - b.grid[static_cast<size_t>(bi * side + bj)])
                       .squaredNorm();
          }
        }
        best = std::min(best, sum);
      }
    }
  }
  return best / kPatchSamples;
}

namespace {

double directed_mean_min(std::span<const Vec3> a, std::span<const Vec3> b) {
  double total = 0.0;
  for (const auto& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b) best = std::min(best, (p - q).squaredNorm());
    total += std::sqrt(best);
  }
  return total / static_cast<double>(a.size());
}

}  // namespace

double proximity(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.empty() || b.empty()) throw ArgumentError("proximity: empty point set");
  return directed_mean_min(a, b);
}

double fitness_score(double d, double eps) { return std::exp(-(d * d) / (eps * eps)); }

double chamfer_distance(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.empty() || b.empty()) throw ArgumentError("chamfer_distance: empty point set");
  return 0.5 * (directed_mean_min(a, b) + directed_mean_min(b, a));
}

double hausdorff_distance(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.empty() || b.empty()) throw ArgumentError("hausdorff_distance: empty point set");
  auto directed = [](std::span<const Vec3> x, std::span<const Vec3> y) {
    double worst = 0.0;
    for (const auto& p : x) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : y) best = std::min(best, (p - q).squaredNorm());
      worst = std::max(worst, best);
    }
    return std::sqrt(worst);
  };
  return std::max(directed(a, b), directed(b, a));
}

}  // namespace brepchain
