#pragma once

// Distances between sampled elements, proximity/fitness scores and chamfer
// distance. All functions are pure.

#include "brepchain/types.hpp"

#include <span>

namespace brepchain {

/// Ordered curve samples; closed curves have no duplicated endpoint.
struct CurveSamples {
  std::span<const Vec3> points;
  bool closed = false;
};

/// 10x10 grid, row-major by u; u is the periodic direction when u_closed.
struct PatchSamples {
  std::span<const Vec3> grid;
  bool u_closed = false;
};

/// Fall-off of the fitness score.
inline constexpr double kFitnessEpsilon = 0.1;

/// Squared Euclidean distance.
double vertex_distance(const Vec3& p, const Vec3& q);

/// Mean squared distance under the best order-preserving alignment of b onto
/// a: identity/reversal, plus all cyclic rolls when b is closed.
double curve_distance(const CurveSamples& a, const CurveSamples& b);

/// Mean squared distance under the best grid alignment of b onto a: the four
/// axis reversals, composed with all (roll-x, roll-y) shifts when b is u-closed.
double patch_distance(const PatchSamples& a, const PatchSamples& b);

/// Mean over a of the distance to the nearest point of b (a is the lower-order
/// element).
double proximity(std::span<const Vec3> a, std::span<const Vec3> b);

/// exp(-d^2 / eps^2).
double fitness_score(double d, double eps = kFitnessEpsilon);

/// Symmetric chamfer distance: average of the two directed mean-min distances.
/// Throws ArgumentError on an empty set.
double chamfer_distance(std::span<const Vec3> a, std::span<const Vec3> b);

/// Symmetric Hausdorff distance between finite point sets.
double hausdorff_distance(std::span<const Vec3> a, std::span<const Vec3> b);

}  // namespace brepchain
