#pragma once

// Procedural ground-truth complexes, point-cloud sampling and a corruption
// model that turns a ground truth into a probabilistic prediction.

#include "brepchain/complex.hpp"
#include "brepchain/extraction.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace brepchain {

enum class ShapeKind { Cube, CappedCylinder, Sphere, LBracket, Prism };

struct ShapeSpec {
  ShapeKind kind = ShapeKind::Cube;
  int sides = 6;  // prism only
};

/// "cube", "capped_cylinder", "sphere", "l_bracket", "prism" (six sides) or
/// "prism<n>", e.g. "prism5".
std::optional<ShapeSpec> parse_shape(std::string_view name);
std::string to_string(const ShapeSpec& shape);

/// The five families used across tests: cube, capped_cylinder, sphere,
/// l_bracket, prism6.
std::vector<ShapeSpec> shape_families();

/// Exact analytic complex inside the unit cube. Incidence is derived from the
/// geometry. Throws ArgumentError for a prism with fewer than 3 sides.
ChainComplex generate_gt(const ShapeSpec& shape);

/// Removes points with normal . x > offset.
struct HalfSpace {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;
};

struct PointCloud {
  PointSet points;
  std::vector<int> labels;  // source patch per point
};

/// Area-weighted samples on the trimmed patches, offset along the surface
/// normal by Gaussian noise of standard deviation `sigma`. Points inside any
/// mask half-space are dropped, so fewer than `n` may be returned.
PointCloud sample_point_cloud(const ChainComplex& c, int n, double sigma, std::span<const HalfSpace> mask = {},
                              std::uint64_t seed = 0);

struct CorruptionParams {
  double sigma_g = 0.0;       // geometry jitter
  double beta = 0.0;          // validness, type and closedness blur
  double topology_beta = 0.0; // incidence blur
  int spurious = 0;           // near-duplicate copies of real elements
  int far = 0;                // random distant elements with validness near 0.4
  std::uint64_t seed = 0;
};

/// True entries map into [1 - beta, 1], false ones into [0, beta].
ProbabilisticComplex corrupt(const ChainComplex& c, const CorruptionParams& params);

}  // namespace brepchain
