#pragma once

// Soft (probabilistic) chain complexes and their conversion into a valid
// binary complex: probability combination, duplicate suppression, proximity
// fitness and the integer program.

#include "brepchain/complex.hpp"
#include "brepchain/ilp.hpp"

#include <array>
#include <vector>

namespace brepchain {

struct SoftCorner {
  double validness = 1.0;
  Vec3 point = Vec3::Zero();
};

struct SoftCurve {
  double validness = 1.0;
  double openness = 1.0;  // probability that the curve is open
  std::array<double, kCurveTypeCount> type_probs{};
  std::vector<Vec3> samples;
  CurveType likely_type() const;
};

struct SoftPatch {
  double validness = 1.0;
  double u_closed = 0.0;  // probability that the patch is closed along u
  std::array<double, kPatchTypeCount> type_probs{};
  std::vector<Vec3> grid;
  PatchType likely_type() const;
};

struct ProbabilisticComplex {
  std::vector<SoftCorner> corners;
  std::vector<SoftCurve> curves;
  std::vector<SoftPatch> patches;
  Eigen::MatrixXd fe;  // patches x curves
  Eigen::MatrixXd ev;  // curves x corners
  Eigen::MatrixXd fv;  // patches x corners

  int num_corners() const { return static_cast<int>(corners.size()); }
  int num_curves() const { return static_cast<int>(curves.size()); }
  int num_patches() const { return static_cast<int>(patches.size()); }

  /// StructuralError on dimension or sample-count mismatch, ArgumentError on
  /// a probability outside [0, 1] or a non-finite coordinate.
  void validate() const;
};

/// Certainty-1 soft view of a binary complex.
ProbabilisticComplex to_probabilistic(const ChainComplex& c);

/// FE[i,j] *= F[i] E[j], and likewise for EV and FV.
ProbabilisticComplex combine_probabilities(const ProbabilisticComplex& p);

/// Suppresses duplicates: an element with validness >= 0.5 whose rounded
/// type, openness and topology rows/columns equal those of an already retained
/// element within `chamfer_threshold` gets validness 0 and zeroed rows and
/// columns. Patches are processed first, then curves, then corners; within a
/// group by descending validness.
ProbabilisticComplex nms(const ProbabilisticComplex& p, double chamfer_threshold = 0.05);

struct ProximityMatrices {
  Eigen::MatrixXd fe;
  Eigen::MatrixXd ev;
  Eigen::MatrixXd fv;
};

ProximityMatrices proximity_matrices(const ProbabilisticComplex& p, double eps = 0.1);

struct ExtractionOptions {
  IlpOptions ilp;
  SolveOptions solve;
  double nms_threshold = 0.05;
  double fitness_eps = 0.1;
  /// Cutoff used for the single retry when the first attempt fails.
  double retry_cutoff = 0.1;
  bool retry = true;
};

struct ExtractionResult {
  ChainComplex complex;
  // Index of each output element in the input prediction.
  std::vector<int> corner_source;
  std::vector<int> curve_source;
  std::vector<int> patch_source;
  IlpSolution solution;
  double cutoff_used = 0.0;
  bool retried = false;
};

/// combine -> nms -> proximity -> build_ilp -> solve_ilp, retried once with
/// the relaxed cutoff on failure.
ExtractionResult extract_complex(const ProbabilisticComplex& p, const ExtractionOptions& options = {});

}  // namespace brepchain
