#pragma once

// Bipartite matching between predicted and ground-truth elements, reference
// loss terms and evaluation metrics.

#include "brepchain/complex.hpp"
#include "brepchain/extraction.hpp"

#include <optional>
#include <span>
#include <vector>

namespace brepchain {

struct Assignment {
  std::vector<int> row_to_col;  // -1 for unassigned rows
  double total_cost = 0.0;
};

/// Minimum-cost one-to-one assignment covering min(rows, cols) pairs.
/// Throws ArgumentError on a non-finite cost.
Assignment hungarian_match(const Eigen::MatrixXd& cost);

struct GroupMatching {
  std::vector<int> pred_to_gt;   // m(.), -1 when unmatched
  std::vector<int> gt_to_pred;   // m'(.), -1 when unmatched
  std::vector<double> distance;  // D_geo of each matched prediction, else NaN
  int matched() const;
};

struct Matching {
  GroupMatching corners, curves, patches;
};

/// Builds a group matching from a pred x gt cost matrix.
GroupMatching match_from_cost(const Eigen::MatrixXd& cost, const Eigen::MatrixXd& distance);

/// Matching by geometric distance only (D_v, D_e, D_f).
Matching match_by_distance(const ChainComplex& pred, const ChainComplex& gt);

inline constexpr double kGeoWeight = 300.0;
inline constexpr double kTopoWeight = 10.0;
/// Cap on a single negative log-likelihood term.
inline constexpr double kLogCap = 30.0;

/// sum of KL(one-hot gt || pred) over the element's classification tasks plus
/// w_geo * D_geo.
double matching_cost(const SoftCorner& p, const CornerGeometry& q, double w_geo = kGeoWeight);
double matching_cost(const SoftCurve& p, const CurveGeometry& q, double w_geo = kGeoWeight);
double matching_cost(const SoftPatch& p, const PatchGeometry& q, double w_geo = kGeoWeight);

/// Matching with the full classification + geometry cost.
Matching match_for_training(const ProbabilisticComplex& pred, const ChainComplex& gt, double w_geo = kGeoWeight);

struct LossTerms {
  double val = 0.0;
  double cls = 0.0;
  double geo = 0.0;
  double topo = 0.0;
  double total = 0.0;
};

LossTerms loss_terms(const ProbabilisticComplex& pred, const ChainComplex& gt, const Matching& m,
                     double w_geo = kGeoWeight, double w_topo = kTopoWeight);

struct FScore {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

/// True positives are matched pairs whose root-mean-square sample distance
/// sqrt(D_geo) is at most delta.
FScore evaluate_fscore(const GroupMatching& m, int num_pred, int num_gt, double delta = 0.1);

struct TypeAccuracies {
  std::optional<double> curve_type;
  std::optional<double> curve_openness;
  std::optional<double> patch_type;
  std::optional<double> patch_closedness;
};

TypeAccuracies type_accuracy(const ChainComplex& pred, const ChainComplex& gt, const Matching& m);

/// Mean over gt index pairs of |gt - pred[m'(i), m'(j)]|; pairs with an
/// unmatched endpoint count 1.
double topology_error(const BinaryMatrix& pred_adj, const BinaryMatrix& gt_adj, const GroupMatching& rows,
                      const GroupMatching& cols);

struct ResidualRecall {
  double residual = 0.0;
  double recall = 0.0;
};

/// gt_patch_points[j] are dense samples of gt patch j.
ResidualRecall patch_residual_and_recall(const ChainComplex& pred, const ChainComplex& gt, const GroupMatching& m,
                                         const std::vector<PointSet>& gt_patch_points, double delta = 0.1);

/// Fraction of points within eps_cov of the nearest predicted patch.
double p_coverage(std::span<const Vec3> points, const std::vector<PatchGeometry>& patches, double eps_cov = 0.01);

/// FF = (FE FE^T >= 1) with a zero diagonal.
BinaryMatrix patch_patch_matrix(const ChainComplex& c);

/// Segments i, j adjacent iff some p in S_i and q in S_j are within each
/// other's k nearest neighbours in the union of all segments.
BinaryMatrix segmentation_adjacency(const std::vector<PointSet>& segments, int k = 6);

struct EvaluationOptions {
  double delta = 0.1;
  double eps_cov = 0.01;
  double validity_threshold = 0.03;
};

struct EvaluationReport {
  FScore corner, curve, patch;
  TypeAccuracies types;
  double topology_error_fe = 0.0;
  double topology_error_ev = 0.0;
  double topology_error_fv = 0.0;
  double topology_error_ff = 0.0;
  TopologyResiduals inconsistency;
  double patch_residual = 0.0;
  double recall = 0.0;
  std::optional<double> p_coverage;
  double validity_ratio = 1.0;
};

/// Full comparison. `points` (optionally labelled with gt patch indices) feed
/// residual and coverage; without labels the gt patch grids are used as the
/// per-patch point sets.
EvaluationReport evaluate(const ChainComplex& pred, const ChainComplex& gt, std::span<const Vec3> points = {},
                          std::span<const int> labels = {}, const EvaluationOptions& options = {});

}  // namespace brepchain
