#include "brepchain/geometry.hpp"
#include "brepchain/matching.hpp"
#include "brepchain/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace brepchain {

Matching match_by_distance(const ChainComplex& pred, const ChainComplex& gt) {
  Matching m;
  auto build = [](const auto& preds, const auto& gts, auto dist) {
    Eigen::MatrixXd d(static_cast<Eigen::Index>(preds.size()), static_cast<Eigen::Index>(gts.size()));
    for (size_t i = 0; i < preds.size(); ++i)
      for (size_t j = 0; j < gts.size(); ++j) d(i, j) = dist(preds[i], gts[j]);
    return match_from_cost(d, d);
  };
  m.corners = build(pred.vertices, gt.vertices, [](const CornerGeometry& a, const CornerGeometry& b) {
    return vertex_distance(a.point, b.point);
  });
  m.curves = build(pred.edges, gt.edges, [](const CurveGeometry& a, const CurveGeometry& b) {
    return curve_distance({a.samples, a.closed}, {b.samples, b.closed});
  });
  m.patches = build(pred.faces, gt.faces, [](const PatchGeometry& a, const PatchGeometry& b) {
    return patch_distance({a.grid, a.u_closed}, {b.grid, b.u_closed});
  });
  return m;
}

FScore evaluate_fscore(const GroupMatching& m, int num_pred, int num_gt, double delta) {
  FScore s;
  if (num_pred == 0 && num_gt == 0) return {1.0, 1.0, 1.0};
  int tp = 0;
  for (size_t i = 0; i < m.pred_to_gt.size(); ++i)
    if (m.pred_to_gt[i] >= 0 && std::sqrt(m.distance[i]) <= delta) ++tp;
  s.precision = num_pred > 0 ? static_cast<double>(tp) / num_pred : 0.0;
  s.recall = num_gt > 0 ? static_cast<double>(tp) / num_gt : 0.0;
  s.f = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

TypeAccuracies type_accuracy(const ChainComplex& pred, const ChainComplex& gt, const Matching& m) {
  TypeAccuracies acc;
  int n = 0, type_ok = 0, open_ok = 0;
  for (size_t i = 0; i < m.curves.pred_to_gt.size(); ++i) {
    int g = m.curves.pred_to_gt[i];
    if (g < 0) continue;
    ++n;
    type_ok += pred.edges[i].type == gt.edges[g].type;
    open_ok += pred.edges[i].closed == gt.edges[g].closed;
  }
  if (n > 0) {
    acc.curve_type = static_cast<double>(type_ok) / n;
    acc.curve_openness = static_cast<double>(open_ok) / n;
  }
  n = type_ok = open_ok = 0;
  for (size_t i = 0; i < m.patches.pred_to_gt.size(); ++i) {
    int g = m.patches.pred_to_gt[i];
    if (g < 0) continue;
    ++n;
    type_ok += pred.faces[i].type == gt.faces[g].type;
    open_ok += pred.faces[i].u_closed == gt.faces[g].u_closed;
  }
  if (n > 0) {
    acc.patch_type = static_cast<double>(type_ok) / n;
    acc.patch_closedness = static_cast<double>(open_ok) / n;
  }
  return acc;
}

double topology_error(const BinaryMatrix& pred_adj, const BinaryMatrix& gt_adj, const GroupMatching& rows,
                      const GroupMatching& cols) {
  const int nr = gt_adj.rows(), nc = gt_adj.cols();
  if (nr == 0 || nc == 0) return 0.0;
  double err = 0.0;
  for (int i = 0; i < nr; ++i) {
    int pi = rows.gt_to_pred[static_cast<size_t>(i)];
    for (int j = 0; j < nc; ++j) {
      int pj = cols.gt_to_pred[static_cast<size_t>(j)];
      if (pi < 0 || pj < 0)
        err += 1.0;
      else
        err += gt_adj(i, j) != pred_adj(pi, pj);
    }
  }
  return err / (static_cast<double>(nr) * nc);
}

ResidualRecall patch_residual_and_recall(const ChainComplex& pred, const ChainComplex& gt, const GroupMatching& m,
                                         const std::vector<PointSet>& gt_patch_points, double delta) {
  ResidualRecall rr;
  int matched = 0, recalled = 0;
  double total = 0.0;
  for (size_t i = 0; i < m.pred_to_gt.size(); ++i) {
    int g = m.pred_to_gt[i];
    if (g < 0) continue;
    if (std::sqrt(m.distance[i]) <= delta) ++recalled;
    const PointSet& pts = gt_patch_points[static_cast<size_t>(g)];
    if (pts.empty()) continue;
    ++matched;
    double s = 0.0;
    for (const auto& p : pts) s += project_point_to_patch(p, pred.faces[i]).distance;
    total += s / static_cast<double>(pts.size());
  }
  rr.residual = matched > 0 ? total / matched : 0.0;
  rr.recall = gt.num_faces() > 0 ? static_cast<double>(recalled) / gt.num_faces() : 1.0;
  return rr;
}

double p_coverage(std::span<const Vec3> points, const std::vector<PatchGeometry>& patches, double eps_cov) {
  if (points.empty()) throw ArgumentError("p_coverage: empty point set");
  if (patches.empty()) return 0.0;
  int covered = 0;
  for (const auto& p : points) {
    for (const auto& f : patches) {
      if (project_point_to_patch(p, f).distance < eps_cov) {
        ++covered;
        break;
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(points.size());
}

BinaryMatrix patch_patch_matrix(const ChainComplex& c) {
  const int n = c.num_faces();
  BinaryMatrix ff(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int e = 0; e < c.num_edges(); ++e)
        if (c.fe(a, e) && c.fe(b, e)) {
          ff.set(a, b, true);
          ff.set(b, a, true);
          break;
        }
  return ff;
}

BinaryMatrix segmentation_adjacency(const std::vector<PointSet>& segments, int k) {
  std::vector<Vec3> pts;
  std::vector<int> seg;
  for (size_t s = 0; s < segments.size(); ++s)
    for (const auto& p : segments[s]) {
      pts.push_back(p);
      seg.push_back(static_cast<int>(s));
    }
  const int n = static_cast<int>(pts.size());
  const int kk = std::min(k, std::max(0, n - 1));
  std::vector<std::vector<int>> knn(static_cast<size_t>(n));
  std::vector<std::pair<double, int>> d(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) d[j] = {j == i ? std::numeric_limits<double>::infinity() : (pts[i] - pts[j]).squaredNorm(), j};
    std::partial_sort(d.begin(), d.begin() + kk, d.end());
    for (int q = 0; q < kk; ++q) knn[i].push_back(d[q].second);
    std::sort(knn[i].begin(), knn[i].end());
  }
  const int ns = static_cast<int>(segments.size());
  BinaryMatrix adj(ns, ns);
  for (int i = 0; i < n; ++i)
    for (int j : knn[i]) {
      if (seg[i] == seg[j]) continue;
      if (std::binary_search(knn[j].begin(), knn[j].end(), i)) {
        adj.set(seg[i], seg[j], true);
        adj.set(seg[j], seg[i], true);
      }
    }
  return adj;
}

EvaluationReport evaluate(const ChainComplex& pred, const ChainComplex& gt, std::span<const Vec3> points,
                          std::span<const int> labels, const EvaluationOptions& o) {
  pred.validate();
  gt.validate();
  EvaluationReport r;
  Matching m = match_by_distance(pred, gt);
  r.corner = evaluate_fscore(m.corners, pred.num_vertices(), gt.num_vertices(), o.delta);
  r.curve = evaluate_fscore(m.curves, pred.num_edges(), gt.num_edges(), o.delta);
  r.patch = evaluate_fscore(m.patches, pred.num_faces(), gt.num_faces(), o.delta);
  r.types = type_accuracy(pred, gt, m);
  r.topology_error_fe = topology_error(pred.fe, gt.fe, m.patches, m.curves);
  r.topology_error_ev = topology_error(pred.ev, gt.ev, m.curves, m.corners);
  r.topology_error_fv = topology_error(pred.fv, gt.fv, m.patches, m.corners);
  r.topology_error_ff = topology_error(patch_patch_matrix(pred), patch_patch_matrix(gt), m.patches, m.patches);
  r.inconsistency = topology_residuals(pred);

  std::vector<PointSet> per_patch(static_cast<size_t>(gt.num_faces()));
  if (!labels.empty()) {
    if (labels.size() != points.size()) throw ArgumentError("evaluate: one label per point required");
    for (size_t q = 0; q < points.size(); ++q)
      if (labels[q] >= 0 && labels[q] < gt.num_faces()) per_patch[static_cast<size_t>(labels[q])].push_back(points[q]);
  } else {
    for (int j = 0; j < gt.num_faces(); ++j) per_patch[static_cast<size_t>(j)] = gt.faces[j].grid;
  }
  auto rr = patch_residual_and_recall(pred, gt, m.patches, per_patch, o.delta);
  r.patch_residual = rr.residual;
  r.recall = rr.recall;
  if (!points.empty()) r.p_coverage = p_coverage(points, pred.faces, o.eps_cov);
  r.validity_ratio = validity_assessment(pred, o.validity_threshold).ratio;
  return r;
}

}  // namespace brepchain
