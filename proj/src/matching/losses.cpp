#include "brepchain/geometry.hpp"
#include "brepchain/matching.hpp"

#include <cmath>
#include <limits>

namespace brepchain {

namespace {

double nll(double p) { return p <= 0.0 ? kLogCap : std::min(kLogCap, -std::log(p)); }

double bce(double p, bool target) { return target ? nll(p) : nll(1.0 - p); }

double curve_geo(const std::vector<Vec3>& pred, const CurveGeometry& gt) {
  return curve_distance({pred, false}, {gt.samples, gt.closed});
}

double patch_geo(const std::vector<Vec3>& pred, const PatchGeometry& gt) {
  return patch_distance({pred, false}, {gt.grid, gt.u_closed});
}

}  // namespace

int GroupMatching::matched() const {
  int n = 0;
  for (int g : pred_to_gt) n += g >= 0;
  return n;
}

GroupMatching match_from_cost(const Eigen::MatrixXd& cost, const Eigen::MatrixXd& distance) {
  GroupMatching m;
  Assignment a = hungarian_match(cost);
  m.pred_to_gt = a.row_to_col;
  m.gt_to_pred.assign(static_cast<size_t>(cost.cols()), -1);
  m.distance.assign(static_cast<size_t>(cost.rows()), std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i < static_cast<int>(cost.rows()); ++i) {
    int g = m.pred_to_gt[i];
    if (g < 0) continue;
    m.gt_to_pred[g] = i;
    m.distance[i] = distance(i, g);
  }
  return m;
}

double matching_cost(const SoftCorner& p, const CornerGeometry& q, double w_geo) {
  return nll(p.validness) + w_geo * vertex_distance(p.point, q.point);
}

double matching_cost(const SoftCurve& p, const CurveGeometry& q, double w_geo) {
  double kl = nll(p.validness) + nll(p.type_probs[static_cast<size_t>(q.type)]) + bce(p.openness, !q.closed);
  return kl + w_geo * curve_geo(p.samples, q);
}

double matching_cost(const SoftPatch& p, const PatchGeometry& q, double w_geo) {
  double kl = nll(p.validness) + nll(p.type_probs[static_cast<size_t>(q.type)]) + bce(p.u_closed, q.u_closed);
  return kl + w_geo * patch_geo(p.grid, q);
}

Matching match_for_training(const ProbabilisticComplex& pred, const ChainComplex& gt, double w_geo) {
  pred.validate();
  Matching m;
  auto build = [&](const auto& preds, const auto& gts, auto geo) {
    Eigen::MatrixXd cost(static_cast<Eigen::Index>(preds.size()), static_cast<Eigen::Index>(gts.size()));
    Eigen::MatrixXd dist(cost.rows(), cost.cols());
    for (size_t i = 0; i < preds.size(); ++i)
      for (size_t j = 0; j < gts.size(); ++j) {
        cost(i, j) = matching_cost(preds[i], gts[j], w_geo);
        dist(i, j) = geo(preds[i], gts[j]);
      }
    return match_from_cost(cost, dist);
  };
  m.corners = build(pred.corners, gt.vertices,
                    [](const SoftCorner& p, const CornerGeometry& q) { return vertex_distance(p.point, q.point); });
  m.curves = build(pred.curves, gt.edges, [](const SoftCurve& p, const CurveGeometry& q) { return curve_geo(p.samples, q); });
  m.patches = build(pred.patches, gt.faces, [](const SoftPatch& p, const PatchGeometry& q) { return patch_geo(p.grid, q); });
  return m;
}

LossTerms loss_terms(const ProbabilisticComplex& pred, const ChainComplex& gt, const Matching& m, double w_geo,
                     double w_topo) {
  pred.validate();
  gt.validate();
  LossTerms L;

  auto val_group = [&](const auto& elems, const GroupMatching& g) {
    if (elems.empty()) return 0.0;
    double s = 0.0;
    for (size_t i = 0; i < elems.size(); ++i) s += bce(elems[i].validness, g.pred_to_gt[i] >= 0);
    return s / static_cast<double>(elems.size());
  };
  L.val = val_group(pred.corners, m.corners) + val_group(pred.curves, m.curves) + val_group(pred.patches, m.patches);

  auto matched = [](const GroupMatching& g) {
    std::vector<int> idx;
    for (size_t i = 0; i < g.pred_to_gt.size(); ++i)
      if (g.pred_to_gt[i] >= 0) idx.push_back(static_cast<int>(i));
    return idx;
  };
  const auto mv = matched(m.corners), me = matched(m.curves), mf = matched(m.patches);

  if (!me.empty()) {
    double s = 0.0;
    for (int i : me) {
      const auto& q = gt.edges[m.curves.pred_to_gt[i]];
      s += nll(pred.curves[i].type_probs[static_cast<size_t>(q.type)]) + bce(pred.curves[i].openness, !q.closed);
    }
    L.cls += s / me.size();
  }
  if (!mf.empty()) {
    double s = 0.0;
    for (int i : mf) {
      const auto& q = gt.faces[m.patches.pred_to_gt[i]];
      s += nll(pred.patches[i].type_probs[static_cast<size_t>(q.type)]) + bce(pred.patches[i].u_closed, q.u_closed);
    }
    L.cls += s / mf.size();
  }

  if (!mv.empty()) {
    double s = 0.0;
    for (int i : mv) s += vertex_distance(pred.corners[i].point, gt.vertices[m.corners.pred_to_gt[i]].point);
    L.geo += s / mv.size();
  }
  if (!me.empty()) {
    double s = 0.0;
    for (int i : me) s += curve_geo(pred.curves[i].samples, gt.edges[m.curves.pred_to_gt[i]]);
    L.geo += s / me.size();
  }
  if (!mf.empty()) {
    double s = 0.0;
    for (int i : mf) s += patch_geo(pred.patches[i].grid, gt.faces[m.patches.pred_to_gt[i]]);
    L.geo += s / mf.size();
  }

  auto topo = [&](const Eigen::MatrixXd& soft, const BinaryMatrix& truth, const std::vector<int>& rows,
                  const GroupMatching& rm, const std::vector<int>& cols, const GroupMatching& cm) {
    if (rows.empty() || cols.empty()) return 0.0;
    double s = 0.0;
    for (int i : rows)
      for (int j : cols) s += bce(soft(i, j), truth(rm.pred_to_gt[i], cm.pred_to_gt[j]));
    return s / (static_cast<double>(rows.size()) * cols.size());
  };
  L.topo = topo(pred.ev, gt.ev, me, m.curves, mv, m.corners) + topo(pred.fe, gt.fe, mf, m.patches, me, m.curves) +
           topo(pred.fv, gt.fv, mf, m.patches, mv, m.corners);

  L.total = L.val + L.cls + w_geo * L.geo + w_topo * L.topo;
  return L;
}

}  // namespace brepchain
