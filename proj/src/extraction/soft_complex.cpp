#include "brepchain/extraction.hpp"
#include "brepchain/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace brepchain {

CurveType SoftCurve::likely_type() const {
  auto it = std::max_element(type_probs.begin(), type_probs.end());
  return static_cast<CurveType>(it - type_probs.begin());
}

PatchType SoftPatch::likely_type() const {
  auto it = std::max_element(type_probs.begin(), type_probs.end());
  return static_cast<PatchType>(it - type_probs.begin());
}

namespace {

void check_probability(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError(what + " is outside [0, 1]");
}

void check_points(const std::vector<Vec3>& pts, size_t count, const std::string& what) {
  if (pts.size() != count)
    throw StructuralError(what + " has " + std::to_string(pts.size()) + " samples, expected " + std::to_string(count));
  for (const auto& p : pts)
    if (!p.allFinite()) throw ArgumentError(what + " has a non-finite coordinate");
}

void check_matrix(const Eigen::MatrixXd& m, int rows, int cols, const std::string& what) {
  if (m.rows() != rows || m.cols() != cols)
    throw StructuralError(what + " is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", expected " +
                          std::to_string(rows) + "x" + std::to_string(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) check_probability(m.data()[i], what + " entry");
}

}  // namespace

void ProbabilisticComplex::validate() const {
  for (size_t i = 0; i < corners.size(); ++i) {
    const std::string tag = "corner " + std::to_string(i);
    check_probability(corners[i].validness, tag + " validness");
    if (!corners[i].point.allFinite()) throw ArgumentError(tag + " has a non-finite coordinate");
  }
  for (size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    const std::string tag = "curve " + std::to_string(i);
    check_probability(c.validness, tag + " validness");
    check_probability(c.openness, tag + " openness");
    for (double t : c.type_probs) check_probability(t, tag + " type probability");
    check_points(c.samples, kCurveSamples, tag);
  }
  for (size_t i = 0; i < patches.size(); ++i) {
    const auto& f = patches[i];
    const std::string tag = "patch " + std::to_string(i);
    check_probability(f.validness, tag + " validness");
    check_probability(f.u_closed, tag + " u_closed");
    for (double t : f.type_probs) check_probability(t, tag + " type probability");
    check_points(f.grid, kPatchSamples, tag);
  }
  check_matrix(fe, num_patches(), num_curves(), "FE");
  check_matrix(ev, num_curves(), num_corners(), "EV");
  check_matrix(fv, num_patches(), num_corners(), "FV");
}

ProbabilisticComplex to_probabilistic(const ChainComplex& c) {
  ProbabilisticComplex p;
  for (const auto& v : c.vertices) p.corners.push_back({1.0, v.point});
  for (const auto& e : c.edges) {
    SoftCurve s;
    s.openness = e.closed ? 0.0 : 1.0;
    s.type_probs[static_cast<size_t>(e.type)] = 1.0;
    s.samples = e.samples;
    p.curves.push_back(std::move(s));
  }
  for (const auto& f : c.faces) {
    SoftPatch s;
    s.u_closed = f.u_closed ? 1.0 : 0.0;
    s.type_probs[static_cast<size_t>(f.type)] = 1.0;
    s.grid = f.grid;
    p.patches.push_back(std::move(s));
  }
  auto dense = [](const BinaryMatrix& m) {
    Eigen::MatrixXd d(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) d(i, j) = m(i, j) ? 1.0 : 0.0;
    return d;
  };
  p.fe = dense(c.fe);
  p.ev = dense(c.ev);
  p.fv = dense(c.fv);
  return p;
}

ProbabilisticComplex combine_probabilities(const ProbabilisticComplex& p) {
  ProbabilisticComplex out = p;
  for (int i = 0; i < p.num_patches(); ++i)
    for (int j = 0; j < p.num_curves(); ++j) out.fe(i, j) *= p.patches[i].validness * p.curves[j].validness;
  for (int i = 0; i < p.num_curves(); ++i)
    for (int j = 0; j < p.num_corners(); ++j) out.ev(i, j) *= p.curves[i].validness * p.corners[j].validness;
  for (int i = 0; i < p.num_patches(); ++i)
    for (int j = 0; j < p.num_corners(); ++j) out.fv(i, j) *= p.patches[i].validness * p.corners[j].validness;
  return out;
}

namespace {

std::vector<std::uint8_t> rounded_row(const Eigen::MatrixXd& m, int i) {
  std::vector<std::uint8_t> r(static_cast<size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<size_t>(j)] = m(i, j) >= 0.5;
  return r;
}

std::vector<std::uint8_t> rounded_col(const Eigen::MatrixXd& m, int j) {
  std::vector<std::uint8_t> c(static_cast<size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) c[static_cast<size_t>(i)] = m(i, j) >= 0.5;
  return c;
}

std::vector<int> by_validness(const std::vector<double>& validness) {
  std::vector<int> order(validness.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return validness[a] > validness[b]; });
  return order;
}

// Runs suppression for one group. `same` decides equality of everything but
// geometry; `points` gives the samples for chamfer distance.
template <typename Same, typename Points, typename Suppress>
void suppress_group(const std::vector<double>& validness, double threshold, Same same, Points points,
                    Suppress suppress) {
  std::vector<int> retained;
  for (int q : by_validness(validness)) {
    if (validness[q] < 0.5) break;
    bool duplicate = false;
    for (int r : retained) {
      if (same(q, r) && chamfer_distance(points(q), points(r)) <= threshold) {
        duplicate = true;
        break;
      }
    }
    if (duplicate)
      suppress(q);
    else
      retained.push_back(q);
  }
}

}  // namespace

ProbabilisticComplex nms(const ProbabilisticComplex& p, double chamfer_threshold) {
  ProbabilisticComplex out = p;

  std::vector<double> val;
  for (const auto& f : out.patches) val.push_back(f.validness);
  suppress_group(
      val, chamfer_threshold,
      [&](int a, int b) {
        const auto& fa = out.patches[a];
        const auto& fb = out.patches[b];
        return fa.likely_type() == fb.likely_type() && (fa.u_closed >= 0.5) == (fb.u_closed >= 0.5) &&
               rounded_row(out.fe, a) == rounded_row(out.fe, b) && rounded_row(out.fv, a) == rounded_row(out.fv, b);
      },
      [&](int q) { return std::span<const Vec3>(out.patches[q].grid); },
      [&](int q) {
        out.patches[q].validness = 0.0;
        out.fe.row(q).setZero();
        out.fv.row(q).setZero();
      });

  val.clear();
  for (const auto& c : out.curves) val.push_back(c.validness);
  suppress_group(
      val, chamfer_threshold,
      [&](int a, int b) {
        const auto& ca = out.curves[a];
        const auto& cb = out.curves[b];
        return ca.likely_type() == cb.likely_type() && (ca.openness >= 0.5) == (cb.openness >= 0.5) &&
               rounded_col(out.fe, a) == rounded_col(out.fe, b) && rounded_row(out.ev, a) == rounded_row(out.ev, b);
      },
      [&](int q) { return std::span<const Vec3>(out.curves[q].samples); },
      [&](int q) {
        out.curves[q].validness = 0.0;
        out.fe.col(q).setZero();
        out.ev.row(q).setZero();
      });

  val.clear();
  for (const auto& v : out.corners) val.push_back(v.validness);
  suppress_group(
      val, chamfer_threshold,
      [&](int a, int b) {
        return rounded_col(out.ev, a) == rounded_col(out.ev, b) && rounded_col(out.fv, a) == rounded_col(out.fv, b);
      },
      [&](int q) { return std::span<const Vec3>(&out.corners[q].point, 1); },
      [&](int q) {
        out.corners[q].validness = 0.0;
        out.ev.col(q).setZero();
        out.fv.col(q).setZero();
      });
  return out;
}

ProximityMatrices proximity_matrices(const ProbabilisticComplex& p, double eps) {
  ProximityMatrices s;
  s.fe.resize(p.num_patches(), p.num_curves());
  s.ev.resize(p.num_curves(), p.num_corners());
  s.fv.resize(p.num_patches(), p.num_corners());
  for (int i = 0; i < p.num_patches(); ++i)
    for (int j = 0; j < p.num_curves(); ++j)
      s.fe(i, j) = fitness_score(proximity(p.curves[j].samples, p.patches[i].grid), eps);
  for (int i = 0; i < p.num_curves(); ++i)
    for (int j = 0; j < p.num_corners(); ++j)
      s.ev(i, j) = fitness_score(proximity(std::span<const Vec3>(&p.corners[j].point, 1), p.curves[i].samples), eps);
  for (int i = 0; i < p.num_patches(); ++i)
    for (int j = 0; j < p.num_corners(); ++j)
      s.fv(i, j) = fitness_score(proximity(std::span<const Vec3>(&p.corners[j].point, 1), p.patches[i].grid), eps);
  return s;
}

}  // namespace brepchain
