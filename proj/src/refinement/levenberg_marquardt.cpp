#include "fit_common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace brepchain::fit {

LmResult levenberg_marquardt(const ResidualFn& f, Eigen::VectorXd x, int num_residuals, int max_iterations) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd r(num_residuals), rp(num_residuals), rm(num_residuals), trial_r(num_residuals);
  f(x, r);
  double cost = r.squaredNorm();
  LmResult out;
  if (!std::isfinite(cost)) {
    out.x = x;
    out.cost = cost;
    return out;
  }
  Eigen::MatrixXd J(num_residuals, n);
  double lambda = 1e-3;
  bool need_jacobian = true;
  int it = 0;
  for (; it < max_iterations; ++it) {
    if (cost < 1e-30) {
      out.converged = true;
      break;
    }
    if (need_jacobian) {
      for (Eigen::Index k = 0; k < n; ++k) {
        const double h = 1e-7 * std::max(1.0, std::abs(x[k]));
        Eigen::VectorXd xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        f(xp, rp);
        f(xm, rm);
        J.col(k) = (rp - rm) / (2 * h);
      }
      need_jacobian = false;
    }
    Eigen::MatrixXd A = J.transpose() * J;
    Eigen::VectorXd g = J.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() < 1e-15 * std::max(1.0, cost)) {
      out.converged = true;
      break;
    }
    Eigen::MatrixXd H = A;
    for (Eigen::Index k = 0; k < n; ++k) H(k, k) += lambda * (A(k, k) + 1e-12);
    Eigen::VectorXd step = -H.ldlt().solve(g);
    if (!step.allFinite()) {
      lambda *= 4;
      continue;
    }
    Eigen::VectorXd trial = x + step;
    f(trial, trial_r);
    double trial_cost = trial_r.squaredNorm();
    if (std::isfinite(trial_cost) && trial_cost < cost) {
      const double gain = cost - trial_cost;
      x = trial;
      r = trial_r;
      cost = trial_cost;
      lambda = std::max(lambda / 3, 1e-12);
      need_jacobian = true;
      if (gain <= 1e-14 * cost || step.norm() <= 1e-13 * (1.0 + x.norm())) {
        out.converged = true;
        ++it;
        break;
      }
    } else {
      lambda *= 4;
      if (lambda > 1e16) {
        out.converged = true;  // no descent direction left
        break;
      }
    }
  }
  out.x = x;
  out.cost = cost;
  out.iterations = it;
  return out;
}

Pca weighted_pca(std::span<const Vec3> pts, std::span<const double> w) {
  Pca p;
  double total = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    p.centroid += w[i] * pts[i];
    total += w[i];
  }
  if (total <= 0) throw FitError("zero total weight");
  p.centroid /= total;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (size_t i = 0; i < pts.size(); ++i) {
    Vec3 d = pts[i] - p.centroid;
    cov += w[i] * d * d.transpose();
  }
  cov /= total;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  p.values = es.eigenvalues();
  p.vectors = es.eigenvectors();
  return p;
}

void basis(const Vec3& n, Vec3& e1, Vec3& e2) {
  e1 = any_perpendicular(n);
  e2 = n.cross(e1).normalized();
}

Vec3 chart(const Vec3& w0, double a, double b) {
  Vec3 e1, e2;
  basis(w0, e1, e2);
  return (w0 + a * e1 + b * e2).normalized();
}

bool kasa_circle(std::span<const Vec2> pts, std::span<const double> w, Vec2& center, double& radius) {
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  for (size_t i = 0; i < pts.size(); ++i) {
    Eigen::Vector3d row(pts[i].x(), pts[i].y(), 1.0);
    double rhs = -pts[i].squaredNorm();
    A += w[i] * row * row.transpose();
    b += w[i] * rhs * row;
  }
  Eigen::FullPivLU<Eigen::Matrix3d> lu(A);
  if (lu.rank() < 3) return false;
  Eigen::Vector3d s = lu.solve(b);
  center = Vec2(-s[0] / 2, -s[1] / 2);
  double r2 = center.squaredNorm() - s[2];
  if (!(r2 > 0) || !std::isfinite(r2)) return false;
  radius = std::sqrt(r2);
  return true;
}

void angular_range(std::span<const double> angles, double& start, double& span) {
  std::vector<double> a;
  a.reserve(angles.size());
  for (double x : angles) {
    double w = std::fmod(x, kTwoPi);
    if (w < 0) w += kTwoPi;
    a.push_back(w);
  }
  if (a.empty()) {
    start = 0;
    span = kTwoPi;
    return;
  }
  std::sort(a.begin(), a.end());
  double best_gap = a.front() + kTwoPi - a.back();
  size_t after = 0;
  for (size_t i = 1; i < a.size(); ++i) {
    double gap = a[i] - a[i - 1];
    if (gap > best_gap) {
      best_gap = gap;
      after = i;
    }
  }
  start = a[after];
  span = kTwoPi - best_gap;
}

std::vector<Vec3> domain_points(const FittingProblem& p) {
  std::vector<Vec3> out;
  for (size_t i = 0; i < p.points.size(); ++i)
    if (i < p.bounds.size() && p.bounds[i]) out.push_back(p.points[i]);
  if (out.empty()) out = p.points;
  return out;
}

double weighted_rms(std::span<const double> residuals, std::span<const double> w) {
  double s = 0.0, t = 0.0;
  for (size_t i = 0; i < residuals.size(); ++i) {
    s += w[i] * residuals[i] * residuals[i];
    t += w[i];
  }
  return t > 0 ? std::sqrt(s / t) : 0.0;
}

bool plucker_axis(std::span<const Vec3> pts, std::span<const Vec3> normals, std::span<const double> w, Vec3& axis,
                  Vec3& point) {
  // A line (a, m) meets the normal line (n, p x n) iff (p x n).a + n.m = 0.
  Eigen::Matrix<double, 6, 6> M = Eigen::Matrix<double, 6, 6>::Zero();
  for (size_t i = 0; i < pts.size(); ++i) {
    Eigen::Matrix<double, 6, 1> row;
    row << pts[i].cross(normals[i]), normals[i];
    M += w[i] * row * row.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(M);
  Eigen::Matrix<double, 6, 1> s = es.eigenvectors().col(0);
  Vec3 a = s.head<3>(), m = s.tail<3>();
  double len2 = a.squaredNorm();
  if (len2 < 1e-12) return false;
  point = a.cross(m) / len2;
  axis = a / std::sqrt(len2);
  return axis.allFinite() && point.allFinite();
}

PointSet problem_normals(const FittingProblem& p, int k) {
  if (p.normals.size() == p.points.size()) return p.normals;
  return estimate_normals(p.points, k);
}

std::vector<Vec3> spline_least_squares(int num_controls, const std::vector<std::vector<std::pair<int, double>>>& rows,
                                       std::span<const Vec3> targets, std::span<const double> w,
                                       const std::vector<std::array<int, 3>>& smooth, double smooth_weight) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(num_controls, num_controls);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(num_controls, 3);
  for (size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [ca, va] : rows[i]) {
      b.row(ca) += w[i] * va * targets[i].transpose();
      for (const auto& [cb, vb] : rows[i]) A(ca, cb) += w[i] * va * vb;
    }
  }
  for (const auto& t : smooth) {
    const int idx[3] = {t[0], t[1], t[2]};
    const double c[3] = {1.0, -2.0, 1.0};
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 3; ++y) A(idx[x], idx[y]) += smooth_weight * c[x] * c[y];
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  Eigen::MatrixXd sol = ldlt.solve(b);
  if (ldlt.info() != Eigen::Success || !sol.allFinite()) throw FitError("spline least squares is singular");
  std::vector<Vec3> out(static_cast<size_t>(num_controls));
  for (int i = 0; i < num_controls; ++i) out[static_cast<size_t>(i)] = sol.row(i).transpose();
  return out;
}

}  // namespace brepchain::fit
