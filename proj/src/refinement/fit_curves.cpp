#include "fit_common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace brepchain {

namespace {

using fit::kTwoPi;

void check_curve_problem(const FittingProblem& p, size_t min_points, const std::string& what) {
  if (p.weights.size() != p.points.size()) throw ArgumentError(what + ": one weight per point required");
  for (size_t i = 0; i < p.points.size(); ++i) {
    if (!p.points[i].allFinite()) throw ArgumentError(what + ": non-finite target point");
    if (!std::isfinite(p.weights[i]) || p.weights[i] < 0) throw ArgumentError(what + ": invalid weight");
  }
  size_t active = 0;
  for (double w : p.weights) active += w > 0;
  if (active < min_points)
    throw FitError(what + ": needs at least " + std::to_string(min_points) + " weighted points, got " +
                   std::to_string(active));
}

double rms_from_cost(double cost, const FittingProblem& p) { return std::sqrt(cost / p.total_weight()); }

/// Direction from the previous curve's start to its end (or its tangent at
/// the start when closed).
std::optional<Vec3> previous_direction(const Curve* prev) {
  if (!prev) return std::nullopt;
  Vec3 d = prev->closed ? curve_tangent(*prev, prev->t0) : Vec3(evaluate(*prev, prev->t1) - evaluate(*prev, prev->t0));
  if (d.norm() < 1e-12) return std::nullopt;
  return d.normalized();
}

std::optional<Vec3> previous_normal(const Curve* prev) {
  if (!prev) return std::nullopt;
  if (const auto* c = std::get_if<Circle>(&prev->shape)) return c->normal;
  if (const auto* e = std::get_if<Ellipse>(&prev->shape)) return e->normal;
  return std::nullopt;
}

/// Plane of the targets: smallest principal direction, sign-matched to the
/// previous curve's normal when it has one.
fit::Pca planar_pca(const FittingProblem& p, const std::string& what) {
  auto pca = fit::weighted_pca(p.points, p.weights);
  if (!(pca.values[1] > 1e-14 * std::max(1e-300, pca.values[2]))) throw FitError(what + ": points are collinear");
  return pca;
}

Vec3 in_plane_ref(const Curve* prev, const Vec3& normal, const Vec3& center, const std::vector<Vec3>& fallback) {
  Vec3 r = Vec3::Zero();
  if (prev) r = evaluate(*prev, prev->t0) - center;
  r -= r.dot(normal) * normal;
  if (r.norm() < 1e-9 && !fallback.empty()) {
    r = fallback.front() - center;
    r -= r.dot(normal) * normal;
  }
  if (r.norm() < 1e-9) return any_perpendicular(normal);
  return r.normalized();
}

/// Angular parameter domain of the bounding targets, or a full turn when closed.
void angular_domain(std::span<const double> angles, bool closed, double& t0, double& t1) {
  if (closed) {
    t0 = 0.0;
    t1 = kTwoPi;
    return;
  }
  double start, span;
  fit::angular_range(angles, start, span);
  if (start > std::numbers::pi) start -= kTwoPi;
  t0 = start;
  t1 = start + span;
}

// --------------------------------------------------------------------------

CurveFit fit_line(const FittingProblem& p, const Curve* prev) {
  check_curve_problem(p, 2, "line fit");
  auto pca = fit::weighted_pca(p.points, p.weights);
  if (!(pca.values[2] > 0)) throw FitError("line fit: points coincide");
  Vec3 dir = pca.largest().normalized();
  if (auto h = previous_direction(prev); h && dir.dot(*h) < 0) dir = -dir;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& x : fit::domain_points(p)) {
    double t = (x - pca.centroid).dot(dir);
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  double cost = 0.0;
  for (size_t i = 0; i < p.points.size(); ++i) {
    Vec3 d = p.points[i] - pca.centroid;
    cost += p.weights[i] * (d - d.dot(dir) * dir).squaredNorm();
  }
  return {Curve{Line{pca.centroid, dir}, lo, hi, false}, rms_from_cost(cost, p), true};
}

double circle_distance(const Vec3& x, const Vec3& c, const Vec3& n, double r) {
  Vec3 d = x - c;
  double h = d.dot(n);
  return std::hypot((d - h * n).norm() - r, h);
}

CurveFit fit_circle(const FittingProblem& p, bool closed, const Curve* prev, const FitOptions& o) {
  check_curve_problem(p, 3, "circle fit");
  auto pca = planar_pca(p, "circle fit");
  Vec3 n0 = pca.smallest().normalized();
  Vec3 e1, e2;
  fit::basis(n0, e1, e2);
  std::vector<Vec2> q;
  for (const auto& x : p.points) q.emplace_back((x - pca.centroid).dot(e1), (x - pca.centroid).dot(e2));
  Vec2 c2;
  double r0;
  if (!fit::kasa_circle(q, p.weights, c2, r0)) throw FitError("circle fit: no circle through the points");
  std::vector<double> sw(p.weights.size());
  for (size_t i = 0; i < sw.size(); ++i) sw[i] = std::sqrt(p.weights[i]);
  const int m = static_cast<int>(p.points.size());
  Eigen::VectorXd x0(6);
  x0 << pca.centroid + c2.x() * e1 + c2.y() * e2, 0.0, 0.0, r0;
  auto lm = fit::levenberg_marquardt(
      [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
        const Vec3 c = x.head<3>();
        const Vec3 n = fit::chart(n0, x[3], x[4]);
        for (int i = 0; i < m; ++i) r[i] = sw[i] * circle_distance(p.points[i], c, n, x[5]);
      },
      x0, m, o.max_iterations);
  Vec3 c = lm.x.head<3>();
  Vec3 n = fit::chart(n0, lm.x[3], lm.x[4]);
  double radius = std::abs(lm.x[5]);
  if (!(radius > 1e-12)) throw FitError("circle fit: zero radius");
  if (auto h = previous_normal(prev); h && n.dot(*h) < 0) n = -n;
  const auto bpts = fit::domain_points(p);
  Circle ci{c, n, in_plane_ref(prev, n, c, bpts), radius};
  const Vec3 b = n.cross(ci.ref);
  std::vector<double> angles;
  for (const auto& x : bpts) angles.push_back(std::atan2((x - c).dot(b), (x - c).dot(ci.ref)));
  Curve out{ci, 0, 0, closed};
  angular_domain(angles, closed, out.t0, out.t1);
  return {out, rms_from_cost(lm.cost, p), lm.converged};
}

// --------------------------------------------------------------------------

/// Distance from (x, y) to the axis-aligned ellipse with semi-axes a, b.
double ellipse_distance_2d(double x, double y, double a, double b) {
  auto f = [&](double t) {
    double dx = a * std::cos(t) - x, dy = b * std::sin(t) - y;
    return dx * dx + dy * dy;
  };
  double best = std::numeric_limits<double>::infinity();
  const double seeds[5] = {std::atan2(a * y, b * x), 0.0, std::numbers::pi / 2, std::numbers::pi,
                           -std::numbers::pi / 2};
  for (double t : seeds) {
    for (int it = 0; it < 40; ++it) {
      double c = std::cos(t), s = std::sin(t);
      double dx = a * c - x, dy = b * s - y;
      double g = -a * s * dx + b * c * dy;
      double h = a * a * s * s + b * b * c * c - a * c * dx - b * s * dy;
      if (h <= 1e-300) h = a * a * s * s + b * b * c * c + 1e-300;
      double step = g / h;
      t -= step;
      if (std::abs(step) < 1e-15) break;
    }
    best = std::min(best, f(t));
  }
  return std::sqrt(best);
}

struct Ellipse2 {
  double cx, cy, a, b, phi;
};

/// Direct least-squares ellipse (Halir and Flusser) on weighted 2D points.
std::optional<Ellipse2> direct_ellipse(std::span<const Vec2> pts, std::span<const double> w) {
  Vec2 mean = Vec2::Zero();
  double tw = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    mean += w[i] * pts[i];
    tw += w[i];
  }
  mean /= tw;
  double scale = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) scale += w[i] * (pts[i] - mean).squaredNorm();
  scale = std::sqrt(scale / tw);
  if (!(scale > 0)) return std::nullopt;
  Eigen::Matrix3d S1 = Eigen::Matrix3d::Zero(), S2 = Eigen::Matrix3d::Zero(), S3 = Eigen::Matrix3d::Zero();
  for (size_t i = 0; i < pts.size(); ++i) {
    Vec2 q = (pts[i] - mean) / scale;
    Eigen::Vector3d d1(q.x() * q.x(), q.x() * q.y(), q.y() * q.y());
    Eigen::Vector3d d2(q.x(), q.y(), 1.0);
    S1 += w[i] * d1 * d1.transpose();
    S2 += w[i] * d1 * d2.transpose();
    S3 += w[i] * d2 * d2.transpose();
  }
  Eigen::FullPivLU<Eigen::Matrix3d> lu(S3);
  if (lu.rank() < 3) return std::nullopt;
  Eigen::Matrix3d T = -lu.inverse() * S2.transpose();
  Eigen::Matrix3d M = S1 + S2 * T;
  Eigen::Matrix3d C1inv;
  C1inv << 0, 0, 0.5, 0, -1, 0, 0.5, 0, 0;
  M = C1inv * M;
  Eigen::EigenSolver<Eigen::Matrix3d> es(M);
  std::optional<Eigen::Vector3d> a1;
  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3d v = es.eigenvectors().col(k).real();
    if (4 * v[0] * v[2] - v[1] * v[1] > 0) a1 = v;
  }
  if (!a1) return std::nullopt;
  Eigen::Vector3d a2 = T * *a1;
  const double A = (*a1)[0], B = (*a1)[1], C = (*a1)[2], D = a2[0], E = a2[1], F = a2[2];
  Eigen::Matrix2d Q;
  Q << 2 * A, B, B, 2 * C;
  Vec2 c = Q.fullPivLu().solve(Vec2(-D, -E));
  double Fc = A * c.x() * c.x() + B * c.x() * c.y() + C * c.y() * c.y() + D * c.x() + E * c.y() + F;
  Eigen::Matrix2d K;
  K << A, B / 2, B / 2, C;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> ke(K);
  double l0 = ke.eigenvalues()[0], l1 = ke.eigenvalues()[1];
  if (!(-Fc / l0 > 0) || !(-Fc / l1 > 0)) return std::nullopt;
  // Larger semi-axis belongs to the smaller eigenvalue.
  double a = std::sqrt(-Fc / l0), b = std::sqrt(-Fc / l1);
  Vec2 major = ke.eigenvectors().col(0);
  Vec2 center = mean + scale * c;
  return Ellipse2{center.x(), center.y(), a * scale, b * scale, std::atan2(major.y(), major.x())};
}

CurveFit fit_ellipse(const FittingProblem& p, bool closed, const Curve* prev, const FitOptions& o) {
  check_curve_problem(p, 5, "ellipse fit");
  auto pca = planar_pca(p, "ellipse fit");
  Vec3 n = pca.smallest().normalized();
  if (auto h = previous_normal(prev); h && n.dot(*h) < 0) n = -n;
  Vec3 e1, e2;
  fit::basis(n, e1, e2);
  std::vector<Vec2> q;
  std::vector<double> heights;
  for (const auto& x : p.points) {
    Vec3 d = x - pca.centroid;
    q.emplace_back(d.dot(e1), d.dot(e2));
    heights.push_back(d.dot(n));
  }
  auto init = direct_ellipse(q, p.weights);
  if (!init) {
    Vec2 c2;
    double r;
    if (!fit::kasa_circle(q, p.weights, c2, r)) throw FitError("ellipse fit: no conic through the points");
    init = Ellipse2{c2.x(), c2.y(), r, r * 0.999, 0.0};
  }
  std::vector<double> sw(p.weights.size());
  for (size_t i = 0; i < sw.size(); ++i) sw[i] = std::sqrt(p.weights[i]);
  const int m = static_cast<int>(q.size());
  Eigen::VectorXd x0(5);
  x0 << init->cx, init->cy, init->a, init->b, init->phi;
  auto lm = fit::levenberg_marquardt(
      [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
        const double c = std::cos(x[4]), s = std::sin(x[4]);
        for (int i = 0; i < m; ++i) {
          double dx = q[i].x() - x[0], dy = q[i].y() - x[1];
          r[i] = sw[i] * ellipse_distance_2d(c * dx + s * dy, -s * dx + c * dy, std::abs(x[2]), std::abs(x[3]));
        }
      },
      x0, m, o.max_iterations);
  double a = std::abs(lm.x[2]), b = std::abs(lm.x[3]), phi = lm.x[4];
  if (!(b > 1e-12) || !(a > 1e-12)) throw FitError("ellipse fit: degenerate semi-axis");
  if (a < b) {
    std::swap(a, b);
    phi += std::numbers::pi / 2;
  }
  Vec3 center = pca.centroid + lm.x[0] * e1 + lm.x[1] * e2;
  Vec3 major = std::cos(phi) * e1 + std::sin(phi) * e2;
  Ellipse el{center, n, major.normalized(), a, b};
  const Vec3 minor_dir = n.cross(el.major_dir);
  auto eccentric = [&](const Vec3& x) {
    Vec3 d = x - center;
    return std::atan2(d.dot(minor_dir) / b, d.dot(el.major_dir) / a);
  };
  Curve out{el, 0, 0, closed};
  const auto bpts = fit::domain_points(p);
  if (closed) {
    out.t0 = prev ? eccentric(evaluate(*prev, prev->t0)) : 0.0;
    out.t1 = out.t0 + kTwoPi;
  } else {
    std::vector<double> angles;
    for (const auto& x : bpts) angles.push_back(eccentric(x));
    angular_domain(angles, false, out.t0, out.t1);
  }
  // Out-of-plane offsets are orthogonal to the in-plane residuals.
  double off_plane = 0.0;
  for (int i = 0; i < m; ++i) off_plane += p.weights[i] * heights[i] * heights[i];
  return {out, rms_from_cost(lm.cost + off_plane, p), lm.converged};
}

// --------------------------------------------------------------------------

double normalized_t(const Curve& c, const Vec3& x, double* distance = nullptr) {
  auto r = project(c, x);
  if (distance) *distance = r.distance;
  double t = c.t1 != c.t0 ? (r.t - c.t0) / (c.t1 - c.t0) : 0.0;
  if (c.closed) return t - std::floor(t);
  return std::clamp(t, 0.0, 1.0);
}

CurveFit fit_spline_curve(const FittingProblem& p, bool closed, const Curve* prev) {
  const int count = fit::spline_controls(closed);
  check_curve_problem(p, static_cast<size_t>(count), "spline curve fit");
  std::vector<double> params;
  params.reserve(p.points.size());
  if (prev) {
    for (const auto& x : p.points) params.push_back(normalized_t(*prev, x));
  } else {
    auto pca = fit::weighted_pca(p.points, p.weights);
    if (closed) {
      Vec3 e1 = pca.largest(), e2 = pca.vectors.col(1);
      for (const auto& x : p.points) {
        double a = std::atan2((x - pca.centroid).dot(e2), (x - pca.centroid).dot(e1));
        params.push_back((a < 0 ? a + kTwoPi : a) / kTwoPi);
      }
    } else {
      for (const auto& x : p.points) params.push_back((x - pca.centroid).dot(pca.largest()));
      auto [lo, hi] = std::minmax_element(params.begin(), params.end());
      double l = *lo, span = *hi - *lo;
      for (double& t : params) t = span > 0 ? (t - l) / span : 0.0;
    }
  }
  CurveFit best;
  bool have = false;
  std::vector<double> dist(p.points.size());
  for (int it = 0; it < 4; ++it) {
    Curve c{fit::spline_curve_from_params(p.points, p.weights, params, closed), 0.0, 1.0, closed};
    for (size_t i = 0; i < p.points.size(); ++i) params[i] = normalized_t(c, p.points[i], &dist[i]);
    double rms = fit::weighted_rms(dist, p.weights);
    if (have && rms >= best.rms * (1 - 1e-9)) break;
    best = {c, rms, true};
    have = true;
  }
  return best;
}

}  // namespace

namespace fit {

SplineCurve spline_curve_from_params(std::span<const Vec3> pts, std::span<const double> w,
                                     std::span<const double> params, bool periodic) {
  SplineCurve sc;
  sc.periodic = periodic;
  const int n = spline_controls(periodic);
  std::vector<std::vector<std::pair<int, double>>> rows(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    int first;
    double b[4];
    cubic_basis(n, periodic, params[i], first, b);
    for (int k = 0; k < 4; ++k) rows[i].emplace_back(periodic ? (first + k) % n : first + k, b[k]);
  }
  std::vector<std::array<int, 3>> smooth;
  for (int k = periodic ? 0 : 1; k < (periodic ? n : n - 1); ++k) smooth.push_back({(k - 1 + n) % n, k, (k + 1) % n});
  double total = 0.0;
  for (double x : w) total += x;
  sc.control = spline_least_squares(n, rows, pts, w, smooth, 1e-6 * total);
  return sc;
}

}  // namespace fit

CurveFit fit_curve(CurveType kind, const FittingProblem& problem, bool closed, const Curve* previous,
                   const FitOptions& options) {
  switch (kind) {
    case CurveType::Line:
      return fit_line(problem, previous);
    case CurveType::Circle:
      return fit_circle(problem, closed, previous, options);
    case CurveType::Ellipse:
      return fit_ellipse(problem, closed, previous, options);
    case CurveType::BSpline:
      return fit_spline_curve(problem, closed, previous);
  }
  throw ArgumentError("fit_curve: unknown curve type");
}

}  // namespace brepchain
