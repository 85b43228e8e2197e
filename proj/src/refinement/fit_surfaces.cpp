#include "fit_common.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace brepchain {

namespace {

using fit::kTwoPi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_problem(const FittingProblem& p, size_t min_points, const std::string& what) {
  if (p.weights.size() != p.points.size()) throw ArgumentError(what + ": one weight per point required");
  if (!p.normals.empty() && p.normals.size() != p.points.size())
    throw ArgumentError(what + ": normals must match points");
  for (size_t i = 0; i < p.points.size(); ++i) {
    if (!p.points[i].allFinite()) throw ArgumentError(what + ": non-finite target point");
    if (!std::isfinite(p.weights[i]) || p.weights[i] < 0) throw ArgumentError(what + ": invalid weight");
  }
  size_t active = 0;
  for (double w : p.weights) active += w > 0;
  if (active < min_points)
    throw FitError(what + ": needs at least " + std::to_string(min_points) + " weighted points, got " +
                   std::to_string(active));
  if (p.axis && !(p.axis->direction.norm() > 1e-12)) throw ArgumentError(what + ": zero axis constraint");
}

std::vector<double> sqrt_weights(const FittingProblem& p) {
  std::vector<double> sw(p.weights.size());
  for (size_t i = 0; i < sw.size(); ++i) sw[i] = std::sqrt(p.weights[i]);
  return sw;
}

double rms_from_cost(double cost, const FittingProblem& p) { return std::sqrt(cost / p.total_weight()); }

/// Axis suggested by the previous surface: its own axis, or the v direction
/// of a spline.
std::optional<Vec3> hint_axis(const Surface* prev) {
  if (!prev) return std::nullopt;
  return std::visit(overloaded{[](const Plane&) -> std::optional<Vec3> { return std::nullopt; },
                               [](const Sphere& s) -> std::optional<Vec3> { return s.axis; },
                               [](const Cylinder& s) -> std::optional<Vec3> { return s.axis; },
                               [](const Cone& s) -> std::optional<Vec3> { return s.axis; },
                               [](const Torus& s) -> std::optional<Vec3> { return s.axis; },
                               [&](const SplineSurface&) -> std::optional<Vec3> {
                                 Vec3 d = evaluate_normalized(*prev, 0.5, 1.0) - evaluate_normalized(*prev, 0.5, 0.0);
                                 if (d.norm() < 1e-12) return std::nullopt;
                                 return d.normalized();
                               }},
                    prev->shape);
}

/// Reference direction for u = 0, perpendicular to `axis`.
Vec3 hint_ref(const Surface* prev, const Vec3& axis, const Vec3& center) {
  Vec3 r = Vec3::Zero();
  if (prev) {
    r = std::visit(overloaded{[](const Plane& p) -> Vec3 { return p.e1; },
                              [](const Sphere& s) -> Vec3 { return s.ref; },
                              [](const Cylinder& s) -> Vec3 { return s.ref; },
                              [](const Cone& s) -> Vec3 { return s.ref; },
                              [](const Torus& s) -> Vec3 { return s.ref; },
                              [&](const SplineSurface&) -> Vec3 {
                                return evaluate_normalized(*prev, 0.0, 0.5) - center;
                              }},
                   prev->shape);
  }
  r -= r.dot(axis) * axis;
  if (r.norm() < 1e-9) return any_perpendicular(axis);
  return r.normalized();
}

Vec3 aligned(const Vec3& a, const std::optional<Vec3>& hint) { return hint && a.dot(*hint) < 0 ? Vec3(-a) : a; }

/// Domain covering the bounding targets' parameters.
ParamBox fitted_domain(const Surface& s, const std::vector<Vec3>& pts, bool angular_u, bool angular_v) {
  std::vector<double> us, vs;
  us.reserve(pts.size());
  vs.reserve(pts.size());
  for (const auto& x : pts) {
    double u = 0, v = 0;
    surface_parameters(s, x, u, v);
    us.push_back(u);
    vs.push_back(v);
  }
  ParamBox d;
  if (angular_u) {
    if (s.u_closed) {
      d.u0 = 0.0;
      d.u1 = kTwoPi;
    } else {
      double start, span;
      fit::angular_range(us, start, span);
      if (start > std::numbers::pi) start -= kTwoPi;
      d.u0 = start;
      d.u1 = start + span;
    }
  } else {
    auto [lo, hi] = std::minmax_element(us.begin(), us.end());
    d.u0 = *lo;
    d.u1 = *hi;
  }
  if (angular_v) {
    double start, span;
    fit::angular_range(vs, start, span);
    if (start > std::numbers::pi) start -= kTwoPi;
    d.v0 = start;
    d.v1 = start + span;
  } else {
    auto [lo, hi] = std::minmax_element(vs.begin(), vs.end());
    d.v0 = *lo;
    d.v1 = *hi;
  }
  return d;
}

/// Unoriented normals: given, from the previous surface, or estimated.
PointSet target_normals(const FittingProblem& p, const Surface* prev, int k) {
  if (p.normals.size() == p.points.size()) return p.normals;
  if (prev) {
    PointSet n;
    n.reserve(p.points.size());
    for (const auto& x : p.points) {
      auto r = project(*prev, x);
      n.push_back(surface_normal(*prev, r.u, r.v));
    }
    return n;
  }
  return estimate_normals(p.points, k);
}

/// Direction least aligned with the normals: the axis of a cylinder.
std::optional<Vec3> axis_from_normals(const PointSet& normals, std::span<const double> w) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (size_t i = 0; i < normals.size(); ++i) m += w[i] * normals[i] * normals[i].transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
  if (!(es.eigenvalues()[1] > 1e-9 * std::max(1e-300, es.eigenvalues()[2]))) return std::nullopt;
  return es.eigenvectors().col(0).normalized();
}

Vec3 foot_on_axis(const Vec3& point, const Vec3& axis, const Vec3& x) {
  return point + (x - point).dot(axis) * axis;
}

Vec3 centroid(const FittingProblem& p) {
  Vec3 c = Vec3::Zero();
  for (size_t i = 0; i < p.points.size(); ++i) c += p.weights[i] * p.points[i];
  return c / p.total_weight();
}

// --------------------------------------------------------------------------

SurfaceFit fit_plane(const FittingProblem& p, const Surface* prev) {
  check_problem(p, 3, "plane fit");
  auto pca = fit::weighted_pca(p.points, p.weights);
  if (!(pca.values[1] > 1e-14 * std::max(1e-300, pca.values[2]))) throw FitError("plane fit: points are collinear");
  Vec3 n = pca.smallest().normalized();
  Vec3 e1_hint = pca.largest();
  if (prev) {
    if (const auto* pl = std::get_if<Plane>(&prev->shape)) {
      if (n.dot(pl->normal()) < 0) n = -n;
      e1_hint = pl->e1;
    } else {
      Vec3 pn = surface_normal(*prev, prev->domain.u0 + 0.5 * (prev->domain.u1 - prev->domain.u0),
                               prev->domain.v0 + 0.5 * (prev->domain.v1 - prev->domain.v0));
      if (n.dot(pn) < 0) n = -n;
      e1_hint = evaluate_normalized(*prev, 1.0, 0.5) - evaluate_normalized(*prev, 0.0, 0.5);
    }
  }
  Vec3 e1 = e1_hint - e1_hint.dot(n) * n;
  if (e1.norm() < 1e-9) e1 = pca.largest() - pca.largest().dot(n) * n;
  e1.normalize();
  Plane plane{pca.centroid, e1, n.cross(e1).normalized()};
  Surface s{plane, {}, false};
  s.domain = fitted_domain(s, fit::domain_points(p), false, false);
  double cost = 0.0;
  for (size_t i = 0; i < p.points.size(); ++i) {
    double d = (p.points[i] - pca.centroid).dot(n);
    cost += p.weights[i] * d * d;
  }
  return {s, rms_from_cost(cost, p), true};
}

SurfaceFit fit_sphere(const FittingProblem& p, bool u_closed, const Surface* prev, const FitOptions& o) {
  check_problem(p, 4, "sphere fit");
  Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
  Eigen::Vector4d b = Eigen::Vector4d::Zero();
  for (size_t i = 0; i < p.points.size(); ++i) {
    Eigen::Vector4d row(p.points[i].x(), p.points[i].y(), p.points[i].z(), 1.0);
    A += p.weights[i] * row * row.transpose();
    b -= p.weights[i] * p.points[i].squaredNorm() * row;
  }
  Eigen::FullPivLU<Eigen::Matrix4d> lu(A);
  lu.setThreshold(1e-12);
  if (lu.rank() < 4) throw FitError("sphere fit: points are coplanar");
  Eigen::Vector4d sol = lu.solve(b);
  Vec3 c0 = -sol.head<3>() / 2;
  double r2 = c0.squaredNorm() - sol[3];
  if (!(r2 > 0)) throw FitError("sphere fit: degenerate algebraic solution");
  const auto sw = sqrt_weights(p);
  Eigen::VectorXd x0(4);
  x0 << c0, std::sqrt(r2);
  auto lm = fit::levenberg_marquardt(
      [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
        const Vec3 c = x.head<3>();
        for (size_t i = 0; i < p.points.size(); ++i)
          r[static_cast<Eigen::Index>(i)] = sw[i] * ((p.points[i] - c).norm() - x[3]);
      },
      x0, static_cast<int>(p.points.size()), o.max_iterations);
  Vec3 c = lm.x.head<3>();
  double radius = std::abs(lm.x[3]);
  if (!(radius > 1e-12)) throw FitError("sphere fit: zero radius");
  Vec3 axis = hint_axis(prev).value_or(Vec3::UnitZ());
  Sphere sp{c, radius, axis, hint_ref(prev, axis, c)};
  Surface s{sp, {}, u_closed};
  s.domain = fitted_domain(s, fit::domain_points(p), true, false);
  return {s, rms_from_cost(lm.cost, p), lm.converged};
}

// --------------------------------------------------------------------------

struct AxisLine {
  Vec3 axis;
  Vec3 point;
};

double point_line_distance(const Vec3& x, const Vec3& point, const Vec3& axis) {
  Vec3 d = x - point;
  return (d - d.dot(axis) * axis).norm();
}

SurfaceFit fit_cylinder(const FittingProblem& p, bool u_closed, const Surface* prev, const FitOptions& o) {
  check_problem(p, 6, "cylinder fit");
  const auto sw = sqrt_weights(p);
  const int n = static_cast<int>(p.points.size());
  const auto hint = hint_axis(prev);

  std::vector<Vec3> candidates;
  if (p.axis) {
    candidates.push_back(p.axis->direction.normalized());
  } else {
    if (hint) candidates.push_back(*hint);
    if (auto a = axis_from_normals(target_normals(p, prev, o.normal_neighbors), p.weights)) candidates.push_back(*a);
    candidates.push_back(fit::weighted_pca(p.points, p.weights).largest());
  }

  bool found = false;
  double best_cost = 0.0;
  bool best_conv = false;
  Vec3 best_axis, best_point;
  double best_radius = 0.0;
  for (const Vec3& a0 : candidates) {
    Vec3 e1, e2;
    fit::basis(a0, e1, e2);
    std::vector<Vec2> q;
    q.reserve(p.points.size());
    for (const auto& x : p.points) q.emplace_back(x.dot(e1), x.dot(e2));
    Vec2 c2;
    double r0;
    Vec3 point0;
    if (p.axis && p.axis->point) {
      point0 = *p.axis->point;
      r0 = 0.0;
      for (size_t i = 0; i < p.points.size(); ++i) r0 += p.weights[i] * point_line_distance(p.points[i], point0, a0);
      r0 /= p.total_weight();
    } else {
      if (!fit::kasa_circle(q, p.weights, c2, r0)) continue;
      point0 = c2.x() * e1 + c2.y() * e2;
    }
    fit::LmResult lm;
    Vec3 axis, point;
    double radius;
    if (p.axis && p.axis->point) {
      Eigen::VectorXd x0(1);
      x0 << r0;
      lm = fit::levenberg_marquardt(
          [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
            for (int i = 0; i < n; ++i) r[i] = sw[i] * (point_line_distance(p.points[i], point0, a0) - x[0]);
          },
          x0, n, o.max_iterations);
      axis = a0;
      point = point0;
      radius = lm.x[0];
    } else if (p.axis) {
      Eigen::VectorXd x0(3);
      x0 << c2.x(), c2.y(), r0;
      lm = fit::levenberg_marquardt(
          [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
            const Vec3 pt = x[0] * e1 + x[1] * e2;
            for (int i = 0; i < n; ++i) r[i] = sw[i] * (point_line_distance(p.points[i], pt, a0) - x[2]);
          },
          x0, n, o.max_iterations);
      axis = a0;
      point = lm.x[0] * e1 + lm.x[1] * e2;
      radius = lm.x[2];
    } else {
      Eigen::VectorXd x0(5);
      x0 << 0.0, 0.0, c2.x(), c2.y(), r0;
      lm = fit::levenberg_marquardt(
          [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
            const Vec3 ax = fit::chart(a0, x[0], x[1]);
            const Vec3 pt = x[2] * e1 + x[3] * e2;
            for (int i = 0; i < n; ++i) r[i] = sw[i] * (point_line_distance(p.points[i], pt, ax) - x[4]);
          },
          x0, n, o.max_iterations);
      axis = fit::chart(a0, lm.x[0], lm.x[1]);
      point = lm.x[2] * e1 + lm.x[3] * e2;
      radius = lm.x[4];
    }
    if (!std::isfinite(lm.cost) || !(std::abs(radius) > 1e-12)) continue;
    if (!found || lm.cost < best_cost) {
      found = true;
      best_cost = lm.cost;
      best_conv = lm.converged;
      best_axis = axis;
      best_point = point;
      best_radius = std::abs(radius);
    }
  }
  if (!found) throw FitError("cylinder fit: no circular cross-section found");
  Vec3 axis = aligned(best_axis.normalized(), hint);
  Vec3 point = foot_on_axis(best_point, axis, centroid(p));
  Cylinder cy{point, axis, hint_ref(prev, axis, point), best_radius};
  Surface s{cy, {}, u_closed};
  s.domain = fitted_domain(s, fit::domain_points(p), true, false);
  return {s, rms_from_cost(best_cost, p), best_conv};
}

// --------------------------------------------------------------------------

double cone_residual(const Vec3& x, const Vec3& apex, const Vec3& axis, double theta) {
  Vec3 d = x - apex;
  double h = d.dot(axis);
  double rho = (d - h * axis).norm();
  return rho * std::cos(theta) - h * std::sin(theta);
}

struct ConeGuess {
  Vec3 apex;
  Vec3 axis;
  double theta;
};

/// With the axis direction known: axis position from a circle fit of the
/// projected points (or the given point), then a line rho = k h + m.
std::optional<ConeGuess> cone_from_axis(const FittingProblem& p, Vec3 a, const std::optional<Vec3>& through) {
  Vec3 e1, e2;
  fit::basis(a, e1, e2);
  Vec3 c;
  if (through) {
    c = *through;
  } else {
    std::vector<Vec2> q;
    for (const auto& x : p.points) q.emplace_back(x.dot(e1), x.dot(e2));
    Vec2 c2;
    double r;
    if (!fit::kasa_circle(q, p.weights, c2, r)) return std::nullopt;
    c = c2.x() * e1 + c2.y() * e2;
  }
  Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  for (size_t i = 0; i < p.points.size(); ++i) {
    Vec3 d = p.points[i] - c;
    double h = d.dot(a);
    double rho = (d - h * a).norm();
    Eigen::Vector2d row(h, 1.0);
    A += p.weights[i] * row * row.transpose();
    b += p.weights[i] * rho * row;
  }
  Eigen::Vector2d km = A.fullPivLu().solve(b);
  double k = km[0], m = km[1];
  if (!std::isfinite(k) || std::abs(k) < 1e-9) return std::nullopt;
  if (k < 0) {
    a = -a;
    k = -k;
  }
  // rho = k h' + m with h' along the (possibly flipped) axis; apex at rho = 0.
  double h0 = -m / k;
  return ConeGuess{c + h0 * a, a, std::atan(k)};
}

std::optional<ConeGuess> cone_from_normals(const FittingProblem& p, const PointSet& normals) {
  Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
  Vec3 rhs = Vec3::Zero();
  for (size_t i = 0; i < p.points.size(); ++i) {
    Eigen::Matrix3d nn = normals[i] * normals[i].transpose();
    M += p.weights[i] * nn;
    rhs += p.weights[i] * nn * p.points[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M);
  if (!(es.eigenvalues()[0] > 1e-6 * std::max(1e-300, es.eigenvalues()[2]))) return std::nullopt;
  Vec3 apex = M.ldlt().solve(rhs);
  std::vector<Vec3> g;
  std::vector<double> w;
  Vec3 mean = Vec3::Zero();
  for (size_t i = 0; i < p.points.size(); ++i) {
    Vec3 d = p.points[i] - apex;
    if (d.norm() < 1e-9) continue;
    g.push_back(d.normalized());
    w.push_back(p.weights[i]);
    mean += p.weights[i] * g.back();
  }
  if (g.size() < 3) return std::nullopt;
  auto pca = fit::weighted_pca(g, w);
  Vec3 a = pca.smallest().normalized();
  if (a.dot(mean) < 0) a = -a;
  double c = 0.0, t = 0.0;
  for (size_t i = 0; i < g.size(); ++i) {
    c += w[i] * g[i].dot(a);
    t += w[i];
  }
  return ConeGuess{apex, a, std::acos(std::clamp(c / t, -1.0, 1.0))};
}

/// Brings theta into (0, pi/2), flipping the axis where needed; the
/// unsigned distance is invariant under these changes.
void normalize_cone(Vec3& axis, double& theta) {
  theta = std::remainder(theta, std::numbers::pi);
  if (theta < 0) {
    theta = -theta;
    axis = -axis;
  }
}

SurfaceFit fit_cone(const FittingProblem& p, bool u_closed, const Surface* prev, const FitOptions& o) {
  check_problem(p, 6, "cone fit");
  const auto sw = sqrt_weights(p);
  const int n = static_cast<int>(p.points.size());
  const auto hint = hint_axis(prev);

  std::vector<ConeGuess> guesses;
  if (p.axis) {
    if (auto g = cone_from_axis(p, p.axis->direction.normalized(), p.axis->point)) guesses.push_back(*g);
  } else {
    if (prev)
      if (const auto* co = std::get_if<Cone>(&prev->shape)) guesses.push_back({co->apex, co->axis, co->half_angle});
    if (hint)
      if (auto g = cone_from_axis(p, *hint, std::nullopt)) guesses.push_back(*g);
    if (auto g = cone_from_normals(p, target_normals(p, prev, o.normal_neighbors))) guesses.push_back(*g);
  }

  bool found = false;
  double best_cost = 0.0;
  bool best_conv = false;
  ConeGuess best{};
  for (const auto& g : guesses) {
    fit::LmResult lm;
    ConeGuess out = g;
    if (p.axis && p.axis->point) {
      const Vec3 q = *p.axis->point, a = g.axis;
      Eigen::VectorXd x0(2);
      x0 << (g.apex - q).dot(a), g.theta;
      lm = fit::levenberg_marquardt(
          [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
            const Vec3 apex = q + x[0] * a;
            for (int i = 0; i < n; ++i) r[i] = sw[i] * cone_residual(p.points[i], apex, a, x[1]);
          },
          x0, n, o.max_iterations);
      out = {q + lm.x[0] * a, a, lm.x[1]};
    } else if (p.axis) {
      const Vec3 a = g.axis;
      Eigen::VectorXd x0(4);
      x0 << g.apex, g.theta;
      lm = fit::levenberg_marquardt(
          [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
            const Vec3 apex = x.head<3>();
            for (int i = 0; i < n; ++i) r[i] = sw[i] * cone_residual(p.points[i], apex, a, x[3]);
          },
          x0, n, o.max_iterations);
      out = {lm.x.head<3>(), a, lm.x[3]};
    } else {
      const Vec3 a0 = g.axis;
      Eigen::VectorXd x0(6);
      x0 << g.apex, 0.0, 0.0, g.theta;
      lm = fit::levenberg_marquardt(
          [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
            const Vec3 apex = x.head<3>();
            const Vec3 a = fit::chart(a0, x[3], x[4]);
            for (int i = 0; i < n; ++i) r[i] = sw[i] * cone_residual(p.points[i], apex, a, x[5]);
          },
          x0, n, o.max_iterations);
      out = {lm.x.head<3>(), fit::chart(a0, lm.x[3], lm.x[4]), lm.x[5]};
    }
    normalize_cone(out.axis, out.theta);
    if (!std::isfinite(lm.cost) || !(out.theta > 1e-6) || !(out.theta < std::numbers::pi / 2 - 1e-6)) continue;
    if (!found || lm.cost < best_cost) {
      found = true;
      best_cost = lm.cost;
      best_conv = lm.converged;
      best = out;
    }
  }
  if (!found) throw FitError("cone fit: degenerate half-angle or no apex estimate");
  Cone co{best.apex, best.axis.normalized(), hint_ref(prev, best.axis.normalized(), best.apex), best.theta};
  Surface s{co, {}, u_closed};
  s.domain = fitted_domain(s, fit::domain_points(p), true, false);
  return {s, rms_from_cost(best_cost, p), best_conv};
}

// --------------------------------------------------------------------------

double torus_residual(const Vec3& x, const Vec3& c, const Vec3& a, double R, double r) {
  Vec3 d = x - c;
  double h = d.dot(a);
  double rho = (d - h * a).norm();
  return std::hypot(rho - R, h) - r;
}

struct TorusGuess {
  Vec3 center, axis;
  double R, r;
};

std::optional<TorusGuess> torus_from_axis(const FittingProblem& p, const Vec3& a, const Vec3& c0) {
  std::vector<Vec2> q;
  for (const auto& x : p.points) {
    Vec3 d = x - c0;
    double h = d.dot(a);
    q.emplace_back((d - h * a).norm(), h);
  }
  Vec2 c2;
  double r;
  if (!fit::kasa_circle(q, p.weights, c2, r)) return std::nullopt;
  return TorusGuess{c0 + c2.y() * a, a, c2.x(), r};
}

SurfaceFit fit_torus(const FittingProblem& p, bool u_closed, const Surface* prev, const FitOptions& o) {
  check_problem(p, 7, "torus fit");
  const auto sw = sqrt_weights(p);
  const int n = static_cast<int>(p.points.size());
  const auto hint = hint_axis(prev);

  std::vector<TorusGuess> guesses;
  if (p.axis) {
    Vec3 a = p.axis->direction.normalized();
    Vec3 c0 = p.axis->point.value_or(centroid(p));
    if (auto g = torus_from_axis(p, a, c0)) guesses.push_back(*g);
  } else {
    if (prev)
      if (const auto* to = std::get_if<Torus>(&prev->shape))
        guesses.push_back({to->center, to->axis, to->major_radius, to->minor_radius});
    const auto normals = target_normals(p, prev, o.normal_neighbors);
    Vec3 a, pt;
    if (fit::plucker_axis(p.points, normals, p.weights, a, pt))
      if (auto g = torus_from_axis(p, a, foot_on_axis(pt, a, centroid(p)))) guesses.push_back(*g);
    if (hint)
      if (auto g = torus_from_axis(p, *hint, centroid(p))) guesses.push_back(*g);
  }

  bool found = false;
  double best_cost = 0.0;
  bool best_conv = false;
  TorusGuess best{};
  for (const auto& g : guesses) {
    fit::LmResult lm;
    TorusGuess out = g;
    if (p.axis && p.axis->point) {
      const Vec3 q = *p.axis->point, a = g.axis;
      Eigen::VectorXd x0(3);
      x0 << (g.center - q).dot(a), g.R, g.r;
      lm = fit::levenberg_marquardt(
          [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
            const Vec3 c = q + x[0] * a;
            for (int i = 0; i < n; ++i) r[i] = sw[i] * torus_residual(p.points[i], c, a, x[1], x[2]);
          },
          x0, n, o.max_iterations);
      out = {q + lm.x[0] * a, a, lm.x[1], lm.x[2]};
    } else if (p.axis) {
      const Vec3 a = g.axis;
      Eigen::VectorXd x0(5);
      x0 << g.center, g.R, g.r;
      lm = fit::levenberg_marquardt(
          [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
            const Vec3 c = x.head<3>();
            for (int i = 0; i < n; ++i) r[i] = sw[i] * torus_residual(p.points[i], c, a, x[3], x[4]);
          },
          x0, n, o.max_iterations);
      out = {lm.x.head<3>(), a, lm.x[3], lm.x[4]};
    } else {
      const Vec3 a0 = g.axis;
      Eigen::VectorXd x0(7);
      x0 << g.center, 0.0, 0.0, g.R, g.r;
      lm = fit::levenberg_marquardt(
          [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
            const Vec3 c = x.head<3>();
            const Vec3 a = fit::chart(a0, x[3], x[4]);
            for (int i = 0; i < n; ++i) r[i] = sw[i] * torus_residual(p.points[i], c, a, x[5], x[6]);
          },
          x0, n, o.max_iterations);
      out = {lm.x.head<3>(), fit::chart(a0, lm.x[3], lm.x[4]), lm.x[5], lm.x[6]};
    }
    out.r = std::abs(out.r);
    if (!std::isfinite(lm.cost) || !(out.r > 1e-12) || !(out.R > out.r)) continue;
    if (!found || lm.cost < best_cost) {
      found = true;
      best_cost = lm.cost;
      best_conv = lm.converged;
      best = out;
    }
  }
  if (!found) throw FitError("torus fit: no ring torus with major radius above minor radius");
  Vec3 axis = aligned(best.axis.normalized(), hint);
  Torus to{best.center, axis, hint_ref(prev, axis, best.center), best.R, best.r};
  Surface s{to, {}, u_closed};
  s.domain = fitted_domain(s, fit::domain_points(p), true, true);
  return {s, rms_from_cost(best_cost, p), best_conv};
}

// --------------------------------------------------------------------------

/// Normalized parameters of x's closest point on s, in [0, 1].
Vec2 normalized_parameters(const Surface& s, const Vec3& x, double* distance = nullptr) {
  auto r = project(s, x);
  if (distance) *distance = r.distance;
  const auto& d = s.domain;
  double su = d.u1 != d.u0 ? (r.u - d.u0) / (d.u1 - d.u0) : 0.0;
  double tv = d.v1 != d.v0 ? (r.v - d.v0) / (d.v1 - d.v0) : 0.0;
  if (s.u_closed) {
    su -= std::floor(su);
  } else {
    su = std::clamp(su, 0.0, 1.0);
  }
  return {su, std::clamp(tv, 0.0, 1.0)};
}

std::vector<Vec2> initial_spline_parameters(const FittingProblem& p, bool periodic, int k) {
  std::vector<Vec2> params(p.points.size());
  auto pca = fit::weighted_pca(p.points, p.weights);
  Vec3 a, e1, e2;
  if (periodic) {
    a = axis_from_normals(estimate_normals(p.points, k), p.weights).value_or(pca.largest());
    fit::basis(a, e1, e2);
  } else {
    e1 = pca.largest();
    e2 = pca.vectors.col(1);
  }
  std::vector<double> us, vs;
  for (const auto& x : p.points) {
    Vec3 d = x - pca.centroid;
    if (periodic) {
      double ang = std::atan2(d.dot(e2), d.dot(e1));
      us.push_back((ang < 0 ? ang + kTwoPi : ang) / kTwoPi);
      vs.push_back(d.dot(a));
    } else {
      us.push_back(d.dot(e1));
      vs.push_back(d.dot(e2));
    }
  }
  auto normalize = [](std::vector<double>& xs) {
    auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    double l = *lo, span = *hi - *lo;
    for (double& x : xs) x = span > 0 ? (x - l) / span : 0.0;
  };
  if (!periodic) normalize(us);
  normalize(vs);
  for (size_t i = 0; i < params.size(); ++i) params[i] = {us[i], vs[i]};
  return params;
}

SurfaceFit fit_spline(const FittingProblem& p, bool u_closed, const Surface* prev, const FitOptions& o) {
  const int count = fit::spline_controls(u_closed) * 4;
  check_problem(p, static_cast<size_t>(count), "spline patch fit");
  std::vector<Vec2> params;
  if (prev) {
    params.reserve(p.points.size());
    for (const auto& x : p.points) params.push_back(normalized_parameters(*prev, x));
  } else {
    params = initial_spline_parameters(p, u_closed, o.normal_neighbors);
  }
  SurfaceFit best;
  bool have = false;
  std::vector<double> dist(p.points.size());
  for (int it = 0; it < 4; ++it) {
    Surface s{fit::spline_surface_from_params(p.points, p.weights, params, u_closed), {0, 1, 0, 1}, u_closed};
    for (size_t i = 0; i < p.points.size(); ++i) params[i] = normalized_parameters(s, p.points[i], &dist[i]);
    double rms = fit::weighted_rms(dist, p.weights);
    if (have && rms >= best.rms * (1 - 1e-9)) break;
    best = {s, rms, true};
    have = true;
  }
  return best;
}

}  // namespace

namespace fit {

SplineSurface spline_surface_from_params(std::span<const Vec3> pts, std::span<const double> w,
                                         std::span<const Vec2> params, bool u_periodic) {
  SplineSurface sp;
  sp.nu = spline_controls(u_periodic);
  sp.nv = 4;
  sp.u_periodic = u_periodic;
  std::vector<std::vector<std::pair<int, double>>> rows(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    int fu, fv;
    double bu[4], bv[4];
    cubic_basis(sp.nu, u_periodic, params[i].x(), fu, bu);
    cubic_basis(sp.nv, false, params[i].y(), fv, bv);
    rows[i].reserve(16);
    for (int a = 0; a < 4; ++a) {
      int iu = u_periodic ? (fu + a) % sp.nu : fu + a;
      for (int c = 0; c < 4; ++c) rows[i].emplace_back(iu * sp.nv + fv + c, bu[a] * bv[c]);
    }
  }
  std::vector<std::array<int, 3>> smooth;
  for (int iv = 0; iv < sp.nv; ++iv)
    for (int iu = u_periodic ? 0 : 1; iu < (u_periodic ? sp.nu : sp.nu - 1); ++iu)
      smooth.push_back({((iu - 1 + sp.nu) % sp.nu) * sp.nv + iv, iu * sp.nv + iv, ((iu + 1) % sp.nu) * sp.nv + iv});
  for (int iu = 0; iu < sp.nu; ++iu)
    for (int iv = 1; iv + 1 < sp.nv; ++iv) smooth.push_back({iu * sp.nv + iv - 1, iu * sp.nv + iv, iu * sp.nv + iv + 1});
  double total = 0.0;
  for (double x : w) total += x;
  sp.control = spline_least_squares(sp.nu * sp.nv, rows, pts, w, smooth, 1e-6 * total);
  return sp;
}

}  // namespace fit

SurfaceFit fit_surface(PatchType kind, const FittingProblem& problem, bool u_closed, const Surface* previous,
                       const FitOptions& options) {
  switch (kind) {
    case PatchType::Plane:
      return fit_plane(problem, previous);
    case PatchType::Sphere:
      return fit_sphere(problem, u_closed, previous, options);
    case PatchType::Cylinder:
      return fit_cylinder(problem, u_closed, previous, options);
    case PatchType::Cone:
      return fit_cone(problem, u_closed, previous, options);
    case PatchType::Torus:
      return fit_torus(problem, u_closed, previous, options);
    case PatchType::BSpline:
      return fit_spline(problem, u_closed, previous, options);
  }
  throw ArgumentError("fit_surface: unknown patch type");
}

}  // namespace brepchain
