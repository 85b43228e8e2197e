#pragma once

// Shared numerics for primitive fitting.

#include "brepchain/refinement.hpp"

#include <array>
#include <functional>
#include <span>

namespace brepchain::fit {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Levenberg-Marquardt on a residual vector with a central-difference Jacobian.
using ResidualFn = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r)>;

struct LmResult {
  Eigen::VectorXd x;
  double cost = 0.0;  // sum of squared residuals
  int iterations = 0;
  bool converged = false;
};

LmResult levenberg_marquardt(const ResidualFn& f, Eigen::VectorXd x0, int num_residuals, int max_iterations);

/// Weighted centroid and covariance eigen-decomposition (ascending).
struct Pca {
  Vec3 centroid = Vec3::Zero();
  Eigen::Vector3d values = Eigen::Vector3d::Zero();
  Eigen::Matrix3d vectors = Eigen::Matrix3d::Identity();  // columns
  Vec3 smallest() const { return vectors.col(0); }
  Vec3 largest() const { return vectors.col(2); }
};

Pca weighted_pca(std::span<const Vec3> pts, std::span<const double> w);

/// Orthonormal pair perpendicular to unit n.
void basis(const Vec3& n, Vec3& e1, Vec3& e2);

/// Axis perturbed in the tangent chart of w0.
Vec3 chart(const Vec3& w0, double a, double b);

/// Weighted algebraic circle fit in 2D. Returns false when degenerate.
bool kasa_circle(std::span<const Vec2> pts, std::span<const double> w, Vec2& center, double& radius);

/// Smallest arc containing all angles: start angle and span in [0, 2pi].
void angular_range(std::span<const double> angles, double& start, double& span);

/// Points that bound the parameter domain (all points when none are marked).
std::vector<Vec3> domain_points(const FittingProblem& p);

/// Weighted RMS of residuals.
double weighted_rms(std::span<const double> residuals, std::span<const double> w);

/// Axis of a surface of revolution from normal lines (Plücker coordinates).
bool plucker_axis(std::span<const Vec3> pts, std::span<const Vec3> normals, std::span<const double> w, Vec3& axis,
                  Vec3& point);

/// Normals for the problem: its own, or estimated from the points.
PointSet problem_normals(const FittingProblem& p, int k);

/// Weighted linear least squares of a B-spline basis against targets.
/// rows[i] gives (control index, basis value) pairs; returns controls.
/// Each smoothing triple (a, b, c) penalizes |P_a - 2 P_b + P_c|^2.
std::vector<Vec3> spline_least_squares(int num_controls, const std::vector<std::vector<std::pair<int, double>>>& rows,
                                       std::span<const Vec3> targets, std::span<const double> w,
                                       const std::vector<std::array<int, 3>>& smooth, double smooth_weight);

/// Cubic spline surface through weighted targets at given normalized (u, v).
SplineSurface spline_surface_from_params(std::span<const Vec3> pts, std::span<const double> w,
                                         std::span<const Vec2> params, bool u_periodic);

/// Cubic spline curve through weighted targets at given normalized t.
SplineCurve spline_curve_from_params(std::span<const Vec3> pts, std::span<const double> w,
                                     std::span<const double> params, bool periodic);

/// Control counts used for fitted splines.
inline int spline_controls(bool periodic) { return periodic ? 8 : 4; }

}  // namespace brepchain::fit
