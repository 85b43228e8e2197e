#include "brepchain/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace brepchain {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool angular_u(const Surface& s) { return !std::holds_alternative<Plane>(s.shape) && !std::holds_alternative<SplineSurface>(s.shape); }
bool angular_v(const Surface& s) { return std::holds_alternative<Torus>(s.shape); }

/// Wraps angle a into [lo, lo + 2pi).
double wrap_from(double a, double lo) {
  double d = std::fmod(a - lo, kTwoPi);
  if (d < 0) d += kTwoPi;
  return lo + d;
}

/// Brings an angle into [lo, hi] (an arc shorter than 2pi), clamping to the
/// angularly nearer end when it falls outside. Returns true if unchanged.
bool clamp_angle(double& a, double lo, double hi) {
  double w = wrap_from(a, lo);
  if (w <= hi + 1e-12) {
    a = std::min(w, hi);
    return true;
  }
  double past_hi = w - hi;
  double before_lo = lo + kTwoPi - w;
  a = past_hi <= before_lo ? hi : lo;
  return false;
}

/// Returns true if the parameter is inside the domain (after periodic wrap).
bool fit_to_domain(const Surface& s, double& u, double& v) {
  const auto& d = s.domain;
  bool inside = true;
  const bool u_periodic = s.u_closed;
  if (angular_u(s)) {
    if (u_periodic) {
      u = wrap_from(u, d.u0);
    } else {
      inside &= clamp_angle(u, d.u0, d.u1);
    }
  } else if (u_periodic) {
    double span = d.u1 - d.u0;
    u = d.u0 + std::fmod(std::fmod(u - d.u0, span) + span, span);
  } else if (u < d.u0 || u > d.u1) {
    u = std::clamp(u, d.u0, d.u1);
    inside = false;
  }
  if (angular_v(s) && d.v1 - d.v0 >= kTwoPi - 1e-12) {
    v = wrap_from(v, d.v0);
  } else if (angular_v(s)) {
    inside &= clamp_angle(v, d.v0, d.v1);
  } else if (v < d.v0 || v > d.v1) {
    v = std::clamp(v, d.v0, d.v1);
    inside = false;
  }
  return inside;
}

}  // namespace

bool surface_parameters(const Surface& s, const Vec3& x, double& u, double& v) {
  return std::visit(
      overloaded{[&](const Plane& p) {
                   Vec3 d = x - p.origin;
                   u = d.dot(p.e1);
                   v = d.dot(p.e2);
                   return true;
                 },
                 [&](const Sphere& sp) {
                   Vec3 d = x - sp.center;
                   double len = d.norm();
                   Vec3 b = sp.axis.cross(sp.ref);
                   u = std::atan2(d.dot(b), d.dot(sp.ref));
                   v = len > 0 ? std::asin(std::clamp(d.dot(sp.axis) / len, -1.0, 1.0)) : 0.0;
                   return true;
                 },
                 [&](const Cylinder& cy) {
                   Vec3 d = x - cy.point;
                   Vec3 b = cy.axis.cross(cy.ref);
                   v = d.dot(cy.axis);
                   u = std::atan2(d.dot(b), d.dot(cy.ref));
                   return true;
                 },
                 [&](const Cone& co) {
                   Vec3 d = x - co.apex;
                   Vec3 b = co.axis.cross(co.ref);
                   double h = d.dot(co.axis);
                   Vec3 radial = d - h * co.axis;
                   double rho = radial.norm();
                   u = std::atan2(d.dot(b), d.dot(co.ref));
                   // Distance along the generator in the half-plane of x.
                   double ca = std::cos(co.half_angle), sa = std::sin(co.half_angle);
                   double along = h * ca + rho * sa;
                   v = std::max(0.0, along * ca);
                   return true;
                 },
                 [&](const Torus& to) {
                   Vec3 d = x - to.center;
                   Vec3 b = to.axis.cross(to.ref);
                   double h = d.dot(to.axis);
                   Vec3 radial = d - h * to.axis;
                   double rho = radial.norm();
                   u = std::atan2(d.dot(b), d.dot(to.ref));
                   v = std::atan2(h, rho - to.major_radius);
                   return true;
                 },
                 [&](const SplineSurface&) { return false; }},
      s.shape);
}

namespace {

/// Projected Gauss-Newton on |S(u,v) - x|^2 inside the domain box.
SurfaceProjection refine_projection(const Surface& s, const Vec3& x, double u, double v) {
  Vec3 p, du, dv;
  fit_to_domain(s, u, v);
  derivatives(s, u, v, p, du, dv);
  double f = (p - x).squaredNorm();
  for (int it = 0; it < 40; ++it) {
    Vec3 r = p - x;
    Eigen::Matrix2d h;
    h << du.dot(du), du.dot(dv), du.dot(dv), dv.dot(dv);
    Eigen::Vector2d g(du.dot(r), dv.dot(r));
    h.diagonal().array() += 1e-12 + 1e-9 * h.diagonal().array();
    Eigen::Vector2d step = -h.ldlt().solve(g);
    double scale = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 20; ++ls) {
      double nu = u + scale * step.x(), nv = v + scale * step.y();
      fit_to_domain(s, nu, nv);
      Vec3 np, ndu, ndv;
      derivatives(s, nu, nv, np, ndu, ndv);
      double nf = (np - x).squaredNorm();
      if (nf < f) {
        double moved = std::abs(nu - u) + std::abs(nv - v);
        u = nu;
        v = nv;
        p = np;
        du = ndu;
        dv = ndv;
        improved = f - nf > 1e-30 && moved > 1e-15;
        f = nf;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) break;
  }
  return {p, u, v, std::sqrt(f)};
}

}  // namespace

SurfaceProjection project(const Surface& s, const Vec3& x) {
  double u = 0, v = 0;
  if (surface_parameters(s, x, u, v)) {
    if (fit_to_domain(s, u, v)) {
      Vec3 foot = evaluate(s, u, v);
      return {foot, u, v, (foot - x).norm()};
    }
  }
  // Seed search on a coarse parameter grid, then local refinement from the
  // best seeds (and from the clamped analytic guess, if any).
  constexpr int kSeeds = 16;
  struct Seed {
    double d2, u, v;
  };
  std::vector<Seed> seeds;
  seeds.reserve(kSeeds * kSeeds + 1);
  const auto& d = s.domain;
  for (int i = 0; i < kSeeds; ++i) {
    double su = grid_parameter(i, kSeeds, s.u_closed);
    for (int j = 0; j < kSeeds; ++j) {
      double tv = grid_parameter(j, kSeeds, false);
      double uu = d.u0 + su * (d.u1 - d.u0), vv = d.v0 + tv * (d.v1 - d.v0);
      seeds.push_back({(evaluate(s, uu, vv) - x).squaredNorm(), uu, vv});
    }
  }
  std::partial_sort(seeds.begin(), seeds.begin() + 3, seeds.end(),
                    [](const Seed& a, const Seed& b) { return a.d2 < b.d2; });
  SurfaceProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  auto consider = [&](double uu, double vv) {
    auto r = refine_projection(s, x, uu, vv);
    if (r.distance < best.distance) best = r;
  };
  for (int k = 0; k < 3; ++k) consider(seeds[static_cast<size_t>(k)].u, seeds[static_cast<size_t>(k)].v);
  if (surface_parameters(s, x, u, v)) consider(u, v);
  return best;
}

CurveProjection project(const Curve& c, const Vec3& x) {
  if (const auto* l = std::get_if<Line>(&c.shape)) {
    double t = (x - l->origin).dot(l->direction);
    if (!c.closed) t = std::clamp(t, std::min(c.t0, c.t1), std::max(c.t0, c.t1));
    Vec3 foot = l->origin + t * l->direction;
    return {foot, t, (foot - x).norm()};
  }
  if (const auto* ci = std::get_if<Circle>(&c.shape)) {
    Vec3 b = ci->normal.cross(ci->ref);
    Vec3 d = x - ci->center;
    double t = std::atan2(d.dot(b), d.dot(ci->ref));
    if (c.closed) {
      t = wrap_from(t, c.t0);
    } else {
      clamp_angle(t, c.t0, c.t1);
    }
    Vec3 foot = evaluate(c, t);
    return {foot, t, (foot - x).norm()};
  }
  // Seed + 1D Newton for ellipses and splines.
  constexpr int kSeeds = 96;
  double best_t = c.t0, best_d2 = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kSeeds; ++k) {
    double t = c.t0 + (c.t1 - c.t0) * k / kSeeds;
    double d2 = (evaluate(c, t) - x).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best_t = t;
    }
  }
  double lo = std::min(c.t0, c.t1), hi = std::max(c.t0, c.t1);
  double t = best_t;
  double h = (hi - lo) * 1e-5;
  for (int it = 0; it < 30; ++it) {
    Vec3 p = evaluate(c, t);
    Vec3 d1 = curve_tangent(c, t);
    Vec3 d2 = (curve_tangent(c, std::min(hi, t + h)) - curve_tangent(c, std::max(lo, t - h))) /
              (std::min(hi, t + h) - std::max(lo, t - h));
    double g = d1.dot(p - x);
    double hess = d1.dot(d1) + d2.dot(p - x);
    if (hess <= 1e-14) hess = d1.dot(d1) + 1e-14;
    double nt = t - g / hess;
    if (c.closed) {
      double span = hi - lo;
      nt = lo + std::fmod(std::fmod(nt - lo, span) + span, span);
    } else {
      nt = std::clamp(nt, lo, hi);
    }
    double nd2 = (evaluate(c, nt) - x).squaredNorm();
    if (nd2 >= best_d2) break;
    best_d2 = nd2;
    t = nt;
  }
  Vec3 foot = evaluate(c, t);
  return {foot, t, (foot - x).norm()};
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Ericson, Real-Time Collision Detection, 5.1.5.
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

SurfaceProjection project_to_grid(std::span<const Vec3> grid, bool u_closed, const Vec3& x) {
  const int side = kPatchSide;
  if (grid.size() != static_cast<size_t>(kPatchSamples)) throw ArgumentError("project_to_grid: grid must be 10x10");
  auto at = [&](int iu, int iv) -> const Vec3& { return grid[static_cast<size_t>((iu % side) * side + iv)]; };
  auto uparam = [&](int iu) { return grid_parameter(iu, side, u_closed); };
  const int urows = u_closed ? side : side - 1;
  SurfaceProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  for (int iu = 0; iu < urows; ++iu) {
    for (int iv = 0; iv + 1 < side; ++iv) {
      const Vec3& p00 = at(iu, iv);
      const Vec3& p01 = at(iu, iv + 1);
      const Vec3& p10 = at(iu + 1, iv);
      const Vec3& p11 = at(iu + 1, iv + 1);
      const double u0 = uparam(iu), u1 = u_closed && iu + 1 == side ? 1.0 : uparam(iu + 1);
      const double v0 = grid_parameter(iv, side, false), v1 = grid_parameter(iv + 1, side, false);
      const Vec3* tri[2][3] = {{&p00, &p10, &p11}, {&p00, &p11, &p01}};
      const double tu[2][3] = {{u0, u1, u1}, {u0, u1, u0}};
      const double tv[2][3] = {{v0, v0, v1}, {v0, v1, v1}};
      for (int t = 0; t < 2; ++t) {
        Vec3 q = closest_point_on_triangle(x, *tri[t][0], *tri[t][1], *tri[t][2]);
        double dist = (q - x).norm();
        if (dist < best.distance) {
          // Barycentric coordinates of q for the parameter estimate.
          Vec3 e0 = *tri[t][1] - *tri[t][0], e1 = *tri[t][2] - *tri[t][0], w = q - *tri[t][0];
          double d00 = e0.dot(e0), d01 = e0.dot(e1), d11 = e1.dot(e1), d20 = w.dot(e0), d21 = w.dot(e1);
          double den = d00 * d11 - d01 * d01;
          double b1 = 0, b2 = 0;
          if (std::abs(den) > 1e-300) {
            b1 = (d11 * d20 - d01 * d21) / den;
            b2 = (d00 * d21 - d01 * d20) / den;
          }
          double b0 = 1 - b1 - b2;
          best = {q, b0 * tu[t][0] + b1 * tu[t][1] + b2 * tu[t][2], b0 * tv[t][0] + b1 * tv[t][1] + b2 * tv[t][2], dist};
        }
      }
    }
  }
  return best;
}

CurveProjection project_to_polyline(std::span<const Vec3> samples, bool closed, const Vec3& x) {
  const int n = static_cast<int>(samples.size());
  if (n == 0) throw ArgumentError("project_to_polyline: empty sample set");
  CurveProjection best;
  best.distance = (samples[0] - x).norm();
  best.foot = samples[0];
  const int segs = closed ? n : n - 1;
  for (int i = 0; i < segs; ++i) {
    const Vec3& a = samples[static_cast<size_t>(i)];
    const Vec3& b = samples[static_cast<size_t>((i + 1) % n)];
    Vec3 ab = b - a;
    double len2 = ab.squaredNorm();
    double f = len2 > 0 ? std::clamp((x - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    Vec3 q = a + f * ab;
    double dist = (q - x).norm();
    if (dist < best.distance) {
      double denom = closed ? n : n - 1;
      best = {q, (i + f) / denom, dist};
    }
  }
  return best;
}

}  // namespace brepchain
