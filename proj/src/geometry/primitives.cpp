#include "brepchain/primitives.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace brepchain {

namespace {

constexpr std::array<std::string_view, kCurveTypeCount> kCurveNames = {"line", "circle", "bspline", "ellipse"};
constexpr std::array<std::string_view, kPatchTypeCount> kPatchNames = {"plane", "cylinder", "torus",
                                                                       "bspline", "cone", "sphere"};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::string_view to_string(CurveType type) { return kCurveNames[static_cast<size_t>(type)]; }
std::string_view to_string(PatchType type) { return kPatchNames[static_cast<size_t>(type)]; }

std::optional<CurveType> parse_curve_type(std::string_view name) {
  for (size_t i = 0; i < kCurveNames.size(); ++i)
    if (kCurveNames[i] == name) return static_cast<CurveType>(i);
  return std::nullopt;
}

std::optional<PatchType> parse_patch_type(std::string_view name) {
  for (size_t i = 0; i < kPatchNames.size(); ++i)
    if (kPatchNames[i] == name) return static_cast<PatchType>(i);
  return std::nullopt;
}

PatchType patch_type_of(const SurfaceShape& shape) {
  return std::visit(overloaded{[](const Plane&) { return PatchType::Plane; },
                               [](const Sphere&) { return PatchType::Sphere; },
                               [](const Cylinder&) { return PatchType::Cylinder; },
                               [](const Cone&) { return PatchType::Cone; },
                               [](const Torus&) { return PatchType::Torus; },
                               [](const SplineSurface&) { return PatchType::BSpline; }},
                    shape);
}

CurveType curve_type_of(const CurveShape& shape) {
  return std::visit(overloaded{[](const Line&) { return CurveType::Line; },
                               [](const Circle&) { return CurveType::Circle; },
                               [](const Ellipse&) { return CurveType::Ellipse; },
                               [](const SplineCurve&) { return CurveType::BSpline; }},
                    shape);
}

Vec3 any_perpendicular(const Vec3& n) {
  Vec3 a = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return (a - a.dot(n) * n).normalized();
}

// ---------------------------------------------------------------------------
// Cubic B-spline basis.
// ---------------------------------------------------------------------------

void cubic_basis(int count, bool periodic, double t, int& first, double values[4], double derivs[4]) {
  if (periodic) {
    // Uniform periodic: `count` spans over [0, 1).
    double x = t * count;
    double fl = std::floor(x);
    double w = x - fl;
    int span = static_cast<int>(fl);
    span = ((span % count) + count) % count;
    first = span;
    const double w2 = w * w, w3 = w2 * w;
    values[0] = (1 - w) * (1 - w) * (1 - w) / 6.0;
    values[1] = (3 * w3 - 6 * w2 + 4) / 6.0;
    values[2] = (-3 * w3 + 3 * w2 + 3 * w + 1) / 6.0;
    values[3] = w3 / 6.0;
    if (derivs) {
      derivs[0] = -0.5 * (1 - w) * (1 - w) * count;
      derivs[1] = (1.5 * w2 - 2 * w) * count;
      derivs[2] = (-1.5 * w2 + w + 0.5) * count;
      derivs[3] = 0.5 * w2 * count;
    }
    return;
  }
  // Clamped uniform knots: 0,0,0,0, 1/s, ..., 1,1,1,1 with s = count - 3 spans.
  const int spans = count - 3;
  t = std::clamp(t, 0.0, 1.0);
  int span = std::min(static_cast<int>(t * spans), spans - 1);
  auto knot = [&](int i) {
    // Knot vector index i in [0, count + 3].
    int k = i - 3;
    if (k <= 0) return 0.0;
    if (k >= spans) return 1.0;
    return static_cast<double>(k) / spans;
  };
  const int k = span + 3;  // knot span index, U[k] <= t < U[k+1]
  // Piegl & Tiller A2.2 with derivative from the degree-2 basis.
  double left[4], right[4], n[4][4];
  n[0][0] = 1.0;
  for (int j = 1; j <= 3; ++j) {
    left[j] = t - knot(k + 1 - j);
    right[j] = knot(k + j) - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      n[j][r] = right[r + 1] + left[j - r];
      double temp = n[r][j - 1] / n[j][r];
      n[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n[j][j] = saved;
  }
  first = k - 3;
  for (int j = 0; j < 4; ++j) values[j] = n[j][3];
  if (derivs) {
    // N'_{i,3} = 3 (N_{i,2}/(U[i+3]-U[i]) - N_{i+1,2}/(U[i+4]-U[i+1]))
    double deg2[5] = {0, n[0][2], n[1][2], n[2][2], 0};
    for (int r = 0; r < 4; ++r) {
      int i = first + r;
      double a = 0.0, b = 0.0;
      double d1 = knot(i + 3) - knot(i);
      double d2 = knot(i + 4) - knot(i + 1);
      if (d1 > 0) a = deg2[r] / d1;
      if (d2 > 0) b = deg2[r + 1] / d2;
      derivs[r] = 3.0 * (a - b);
    }
  }
}

// ---------------------------------------------------------------------------
// Surfaces.
// ---------------------------------------------------------------------------

void derivatives(const Surface& s, double u, double v, Vec3& p, Vec3& du, Vec3& dv) {
  std::visit(
      overloaded{
          [&](const Plane& pl) {
            p = pl.origin + u * pl.e1 + v * pl.e2;
            du = pl.e1;
            dv = pl.e2;
          },
          [&](const Sphere& sp) {
            const Vec3 b = sp.axis.cross(sp.ref);
            const double cu = std::cos(u), su = std::sin(u), cv = std::cos(v), sv = std::sin(v);
            const Vec3 radial = cu * sp.ref + su * b;
            p = sp.center + sp.radius * (cv * radial + sv * sp.axis);
            du = sp.radius * cv * (-su * sp.ref + cu * b);
            dv = sp.radius * (-sv * radial + cv * sp.axis);
          },
          [&](const Cylinder& cy) {
            const Vec3 b = cy.axis.cross(cy.ref);
            const double cu = std::cos(u), su = std::sin(u);
            p = cy.point + v * cy.axis + cy.radius * (cu * cy.ref + su * b);
            du = cy.radius * (-su * cy.ref + cu * b);
            dv = cy.axis;
          },
          [&](const Cone& co) {
            const Vec3 b = co.axis.cross(co.ref);
            const double cu = std::cos(u), su = std::sin(u), ta = std::tan(co.half_angle);
            const Vec3 radial = cu * co.ref + su * b;
            p = co.apex + v * co.axis + v * ta * radial;
            du = v * ta * (-su * co.ref + cu * b);
            dv = co.axis + ta * radial;
          },
          [&](const Torus& to) {
            const Vec3 b = to.axis.cross(to.ref);
            const double cu = std::cos(u), su = std::sin(u), cv = std::cos(v), sv = std::sin(v);
            const Vec3 radial = cu * to.ref + su * b;
            p = to.center + (to.major_radius + to.minor_radius * cv) * radial + to.minor_radius * sv * to.axis;
            du = (to.major_radius + to.minor_radius * cv) * (-su * to.ref + cu * b);
            dv = -to.minor_radius * sv * radial + to.minor_radius * cv * to.axis;
          },
          [&](const SplineSurface& sp) {
            int fu, fv;
            double bu[4], dbu[4], bv[4], dbv[4];
            cubic_basis(sp.nu, sp.u_periodic, u, fu, bu, dbu);
            cubic_basis(sp.nv, false, v, fv, bv, dbv);
            p.setZero();
            du.setZero();
            dv.setZero();
            for (int a = 0; a < 4; ++a) {
              int iu = sp.u_periodic ? (fu + a) % sp.nu : fu + a;
              for (int c = 0; c < 4; ++c) {
                const Vec3& q = sp.at(iu, fv + c);
                p += bu[a] * bv[c] * q;
                du += dbu[a] * bv[c] * q;
                dv += bu[a] * dbv[c] * q;
              }
            }
          }},
      s.shape);
}

Vec3 evaluate(const Surface& s, double u, double v) {
  Vec3 p, du, dv;
  derivatives(s, u, v, p, du, dv);
  return p;
}

Vec3 evaluate_normalized(const Surface& s, double su, double tv) {
  const auto& d = s.domain;
  return evaluate(s, d.u0 + su * (d.u1 - d.u0), d.v0 + tv * (d.v1 - d.v0));
}

Vec3 surface_normal(const Surface& s, double u, double v) {
  Vec3 p, du, dv;
  derivatives(s, u, v, p, du, dv);
  Vec3 n = du.cross(dv);
  double len = n.norm();
  if (len < 1e-14) {
    // Degenerate (sphere pole, cone apex): use the radial direction.
    if (const auto* sp = std::get_if<Sphere>(&s.shape)) return (p - sp->center).normalized();
    return any_perpendicular(dv.norm() > 1e-14 ? dv.normalized() : Vec3::UnitZ());
  }
  return n / len;
}

double grid_parameter(int k, int side, bool periodic) {
  return periodic ? static_cast<double>(k) / side : static_cast<double>(k) / (side - 1);
}

std::vector<Vec3> sample_grid(const Surface& s, int side) {
  std::vector<Vec3> out;
  out.reserve(static_cast<size_t>(side) * side);
  for (int iu = 0; iu < side; ++iu)
    for (int iv = 0; iv < side; ++iv)
      out.push_back(evaluate_normalized(s, grid_parameter(iu, side, s.u_closed), grid_parameter(iv, side, false)));
  return out;
}

// ---------------------------------------------------------------------------
// Curves.
// ---------------------------------------------------------------------------

namespace {

void curve_derivative(const Curve& c, double t, Vec3& p, Vec3& d) {
  std::visit(overloaded{[&](const Line& l) {
                          p = l.origin + t * l.direction;
                          d = l.direction;
                        },
                        [&](const Circle& ci) {
                          const Vec3 b = ci.normal.cross(ci.ref);
                          p = ci.center + ci.radius * (std::cos(t) * ci.ref + std::sin(t) * b);
                          d = ci.radius * (-std::sin(t) * ci.ref + std::cos(t) * b);
                        },
                        [&](const Ellipse& el) {
                          const Vec3 b = el.normal.cross(el.major_dir);
                          p = el.center + el.major_radius * std::cos(t) * el.major_dir +
                              el.minor_radius * std::sin(t) * b;
                          d = -el.major_radius * std::sin(t) * el.major_dir + el.minor_radius * std::cos(t) * b;
                        },
                        [&](const SplineCurve& sc) {
                          const int n = static_cast<int>(sc.control.size());
                          int first;
                          double b[4], db[4];
                          cubic_basis(n, sc.periodic, t, first, b, db);
                          p.setZero();
                          d.setZero();
                          for (int k = 0; k < 4; ++k) {
                            const Vec3& q = sc.control[static_cast<size_t>(sc.periodic ? (first + k) % n : first + k)];
                            p += b[k] * q;
                            d += db[k] * q;
                          }
                        }},
             c.shape);
}

}  // namespace

Vec3 evaluate(const Curve& c, double t) {
  Vec3 p, d;
  curve_derivative(c, t, p, d);
  return p;
}

Vec3 curve_tangent(const Curve& c, double t) {
  Vec3 p, d;
  curve_derivative(c, t, p, d);
  return d;
}

std::vector<Vec3> sample_curve(const Curve& c, int n) {
  std::vector<Vec3> out;
  out.reserve(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    double f = c.closed ? static_cast<double>(k) / n : static_cast<double>(k) / (n - 1);
    out.push_back(evaluate(c, c.t0 + f * (c.t1 - c.t0)));
  }
  return out;
}

}  // namespace brepchain
