#include "brepchain/synth.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

namespace brepchain {

namespace {

constexpr double kIncidenceTol = 1e-9;

CurveGeometry make_curve(CurveType type, const Curve& c) {
  CurveGeometry g;
  g.type = type;
  g.closed = c.closed;
  g.samples = sample_curve(c);
  g.primitive = c;
  return g;
}

PatchGeometry make_patch(PatchType type, const Surface& s) {
  PatchGeometry g;
  g.type = type;
  g.u_closed = s.u_closed;
  g.grid = sample_grid(s);
  g.primitive = s;
  return g;
}

CurveGeometry segment(const Vec3& a, const Vec3& b) {
  Vec3 d = b - a;
  double len = d.norm();
  return make_curve(CurveType::Line, Curve{Line{a, d / len}, 0.0, len, false});
}

/// Builds the complex and derives FE, EV and FV from exact geometry.
ChainComplex assemble(std::vector<Vec3> corners, std::vector<CurveGeometry> edges, std::vector<PatchGeometry> faces) {
  std::vector<CornerGeometry> verts;
  for (const auto& p : corners) verts.push_back({p});
  ChainComplex c = make_complex(std::move(verts), std::move(edges), std::move(faces));
  for (int f = 0; f < c.num_faces(); ++f) {
    const Surface& s = *c.faces[static_cast<size_t>(f)].primitive;
    for (int e = 0; e < c.num_edges(); ++e) {
      bool on = true;
      for (const auto& x : c.edges[static_cast<size_t>(e)].samples)
        if (project(s, x).distance > kIncidenceTol) {
          on = false;
          break;
        }
      c.fe.set(f, e, on);
    }
    for (int v = 0; v < c.num_vertices(); ++v)
      c.fv.set(f, v, project(s, c.vertices[static_cast<size_t>(v)].point).distance <= kIncidenceTol);
  }
  for (int e = 0; e < c.num_edges(); ++e) {
    const auto& edge = c.edges[static_cast<size_t>(e)];
    if (edge.closed) continue;
    const Vec3 a = evaluate(*edge.primitive, edge.primitive->t0), b = evaluate(*edge.primitive, edge.primitive->t1);
    for (int v = 0; v < c.num_vertices(); ++v) {
      const Vec3& x = c.vertices[static_cast<size_t>(v)].point;
      c.ev.set(e, v, (x - a).norm() <= kIncidenceTol || (x - b).norm() <= kIncidenceTol);
    }
  }
  c.validate();
  return c;
}

/// Prism over a convex or simple polygon in the xy plane.
ChainComplex extrude(const std::vector<Vec2>& poly, double z0, double z1) {
  const int n = static_cast<int>(poly.size());
  std::vector<Vec3> corners;
  for (int i = 0; i < n; ++i) corners.emplace_back(poly[i].x(), poly[i].y(), z0);
  for (int i = 0; i < n; ++i) corners.emplace_back(poly[i].x(), poly[i].y(), z1);
  std::vector<CurveGeometry> edges;
  for (int i = 0; i < n; ++i) edges.push_back(segment(corners[i], corners[(i + 1) % n]));
  for (int i = 0; i < n; ++i) edges.push_back(segment(corners[n + i], corners[n + (i + 1) % n]));
  for (int i = 0; i < n; ++i) edges.push_back(segment(corners[i], corners[n + i]));

  Vec2 lo = poly[0], hi = poly[0];
  for (const auto& p : poly) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec2 mid = (lo + hi) / 2;
  std::vector<PatchGeometry> faces;
  for (double z : {z0, z1}) {
    Plane cap{Vec3(mid.x(), mid.y(), z), Vec3::UnitX(), Vec3::UnitY()};
    faces.push_back(make_patch(PatchType::Plane,
                               Surface{cap, {lo.x() - mid.x(), hi.x() - mid.x(), lo.y() - mid.y(), hi.y() - mid.y()}, false}));
  }
  for (int i = 0; i < n; ++i) {
    Vec3 a = corners[i], b = corners[(i + 1) % n];
    double len = (b - a).norm();
    Plane side{a, (b - a) / len, Vec3::UnitZ()};
    faces.push_back(make_patch(PatchType::Plane, Surface{side, {0.0, len, 0.0, z1 - z0}, false}));
  }
  return assemble(std::move(corners), std::move(edges), std::move(faces));
}

ChainComplex cube() {
  const double lo = 0.2, side = 0.6;
  std::vector<Vec3> corners;
  for (int k = 0; k < 8; ++k) corners.emplace_back(lo + side * (k & 1), lo + side * ((k >> 1) & 1), lo + side * ((k >> 2) & 1));
  std::vector<CurveGeometry> edges;
  for (int axis = 0; axis < 3; ++axis)
    for (int k = 0; k < 8; ++k)
      if (!(k & (1 << axis))) edges.push_back(segment(corners[k], corners[k | (1 << axis)]));
  std::vector<PatchGeometry> faces;
  for (int axis = 0; axis < 3; ++axis) {
    Vec3 e1 = Vec3::Unit((axis + 1) % 3), e2 = Vec3::Unit((axis + 2) % 3);
    for (int high = 0; high < 2; ++high) {
      Vec3 origin = Vec3::Constant(lo);
      origin[axis] += high * side;
      faces.push_back(make_patch(PatchType::Plane, Surface{Plane{origin, e1, e2}, {0, side, 0, side}, false}));
    }
  }
  return assemble(std::move(corners), std::move(edges), std::move(faces));
}

ChainComplex capped_cylinder() {
  const Vec3 c(0.5, 0.5, 0.0);
  const double r = 0.3, z0 = 0.2, z1 = 0.8;
  const double two_pi = 2 * std::numbers::pi;
  std::vector<CurveGeometry> edges;
  for (double z : {z0, z1})
    edges.push_back(make_curve(CurveType::Circle,
                               Curve{Circle{Vec3(c.x(), c.y(), z), Vec3::UnitZ(), Vec3::UnitX(), r}, 0.0, two_pi, true}));
  std::vector<PatchGeometry> faces;
  faces.push_back(make_patch(PatchType::Cylinder,
                             Surface{Cylinder{c, Vec3::UnitZ(), Vec3::UnitX(), r}, {0.0, two_pi, z0, z1}, true}));
  for (double z : {z0, z1})
    faces.push_back(
        make_patch(PatchType::Plane, Surface{Plane{Vec3(c.x(), c.y(), z), Vec3::UnitX(), Vec3::UnitY()}, {-r, r, -r, r}, false}));
  return assemble({}, std::move(edges), std::move(faces));
}

ChainComplex sphere() {
  const double pi = std::numbers::pi;
  std::vector<PatchGeometry> faces;
  faces.push_back(make_patch(PatchType::Sphere, Surface{Sphere{Vec3::Constant(0.5), 0.35, Vec3::UnitZ(), Vec3::UnitX()},
                                                        {0.0, 2 * pi, -pi / 2, pi / 2},
                                                        true}));
  return assemble({}, {}, std::move(faces));
}

ChainComplex l_bracket() {
  std::vector<Vec2> poly = {{0.2, 0.2}, {0.8, 0.2}, {0.8, 0.4}, {0.4, 0.4}, {0.4, 0.8}, {0.2, 0.8}};
  return extrude(poly, 0.3, 0.7);
}

ChainComplex prism(int n) {
  std::vector<Vec2> poly;
  for (int i = 0; i < n; ++i) {
    double a = 2 * std::numbers::pi * i / n;
    poly.emplace_back(0.5 + 0.3 * std::cos(a), 0.5 + 0.3 * std::sin(a));
  }
  return extrude(poly, 0.25, 0.75);
}

}  // namespace

std::optional<ShapeSpec> parse_shape(std::string_view name) {
  if (name == "cube") return ShapeSpec{ShapeKind::Cube};
  if (name == "capped_cylinder") return ShapeSpec{ShapeKind::CappedCylinder};
  if (name == "sphere") return ShapeSpec{ShapeKind::Sphere};
  if (name == "l_bracket") return ShapeSpec{ShapeKind::LBracket};
  if (name.starts_with("prism")) {
    std::string_view rest = name.substr(5);
    if (rest.empty()) return ShapeSpec{ShapeKind::Prism, 6};
    int n = 0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), n);
    if (ec == std::errc() && ptr == rest.data() + rest.size()) return ShapeSpec{ShapeKind::Prism, n};
  }
  return std::nullopt;
}

std::string to_string(const ShapeSpec& shape) {
  switch (shape.kind) {
    case ShapeKind::Cube:
      return "cube";
    case ShapeKind::CappedCylinder:
      return "capped_cylinder";
    case ShapeKind::Sphere:
      return "sphere";
    case ShapeKind::LBracket:
      return "l_bracket";
    case ShapeKind::Prism:
      return "prism" + std::to_string(shape.sides);
  }
  return "unknown";
}

std::vector<ShapeSpec> shape_families() {
  return {{ShapeKind::Cube}, {ShapeKind::CappedCylinder}, {ShapeKind::Sphere}, {ShapeKind::LBracket}, {ShapeKind::Prism, 6}};
}

ChainComplex generate_gt(const ShapeSpec& shape) {
  switch (shape.kind) {
    case ShapeKind::Cube:
      return cube();
    case ShapeKind::CappedCylinder:
      return capped_cylinder();
    case ShapeKind::Sphere:
      return sphere();
    case ShapeKind::LBracket:
      return l_bracket();
    case ShapeKind::Prism:
      if (shape.sides < 3) throw ArgumentError("generate_gt: a prism needs at least 3 sides");
      return prism(shape.sides);
  }
  throw ArgumentError("generate_gt: unknown shape");
}

}  // namespace brepchain
