#include "fit_common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace brepchain {

namespace {

/// Axis-aligned box with a distance query; used to skip projections that
/// cannot come within the energy cap.
struct Box {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());
  void add(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void inflate(double m) {
    lo.array() -= m;
    hi.array() += m;
  }
  double distance(const Vec3& p) const { return (p - p.cwiseMax(lo).cwiseMin(hi)).norm(); }
};

/// Box that contains the bounded patch. A spline lies in the hull of its
/// control net and a bare grid is its own triangulation; analytic patches use
/// a dense sampling plus a margin that exceeds the sagitta between samples.
Box patch_box(const PatchGeometry& f) {
  Box b;
  if (!f.primitive) {
    for (const auto& p : f.grid) b.add(p);
    return b;
  }
  if (const auto* sp = std::get_if<SplineSurface>(&f.primitive->shape)) {
    for (const auto& p : sp->control) b.add(p);
    return b;
  }
  for (const auto& p : sample_grid(*f.primitive, 24)) b.add(p);
  b.inflate(0.05 * (b.hi - b.lo).norm() + 1e-9);
  return b;
}

struct Incidence {
  std::vector<std::vector<int>> face_edges, face_verts, edge_faces, edge_verts, vert_edges, vert_faces;

  explicit Incidence(const ChainComplex& c)
      : face_edges(static_cast<size_t>(c.num_faces())),
        face_verts(static_cast<size_t>(c.num_faces())),
        edge_faces(static_cast<size_t>(c.num_edges())),
        edge_verts(static_cast<size_t>(c.num_edges())),
        vert_edges(static_cast<size_t>(c.num_vertices())),
        vert_faces(static_cast<size_t>(c.num_vertices())) {
    for (int f = 0; f < c.num_faces(); ++f)
      for (int e = 0; e < c.num_edges(); ++e)
        if (c.fe(f, e)) {
          face_edges[static_cast<size_t>(f)].push_back(e);
          edge_faces[static_cast<size_t>(e)].push_back(f);
        }
    for (int e = 0; e < c.num_edges(); ++e)
      for (int v = 0; v < c.num_vertices(); ++v)
        if (c.ev(e, v)) {
          edge_verts[static_cast<size_t>(e)].push_back(v);
          vert_edges[static_cast<size_t>(v)].push_back(e);
        }
    for (int f = 0; f < c.num_faces(); ++f)
      for (int v = 0; v < c.num_vertices(); ++v)
        if (c.fv(f, v)) {
          face_verts[static_cast<size_t>(f)].push_back(v);
          vert_faces[static_cast<size_t>(v)].push_back(f);
        }
  }
};

double patch_distance_sq(const Vec3& x, const PatchGeometry& f) {
  double d = project_point_to_patch(x, f).distance;
  return d * d;
}

/// Global energy: capped squared point-to-nearest-patch distances plus the
/// weighted adjacency misfits (curve samples to patches, corners to curves
/// and patches). Terms are cached per element so a sub-fit only recomputes
/// what it touches.
class Energy {
 public:
  Energy(const ChainComplex& c, const Incidence& inc, std::span<const Vec3> points, double cap, double adjacency_weight)
      : c_(c), inc_(inc), points_(points), cap2_(cap * cap), cap_(cap), w_adj_(adjacency_weight) {
    d2_.resize(static_cast<size_t>(c.num_faces()));
    fe_ = Eigen::MatrixXd::Zero(c.num_faces(), c.num_edges());
    ev_ = Eigen::MatrixXd::Zero(c.num_edges(), c.num_vertices());
    fv_ = Eigen::MatrixXd::Zero(c.num_faces(), c.num_vertices());
    for (int f = 0; f < c.num_faces(); ++f) patch_changed(f);
    for (int e = 0; e < c.num_edges(); ++e) curve_changed(e);
  }

  void patch_changed(int f) {
    const auto& face = c_.faces[static_cast<size_t>(f)];
    Box box = patch_box(face);
    auto& row = d2_[static_cast<size_t>(f)];
    row.assign(points_.size(), cap2_);
    for (size_t q = 0; q < points_.size(); ++q)
      if (box.distance(points_[q]) <= cap_) row[q] = std::min(cap2_, patch_distance_sq(points_[q], face));
    for (int e : inc_.face_edges[static_cast<size_t>(f)]) fe_(f, e) = curve_patch(e, f);
    for (int v : inc_.face_verts[static_cast<size_t>(f)])
      fv_(f, v) = patch_distance_sq(c_.vertices[static_cast<size_t>(v)].point, face);
  }

  void curve_changed(int e) {
    for (int f : inc_.edge_faces[static_cast<size_t>(e)]) fe_(f, e) = curve_patch(e, f);
    for (int v : inc_.edge_verts[static_cast<size_t>(e)]) ev_(e, v) = corner_curve(v, e);
  }

  void corner_changed(int v) {
    for (int e : inc_.vert_edges[static_cast<size_t>(v)]) ev_(e, v) = corner_curve(v, e);
    for (int f : inc_.vert_faces[static_cast<size_t>(v)])
      fv_(f, v) = patch_distance_sq(c_.vertices[static_cast<size_t>(v)].point, c_.faces[static_cast<size_t>(f)]);
  }

  double total() const {
    double s = 0.0;
    for (size_t q = 0; q < points_.size(); ++q) {
      double m = cap2_;
      for (const auto& row : d2_) m = std::min(m, row[q]);
      s += m;
    }
    return s + w_adj_ * (fe_.sum() + ev_.sum() + fv_.sum());
  }

  /// Input points per patch: nearest patch within the cap, ties to the lower
  /// index.
  std::vector<std::vector<int>> assignment() const {
    std::vector<std::vector<int>> out(d2_.size());
    for (size_t q = 0; q < points_.size(); ++q) {
      int best = -1;
      double m = std::numeric_limits<double>::infinity();
      for (size_t f = 0; f < d2_.size(); ++f)
        if (d2_[f][q] < m) {
          m = d2_[f][q];
          best = static_cast<int>(f);
        }
      if (best >= 0 && m < cap2_) out[static_cast<size_t>(best)].push_back(static_cast<int>(q));
    }
    return out;
  }

  struct Snapshot {
    std::vector<double> row;
    Eigen::MatrixXd fe, ev, fv;
  };
  Snapshot save(int face = -1) const {
    Snapshot s{{}, fe_, ev_, fv_};
    if (face >= 0) s.row = d2_[static_cast<size_t>(face)];
    return s;
  }
  void restore(Snapshot&& s, int face = -1) {
    fe_ = std::move(s.fe);
    ev_ = std::move(s.ev);
    fv_ = std::move(s.fv);
    if (face >= 0) d2_[static_cast<size_t>(face)] = std::move(s.row);
  }

 private:
  double curve_patch(int e, int f) const {
    const auto& s = c_.edges[static_cast<size_t>(e)].samples;
    if (s.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& x : s) sum += patch_distance_sq(x, c_.faces[static_cast<size_t>(f)]);
    return sum / static_cast<double>(s.size());
  }
  double corner_curve(int v, int e) const {
    const Vec3& x = c_.vertices[static_cast<size_t>(v)].point;
    return (project_point_to_curve(x, c_.edges[static_cast<size_t>(e)]) - x).squaredNorm();
  }

  const ChainComplex& c_;
  const Incidence& inc_;
  std::span<const Vec3> points_;
  double cap2_, cap_, w_adj_;
  std::vector<std::vector<double>> d2_;  // per patch, per input point
  Eigen::MatrixXd fe_, ev_, fv_;
};

PatchType stage_kind(PatchType predicted, int stage) {
  if (stage == 2 || predicted == PatchType::Plane || predicted == PatchType::Sphere) return predicted;
  return PatchType::BSpline;
}

void set_surface(PatchGeometry& f, Surface s) {
  f.grid = sample_grid(s);
  f.primitive = std::move(s);
}

void set_curve(CurveGeometry& e, Curve c) {
  e.samples = sample_curve(c);
  e.primitive = std::move(c);
}

/// Spline through a patch's grid at the grid's own parameters.
Surface spline_from_grid(const PatchGeometry& f) {
  std::vector<Vec2> params;
  params.reserve(f.grid.size());
  for (int iu = 0; iu < kPatchSide; ++iu)
    for (int iv = 0; iv < kPatchSide; ++iv)
      params.emplace_back(grid_parameter(iu, kPatchSide, f.u_closed), grid_parameter(iv, kPatchSide, false));
  std::vector<double> w(f.grid.size(), 1.0);
  return Surface{fit::spline_surface_from_params(f.grid, w, params, f.u_closed), {0, 1, 0, 1}, f.u_closed};
}

class Refiner {
 public:
  Refiner(const ChainComplex& c, std::span<const Vec3> points, const RefineOptions& o)
      : c_(c), inc_(c), points_(points), o_(o) {}

  RefineResult run() {
    initialize();
    Energy energy(c_, inc_, points_, o_.assignment_threshold, o_.adjacency_weight);
    report_.energy.push_back(energy.total());
    for (int r = 0; r < o_.k1; ++r) round(energy, 1);
    if (o_.k2 > 0) {
      convert(energy);
      report_.stage2_begin = report_.energy.size() - 1;
      for (int r = 0; r < o_.k2; ++r) round(energy, 2);
    } else {
      report_.stage2_begin = report_.energy.size();
    }
    return {std::move(c_), std::move(report_)};
  }

 private:
  void flag(const std::string& what, int index, const std::string& why) {
    report_.flags.push_back(what + " " + std::to_string(index) + ": " + why);
  }

  void initialize() {
    for (int f = 0; f < c_.num_faces(); ++f) {
      auto& face = c_.faces[static_cast<size_t>(f)];
      if (face.primitive) continue;
      try {
        PatchType kind = stage_kind(face.type, 1);
        Surface spline = spline_from_grid(face);
        if (kind == PatchType::BSpline) {
          set_surface(face, std::move(spline));
        } else {
          // The grid spline carries the grid's parameter frame.
          FittingProblem p;
          p.add(face.grid, 1.0);
          set_surface(face, fit_surface(kind, p, face.u_closed, &spline, o_.fit).surface);
        }
      } catch (const FitError& e) {
        flag("patch", f, std::string("initialization failed: ") + e.what());
      }
    }
    for (int i = 0; i < c_.num_edges(); ++i) {
      auto& edge = c_.edges[static_cast<size_t>(i)];
      if (edge.primitive) continue;
      FittingProblem p;
      p.add(edge.samples, 1.0);
      try {
        set_curve(edge, fit_curve(edge.type, p, edge.closed, nullptr, o_.fit).curve);
      } catch (const FitError& e) {
        flag("curve", i, std::string("initialization failed: ") + e.what());
      }
    }
  }

  FittingProblem patch_problem(int f, const std::vector<int>& assigned) const {
    const auto& face = c_.faces[static_cast<size_t>(f)];
    FittingProblem p;
    std::vector<Vec3> pts;
    pts.reserve(assigned.size());
    for (int q : assigned) pts.push_back(points_[static_cast<size_t>(q)]);
    p.add(pts, o_.point_weight);
    for (int e : inc_.face_edges[static_cast<size_t>(f)]) p.add(c_.edges[static_cast<size_t>(e)].samples, o_.adjacency_weight);
    for (int v : inc_.face_verts[static_cast<size_t>(f)])
      p.add(std::span<const Vec3>(&c_.vertices[static_cast<size_t>(v)].point, 1), o_.adjacency_weight);
    p.add(face.grid, o_.stabilization_weight, false);
    return p;
  }

  std::optional<Surface> fit_patch(int f, int stage, const std::vector<int>& assigned) {
    const auto& face = c_.faces[static_cast<size_t>(f)];
    FittingProblem p = patch_problem(f, assigned);
    const PatchType kind = stage_kind(face.type, stage);
    if (stage == 2 && o_.use_axis_cues && (kind == PatchType::Cylinder || kind == PatchType::Cone)) {
      AxisCue cue = axis_cues(c_, f);
      if (!cue.warning.empty() &&
          std::find(report_.warnings.begin(), report_.warnings.end(), cue.warning) == report_.warnings.end())
        report_.warnings.push_back(cue.warning);
      p.axis = cue.constraint;
    }
    try {
      return fit_surface(kind, p, face.u_closed, face.primitive ? &*face.primitive : nullptr, o_.fit).surface;
    } catch (const FitError& e) {
      flag("patch", f, e.what());
      return std::nullopt;
    }
  }

  std::optional<Curve> fit_edge(int i) {
    const auto& edge = c_.edges[static_cast<size_t>(i)];
    std::vector<Vec3> targets = edge.samples;
    const auto& faces = inc_.edge_faces[static_cast<size_t>(i)];
    if (!faces.empty()) {
      for (int it = 0; it < 5; ++it)
        for (auto& y : targets) {
          Vec3 sum = Vec3::Zero();
          for (int f : faces) sum += project_point_to_patch(y, c_.faces[static_cast<size_t>(f)]).foot;
          y = sum / static_cast<double>(faces.size());
        }
    }
    const auto& verts = inc_.edge_verts[static_cast<size_t>(i)];
    if (!edge.closed && !targets.empty() && !verts.empty()) {
      const size_t last = targets.size() - 1;
      const Vec3 a = targets.front(), b = targets.back();
      auto pt = [&](int v) { return c_.vertices[static_cast<size_t>(v)].point; };
      if (verts.size() == 1) {
        ((pt(verts[0]) - a).norm() <= (pt(verts[0]) - b).norm() ? targets[0] : targets[last]) = pt(verts[0]);
      } else {
        const Vec3 p0 = pt(verts[0]), p1 = pt(verts[1]);
        bool straight = (p0 - a).norm() + (p1 - b).norm() <= (p0 - b).norm() + (p1 - a).norm();
        targets[0] = straight ? p0 : p1;
        targets[last] = straight ? p1 : p0;
      }
    }
    FittingProblem p;
    p.add(targets, o_.adjacency_weight);
    p.add(edge.samples, o_.stabilization_weight, false);
    try {
      return fit_curve(edge.type, p, edge.closed, edge.primitive ? &*edge.primitive : nullptr, o_.fit).curve;
    } catch (const FitError& e) {
      flag("curve", i, e.what());
      return std::nullopt;
    }
  }

  Vec3 fit_corner(int v) const {
    const Vec3 prev = c_.vertices[static_cast<size_t>(v)].point;
    const auto& edges = inc_.vert_edges[static_cast<size_t>(v)];
    const auto& faces = inc_.vert_faces[static_cast<size_t>(v)];
    const double k = static_cast<double>(edges.size() + faces.size());
    if (k == 0) return prev;
    Vec3 x = prev;
    for (int it = 0; it < 10; ++it) {
      Vec3 sum = o_.stabilization_weight * prev;
      for (int e : edges) sum += o_.adjacency_weight * project_point_to_curve(x, c_.edges[static_cast<size_t>(e)]);
      for (int f : faces) sum += o_.adjacency_weight * project_point_to_patch(x, c_.faces[static_cast<size_t>(f)]).foot;
      x = sum / (o_.adjacency_weight * k + o_.stabilization_weight);
    }
    return x;
  }

  /// Applies a candidate change and keeps it only if the energy does not rise.
  template <class Slot, class Apply, class Notify>
  void guarded(Energy& energy, int face, Slot& slot, Apply&& apply, Notify&& notify) {
    const double before = report_.energy.back();
    auto saved_elem = slot;
    auto saved_terms = energy.save(face);
    apply(slot);
    notify();
    const double after = energy.total();
    if (after <= before) {
      report_.energy.push_back(after);
      return;
    }
    slot = std::move(saved_elem);
    energy.restore(std::move(saved_terms), face);
    ++report_.rejected;
    report_.energy.push_back(before);
  }

  void round(Energy& energy, int stage) {
    const auto assigned = energy.assignment();
    std::vector<std::optional<Surface>> surfaces(static_cast<size_t>(c_.num_faces()));
    for (int f = 0; f < c_.num_faces(); ++f) surfaces[static_cast<size_t>(f)] = fit_patch(f, stage, assigned[static_cast<size_t>(f)]);
    for (int f = 0; f < c_.num_faces(); ++f) {
      auto& s = surfaces[static_cast<size_t>(f)];
      if (!s) continue;
      guarded(energy, f, c_.faces[static_cast<size_t>(f)], [&](PatchGeometry& g) { set_surface(g, std::move(*s)); },
              [&] { energy.patch_changed(f); });
    }

    std::vector<std::optional<Curve>> curves(static_cast<size_t>(c_.num_edges()));
    for (int i = 0; i < c_.num_edges(); ++i) curves[static_cast<size_t>(i)] = fit_edge(i);
    for (int i = 0; i < c_.num_edges(); ++i) {
      auto& cv = curves[static_cast<size_t>(i)];
      if (!cv) continue;
      guarded(energy, -1, c_.edges[static_cast<size_t>(i)], [&](CurveGeometry& g) { set_curve(g, std::move(*cv)); },
              [&] { energy.curve_changed(i); });
    }

    std::vector<Vec3> corners(static_cast<size_t>(c_.num_vertices()));
    for (int v = 0; v < c_.num_vertices(); ++v) corners[static_cast<size_t>(v)] = fit_corner(v);
    for (int v = 0; v < c_.num_vertices(); ++v) {
      const Vec3 x = corners[static_cast<size_t>(v)];
      guarded(energy, -1, c_.vertices[static_cast<size_t>(v)], [&](CornerGeometry& g) { g.point = x; },
              [&] { energy.corner_changed(v); });
    }
  }

  /// Replaces stage-one splines by the predicted primitive types.
  void convert(Energy& energy) {
    const auto assigned = energy.assignment();
    for (int f = 0; f < c_.num_faces(); ++f) {
      auto& face = c_.faces[static_cast<size_t>(f)];
      if (stage_kind(face.type, 1) == face.type) continue;
      if (auto s = fit_patch(f, 2, assigned[static_cast<size_t>(f)])) {
        set_surface(face, std::move(*s));
        energy.patch_changed(f);
      } else {
        flag("patch", f, "kept as spline");
      }
    }
    report_.energy.push_back(energy.total());
  }

  ChainComplex c_;
  Incidence inc_;
  std::span<const Vec3> points_;
  RefineOptions o_;
  RefineReport report_;
};

}  // namespace

RefineResult refine(const ChainComplex& c, std::span<const Vec3> points, const RefineOptions& options) {
  c.validate();
  if (options.k1 < 0 || options.k2 < 0) throw ArgumentError("refine: iteration counts must be non-negative");
  if (!(options.assignment_threshold > 0)) throw ArgumentError("refine: assignment threshold must be positive");
  for (const auto& p : points)
    if (!p.allFinite()) throw ArgumentError("refine: non-finite input point");
  if (options.k1 == 0 && options.k2 == 0) return {c, {}};
  return Refiner(c, points, options).run();
}

}  // namespace brepchain
