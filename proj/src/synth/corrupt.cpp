#include "brepchain/synth.hpp"

#include <algorithm>
#include <random>

namespace brepchain {

namespace {

constexpr double kDuplicateShift = 0.01;
constexpr double kDuplicateJitter = 0.003;
constexpr double kFarExtent = 0.3;

class Corruptor {
 public:
  explicit Corruptor(const CorruptionParams& p) : p_(p), rng_(p.seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  double gauss(double sigma) { return sigma > 0 ? std::normal_distribution<double>(0.0, sigma)(rng_) : 0.0; }
  double blur(bool truth, double beta) { return truth ? uniform(1.0 - beta, 1.0) : uniform(0.0, beta); }

  Vec3 jitter(const Vec3& x, double sigma) { return x + Vec3(gauss(sigma), gauss(sigma), gauss(sigma)); }

  Vec3 unit_vector() {
    Vec3 d(gauss(1.0), gauss(1.0), gauss(1.0));
    return d.norm() > 1e-12 ? Vec3(d.normalized()) : Vec3(Vec3::UnitX());
  }

  /// A point well outside the unit cube that holds every ground truth.
  Vec3 far_point() { return Vec3(uniform(1.5, 2.0), uniform(0.0, 1.0), uniform(0.0, 1.0)); }

  template <size_t N>
  std::array<double, N> type_probs(int truth) {
    std::array<double, N> probs{};
    double sum = 0.0;
    for (size_t k = 0; k < N; ++k) sum += probs[k] = blur(static_cast<int>(k) == truth, p_.beta);
    if (sum > 0)
      for (auto& q : probs) q /= sum;
    else
      probs[static_cast<size_t>(truth)] = 1.0;
    return probs;
  }

  const CorruptionParams& p_;
  std::mt19937_64 rng_;
};

std::vector<Vec3> shifted(Corruptor& r, const std::vector<Vec3>& pts) {
  Vec3 shift = kDuplicateShift * r.unit_vector();
  std::vector<Vec3> out;
  out.reserve(pts.size());
  for (const auto& x : pts) out.push_back(r.jitter(x + shift, kDuplicateJitter));
  return out;
}

}  // namespace

ProbabilisticComplex corrupt(const ChainComplex& c, const CorruptionParams& params) {
  c.validate();
  if (!(params.sigma_g >= 0)) throw ArgumentError("corrupt: sigma_g must be non-negative");
  if (!(params.beta >= 0 && params.beta <= 1)) throw ArgumentError("corrupt: beta must lie in [0, 1]");
  if (!(params.topology_beta >= 0 && params.topology_beta <= 1))
    throw ArgumentError("corrupt: topology_beta must lie in [0, 1]");
  if (params.spurious < 0 || params.far < 0) throw ArgumentError("corrupt: element counts must be non-negative");

  Corruptor r(params);
  const double beta = params.beta;
  ProbabilisticComplex out;
  // Source element in `c` for every output element; -1 for far elements.
  std::vector<int> corner_src, curve_src, patch_src;

  for (int v = 0; v < c.num_vertices(); ++v) {
    out.corners.push_back({r.blur(true, beta), r.jitter(c.vertices[static_cast<size_t>(v)].point, params.sigma_g)});
    corner_src.push_back(v);
  }
  for (int e = 0; e < c.num_edges(); ++e) {
    const auto& edge = c.edges[static_cast<size_t>(e)];
    SoftCurve s;
    s.validness = r.blur(true, beta);
    s.openness = r.blur(!edge.closed, beta);
    s.type_probs = r.type_probs<kCurveTypeCount>(static_cast<int>(edge.type));
    for (const auto& x : edge.samples) s.samples.push_back(r.jitter(x, params.sigma_g));
    out.curves.push_back(std::move(s));
    curve_src.push_back(e);
  }
  for (int f = 0; f < c.num_faces(); ++f) {
    const auto& face = c.faces[static_cast<size_t>(f)];
    SoftPatch s;
    s.validness = r.blur(true, beta);
    s.u_closed = r.blur(face.u_closed, beta);
    s.type_probs = r.type_probs<kPatchTypeCount>(static_cast<int>(face.type));
    for (const auto& x : face.grid) s.grid.push_back(r.jitter(x, params.sigma_g));
    out.patches.push_back(std::move(s));
    patch_src.push_back(f);
  }

  // Near duplicates of real elements, chosen uniformly over all of them.
  const int real = c.num_vertices() + c.num_edges() + c.num_faces();
  for (int k = 0; k < params.spurious && real > 0; ++k) {
    int pick = static_cast<int>(r.uniform(0.0, real));
    pick = std::min(pick, real - 1);
    if (pick < c.num_vertices()) {
      SoftCorner s = out.corners[static_cast<size_t>(pick)];
      s.point = shifted(r, {s.point}).front();
      s.validness = r.uniform(0.5, 0.7);
      out.corners.push_back(s);
      corner_src.push_back(pick);
      continue;
    }
    pick -= c.num_vertices();
    if (pick < c.num_edges()) {
      SoftCurve s = out.curves[static_cast<size_t>(pick)];
      s.samples = shifted(r, s.samples);
      s.validness = r.uniform(0.5, 0.7);
      out.curves.push_back(std::move(s));
      curve_src.push_back(pick);
      continue;
    }
    pick -= c.num_edges();
    SoftPatch s = out.patches[static_cast<size_t>(pick)];
    s.grid = shifted(r, s.grid);
    s.validness = r.uniform(0.5, 0.7);
    out.patches.push_back(std::move(s));
    patch_src.push_back(pick);
  }

  // Distant clutter: a corner, a straight curve or a flat square patch.
  for (int k = 0; k < params.far; ++k) {
    int kind = std::min(2, static_cast<int>(r.uniform(0.0, 3.0)));
    Vec3 origin = r.far_point();
    if (kind == 0) {
      out.corners.push_back({r.uniform(0.35, 0.45), origin});
      corner_src.push_back(-1);
    } else if (kind == 1) {
      SoftCurve s;
      s.validness = r.uniform(0.35, 0.45);
      s.openness = r.blur(true, beta);
      s.type_probs = r.type_probs<kCurveTypeCount>(static_cast<int>(CurveType::Line));
      Vec3 d = r.unit_vector();
      for (int i = 0; i < kCurveSamples; ++i) s.samples.push_back(origin + kFarExtent * i / (kCurveSamples - 1) * d);
      out.curves.push_back(std::move(s));
      curve_src.push_back(-1);
    } else {
      SoftPatch s;
      s.validness = r.uniform(0.35, 0.45);
      s.u_closed = r.blur(false, beta);
      s.type_probs = r.type_probs<kPatchTypeCount>(static_cast<int>(PatchType::Plane));
      Vec3 n = r.unit_vector();
      Vec3 e1 = n.unitOrthogonal(), e2 = n.cross(e1);
      for (int i = 0; i < kPatchSide; ++i)
        for (int j = 0; j < kPatchSide; ++j)
          s.grid.push_back(origin + kFarExtent * (i * e1 + j * e2) / (kPatchSide - 1));
      out.patches.push_back(std::move(s));
      patch_src.push_back(-1);
    }
  }

  const double tb = params.topology_beta;
  auto blurred = [&](const BinaryMatrix& gt, const std::vector<int>& rows, const std::vector<int>& cols) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (size_t i = 0; i < rows.size(); ++i)
      for (size_t j = 0; j < cols.size(); ++j) {
        bool truth = rows[i] >= 0 && cols[j] >= 0 && gt(rows[i], cols[j]);
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r.blur(truth, tb);
      }
    return m;
  };
  out.fe = blurred(c.fe, patch_src, curve_src);
  out.ev = blurred(c.ev, curve_src, corner_src);
  out.fv = blurred(c.fv, patch_src, corner_src);
  out.validate();
  return out;
}

}  // namespace brepchain
