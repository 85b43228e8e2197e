#include "brepchain/extraction.hpp"

namespace brepchain {

namespace {

ExtractionResult assemble(const ProbabilisticComplex& p, const BuiltIlp& built, IlpSolution solution) {
  const IlpModel& m = built.model;
  auto on = [&](VarKind kind, int i, int j = -1) {
    int v = m.find(kind, i, j);
    return v >= 0 && solution.x[static_cast<size_t>(v)];
  };
  ExtractionResult r;
  std::vector<CornerGeometry> vertices;
  std::vector<CurveGeometry> edges;
  std::vector<PatchGeometry> faces;
  for (int k : built.candidates.corners)
    if (on(VarKind::V, k)) {
      r.corner_source.push_back(k);
      vertices.push_back({p.corners[k].point});
    }
  for (int j : built.candidates.curves)
    if (on(VarKind::E, j)) {
      r.curve_source.push_back(j);
      const auto& c = p.curves[j];
      edges.push_back({c.likely_type(), !on(VarKind::O, j), c.samples, std::nullopt});
    }
  for (int i : built.candidates.patches)
    if (on(VarKind::F, i)) {
      r.patch_source.push_back(i);
      const auto& f = p.patches[i];
      faces.push_back({f.likely_type(), f.u_closed >= 0.5, f.grid, std::nullopt});
    }
  r.complex = make_complex(std::move(vertices), std::move(edges), std::move(faces));
  auto& c = r.complex;
  for (size_t a = 0; a < r.patch_source.size(); ++a) {
    for (size_t b = 0; b < r.curve_source.size(); ++b)
      c.fe.set(static_cast<int>(a), static_cast<int>(b), on(VarKind::FE, r.patch_source[a], r.curve_source[b]));
    for (size_t b = 0; b < r.corner_source.size(); ++b)
      c.fv.set(static_cast<int>(a), static_cast<int>(b), on(VarKind::FV, r.patch_source[a], r.corner_source[b]));
  }
  for (size_t a = 0; a < r.curve_source.size(); ++a)
    for (size_t b = 0; b < r.corner_source.size(); ++b)
      c.ev.set(static_cast<int>(a), static_cast<int>(b), on(VarKind::EV, r.curve_source[a], r.corner_source[b]));
  r.solution = std::move(solution);
  return r;
}

ExtractionResult attempt(const ProbabilisticComplex& suppressed, const ProbabilisticComplex& combined,
                         const ProximityMatrices& s, const ExtractionOptions& o, double cutoff) {
  IlpOptions ilp = o.ilp;
  ilp.validness_cutoff = cutoff;
  // Unary probabilities are untouched by combination, so the cutoff sees raw
  // (post-suppression) validness.
  BuiltIlp built = build_ilp(combined, s, ilp);
  IlpSolution sol = solve_ilp(built.model, o.solve);
  ExtractionResult r = assemble(suppressed, built, std::move(sol));
  r.cutoff_used = cutoff;
  return r;
}

}  // namespace

ExtractionResult extract_complex(const ProbabilisticComplex& p, const ExtractionOptions& o) {
  p.validate();
  ProbabilisticComplex suppressed = nms(p, o.nms_threshold);
  ProbabilisticComplex combined = combine_probabilities(suppressed);
  ProximityMatrices s = proximity_matrices(suppressed, o.fitness_eps);
  try {
    return attempt(suppressed, combined, s, o, o.ilp.validness_cutoff);
  } catch (const SolverError&) {
    if (!o.retry || o.retry_cutoff >= o.ilp.validness_cutoff) throw;
  }
  ExtractionResult r = attempt(suppressed, combined, s, o, o.retry_cutoff);
  r.retried = true;
  return r;
}

}  // namespace brepchain
