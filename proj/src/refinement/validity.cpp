#include "brepchain/refinement.hpp"

#include <cstring>

namespace brepchain {

ValidityResult validity_assessment(const ChainComplex& c, double threshold) {
  c.validate();
  ValidityResult r;
  auto record = [&](const char* kind, int higher, int lower, double d) {
    ++r.pairs;
    if (d <= threshold) return;
    Violation v;
    std::memcpy(v.kind, kind, 2);
    v.higher = higher;
    v.lower = lower;
    v.distance = d;
    r.violations.push_back(v);
  };
  for (int e = 0; e < c.num_edges(); ++e)
    for (int v = 0; v < c.num_vertices(); ++v)
      if (c.ev(e, v)) {
        const Vec3& x = c.vertices[static_cast<size_t>(v)].point;
        record("EV", e, v, (project_point_to_curve(x, c.edges[static_cast<size_t>(e)]) - x).norm());
      }
  for (int f = 0; f < c.num_faces(); ++f)
    for (int v = 0; v < c.num_vertices(); ++v)
      if (c.fv(f, v))
        record("FV", f, v,
               project_point_to_patch(c.vertices[static_cast<size_t>(v)].point, c.faces[static_cast<size_t>(f)]).distance);
  for (int f = 0; f < c.num_faces(); ++f)
    for (int e = 0; e < c.num_edges(); ++e)
      if (c.fe(f, e)) {
        const auto& s = c.edges[static_cast<size_t>(e)].samples;
        double sum = 0.0;
        for (const auto& x : s) sum += project_point_to_patch(x, c.faces[static_cast<size_t>(f)]).distance;
        record("FE", f, e, s.empty() ? 0.0 : sum / static_cast<double>(s.size()));
      }
  r.ratio = r.pairs > 0 ? static_cast<double>(r.pairs - static_cast<int>(r.violations.size())) / r.pairs : 1.0;
  return r;
}

}  // namespace brepchain
