#include "brepchain/io.hpp"
#include "brepchain/tessellation.hpp"

#include <cmath>
#include <cstdio>

namespace brepchain {

namespace {

void append_vertex(std::string& out, const Vec3& p) {
  char buf[96];
  int n = std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
  out.append(buf, static_cast<size_t>(n));
}

/// A grid is unusable when a coordinate is non-finite or all samples coincide.
bool degenerate(const PatchGeometry& patch) {
  if (patch.grid.empty()) return true;
  double spread = 0.0;
  for (const auto& x : patch.grid) {
    if (!x.allFinite()) return true;
    spread = std::max(spread, (x - patch.grid.front()).norm());
  }
  return spread < 1e-12;
}

}  // namespace

MeshExport mesh_obj(const ChainComplex& c, int resolution) {
  if (resolution < 2) throw ArgumentError("mesh_obj: resolution must be at least 2");
  c.validate();
  MeshExport out;
  std::string& s = out.obj;
  s = "# brepchain mesh export\n";
  s += "# " + std::to_string(c.num_faces()) + " patches, " + std::to_string(c.num_edges()) + " curves, " +
       std::to_string(c.num_vertices()) + " corners\n";
  int next = 1;  // OBJ indices are 1-based
  out.patch_triangles.assign(static_cast<size_t>(c.num_faces()), 0);
  for (int f = 0; f < c.num_faces(); ++f) {
    const auto& face = c.faces[static_cast<size_t>(f)];
    if (degenerate(face)) {
      out.warnings.push_back("patch " + std::to_string(f) + ": degenerate sample grid, skipped");
      continue;
    }
    auto boundary = boundary_curves(c, f);
    PatchMesh mesh = tessellate_patch(face, TrimRegion::build(face, boundary), resolution);
    s += "g patch_" + std::to_string(f) + "_" + std::string(to_string(face.type)) + "\n";
    for (const auto& v : mesh.vertices) append_vertex(s, v);
    for (const auto& t : mesh.triangles)
      s += "f " + std::to_string(next + t[0]) + " " + std::to_string(next + t[1]) + " " + std::to_string(next + t[2]) + "\n";
    next += static_cast<int>(mesh.vertices.size());
    out.patch_triangles[static_cast<size_t>(f)] = static_cast<int>(mesh.triangles.size());
    out.triangles += static_cast<int>(mesh.triangles.size());
  }
  for (int e = 0; e < c.num_edges(); ++e) {
    const auto& edge = c.edges[static_cast<size_t>(e)];
    std::vector<Vec3> pts = edge.primitive ? sample_curve(*edge.primitive, 4 * resolution) : edge.samples;
    s += "g curve_" + std::to_string(e) + "_" + std::string(to_string(edge.type)) + "\n";
    for (const auto& p : pts) append_vertex(s, p);
    s += "l";
    for (size_t i = 0; i < pts.size(); ++i) s += " " + std::to_string(next + static_cast<int>(i));
    if (edge.closed) s += " " + std::to_string(next);
    s += "\n";
    next += static_cast<int>(pts.size());
    ++out.polylines;
  }
  for (int v = 0; v < c.num_vertices(); ++v) {
    s += "g corner_" + std::to_string(v) + "\n";
    append_vertex(s, c.vertices[static_cast<size_t>(v)].point);
    s += "p " + std::to_string(next++) + "\n";
    ++out.points;
  }
  return out;
}

MeshExport export_mesh(const ChainComplex& c, const std::filesystem::path& path, int resolution) {
  MeshExport m = mesh_obj(c, resolution);
  write_file_atomic(path, m.obj);
  return m;
}

}  // namespace brepchain
