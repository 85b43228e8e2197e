#pragma once

// B-Rep chain complex: existing vertices, edges and faces with their binary
// incidence matrices and per-element geometry. Orientation is not modeled.

#include "brepchain/primitives.hpp"
#include "brepchain/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace brepchain {

/// Dense 0/1 matrix. Element counts stay in the hundreds, so dense storage is
/// simplest for the solver and the metrics.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  BinaryMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  bool operator()(int i, int j) const { return data_[index(i, j)] != 0; }
  void set(int i, int j, bool value) { data_[index(i, j)] = value ? 1 : 0; }

  int row_sum(int i) const;
  int col_sum(int j) const;
  int count() const;
  BinaryMatrix transposed() const;

  friend bool operator==(const BinaryMatrix& a, const BinaryMatrix& b) = default;

 private:
  size_t index(int i, int j) const { return static_cast<size_t>(i) * cols_ + j; }
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Integer product a * b (a: r x k, b: k x c), row-major.
std::vector<int> integer_product(const BinaryMatrix& a, const BinaryMatrix& b);

struct CornerGeometry {
  Vec3 point = Vec3::Zero();
};

struct CurveGeometry {
  CurveType type = CurveType::Line;
  bool closed = false;           // O[i] = !closed
  std::vector<Vec3> samples;     // kCurveSamples points
  std::optional<Curve> primitive;
};

struct PatchGeometry {
  PatchType type = PatchType::Plane;
  bool u_closed = false;
  std::vector<Vec3> grid;        // kPatchSide x kPatchSide, row-major by u
  std::optional<Surface> primitive;
};

/// All listed elements exist; the existence vectors V, E, F of the binary
/// formulation are implicitly all-ones.
struct ChainComplex {
  std::vector<CornerGeometry> vertices;
  std::vector<CurveGeometry> edges;
  std::vector<PatchGeometry> faces;
  BinaryMatrix fe;  // faces x edges
  BinaryMatrix ev;  // edges x vertices
  BinaryMatrix fv;  // faces x vertices

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_faces() const { return static_cast<int>(faces.size()); }

  /// Throws StructuralError on dimension mismatch, wrong sample counts or
  /// non-finite coordinates.
  void validate() const;
};

/// Creates an empty complex with correctly sized zero matrices.
ChainComplex make_complex(std::vector<CornerGeometry> vertices, std::vector<CurveGeometry> edges,
                          std::vector<PatchGeometry> faces);

struct TopologyResiduals {
  double manifold = 0.0;  // |sum_i FE[i,j] - 2E[j]|, averaged over edges
  double endpoint = 0.0;  // |sum_j EV[i,j] - 2E[i]O[i]|, averaged over edges
  double closure = 0.0;   // |(FE EV)[i,k] - 2FV[i,k]|, averaged over face/vertex pairs

  bool all_zero() const { return manifold == 0.0 && endpoint == 0.0 && closure == 0.0; }
};

TopologyResiduals topology_residuals(const ChainComplex& c);

/// Dependency inequalities between incidences and element existence. A face
/// flagged u-closed with an empty FE row is exempt from needing a boundary.
bool check_dependencies(const ChainComplex& c);

bool is_valid_topology(const ChainComplex& c);

}  // namespace brepchain
