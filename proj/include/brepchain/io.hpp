#pragma once

// File formats: the JSON complex document, point clouds, OBJ mesh export,
// LP model dumps and evaluation reports. Format details are in
// docs/formats.md.

#include "brepchain/complex.hpp"
#include "brepchain/extraction.hpp"
#include "brepchain/ilp.hpp"
#include "brepchain/matching.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace brepchain {

inline constexpr int kDocumentVersion = 1;

/// Strict rejects out-of-range probabilities and binary complexes that break
/// the topology constraints; lenient clamps or accepts them with a warning.
enum class ParseMode { Strict, Lenient };

using Metadata = std::map<std::string, std::string>;

struct Document {
  std::variant<ChainComplex, ProbabilisticComplex> complex;
  Metadata metadata;
  std::vector<std::string> warnings;

  bool is_binary() const { return std::holds_alternative<ChainComplex>(complex); }
};

std::string serialize_complex(const ChainComplex& c, const Metadata& metadata = {});
std::string serialize_soft(const ProbabilisticComplex& p, const Metadata& metadata = {});

/// Throws ParseError naming the offending record, StructuralError on
/// dimension mismatch.
Document parse_document(std::string_view text, ParseMode mode = ParseMode::Strict);

Document load_document(const std::filesystem::path& path, ParseMode mode = ParseMode::Strict);
/// ParseError when the document is soft.
ChainComplex load_complex(const std::filesystem::path& path, ParseMode mode = ParseMode::Strict);
/// Binary documents are lifted with certainty 1.
ProbabilisticComplex load_soft(const std::filesystem::path& path, ParseMode mode = ParseMode::Strict);

void save_complex(const ChainComplex& c, const std::filesystem::path& path, const Metadata& metadata = {});
void save_soft(const ProbabilisticComplex& p, const std::filesystem::path& path, const Metadata& metadata = {});

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

/// Whitespace-separated "x y z [label]" lines; '#' starts a comment.
struct LabeledPoints {
  std::vector<Vec3> points;
  std::vector<int> labels;  // empty when the file carries none
};

std::string serialize_points(std::span<const Vec3> points, std::span<const int> labels = {});
LabeledPoints parse_points(std::string_view text);
void save_points(const std::filesystem::path& path, std::span<const Vec3> points, std::span<const int> labels = {});
LabeledPoints load_points(const std::filesystem::path& path);

struct MeshExport {
  std::string obj;
  int triangles = 0;
  int polylines = 0;
  int points = 0;
  std::vector<int> patch_triangles;  // per face, 0 when skipped
  std::vector<std::string> warnings;
};

inline constexpr int kExportResolution = 24;

/// OBJ text: one group per patch (trimmed triangles), per curve (an `l`
/// polyline) and per corner (a `p` point).
MeshExport mesh_obj(const ChainComplex& c, int resolution = kExportResolution);
MeshExport export_mesh(const ChainComplex& c, const std::filesystem::path& path, int resolution = kExportResolution);

/// CPLEX LP text with one binary column per model variable.
std::string lp_text(const IlpModel& model);
/// Reads "name value" pairs in the usual solver solution layouts; variables
/// that are not mentioned are 0. ParseError on a fractional value.
std::vector<std::uint8_t> parse_lp_solution(const IlpModel& model, std::string_view text);

/// Flat key/value view of a report; undefined metrics are omitted.
std::vector<std::pair<std::string, double>> report_entries(const EvaluationReport& r);
std::string report_json(const EvaluationReport& r, const Metadata& extra = {});
std::string report_text(const EvaluationReport& r);

}  // namespace brepchain
