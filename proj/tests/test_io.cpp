#include "brepchain/io.hpp"
#include "brepchain/refinement.hpp"
#include "brepchain/tessellation.hpp"
#include "brepchain/synth.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <map>
#include <set>
#include <sstream>

using namespace brepchain;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("brepchain_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

void expect_same(const ChainComplex& a, const ChainComplex& b) {
  ASSERT_EQ(a.num_faces(), b.num_faces());
  ASSERT_EQ(a.num_edges(), b.num_edges());
  ASSERT_EQ(a.num_vertices(), b.num_vertices());
  EXPECT_EQ(a.fe, b.fe);
  EXPECT_EQ(a.ev, b.ev);
  EXPECT_EQ(a.fv, b.fv);
  for (int i = 0; i < a.num_faces(); ++i) {
    EXPECT_EQ(a.faces[i].grid, b.faces[i].grid);
    EXPECT_EQ(a.faces[i].type, b.faces[i].type);
    EXPECT_EQ(a.faces[i].u_closed, b.faces[i].u_closed);
    EXPECT_EQ(a.faces[i].primitive.has_value(), b.faces[i].primitive.has_value());
  }
  for (int i = 0; i < a.num_edges(); ++i) {
    EXPECT_EQ(a.edges[i].samples, b.edges[i].samples);
    EXPECT_EQ(a.edges[i].closed, b.edges[i].closed);
  }
  for (int i = 0; i < a.num_vertices(); ++i) EXPECT_EQ(a.vertices[i].point, b.vertices[i].point);
}

int count_lines(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) n += line.rfind(prefix, 0) == 0;
  return n;
}

}  // namespace

using IoFiles = TempDir;

TEST_F(IoFiles, BinaryRoundTrip) {
  for (const auto& spec : shape_families()) {
    ChainComplex c = generate_gt(spec);
    fs::path p = dir_ / (to_string(spec) + ".json");
    save_complex(c, p, {{"shape", to_string(spec)}});
    Document d = load_document(p);
    ASSERT_TRUE(d.is_binary());
    EXPECT_EQ(d.metadata.at("shape"), to_string(spec));
    const ChainComplex& back = std::get<ChainComplex>(d.complex);
    expect_same(c, back);
    EXPECT_EQ(serialize_complex(back, d.metadata), read_file(p));
    // Evaluated geometry matches too.
    for (int i = 0; i < c.num_faces(); ++i)
      if (c.faces[i].primitive)
        EXPECT_EQ(sample_grid(*back.faces[i].primitive), sample_grid(*c.faces[i].primitive));
  }
}

TEST_F(IoFiles, SoftRoundTrip) {
  ChainComplex c = generate_gt({ShapeKind::LBracket});
  CorruptionParams cp;
  cp.sigma_g = 0.01;
  cp.beta = 0.2;
  cp.topology_beta = 0.2;
  cp.spurious = 2;
  cp.far = 1;
  cp.seed = 4;
  ProbabilisticComplex p = corrupt(c, cp);
  fs::path path = dir_ / "soft.json";
  save_soft(p, path);
  ProbabilisticComplex q = load_soft(path);
  EXPECT_EQ(q.fe, p.fe);
  EXPECT_EQ(q.ev, p.ev);
  EXPECT_EQ(q.fv, p.fv);
  for (int i = 0; i < p.num_patches(); ++i) {
    EXPECT_EQ(q.patches[i].grid, p.patches[i].grid);
    EXPECT_EQ(q.patches[i].type_probs, p.patches[i].type_probs);
    EXPECT_EQ(q.patches[i].validness, p.patches[i].validness);
  }
  for (int i = 0; i < p.num_curves(); ++i) EXPECT_EQ(q.curves[i].openness, p.curves[i].openness);
  EXPECT_EQ(serialize_soft(q), read_file(path));
  EXPECT_THROW(load_complex(path), ParseError);
  // Binary documents lift to certainty-1 soft complexes.
  save_complex(c, dir_ / "gt.json");
  ProbabilisticComplex lifted = load_soft(dir_ / "gt.json");
  EXPECT_EQ(lifted.fe, to_probabilistic(c).fe);
}

TEST_F(IoFiles, TruncatedFile) {
  ChainComplex c = generate_gt({ShapeKind::Cube});
  std::string text = serialize_complex(c);
  write_file_atomic(dir_ / "cut.json", text.substr(0, text.size() / 2));
  EXPECT_THROW(load_complex(dir_ / "cut.json"), ParseError);
  EXPECT_THROW(load_complex(dir_ / "missing.json"), IoError);
}

TEST(IoParse, OutOfRangeProbability) {
  ProbabilisticComplex p = to_probabilistic(generate_gt({ShapeKind::Cube}));
  auto j = nlohmann::json::parse(serialize_soft(p));
  j["curves"][3]["validness"] = 1.2;
  try {
    parse_document(j.dump());
    FAIL() << "strict mode accepted 1.2";
  } catch (const ParseError& e) {
    EXPECT_NE(e.locus().find("curves[3]"), std::string::npos);
  }
  Document d = parse_document(j.dump(), ParseMode::Lenient);
  EXPECT_FALSE(d.warnings.empty());
  EXPECT_EQ(std::get<ProbabilisticComplex>(d.complex).curves[3].validness, 1.0);
}

TEST(IoParse, DimensionMismatch) {
  auto j = nlohmann::json::parse(serialize_complex(generate_gt({ShapeKind::Cube})));
  j["topology"]["fe"]["rows"] = 5;
  EXPECT_THROW(parse_document(j.dump()), StructuralError);
}

TEST(IoParse, InvalidTopologyStrictVersusLenient) {
  ChainComplex c = generate_gt({ShapeKind::Cube});
  int edge = 0;
  while (!c.fe(0, edge)) ++edge;
  c.fe.set(0, edge, false);
  std::string text = serialize_complex(c);
  EXPECT_THROW(parse_document(text), StructuralError);
  Document d = parse_document(text, ParseMode::Lenient);
  EXPECT_FALSE(d.warnings.empty());
}

TEST(IoParse, Garbage) {
  EXPECT_THROW(parse_document("{\"format\": 3"), ParseError);
  EXPECT_THROW(parse_document("[]"), ParseError);
  EXPECT_THROW(parse_document(R"({"format":"brepchain-complex","version":99,"kind":"binary"})"), ParseError);
}

TEST_F(IoFiles, Points) {
  ChainComplex c = generate_gt({ShapeKind::Sphere});
  PointCloud pc = sample_point_cloud(c, 300, 0.01, {}, 2);
  save_points(dir_ / "p.xyz", pc.points, pc.labels);
  LabeledPoints lp = load_points(dir_ / "p.xyz");
  EXPECT_EQ(lp.points, pc.points);
  EXPECT_EQ(lp.labels, pc.labels);
  LabeledPoints bare = parse_points("# comment\n0 1 2\n3 4 5\n");
  EXPECT_EQ(bare.points.size(), 2u);
  EXPECT_TRUE(bare.labels.empty());
  EXPECT_THROW(parse_points("0 1\n"), ParseError);
}

TEST(Mesh, CubeCounts) {
  ChainComplex c = generate_gt({ShapeKind::Cube});
  MeshExport m = mesh_obj(c, 8);
  EXPECT_EQ(m.polylines, 12);
  EXPECT_EQ(m.points, 8);
  EXPECT_EQ(count_lines(m.obj, "l "), 12);
  EXPECT_EQ(count_lines(m.obj, "p "), 8);
  EXPECT_EQ(count_lines(m.obj, "g patch_"), 6);
  // Each square face is fully inside its boundary loop.
  for (int t : m.patch_triangles) EXPECT_EQ(t, 2 * 7 * 7);
  EXPECT_EQ(m.triangles, 6 * 2 * 7 * 7);
  EXPECT_TRUE(m.warnings.empty());
}

TEST(Mesh, SphereClosedWithoutPolylines) {
  MeshExport m = mesh_obj(generate_gt({ShapeKind::Sphere}), 12);
  EXPECT_EQ(m.polylines, 0);
  EXPECT_EQ(m.points, 0);
  EXPECT_GT(m.triangles, 0);
  EXPECT_EQ(count_lines(m.obj, "l "), 0);
}

TEST(Mesh, CappedCylinderSideUntrimmed) {
  const int res = 16;
  ChainComplex c = generate_gt({ShapeKind::CappedCylinder});
  MeshExport m = mesh_obj(c, res);
  EXPECT_EQ(m.polylines, 2);
  // The side's loops coincide with its border: every lattice cell survives.
  EXPECT_EQ(m.patch_triangles[0], 2 * res * (res - 1));
  // Caps: disc area fraction of the square parameter domain, roughly.
  for (int f : {1, 2}) {
    double frac = m.patch_triangles[static_cast<size_t>(f)] / (2.0 * (res - 1) * (res - 1));
    EXPECT_NEAR(frac, M_PI / 4, 0.08);
  }
}

TEST(Mesh, SideGridEdgesAreManifold) {
  const int res = 10;
  ChainComplex c = generate_gt({ShapeKind::CappedCylinder});
  TrimRegion trim = TrimRegion::build(c.faces[0], boundary_curves(c, 0));
  PatchMesh pm = tessellate_patch(c.faces[0], trim, res);
  std::map<std::pair<int, int>, int> uses;
  for (const auto& t : pm.triangles)
    for (int k = 0; k < 3; ++k) {
      int a = t[static_cast<size_t>(k)], b = t[static_cast<size_t>((k + 1) % 3)];
      uses[{std::min(a, b), std::max(a, b)}]++;
    }
  int boundary = 0;
  for (const auto& [e, n] : uses) {
    EXPECT_LE(n, 2);
    boundary += n == 1;
  }
  // Only the two rims of the periodic lattice are boundary edges.
  EXPECT_EQ(boundary, 2 * res);
}

TEST(Mesh, DegenerateGridSkipped) {
  ChainComplex c = generate_gt({ShapeKind::Cube});
  for (auto& p : c.faces[2].grid) p = Vec3(0.5, 0.5, 0.5);
  c.faces[2].primitive.reset();
  MeshExport m = mesh_obj(c, 6);
  EXPECT_EQ(m.patch_triangles[2], 0);
  EXPECT_FALSE(m.warnings.empty());
}

TEST(Lp, DumpAndSolution) {
  IlpModel m;
  int a = m.add_variable(VarKind::F, 0, -1, -1, 2.0);
  int b = m.add_variable(VarKind::E, 1, -1, -1, -1.0);
  int z = m.add_variable(VarKind::Z, 0, 1, 2, 0.0);
  m.add_constraint({{a, 1.0}, {b, -2.0}}, Sense::Equal, 0.0);
  m.add_constraint({{z, 1.0}, {a, -1.0}}, Sense::LessEqual, 0.0);
  std::string lp = lp_text(m);
  EXPECT_NE(lp.find("Maximize"), std::string::npos);
  EXPECT_NE(lp.find("Subject To"), std::string::npos);
  EXPECT_NE(lp.find("Binary"), std::string::npos);
  EXPECT_NE(lp.find("End"), std::string::npos);
  for (int v = 0; v < 3; ++v) EXPECT_NE(lp.find(m.name(v)), std::string::npos);
  std::string sol = m.name(a) + " 1\n" + m.name(z) + " 1\n";
  auto x = parse_lp_solution(m, sol);
  EXPECT_EQ(x, (std::vector<std::uint8_t>{1, 0, 1}));
  EXPECT_THROW(parse_lp_solution(m, m.name(a) + " 0.5\n"), ParseError);
}

TEST(Report, KeysAndJson) {
  ChainComplex c = generate_gt({ShapeKind::Cube});
  EvaluationReport r = evaluate(c, c);
  std::set<std::string> keys;
  for (const auto& [k, v] : report_entries(r)) keys.insert(k);
  for (const char* k : {"patch_fscore", "curve_fscore", "corner_fscore", "topology_error_fe", "validity_ratio",
                        "patch_residual", "inconsistency_closure"})
    EXPECT_TRUE(keys.count(k)) << k;
  EXPECT_FALSE(keys.count("p_coverage"));
  auto j = nlohmann::json::parse(report_json(r, {{"input", "cube"}}));
  EXPECT_EQ(j["patch_fscore"].get<double>(), 1.0);
  EXPECT_EQ(j["input"], "cube");
  EXPECT_NE(report_text(r).find("patch_fscore"), std::string::npos);
}
