#include "brepchain/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace brepchain {

using json = nlohmann::json;

namespace {

constexpr std::string_view kFormat = "brepchain-complex";
/// Soft matrices larger than this in either dimension are written as triplets.
constexpr int kDenseLimit = 1000;

template <class... F>
struct overloaded : F... {
  using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

json vec(const Vec3& x) { return json::array({x.x(), x.y(), x.z()}); }

json vecs(const std::vector<Vec3>& xs) {
  json a = json::array();
  for (const auto& x : xs) a.push_back(vec(x));
  return a;
}

// ---------------------------------------------------------------- writing

json surface_json(const Surface& s) {
  json j = std::visit(
      overloaded{
          [](const Plane& p) { return json{{"kind", "plane"}, {"origin", vec(p.origin)}, {"e1", vec(p.e1)}, {"e2", vec(p.e2)}}; },
          [](const Sphere& p) {
            return json{{"kind", "sphere"}, {"center", vec(p.center)}, {"radius", p.radius}, {"axis", vec(p.axis)}, {"ref", vec(p.ref)}};
          },
          [](const Cylinder& p) {
            return json{{"kind", "cylinder"}, {"point", vec(p.point)}, {"axis", vec(p.axis)}, {"ref", vec(p.ref)}, {"radius", p.radius}};
          },
          [](const Cone& p) {
            return json{{"kind", "cone"}, {"apex", vec(p.apex)}, {"axis", vec(p.axis)}, {"ref", vec(p.ref)}, {"half_angle", p.half_angle}};
          },
          [](const Torus& p) {
            return json{{"kind", "torus"},          {"center", vec(p.center)},     {"axis", vec(p.axis)},
                        {"ref", vec(p.ref)},        {"major_radius", p.major_radius}, {"minor_radius", p.minor_radius}};
          },
          [](const SplineSurface& p) {
            return json{{"kind", "bspline"}, {"nu", p.nu}, {"nv", p.nv}, {"u_periodic", p.u_periodic}, {"control", vecs(p.control)}};
          },
      },
      s.shape);
  j["domain"] = json::array({s.domain.u0, s.domain.u1, s.domain.v0, s.domain.v1});
  j["u_closed"] = s.u_closed;
  return j;
}

json curve_json(const Curve& c) {
  json j = std::visit(
      overloaded{
          [](const Line& p) { return json{{"kind", "line"}, {"origin", vec(p.origin)}, {"direction", vec(p.direction)}}; },
          [](const Circle& p) {
            return json{{"kind", "circle"}, {"center", vec(p.center)}, {"normal", vec(p.normal)}, {"ref", vec(p.ref)}, {"radius", p.radius}};
          },
          [](const Ellipse& p) {
            return json{{"kind", "ellipse"},         {"center", vec(p.center)},         {"normal", vec(p.normal)},
                        {"major_dir", vec(p.major_dir)}, {"major_radius", p.major_radius}, {"minor_radius", p.minor_radius}};
          },
          [](const SplineCurve& p) { return json{{"kind", "bspline"}, {"periodic", p.periodic}, {"control", vecs(p.control)}}; },
      },
      c.shape);
  j["t0"] = c.t0;
  j["t1"] = c.t1;
  j["closed"] = c.closed;
  return j;
}

json binary_matrix_json(const BinaryMatrix& m) {
  json t = json::array();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (m(i, j)) t.push_back(json::array({i, j, 1}));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"triplets", t}};
}

json soft_matrix_json(const Eigen::MatrixXd& m) {
  json j{{"rows", m.rows()}, {"cols", m.cols()}};
  if (m.rows() < kDenseLimit && m.cols() < kDenseLimit) {
    json d = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
      d.push_back(row);
    }
    j["dense"] = d;
  } else {
    json t = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index k = 0; k < m.cols(); ++k)
        if (m(i, k) != 0.0) t.push_back(json::array({i, k, m(i, k)}));
    j["triplets"] = t;
  }
  return j;
}

json header(std::string_view kind, const Metadata& metadata) {
  json j;
  j["format"] = kFormat;
  j["version"] = kDocumentVersion;
  j["kind"] = kind;
  j["metadata"] = json::object();
  for (const auto& [k, v] : metadata) j["metadata"][k] = v;
  return j;
}

// ---------------------------------------------------------------- reading

class Reader {
 public:
  Reader(ParseMode mode, std::vector<std::string>& warnings) : mode_(mode), warnings_(warnings) {}

  const json& field(const json& obj, const char* key, const std::string& locus) const {
    if (!obj.is_object()) throw ParseError(locus, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(locus, std::string("missing field '") + key + "'");
    return *it;
  }

  double number(const json& j, const std::string& locus) const {
    if (!j.is_number()) throw ParseError(locus, "expected a number");
    double x = j.get<double>();
    if (!std::isfinite(x)) throw ParseError(locus, "non-finite number");
    return x;
  }

  double number(const json& obj, const char* key, const std::string& locus) const {
    return number(field(obj, key, locus), locus + "." + key);
  }

  int integer(const json& obj, const char* key, const std::string& locus) const {
    const json& j = field(obj, key, locus);
    if (!j.is_number_integer()) throw ParseError(locus + "." + key, "expected an integer");
    return j.get<int>();
  }

  bool boolean(const json& obj, const char* key, const std::string& locus) const {
    const json& j = field(obj, key, locus);
    if (!j.is_boolean()) throw ParseError(locus + "." + key, "expected true or false");
    return j.get<bool>();
  }

  std::string string(const json& obj, const char* key, const std::string& locus) const {
    const json& j = field(obj, key, locus);
    if (!j.is_string()) throw ParseError(locus + "." + key, "expected a string");
    return j.get<std::string>();
  }

  /// Probability in [0, 1]; lenient mode clamps with a warning.
  double probability(const json& j, const std::string& locus) const {
    double p = number(j, locus);
    if (p >= 0.0 && p <= 1.0) return p;
    if (mode_ == ParseMode::Strict) throw ParseError(locus, "probability " + json(p).dump() + " outside [0, 1]");
    warnings_.push_back(locus + ": probability " + json(p).dump() + " clamped to [0, 1]");
    return std::clamp(p, 0.0, 1.0);
  }

  double probability(const json& obj, const char* key, const std::string& locus) const {
    return probability(field(obj, key, locus), locus + "." + key);
  }

  Vec3 vec3(const json& j, const std::string& locus) const {
    if (!j.is_array() || j.size() != 3) throw ParseError(locus, "expected [x, y, z]");
    return Vec3(number(j[0], locus + "[0]"), number(j[1], locus + "[1]"), number(j[2], locus + "[2]"));
  }

  Vec3 vec3(const json& obj, const char* key, const std::string& locus) const {
    return vec3(field(obj, key, locus), locus + "." + key);
  }

  std::vector<Vec3> vec3s(const json& obj, const char* key, const std::string& locus) const {
    const json& a = field(obj, key, locus);
    const std::string where = locus + "." + key;
    if (!a.is_array()) throw ParseError(where, "expected an array of points");
    std::vector<Vec3> out;
    out.reserve(a.size());
    for (size_t i = 0; i < a.size(); ++i) out.push_back(vec3(a[i], where + "[" + std::to_string(i) + "]"));
    return out;
  }

  const json& array(const json& obj, const char* key, const std::string& locus) const {
    const json& a = field(obj, key, locus);
    if (!a.is_array()) throw ParseError(locus + "." + key, "expected an array");
    return a;
  }

  void check_id(const json& rec, size_t index, const std::string& locus) const {
    if (!rec.is_object()) throw ParseError(locus, "expected an object");
    if (!rec.contains("id")) return;
    if (!rec["id"].is_number_integer() || rec["id"].get<long long>() != static_cast<long long>(index))
      throw ParseError(locus + ".id", "ids must equal the record position");
  }

  Surface surface(const json& j, const std::string& locus) const {
    Surface s;
    const std::string kind = string(j, "kind", locus);
    if (kind == "plane") {
      s.shape = Plane{vec3(j, "origin", locus), vec3(j, "e1", locus), vec3(j, "e2", locus)};
    } else if (kind == "sphere") {
      s.shape = Sphere{vec3(j, "center", locus), number(j, "radius", locus), vec3(j, "axis", locus), vec3(j, "ref", locus)};
    } else if (kind == "cylinder") {
      s.shape = Cylinder{vec3(j, "point", locus), vec3(j, "axis", locus), vec3(j, "ref", locus), number(j, "radius", locus)};
    } else if (kind == "cone") {
      s.shape = Cone{vec3(j, "apex", locus), vec3(j, "axis", locus), vec3(j, "ref", locus), number(j, "half_angle", locus)};
    } else if (kind == "torus") {
      s.shape = Torus{vec3(j, "center", locus), vec3(j, "axis", locus), vec3(j, "ref", locus), number(j, "major_radius", locus),
                      number(j, "minor_radius", locus)};
    } else if (kind == "bspline") {
      SplineSurface sp;
      sp.nu = integer(j, "nu", locus);
      sp.nv = integer(j, "nv", locus);
      sp.u_periodic = boolean(j, "u_periodic", locus);
      sp.control = vec3s(j, "control", locus);
      if (sp.nu < 4 || sp.nv < 4 || sp.control.size() != static_cast<size_t>(sp.nu) * static_cast<size_t>(sp.nv))
        throw ParseError(locus + ".control", "control net does not match nu x nv (at least 4 x 4)");
      s.shape = std::move(sp);
    } else {
      throw ParseError(locus + ".kind", "unknown surface kind '" + kind + "'");
    }
    const json& d = array(j, "domain", locus);
    if (d.size() != 4) throw ParseError(locus + ".domain", "expected [u0, u1, v0, v1]");
    s.domain = {number(d[0], locus + ".domain[0]"), number(d[1], locus + ".domain[1]"), number(d[2], locus + ".domain[2]"),
                number(d[3], locus + ".domain[3]")};
    s.u_closed = boolean(j, "u_closed", locus);
    return s;
  }

  Curve curve(const json& j, const std::string& locus) const {
    Curve c;
    const std::string kind = string(j, "kind", locus);
    if (kind == "line") {
      c.shape = Line{vec3(j, "origin", locus), vec3(j, "direction", locus)};
    } else if (kind == "circle") {
      c.shape = Circle{vec3(j, "center", locus), vec3(j, "normal", locus), vec3(j, "ref", locus), number(j, "radius", locus)};
    } else if (kind == "ellipse") {
      c.shape = Ellipse{vec3(j, "center", locus), vec3(j, "normal", locus), vec3(j, "major_dir", locus),
                        number(j, "major_radius", locus), number(j, "minor_radius", locus)};
    } else if (kind == "bspline") {
      SplineCurve sp;
      sp.periodic = boolean(j, "periodic", locus);
      sp.control = vec3s(j, "control", locus);
      if (sp.control.size() < 4) throw ParseError(locus + ".control", "at least 4 control points required");
      c.shape = std::move(sp);
    } else {
      throw ParseError(locus + ".kind", "unknown curve kind '" + kind + "'");
    }
    c.t0 = number(j, "t0", locus);
    c.t1 = number(j, "t1", locus);
    c.closed = boolean(j, "closed", locus);
    return c;
  }

  /// Calls visit(i, j, value) for every stored entry after checking the shape.
  template <class Visit>
  void matrix(const json& topo, const char* key, int rows, int cols, const std::string& locus, Visit visit) const {
    const std::string where = locus + "." + key;
    const json& m = field(topo, key, locus);
    int r = integer(m, "rows", where), c = integer(m, "cols", where);
    if (r != rows || c != cols)
      throw StructuralError(where + ": matrix is " + std::to_string(r) + "x" + std::to_string(c) + ", element counts need " +
                            std::to_string(rows) + "x" + std::to_string(cols));
    if (m.contains("dense")) {
      const json& d = m["dense"];
      if (!d.is_array() || d.size() != static_cast<size_t>(rows))
        throw StructuralError(where + ".dense: expected " + std::to_string(rows) + " rows");
      for (int i = 0; i < rows; ++i) {
        const json& row = d[static_cast<size_t>(i)];
        if (!row.is_array() || row.size() != static_cast<size_t>(cols))
          throw StructuralError(where + ".dense[" + std::to_string(i) + "]: expected " + std::to_string(cols) + " entries");
        for (int k = 0; k < cols; ++k) {
          std::string at = where + ".dense[" + std::to_string(i) + "][" + std::to_string(k) + "]";
          visit(i, k, row[static_cast<size_t>(k)], at);
        }
      }
    } else if (m.contains("triplets")) {
      const json& t = m["triplets"];
      if (!t.is_array()) throw ParseError(where + ".triplets", "expected an array");
      for (size_t n = 0; n < t.size(); ++n) {
        std::string at = where + ".triplets[" + std::to_string(n) + "]";
        const json& e = t[n];
        if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer())
          throw ParseError(at, "expected [row, col, value]");
        int i = e[0].get<int>(), k = e[1].get<int>();
        if (i < 0 || i >= rows || k < 0 || k >= cols) throw ParseError(at, "index outside the matrix");
        visit(i, k, e[2], at);
      }
    } else {
      throw ParseError(where, "expected 'dense' or 'triplets'");
    }
  }

  ParseMode mode() const { return mode_; }
  void warn(std::string w) const { warnings_.push_back(std::move(w)); }

 private:
  ParseMode mode_;
  std::vector<std::string>& warnings_;
};

ChainComplex read_binary(const json& doc, const Reader& rd) {
  std::vector<CornerGeometry> corners;
  std::vector<CurveGeometry> curves;
  std::vector<PatchGeometry> patches;
  const json& cs = rd.array(doc, "corners", "document");
  for (size_t i = 0; i < cs.size(); ++i) {
    std::string locus = "corners[" + std::to_string(i) + "]";
    rd.check_id(cs[i], i, locus);
    corners.push_back({rd.vec3(cs[i], "point", locus)});
  }
  const json& es = rd.array(doc, "curves", "document");
  for (size_t i = 0; i < es.size(); ++i) {
    std::string locus = "curves[" + std::to_string(i) + "]";
    const json& r = es[i];
    rd.check_id(r, i, locus);
    CurveGeometry g;
    std::string type = rd.string(r, "type", locus);
    auto t = parse_curve_type(type);
    if (!t) throw ParseError(locus + ".type", "unknown curve type '" + type + "'");
    g.type = *t;
    g.closed = rd.boolean(r, "closed", locus);
    g.samples = rd.vec3s(r, "samples", locus);
    if (r.contains("primitive")) g.primitive = rd.curve(r["primitive"], locus + ".primitive");
    curves.push_back(std::move(g));
  }
  const json& fs = rd.array(doc, "patches", "document");
  for (size_t i = 0; i < fs.size(); ++i) {
    std::string locus = "patches[" + std::to_string(i) + "]";
    const json& r = fs[i];
    rd.check_id(r, i, locus);
    PatchGeometry g;
    std::string type = rd.string(r, "type", locus);
    auto t = parse_patch_type(type);
    if (!t) throw ParseError(locus + ".type", "unknown patch type '" + type + "'");
    g.type = *t;
    g.u_closed = rd.boolean(r, "u_closed", locus);
    g.grid = rd.vec3s(r, "grid", locus);
    if (r.contains("primitive")) g.primitive = rd.surface(r["primitive"], locus + ".primitive");
    patches.push_back(std::move(g));
  }
  ChainComplex c = make_complex(std::move(corners), std::move(curves), std::move(patches));
  const json& topo = rd.field(doc, "topology", "document");
  auto fill = [&](BinaryMatrix& m) {
    return [&rd, &m](int i, int k, const json& v, const std::string& at) {
      double x = rd.number(v, at);
      if (x != 0.0 && x != 1.0) {
        if (rd.mode() == ParseMode::Strict) throw ParseError(at, "binary entry must be 0 or 1");
        rd.warn(at + ": entry " + json(x).dump() + " rounded");
      }
      m.set(i, k, x >= 0.5);
    };
  };
  rd.matrix(topo, "fe", c.num_faces(), c.num_edges(), "topology", fill(c.fe));
  rd.matrix(topo, "ev", c.num_edges(), c.num_vertices(), "topology", fill(c.ev));
  rd.matrix(topo, "fv", c.num_faces(), c.num_vertices(), "topology", fill(c.fv));
  c.validate();
  if (!is_valid_topology(c)) {
    if (rd.mode() == ParseMode::Strict)
      throw StructuralError("topology: binary complex violates the manifold, endpoint, closure or dependency constraints");
    rd.warn("topology: binary complex violates the topology constraints");
  }
  return c;
}

template <size_t N, class Parse>
std::array<double, N> read_type_probs(const json& r, const std::string& locus, const Reader& rd, Parse parse) {
  std::array<double, N> probs{};
  const json& tp = rd.field(r, "type_probs", locus);
  if (!tp.is_object()) throw ParseError(locus + ".type_probs", "expected an object keyed by type name");
  for (auto it = tp.begin(); it != tp.end(); ++it) {
    auto t = parse(it.key());
    if (!t) throw ParseError(locus + ".type_probs", "unknown type '" + it.key() + "'");
    probs[static_cast<size_t>(*t)] = rd.probability(it.value(), locus + ".type_probs." + it.key());
  }
  return probs;
}

ProbabilisticComplex read_soft(const json& doc, const Reader& rd) {
  ProbabilisticComplex p;
  const json& cs = rd.array(doc, "corners", "document");
  for (size_t i = 0; i < cs.size(); ++i) {
    std::string locus = "corners[" + std::to_string(i) + "]";
    rd.check_id(cs[i], i, locus);
    p.corners.push_back({rd.probability(cs[i], "validness", locus), rd.vec3(cs[i], "point", locus)});
  }
  const json& es = rd.array(doc, "curves", "document");
  for (size_t i = 0; i < es.size(); ++i) {
    std::string locus = "curves[" + std::to_string(i) + "]";
    const json& r = es[i];
    rd.check_id(r, i, locus);
    SoftCurve s;
    s.validness = rd.probability(r, "validness", locus);
    s.openness = rd.probability(r, "openness", locus);
    s.type_probs = read_type_probs<kCurveTypeCount>(r, locus, rd, parse_curve_type);
    s.samples = rd.vec3s(r, "samples", locus);
    p.curves.push_back(std::move(s));
  }
  const json& fs = rd.array(doc, "patches", "document");
  for (size_t i = 0; i < fs.size(); ++i) {
    std::string locus = "patches[" + std::to_string(i) + "]";
    const json& r = fs[i];
    rd.check_id(r, i, locus);
    SoftPatch s;
    s.validness = rd.probability(r, "validness", locus);
    s.u_closed = rd.probability(r, "u_closed", locus);
    s.type_probs = read_type_probs<kPatchTypeCount>(r, locus, rd, parse_patch_type);
    s.grid = rd.vec3s(r, "grid", locus);
    p.patches.push_back(std::move(s));
  }
  const json& topo = rd.field(doc, "topology", "document");
  auto fill = [&rd](Eigen::MatrixXd& m, int rows, int cols) {
    m = Eigen::MatrixXd::Zero(rows, cols);
    return [&rd, &m](int i, int k, const json& v, const std::string& at) { m(i, k) = rd.probability(v, at); };
  };
  rd.matrix(topo, "fe", p.num_patches(), p.num_curves(), "topology", fill(p.fe, p.num_patches(), p.num_curves()));
  rd.matrix(topo, "ev", p.num_curves(), p.num_corners(), "topology", fill(p.ev, p.num_curves(), p.num_corners()));
  rd.matrix(topo, "fv", p.num_patches(), p.num_corners(), "topology", fill(p.fv, p.num_patches(), p.num_corners()));
  p.validate();
  return p;
}

std::atomic<unsigned long> g_temp_counter{0};

/// Re-raises a parse error with the file name in front of its locus.
[[noreturn]] void rethrow_in_file(const ParseError& e, const std::filesystem::path& path) {
  std::string msg = e.what();
  const std::string prefix = e.locus() + ": ";
  if (!e.locus().empty() && msg.starts_with(prefix)) msg.erase(0, prefix.size());
  throw ParseError(e.locus().empty() ? path.string() : path.string() + ": " + e.locus(), msg);
}

}  // namespace

std::string serialize_complex(const ChainComplex& c, const Metadata& metadata) {
  c.validate();
  json doc = header("binary", metadata);
  doc["corners"] = json::array();
  for (int i = 0; i < c.num_vertices(); ++i)
    doc["corners"].push_back({{"id", i}, {"point", vec(c.vertices[static_cast<size_t>(i)].point)}});
  doc["curves"] = json::array();
  for (int i = 0; i < c.num_edges(); ++i) {
    const auto& e = c.edges[static_cast<size_t>(i)];
    json r{{"id", i}, {"type", to_string(e.type)}, {"closed", e.closed}, {"samples", vecs(e.samples)}};
    if (e.primitive) r["primitive"] = curve_json(*e.primitive);
    doc["curves"].push_back(std::move(r));
  }
  doc["patches"] = json::array();
  for (int i = 0; i < c.num_faces(); ++i) {
    const auto& f = c.faces[static_cast<size_t>(i)];
    json r{{"id", i}, {"type", to_string(f.type)}, {"u_closed", f.u_closed}, {"grid", vecs(f.grid)}};
    if (f.primitive) r["primitive"] = surface_json(*f.primitive);
    doc["patches"].push_back(std::move(r));
  }
  doc["topology"] = {{"fe", binary_matrix_json(c.fe)}, {"ev", binary_matrix_json(c.ev)}, {"fv", binary_matrix_json(c.fv)}};
  return doc.dump(1) + "\n";
}

std::string serialize_soft(const ProbabilisticComplex& p, const Metadata& metadata) {
  p.validate();
  json doc = header("soft", metadata);
  doc["corners"] = json::array();
  for (int i = 0; i < p.num_corners(); ++i) {
    const auto& s = p.corners[static_cast<size_t>(i)];
    doc["corners"].push_back({{"id", i}, {"validness", s.validness}, {"point", vec(s.point)}});
  }
  doc["curves"] = json::array();
  for (int i = 0; i < p.num_curves(); ++i) {
    const auto& s = p.curves[static_cast<size_t>(i)];
    json tp = json::object();
    for (int k = 0; k < kCurveTypeCount; ++k) tp[std::string(to_string(static_cast<CurveType>(k)))] = s.type_probs[static_cast<size_t>(k)];
    doc["curves"].push_back(
        {{"id", i}, {"validness", s.validness}, {"openness", s.openness}, {"type_probs", tp}, {"samples", vecs(s.samples)}});
  }
  doc["patches"] = json::array();
  for (int i = 0; i < p.num_patches(); ++i) {
    const auto& s = p.patches[static_cast<size_t>(i)];
    json tp = json::object();
    for (int k = 0; k < kPatchTypeCount; ++k) tp[std::string(to_string(static_cast<PatchType>(k)))] = s.type_probs[static_cast<size_t>(k)];
    doc["patches"].push_back(
        {{"id", i}, {"validness", s.validness}, {"u_closed", s.u_closed}, {"type_probs", tp}, {"grid", vecs(s.grid)}});
  }
  doc["topology"] = {{"fe", soft_matrix_json(p.fe)}, {"ev", soft_matrix_json(p.ev)}, {"fv", soft_matrix_json(p.fv)}};
  return doc.dump(1) + "\n";
}

Document parse_document(std::string_view text, ParseMode mode) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("byte " + std::to_string(e.byte), std::string("malformed JSON: ") + e.what());
  }
  Document out;
  Reader rd(mode, out.warnings);
  if (rd.string(doc, "format", "document") != kFormat) throw ParseError("document.format", "not a brepchain-complex document");
  int version = rd.integer(doc, "version", "document");
  if (version != kDocumentVersion)
    throw ParseError("document.version", "unsupported version " + std::to_string(version));
  if (doc.contains("metadata")) {
    const json& m = doc["metadata"];
    if (!m.is_object()) throw ParseError("document.metadata", "expected an object");
    for (auto it = m.begin(); it != m.end(); ++it)
      out.metadata[it.key()] = it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
  }
  std::string kind = rd.string(doc, "kind", "document");
  if (kind == "binary")
    out.complex = read_binary(doc, rd);
  else if (kind == "soft")
    out.complex = read_soft(doc, rd);
  else
    throw ParseError("document.kind", "expected 'binary' or 'soft', got '" + kind + "'");
  return out;
}

Document load_document(const std::filesystem::path& path, ParseMode mode) {
  std::string text = read_file(path);
  try {
    return parse_document(text, mode);
  } catch (const ParseError& e) {
    rethrow_in_file(e, path);
  }
}

ChainComplex load_complex(const std::filesystem::path& path, ParseMode mode) {
  Document d = load_document(path, mode);
  if (!d.is_binary()) throw ParseError(path.string(), "expected a binary complex, found a soft one");
  return std::get<ChainComplex>(std::move(d.complex));
}

ProbabilisticComplex load_soft(const std::filesystem::path& path, ParseMode mode) {
  Document d = load_document(path, mode);
  if (d.is_binary()) return to_probabilistic(std::get<ChainComplex>(d.complex));
  return std::get<ProbabilisticComplex>(std::move(d.complex));
}

void save_complex(const ChainComplex& c, const std::filesystem::path& path, const Metadata& metadata) {
  write_file_atomic(path, serialize_complex(c, metadata));
}

void save_soft(const ProbabilisticComplex& p, const std::filesystem::path& path, const Metadata& metadata) {
  write_file_atomic(path, serialize_soft(p, metadata));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(g_temp_counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("write to " + tmp.string() + " failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw IoError("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read from " + path.string() + " failed");
  return ss.str();
}

// ---------------------------------------------------------------- points

std::string serialize_points(std::span<const Vec3> points, std::span<const int> labels) {
  if (!labels.empty() && labels.size() != points.size()) throw ArgumentError("serialize_points: label count mismatch");
  std::string out = labels.empty() ? "# x y z\n" : "# x y z label\n";
  char buf[128];
  for (size_t i = 0; i < points.size(); ++i) {
    const Vec3& p = points[i];
    int n = labels.empty() ? std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", p.x(), p.y(), p.z())
                           : std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %d\n", p.x(), p.y(), p.z(), labels[i]);
    out.append(buf, static_cast<size_t>(n));
  }
  return out;
}

LabeledPoints parse_points(std::string_view text) {
  LabeledPoints out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  int columns = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string locus = "line " + std::to_string(lineno);
    if (tok.size() != 3 && tok.size() != 4) throw ParseError(locus, "expected 'x y z' or 'x y z label'");
    if (columns < 0) columns = static_cast<int>(tok.size());
    if (static_cast<int>(tok.size()) != columns) throw ParseError(locus, "inconsistent column count");
    Vec3 p;
    for (int k = 0; k < 3; ++k) {
      size_t used = 0;
      try {
        p[k] = std::stod(tok[static_cast<size_t>(k)], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok[static_cast<size_t>(k)].size() || !std::isfinite(p[k])) throw ParseError(locus, "bad coordinate '" + tok[static_cast<size_t>(k)] + "'");
    }
    out.points.push_back(p);
    if (columns == 4) {
      size_t used = 0;
      int label = 0;
      try {
        label = std::stoi(tok[3], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok[3].size()) throw ParseError(locus, "bad label '" + tok[3] + "'");
      out.labels.push_back(label);
    }
  }
  return out;
}

void save_points(const std::filesystem::path& path, std::span<const Vec3> points, std::span<const int> labels) {
  write_file_atomic(path, serialize_points(points, labels));
}

LabeledPoints load_points(const std::filesystem::path& path) {
  std::string text = read_file(path);
  try {
    return parse_points(text);
  } catch (const ParseError& e) {
    rethrow_in_file(e, path);
  }
}

}  // namespace brepchain
