#include "brepchain_c.h"

#include "brepchain/extraction.hpp"
#include "brepchain/io.hpp"
#include "brepchain/matching.hpp"
#include "brepchain/refinement.hpp"
#include "brepchain/synth.hpp"

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>

using namespace brepchain;

struct bc_complex {
  ChainComplex value;
};
struct bc_soft {
  ProbabilisticComplex value;
};
struct bc_points {
  LabeledPoints value;
};
struct bc_report {
  EvaluationReport value;
};

namespace {

thread_local std::string t_error;
thread_local std::string t_locus;

bc_status fail(bc_status s, const std::string& message, const std::string& locus = {}) {
  t_error = message;
  t_locus = locus;
  return s;
}

/// Runs `body`, mapping the library's exceptions onto status codes.
template <class F>
bc_status guard(F&& body) {
  t_error.clear();
  t_locus.clear();
  try {
    body();
    return BC_OK;
  } catch (const ParseError& e) {
    return fail(BC_ERR_PARSE, e.what(), e.locus());
  } catch (const ArgumentError& e) {
    return fail(BC_ERR_ARGUMENT, e.what());
  } catch (const StructuralError& e) {
    return fail(BC_ERR_STRUCTURE, e.what());
  } catch (const IoError& e) {
    return fail(BC_ERR_IO, e.what());
  } catch (const FitError& e) {
    return fail(BC_ERR_FIT, e.what());
  } catch (const SolverError& e) {
    switch (e.kind()) {
      case SolverFailure::Infeasible:
        return fail(BC_ERR_INFEASIBLE, e.what());
      case SolverFailure::Timeout:
        return fail(BC_ERR_TIMEOUT, e.what());
      case SolverFailure::EmptyCandidates:
        return fail(BC_ERR_EMPTY_CANDIDATES, e.what());
    }
    return fail(BC_ERR_INTERNAL, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(BC_ERR_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(BC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(BC_ERR_INTERNAL, e.what());
  }
}

#define BC_REQUIRE(cond, what) \
  if (!(cond)) throw ArgumentError(what)

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

ParseMode mode_of(int lenient) { return lenient ? ParseMode::Lenient : ParseMode::Strict; }

ExtractionOptions extraction_options(const bc_extract_params* p) {
  bc_extract_params d;
  bc_extract_params_default(&d);
  if (!p) p = &d;
  ExtractionOptions o;
  o.ilp.validness_cutoff = p->validness_cutoff;
  o.retry_cutoff = p->retry_cutoff;
  o.retry = p->retry != 0;
  o.nms_threshold = p->nms_threshold;
  o.fitness_eps = p->fitness_eps;
  o.ilp.w = p->w;
  o.ilp.unary_weight = p->unary_weight;
  o.ilp.binary_weight = p->binary_weight;
  o.ilp.pair_threshold = p->pair_threshold;
  o.solve.time_limit_s = p->time_limit_s;
  return o;
}

}  // namespace

extern "C" {

const char* bc_version(void) { return "1.0.0"; }

const char* bc_status_name(bc_status status) {
  switch (status) {
    case BC_OK: return "ok";
    case BC_ERR_ARGUMENT: return "argument_error";
    case BC_ERR_STRUCTURE: return "structural_error";
    case BC_ERR_PARSE: return "parse_error";
    case BC_ERR_IO: return "io_error";
    case BC_ERR_FIT: return "fit_error";
    case BC_ERR_INFEASIBLE: return "infeasible";
    case BC_ERR_TIMEOUT: return "timeout";
    case BC_ERR_EMPTY_CANDIDATES: return "empty_candidates";
    case BC_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* bc_last_error(void) { return t_error.c_str(); }
const char* bc_last_error_locus(void) { return t_locus.c_str(); }
void bc_string_free(char* s) { std::free(s); }

// ---------------------------------------------------------------- complexes

bc_status bc_complex_load(const char* path, int lenient, bc_complex** out) {
  return guard([&] {
    BC_REQUIRE(path && out, "bc_complex_load: null argument");
    *out = new bc_complex{load_complex(path, mode_of(lenient))};
  });
}

bc_status bc_complex_save(const bc_complex* c, const char* path) {
  return guard([&] {
    BC_REQUIRE(c && path, "bc_complex_save: null argument");
    save_complex(c->value, path);
  });
}

bc_status bc_complex_clone(const bc_complex* c, bc_complex** out) {
  return guard([&] {
    BC_REQUIRE(c && out, "bc_complex_clone: null argument");
    *out = new bc_complex{c->value};
  });
}

void bc_complex_free(bc_complex* c) { delete c; }

bc_status bc_complex_counts(const bc_complex* c, int* faces, int* edges, int* vertices) {
  return guard([&] {
    BC_REQUIRE(c, "bc_complex_counts: null complex");
    if (faces) *faces = c->value.num_faces();
    if (edges) *edges = c->value.num_edges();
    if (vertices) *vertices = c->value.num_vertices();
  });
}

bc_status bc_complex_residuals(const bc_complex* c, double out[3]) {
  return guard([&] {
    BC_REQUIRE(c && out, "bc_complex_residuals: null argument");
    TopologyResiduals r = topology_residuals(c->value);
    out[0] = r.manifold;
    out[1] = r.endpoint;
    out[2] = r.closure;
  });
}

bc_status bc_complex_is_valid(const bc_complex* c, int* valid) {
  return guard([&] {
    BC_REQUIRE(c && valid, "bc_complex_is_valid: null argument");
    *valid = is_valid_topology(c->value) ? 1 : 0;
  });
}

bc_status bc_complex_same_topology(const bc_complex* a, const bc_complex* b, int* same) {
  return guard([&] {
    BC_REQUIRE(a && b && same, "bc_complex_same_topology: null argument");
    *same = a->value.fe == b->value.fe && a->value.ev == b->value.ev && a->value.fv == b->value.fv;
  });
}

bc_status bc_complex_validity(const bc_complex* c, double threshold, double* ratio, int* pairs, char** violations_json) {
  return guard([&] {
    BC_REQUIRE(c, "bc_complex_validity: null complex");
    ValidityResult v = validity_assessment(c->value, threshold);
    if (ratio) *ratio = v.ratio;
    if (pairs) *pairs = v.pairs;
    if (violations_json) {
      nlohmann::ordered_json a = nlohmann::ordered_json::array();
      for (const auto& x : v.violations)
        a.push_back({{"kind", std::string(x.kind)}, {"higher", x.higher}, {"lower", x.lower}, {"distance", x.distance}});
      *violations_json = dup_string(a.dump());
    }
  });
}

bc_status bc_complex_export_mesh(const bc_complex* c, const char* path, int resolution, int* triangles, char** warnings) {
  return guard([&] {
    BC_REQUIRE(c && path, "bc_complex_export_mesh: null argument");
    MeshExport m = export_mesh(c->value, path, resolution);
    if (triangles) *triangles = m.triangles;
    if (warnings) *warnings = dup_string(join_lines(m.warnings));
  });
}

bc_status bc_soft_load(const char* path, int lenient, bc_soft** out) {
  return guard([&] {
    BC_REQUIRE(path && out, "bc_soft_load: null argument");
    *out = new bc_soft{load_soft(path, mode_of(lenient))};
  });
}

bc_status bc_soft_save(const bc_soft* s, const char* path) {
  return guard([&] {
    BC_REQUIRE(s && path, "bc_soft_save: null argument");
    save_soft(s->value, path);
  });
}

void bc_soft_free(bc_soft* s) { delete s; }

bc_status bc_soft_counts(const bc_soft* s, int* patches, int* curves, int* corners) {
  return guard([&] {
    BC_REQUIRE(s, "bc_soft_counts: null argument");
    if (patches) *patches = s->value.num_patches();
    if (curves) *curves = s->value.num_curves();
    if (corners) *corners = s->value.num_corners();
  });
}

// ---------------------------------------------------------------- synthesis

bc_status bc_synth_shape(const char* name, bc_complex** out) {
  return guard([&] {
    BC_REQUIRE(name && out, "bc_synth_shape: null argument");
    auto spec = parse_shape(name);
    if (!spec) throw ArgumentError(std::string("unknown shape '") + name + "'");
    *out = new bc_complex{generate_gt(*spec)};
  });
}

const char* bc_shape_families(void) {
  static const std::string names = [] {
    std::string s;
    for (const auto& f : shape_families()) s += (s.empty() ? "" : " ") + to_string(f);
    return s;
  }();
  return names.c_str();
}

bc_status bc_sample_points(const bc_complex* c, int n, double sigma, const double* halfspaces, int num_halfspaces,
                           uint64_t seed, bc_points** out) {
  return guard([&] {
    BC_REQUIRE(c && out, "bc_sample_points: null argument");
    BC_REQUIRE(num_halfspaces >= 0 && (num_halfspaces == 0 || halfspaces), "bc_sample_points: bad half-space list");
    std::vector<HalfSpace> mask;
    for (int i = 0; i < num_halfspaces; ++i) {
      const double* h = halfspaces + 4 * i;
      Vec3 nrm(h[0], h[1], h[2]);
      BC_REQUIRE(nrm.norm() > 0, "bc_sample_points: zero half-space normal");
      mask.push_back({nrm, h[3]});
    }
    PointCloud pc = sample_point_cloud(c->value, n, sigma, mask, seed);
    *out = new bc_points{{std::move(pc.points), std::move(pc.labels)}};
  });
}

void bc_corrupt_params_default(bc_corrupt_params* p) {
  if (!p) return;
  CorruptionParams d;
  *p = {d.sigma_g, d.beta, d.topology_beta, d.spurious, d.far, d.seed};
}

bc_status bc_corrupt(const bc_complex* c, const bc_corrupt_params* p, bc_soft** out) {
  return guard([&] {
    BC_REQUIRE(c && p && out, "bc_corrupt: null argument");
    CorruptionParams cp{p->sigma_g, p->beta, p->topology_beta, p->spurious, p->far, p->seed};
    *out = new bc_soft{corrupt(c->value, cp)};
  });
}

// ---------------------------------------------------------------- points

bc_status bc_points_load(const char* path, bc_points** out) {
  return guard([&] {
    BC_REQUIRE(path && out, "bc_points_load: null argument");
    *out = new bc_points{load_points(path)};
  });
}

bc_status bc_points_save(const bc_points* p, const char* path) {
  return guard([&] {
    BC_REQUIRE(p && path, "bc_points_save: null argument");
    save_points(path, p->value.points, p->value.labels);
  });
}

void bc_points_free(bc_points* p) { delete p; }

bc_status bc_points_count(const bc_points* p, int* count, int* labelled) {
  return guard([&] {
    BC_REQUIRE(p, "bc_points_count: null argument");
    if (count) *count = static_cast<int>(p->value.points.size());
    if (labelled) *labelled = !p->value.labels.empty();
  });
}

// ---------------------------------------------------------------- extraction

void bc_extract_params_default(bc_extract_params* p) {
  if (!p) return;
  ExtractionOptions o;
  p->validness_cutoff = o.ilp.validness_cutoff;
  p->retry_cutoff = o.retry_cutoff;
  p->retry = o.retry ? 1 : 0;
  p->nms_threshold = o.nms_threshold;
  p->fitness_eps = o.fitness_eps;
  p->w = o.ilp.w;
  p->unary_weight = o.ilp.unary_weight;
  p->binary_weight = o.ilp.binary_weight;
  p->pair_threshold = o.ilp.pair_threshold;
  p->time_limit_s = o.solve.time_limit_s;
}

bc_status bc_extract(const bc_soft* s, const bc_extract_params* p, bc_complex** out, bc_extract_info* info) {
  return guard([&] {
    BC_REQUIRE(s && out, "bc_extract: null argument");
    ExtractionResult r = extract_complex(s->value, extraction_options(p));
    if (info) {
      info->objective = r.solution.objective;
      info->gap = r.solution.gap;
      info->cutoff_used = r.cutoff_used;
      info->retried = r.retried ? 1 : 0;
      info->optimal = r.solution.status == SolveStatus::Optimal ? 1 : 0;
      info->nodes = r.solution.nodes;
    }
    *out = new bc_complex{std::move(r.complex)};
  });
}

bc_status bc_extract_lp(const bc_soft* s, const bc_extract_params* p, char** lp) {
  return guard([&] {
    BC_REQUIRE(s && lp, "bc_extract_lp: null argument");
    ExtractionOptions o = extraction_options(p);
    s->value.validate();
    ProbabilisticComplex suppressed = nms(s->value, o.nms_threshold);
    ProbabilisticComplex combined = combine_probabilities(suppressed);
    ProximityMatrices prox = proximity_matrices(suppressed, o.fitness_eps);
    BuiltIlp built = build_ilp(combined, prox, o.ilp);
    *lp = dup_string(lp_text(built.model));
  });
}

// ---------------------------------------------------------------- refinement

void bc_refine_params_default(bc_refine_params* p) {
  if (!p) return;
  RefineOptions o;
  p->k1 = o.k1;
  p->k2 = o.k2;
  p->point_weight = o.point_weight;
  p->adjacency_weight = o.adjacency_weight;
  p->stabilization_weight = o.stabilization_weight;
  p->assignment_threshold = o.assignment_threshold;
  p->use_axis_cues = o.use_axis_cues ? 1 : 0;
  p->max_iterations = o.fit.max_iterations;
}

bc_status bc_refine(const bc_complex* c, const bc_points* points, const bc_refine_params* p, bc_complex** out,
                    bc_refine_info* info, char** messages) {
  return guard([&] {
    BC_REQUIRE(c && points && out, "bc_refine: null argument");
    bc_refine_params d;
    bc_refine_params_default(&d);
    if (!p) p = &d;
    RefineOptions o;
    o.k1 = p->k1;
    o.k2 = p->k2;
    o.point_weight = p->point_weight;
    o.adjacency_weight = p->adjacency_weight;
    o.stabilization_weight = p->stabilization_weight;
    o.assignment_threshold = p->assignment_threshold;
    o.use_axis_cues = p->use_axis_cues != 0;
    o.fit.max_iterations = p->max_iterations;
    RefineResult r = refine(c->value, points->value.points, o);
    if (info) {
      const auto& e = r.report.energy;
      info->initial_energy = e.empty() ? 0.0 : e.front();
      info->final_energy = e.empty() ? 0.0 : e.back();
      info->rejected = r.report.rejected;
      info->flags = static_cast<int>(r.report.flags.size());
      info->warnings = static_cast<int>(r.report.warnings.size());
    }
    if (messages) *messages = dup_string(join_lines(r.report.flags) + join_lines(r.report.warnings));
    *out = new bc_complex{std::move(r.complex)};
  });
}

// ---------------------------------------------------------------- evaluation

void bc_eval_params_default(bc_eval_params* p) {
  if (!p) return;
  EvaluationOptions o;
  *p = {o.delta, o.eps_cov, o.validity_threshold};
}

bc_status bc_evaluate(const bc_complex* pred, const bc_complex* gt, const bc_points* points, const bc_eval_params* p,
                      bc_report** out) {
  return guard([&] {
    BC_REQUIRE(pred && gt && out, "bc_evaluate: null argument");
    EvaluationOptions o;
    if (p) o = {p->delta, p->eps_cov, p->validity_threshold};
    std::span<const Vec3> pts;
    std::span<const int> labels;
    if (points) {
      pts = points->value.points;
      labels = points->value.labels;
    }
    *out = new bc_report{evaluate(pred->value, gt->value, pts, labels, o)};
  });
}

void bc_report_free(bc_report* r) { delete r; }

bc_status bc_report_get(const bc_report* r, const char* key, double* value) {
  return guard([&] {
    BC_REQUIRE(r && key && value, "bc_report_get: null argument");
    for (const auto& [k, v] : report_entries(r->value))
      if (k == key) {
        *value = v;
        return;
      }
    throw ArgumentError(std::string("report has no value for '") + key + "'");
  });
}

bc_status bc_report_json(const bc_report* r, const char* extra_json, char** out) {
  return guard([&] {
    BC_REQUIRE(r && out, "bc_report_json: null argument");
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(report_json(r->value));
    if (extra_json) {
      nlohmann::ordered_json extra = nlohmann::ordered_json::parse(extra_json, nullptr, false);
      BC_REQUIRE(!extra.is_discarded(), "bc_report_json: extra is not valid JSON");
      BC_REQUIRE(extra.is_object(), "bc_report_json: extra must be a JSON object");
      for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    }
    *out = dup_string(j.dump(2) + "\n");
  });
}

bc_status bc_report_text(const bc_report* r, char** out) {
  return guard([&] {
    BC_REQUIRE(r && out, "bc_report_text: null argument");
    *out = dup_string(report_text(r->value));
  });
}

bc_status bc_write_file(const char* path, const char* text) {
  return guard([&] {
    BC_REQUIRE(path && text, "bc_write_file: null argument");
    write_file_atomic(path, text);
  });
}

}  // extern "C"
