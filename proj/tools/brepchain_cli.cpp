// Command-line front end. Talks to the library only through the C API.

#include "brepchain_c.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

/// A failed library call, carried up to the per-file error report.
struct Failure {
  bc_status status;
  std::string message;
  std::string locus;
  std::string hint;
};

void check(bc_status s, std::string hint = {}) {
  if (s != BC_OK) throw Failure{s, bc_last_error(), bc_last_error_locus(), std::move(hint)};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Complex = std::unique_ptr<bc_complex, Deleter<bc_complex, bc_complex_free>>;
using Soft = std::unique_ptr<bc_soft, Deleter<bc_soft, bc_soft_free>>;
using Points = std::unique_ptr<bc_points, Deleter<bc_points, bc_points_free>>;
using Report = std::unique_ptr<bc_report, Deleter<bc_report, bc_report_free>>;

/// Owns a string allocated by the library.
std::string take(char* s) {
  std::string out = s ? s : "";
  bc_string_free(s);
  return out;
}

Complex load_complex(const std::string& path, bool lenient) {
  bc_complex* c = nullptr;
  check(bc_complex_load(path.c_str(), lenient, &c));
  return Complex(c);
}

Soft load_soft(const std::string& path, bool lenient) {
  bc_soft* s = nullptr;
  check(bc_soft_load(path.c_str(), lenient, &s));
  return Soft(s);
}

Points load_points(const std::string& path) {
  bc_points* p = nullptr;
  check(bc_points_load(path.c_str(), &p));
  return Points(p);
}

void write_text(const fs::path& path, const std::string& text) { check(bc_write_file(path.string().c_str(), text.c_str())); }

/// Input name without its directory, ".json"/".xyz" and a role suffix such as
/// ".gt" or ".soft"; "out/cube.soft.json" -> "cube".
std::string base_name(const std::string& path) {
  std::string name = fs::path(path).filename().string();
  for (const char* ext : {".json", ".xyz", ".obj"})
    if (name.size() > std::strlen(ext) && name.ends_with(ext)) {
      name.resize(name.size() - std::strlen(ext));
      break;
    }
  for (const char* role : {".gt", ".soft", ".extracted", ".refined", ".points"})
    if (name.size() > std::strlen(role) && name.ends_with(role)) {
      name.resize(name.size() - std::strlen(role));
      break;
    }
  return name;
}

fs::path sibling(const std::string& input, const std::string& suffix) {
  return fs::path(input).parent_path() / (base_name(input) + suffix);
}

/// Output path for `input`: the explicit --out for a single input, else
/// <out_dir>/<base><suffix>.
fs::path output_for(const std::string& input, const std::string& out, const std::string& out_dir, const std::string& suffix) {
  if (!out.empty()) return out;
  fs::path dir = out_dir.empty() ? fs::path(input).parent_path() : fs::path(out_dir);
  return dir / (base_name(input) + suffix);
}

json error_json(const std::string& input, const Failure& f) {
  json j;
  j["error"] = bc_status_name(f.status);
  j["message"] = f.message;
  if (!f.locus.empty()) j["locus"] = f.locus;
  if (!input.empty()) j["input"] = input;
  if (!f.hint.empty()) j["hint"] = f.hint;
  return j;
}

/// Runs `job` for every input on `jobs` worker threads. Messages are printed
/// in input order after all workers finish so output never interleaves.
int run_batch(const std::vector<std::string>& inputs, int jobs,
              const std::function<std::string(const std::string&)>& job) {
  const size_t n = inputs.size();
  std::vector<std::string> out(n);
  std::vector<std::optional<Failure>> err(n);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i; (i = next++) < n;) {
      try {
        out[i] = job(inputs[i]);
      } catch (const Failure& f) {
        err[i] = f;
      } catch (const std::exception& e) {
        err[i] = Failure{BC_ERR_INTERNAL, e.what(), {}, {}};
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  int status = kExitOk;
  for (size_t i = 0; i < n; ++i) {
    if (err[i]) {
      std::cerr << error_json(inputs[i], *err[i]).dump() << "\n";
      status = kExitFailure;
    } else if (!out[i].empty()) {
      std::cout << out[i];
    }
  }
  return status;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

struct ExtractFlags {
  bc_extract_params p;
  std::string lp_path;
  ExtractFlags() { bc_extract_params_default(&p); }

  void add(CLI::App* app) {
    app->add_option("--validness-cutoff", p.validness_cutoff, "Elements below this validness are dropped")->capture_default_str();
    app->add_option("--retry-cutoff", p.retry_cutoff, "Cutoff for the single retry after a failed solve")->capture_default_str();
    app->add_option("--retry", p.retry, "Retry once with the relaxed cutoff (0 or 1)")->capture_default_str();
    app->add_option("--nms-threshold", p.nms_threshold, "Chamfer distance below which duplicates are suppressed")->capture_default_str();
    app->add_option("--fitness-eps", p.fitness_eps, "Proximity fitness scale epsilon")->capture_default_str();
    app->add_option("--w", p.w, "Weight of the topology term against the geometry term")->capture_default_str();
    app->add_option("--unary-weight", p.unary_weight, "Objective weight of element variables")->capture_default_str();
    app->add_option("--binary-weight", p.binary_weight, "Objective weight of incidence variables")->capture_default_str();
    app->add_option("--pair-threshold", p.pair_threshold, "Minimum fitness for an incidence variable (0 keeps all)")->capture_default_str();
    app->add_option("--time-limit", p.time_limit_s, "Solver time limit in seconds")->capture_default_str();
  }
};

struct RefineFlags {
  bc_refine_params p;
  RefineFlags() { bc_refine_params_default(&p); }

  void add(CLI::App* app) {
    app->add_option("--k1", p.k1, "Spline-stage rounds")->capture_default_str();
    app->add_option("--k2", p.k2, "Typed-stage rounds")->capture_default_str();
    app->add_option("--point-weight", p.point_weight, "Fitting weight of assigned points")->capture_default_str();
    app->add_option("--adjacency-weight", p.adjacency_weight, "Fitting weight of adjacent elements")->capture_default_str();
    app->add_option("--stabilization-weight", p.stabilization_weight, "Fitting weight of the previous iterate")->capture_default_str();
    app->add_option("--assignment-threshold", p.assignment_threshold, "Maximum point-to-patch distance for assignment")->capture_default_str();
    app->add_option("--axis-cues", p.use_axis_cues, "Use topological axis cues (0 or 1)")->capture_default_str();
    app->add_option("--max-iterations", p.max_iterations, "Nonlinear least-squares iterations per fit")->capture_default_str();
  }
};

struct EvalFlags {
  bc_eval_params p;
  EvalFlags() { bc_eval_params_default(&p); }

  void add(CLI::App* app, bool with_validity = true) {
    app->add_option("--delta", p.delta, "F-score distance gate")->capture_default_str();
    app->add_option("--eps-cov", p.eps_cov, "Point coverage distance")->capture_default_str();
    if (with_validity)
      app->add_option("--validity-threshold", p.validity_threshold, "Validity distance threshold")->capture_default_str();
  }
};

std::string empty_candidates_hint(const bc_extract_params& p) {
  return "no candidate survived validness cutoff " + fmt(p.validness_cutoff) + " (retry cutoff " + fmt(p.retry_cutoff) +
         "); lower --validness-cutoff or --retry-cutoff";
}

Complex extract(const bc_soft* soft, const bc_extract_params& p, bc_extract_info& info) {
  bc_complex* c = nullptr;
  bc_status s = bc_extract(soft, &p, &c, &info);
  check(s, s == BC_ERR_EMPTY_CANDIDATES ? empty_candidates_hint(p) : "");
  return Complex(c);
}

json refine_info_json(const bc_refine_info& r) {
  return json{{"initial_energy", r.initial_energy}, {"final_energy", r.final_energy}, {"rejected_fits", r.rejected},
              {"flags", r.flags}, {"warnings", r.warnings}};
}

json extract_info_json(const bc_extract_info& e) {
  return json{{"objective", e.objective}, {"gap", e.gap}, {"cutoff_used", e.cutoff_used}, {"retried", e.retried != 0},
              {"optimal", e.optimal != 0}, {"nodes", e.nodes}};
}

std::vector<double> parse_halfspace(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  try {
    for (std::string tok; std::getline(ss, tok, ',');) v.push_back(std::stod(tok));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--mask", "bad number in '" + s + "'");
  }
  if (v.size() != 4) throw CLI::ValidationError("--mask", "expected nx,ny,nz,offset");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"brepchain: chain-complex extraction, refinement and evaluation for B-Rep reconstruction"};
  app.set_version_flag("--version", std::string(bc_version()));
  app.require_subcommand(1);
  int jobs = 1;
  bool lenient = false;
  app.add_option("-j,--jobs", jobs, "Worker threads for batches of input files")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_flag("--lenient", lenient, "Accept out-of-range probabilities and invalid topology with warnings");

  std::function<int()> action;

  // synth --------------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Write ground-truth complexes and sampled point clouds");
  std::vector<std::string> shapes;
  std::string synth_dir = ".";
  int n_points = 4000;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> masks;
  synth->add_option("--shape", shapes, "Shape names; default is every standard family");
  synth->add_option("--out-dir", synth_dir, "Output directory")->capture_default_str();
  synth->add_option("--points", n_points, "Point samples per shape (0 skips the point cloud)")->capture_default_str();
  synth->add_option("--sigma", sigma, "Normal noise standard deviation")->capture_default_str();
  synth->add_option("--seed", seed, "Random seed")->capture_default_str();
  synth->add_option("--mask", masks, "Remove points with n.x > offset; nx,ny,nz,offset (repeatable)");
  synth->callback([&] {
    action = [&] {
      if (shapes.empty()) {
        std::stringstream ss(bc_shape_families());
        for (std::string s; ss >> s;) shapes.push_back(s);
      }
      std::vector<double> hs;
      for (const auto& m : masks) {
        auto v = parse_halfspace(m);
        hs.insert(hs.end(), v.begin(), v.end());
      }
      fs::create_directories(synth_dir);
      return run_batch(shapes, jobs, [&](const std::string& shape) {
        bc_complex* raw = nullptr;
        check(bc_synth_shape(shape.c_str(), &raw));
        Complex c(raw);
        fs::path doc = fs::path(synth_dir) / (shape + ".gt.json");
        check(bc_complex_save(c.get(), doc.string().c_str()));
        std::string line = shape + ": " + doc.string();
        if (n_points > 0) {
          bc_points* pts = nullptr;
          check(bc_sample_points(c.get(), n_points, sigma, hs.data(), static_cast<int>(hs.size() / 4), seed, &pts));
          Points p(pts);
          fs::path xyz = fs::path(synth_dir) / (shape + ".points.xyz");
          check(bc_points_save(p.get(), xyz.string().c_str()));
          int count = 0;
          bc_points_count(p.get(), &count, nullptr);
          line += ", " + xyz.string() + " (" + std::to_string(count) + " points)";
        }
        return line + "\n";
      });
    };
  });

  // corrupt ------------------------------------------------------------------
  auto* corrupt = app.add_subcommand("corrupt", "Turn ground-truth complexes into soft predictions");
  std::vector<std::string> corrupt_inputs;
  std::string corrupt_out, corrupt_dir;
  bc_corrupt_params cp;
  bc_corrupt_params_default(&cp);
  corrupt->add_option("inputs", corrupt_inputs, "Binary complex documents")->required()->check(CLI::ExistingFile);
  corrupt->add_option("-o,--out", corrupt_out, "Output document (single input only)");
  corrupt->add_option("--out-dir", corrupt_dir, "Output directory for <name>.soft.json");
  corrupt->add_option("--sigma-g", cp.sigma_g, "Geometry jitter standard deviation")->capture_default_str();
  corrupt->add_option("--beta", cp.beta, "Validness, type and closedness blur")->capture_default_str();
  corrupt->add_option("--topology-beta", cp.topology_beta, "Incidence blur")->capture_default_str();
  corrupt->add_option("--spurious", cp.spurious, "Near-duplicate elements to inject")->capture_default_str();
  corrupt->add_option("--far", cp.far, "Distant clutter elements to inject")->capture_default_str();
  corrupt->add_option("--seed", cp.seed, "Random seed")->capture_default_str();
  corrupt->callback([&] {
    action = [&] {
      if (!corrupt_out.empty() && corrupt_inputs.size() > 1) throw CLI::ValidationError("--out", "needs a single input");
      if (!corrupt_dir.empty()) fs::create_directories(corrupt_dir);
      return run_batch(corrupt_inputs, jobs, [&](const std::string& in) {
        Complex c = load_complex(in, lenient);
        bc_soft* raw = nullptr;
        check(bc_corrupt(c.get(), &cp, &raw));
        Soft s(raw);
        fs::path out = output_for(in, corrupt_out, corrupt_dir, ".soft.json");
        check(bc_soft_save(s.get(), out.string().c_str()));
        return in + " -> " + out.string() + "\n";
      });
    };
  });

  // extract ------------------------------------------------------------------
  auto* extract_cmd = app.add_subcommand("extract", "Extract a valid binary complex from soft predictions");
  std::vector<std::string> extract_inputs;
  std::string extract_out, extract_dir;
  ExtractFlags xf;
  extract_cmd->add_option("inputs", extract_inputs, "Soft (or binary) complex documents")->required()->check(CLI::ExistingFile);
  extract_cmd->add_option("-o,--out", extract_out, "Output document (single input only)");
  extract_cmd->add_option("--out-dir", extract_dir, "Output directory for <name>.extracted.json");
  extract_cmd->add_option("--lp", xf.lp_path, "Also write the integer program in LP format (single input only)");
  xf.add(extract_cmd);
  extract_cmd->callback([&] {
    action = [&] {
      if ((!extract_out.empty() || !xf.lp_path.empty()) && extract_inputs.size() > 1)
        throw CLI::ValidationError("--out/--lp", "need a single input");
      if (!extract_dir.empty()) fs::create_directories(extract_dir);
      return run_batch(extract_inputs, jobs, [&](const std::string& in) {
        Soft s = load_soft(in, lenient);
        if (!xf.lp_path.empty()) {
          char* lp = nullptr;
          bc_status st = bc_extract_lp(s.get(), &xf.p, &lp);
          check(st, st == BC_ERR_EMPTY_CANDIDATES ? empty_candidates_hint(xf.p) : "");
          write_text(xf.lp_path, take(lp));
        }
        bc_extract_info info{};
        Complex c = extract(s.get(), xf.p, info);
        fs::path out = output_for(in, extract_out, extract_dir, ".extracted.json");
        check(bc_complex_save(c.get(), out.string().c_str()));
        int f = 0, e = 0, v = 0;
        bc_complex_counts(c.get(), &f, &e, &v);
        return in + " -> " + out.string() + " (" + std::to_string(f) + " patches, " + std::to_string(e) + " curves, " +
               std::to_string(v) + " corners; objective " + fmt(info.objective) + (info.retried ? ", retried" : "") + ")\n";
      });
    };
  });

  // refine -------------------------------------------------------------------
  auto* refine_cmd = app.add_subcommand("refine", "Fit geometry to a point cloud under fixed topology");
  std::string refine_in, refine_points, refine_out;
  RefineFlags rf;
  refine_cmd->add_option("input", refine_in, "Binary complex document")->required()->check(CLI::ExistingFile);
  refine_cmd->add_option("--points", refine_points, "Point cloud (x y z [label] per line)")->required()->check(CLI::ExistingFile);
  refine_cmd->add_option("-o,--out", refine_out, "Output document; default <name>.refined.json beside the input");
  rf.add(refine_cmd);
  refine_cmd->callback([&] {
    action = [&] {
      return run_batch({refine_in}, 1, [&](const std::string& in) {
        Complex c = load_complex(in, lenient);
        Points p = load_points(refine_points);
        bc_complex* raw = nullptr;
        bc_refine_info info{};
        char* msgs = nullptr;
        check(bc_refine(c.get(), p.get(), &rf.p, &raw, &info, &msgs));
        Complex r(raw);
        std::string messages = take(msgs);
        if (!messages.empty()) std::cerr << messages;
        fs::path out = output_for(in, refine_out, "", ".refined.json");
        check(bc_complex_save(r.get(), out.string().c_str()));
        return in + " -> " + out.string() + " (energy " + fmt(info.initial_energy) + " -> " + fmt(info.final_energy) + ")\n";
      });
    };
  });

  // evaluate -----------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("evaluate", "Compare a predicted complex against ground truth");
  std::string eval_pred, eval_gt, eval_points, eval_out, eval_format = "json";
  EvalFlags ef;
  eval_cmd->add_option("prediction", eval_pred, "Predicted binary complex")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("ground_truth", eval_gt, "Ground-truth binary complex")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--points", eval_points, "Point cloud for residual and coverage (labels index ground-truth patches)")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("-o,--out", eval_out, "Report file; default stdout");
  eval_cmd->add_option("--format", eval_format, "json or text")->check(CLI::IsMember({"json", "text"}))->capture_default_str();
  ef.add(eval_cmd);
  eval_cmd->callback([&] {
    action = [&] {
      return run_batch({eval_pred}, 1, [&](const std::string& in) {
        Complex pred = load_complex(in, lenient);
        Complex gt = load_complex(eval_gt, lenient);
        Points pts;
        if (!eval_points.empty()) pts = load_points(eval_points);
        bc_report* raw = nullptr;
        check(bc_evaluate(pred.get(), gt.get(), pts.get(), &ef.p, &raw));
        Report r(raw);
        char* text = nullptr;
        check(eval_format == "json" ? bc_report_json(r.get(), nullptr, &text) : bc_report_text(r.get(), &text));
        std::string body = take(text);
        if (eval_out.empty()) return body;
        write_text(eval_out, body);
        return "report -> " + eval_out + "\n";
      });
    };
  });

  // validate -----------------------------------------------------------------
  auto* validate_cmd = app.add_subcommand("validate", "Print the validity ratio and violating pairs");
  std::vector<std::string> validate_inputs;
  double validity_threshold = 0.0;
  {
    bc_eval_params d;
    bc_eval_params_default(&d);
    validity_threshold = d.validity_threshold;
  }
  validate_cmd->add_option("inputs", validate_inputs, "Binary complex documents")->required()->check(CLI::ExistingFile);
  validate_cmd->add_option("--threshold", validity_threshold, "Validity distance threshold")->capture_default_str();
  validate_cmd->callback([&] {
    action = [&] {
      return run_batch(validate_inputs, jobs, [&](const std::string& in) {
        Complex c = load_complex(in, lenient);
        double ratio = 0.0;
        int pairs = 0, valid = 0;
        char* viol = nullptr;
        check(bc_complex_validity(c.get(), validity_threshold, &ratio, &pairs, &viol));
        check(bc_complex_is_valid(c.get(), &valid));
        json j;
        j["input"] = in;
        j["validity_ratio"] = ratio;
        j["pairs"] = pairs;
        j["topology_valid"] = valid != 0;
        j["violations"] = json::parse(take(viol));
        return j.dump() + "\n";
      });
    };
  });

  // export -------------------------------------------------------------------
  auto* export_cmd = app.add_subcommand("export", "Write an OBJ mesh with trimmed patches, curve polylines and corners");
  std::vector<std::string> export_inputs;
  std::string export_out, export_dir;
  int resolution = 24;
  export_cmd->add_option("inputs", export_inputs, "Binary complex documents")->required()->check(CLI::ExistingFile);
  export_cmd->add_option("-o,--out", export_out, "Output OBJ (single input only)");
  export_cmd->add_option("--out-dir", export_dir, "Output directory for <name>.obj");
  export_cmd->add_option("--resolution", resolution, "Parameter lattice per patch side")->capture_default_str()->check(CLI::Range(2, 4096));
  export_cmd->callback([&] {
    action = [&] {
      if (!export_out.empty() && export_inputs.size() > 1) throw CLI::ValidationError("--out", "needs a single input");
      if (!export_dir.empty()) fs::create_directories(export_dir);
      return run_batch(export_inputs, jobs, [&](const std::string& in) {
        Complex c = load_complex(in, lenient);
        fs::path out = output_for(in, export_out, export_dir, ".obj");
        int tris = 0;
        char* warn = nullptr;
        check(bc_complex_export_mesh(c.get(), out.string().c_str(), resolution, &tris, &warn));
        std::string w = take(warn);
        if (!w.empty()) std::cerr << w;
        return in + " -> " + out.string() + " (" + std::to_string(tris) + " triangles)\n";
      });
    };
  });

  // pipeline -----------------------------------------------------------------
  auto* pipe = app.add_subcommand("pipeline", "extract -> refine -> validate (-> evaluate) for soft predictions");
  std::vector<std::string> pipe_inputs;
  std::string pipe_points, pipe_gt, pipe_dir;
  bool pipe_mesh = false;
  ExtractFlags pxf;
  RefineFlags prf;
  EvalFlags pef;
  pipe->add_option("inputs", pipe_inputs, "Soft complex documents")->required()->check(CLI::ExistingFile);
  pipe->add_option("--points", pipe_points, "Point cloud; default <name>.points.xyz beside each input")->check(CLI::ExistingFile);
  pipe->add_option("--gt", pipe_gt, "Ground truth for evaluation; default <name>.gt.json beside each input when present")
      ->check(CLI::ExistingFile);
  pipe->add_option("--out-dir", pipe_dir, "Output directory; default beside each input");
  pipe->add_flag("--mesh", pipe_mesh, "Also export <name>.obj");
  pipe->add_option("--resolution", resolution, "Mesh parameter lattice per patch side")->capture_default_str();
  pxf.add(pipe);
  prf.add(pipe);
  pef.add(pipe);
  pipe->callback([&] {
    action = [&] {
      if (!pipe_dir.empty()) fs::create_directories(pipe_dir);
      return run_batch(pipe_inputs, jobs, [&](const std::string& in) {
        Soft soft = load_soft(in, lenient);
        bc_extract_info xinfo{};
        Complex extracted = extract(soft.get(), pxf.p, xinfo);
        check(bc_complex_save(extracted.get(), output_for(in, "", pipe_dir, ".extracted.json").string().c_str()));

        std::string points_path = pipe_points.empty() ? sibling(in, ".points.xyz").string() : pipe_points;
        Points pts = load_points(points_path);
        bc_complex* raw = nullptr;
        bc_refine_info rinfo{};
        char* msgs = nullptr;
        check(bc_refine(extracted.get(), pts.get(), &prf.p, &raw, &rinfo, &msgs));
        Complex refined(raw);
        std::string messages = take(msgs);
        fs::path refined_path = output_for(in, "", pipe_dir, ".refined.json");
        check(bc_complex_save(refined.get(), refined_path.string().c_str()));

        double ratio = 0.0;
        int pairs = 0, valid = 0, same = 0;
        char* viol = nullptr;
        check(bc_complex_validity(refined.get(), pef.p.validity_threshold, &ratio, &pairs, &viol));
        check(bc_complex_is_valid(refined.get(), &valid));
        check(bc_complex_same_topology(extracted.get(), refined.get(), &same));

        json extra;
        extra["input"] = in;
        extra["points"] = points_path;
        extra["validity_ratio"] = ratio;
        extra["validity_pairs"] = pairs;
        extra["violations"] = json::parse(take(viol));
        extra["topology_valid"] = valid != 0;
        extra["topology_preserved"] = same != 0;
        extra["extraction"] = extract_info_json(xinfo);
        extra["refinement"] = refine_info_json(rinfo);
        if (!messages.empty()) {
          json m = json::array();
          std::stringstream ss(messages);
          for (std::string line; std::getline(ss, line);) m.push_back(line);
          extra["refinement_messages"] = m;
        }

        std::string gt_path = pipe_gt;
        if (gt_path.empty() && fs::exists(sibling(in, ".gt.json"))) gt_path = sibling(in, ".gt.json").string();
        std::string report;
        if (!gt_path.empty()) {
          Complex gt = load_complex(gt_path, lenient);
          extra["ground_truth"] = gt_path;
          bc_report* rep = nullptr;
          check(bc_evaluate(refined.get(), gt.get(), pts.get(), &pef.p, &rep));
          Report r(rep);
          char* text = nullptr;
          check(bc_report_json(r.get(), extra.dump().c_str(), &text));
          report = take(text);
        } else {
          report = extra.dump(2) + "\n";
        }
        fs::path report_path = output_for(in, "", pipe_dir, ".report.json");
        write_text(report_path, report);
        if (pipe_mesh) {
          char* warn = nullptr;
          check(bc_complex_export_mesh(refined.get(), output_for(in, "", pipe_dir, ".obj").string().c_str(), resolution,
                                       nullptr, &warn));
          bc_string_free(warn);
        }
        return in + " -> " + report_path.string() + " (validity " + fmt(ratio) + ")\n";
      });
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  try {
    return action ? action() : kExitUsage;
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", "usage_error"}, {"message", e.what()}}.dump() << "\n";
    return kExitUsage;
  } catch (const Failure& f) {
    std::cerr << error_json("", f).dump() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal_error"}, {"message", e.what()}}.dump() << "\n";
    return kExitFailure;
  }
}
