/* C interface to the brepchain library. All objects are opaque handles owned
 * by the caller and released with the matching *_free function. Every call
 * returns a status; on failure bc_last_error() describes it (per thread). */
#ifndef BREPCHAIN_C_H
#define BREPCHAIN_C_H

#include <stddef.h>
#include <stdint.h>

#if defined(BREPCHAIN_C_BUILDING)
#define BC_API __attribute__((visibility("default")))
#else
#define BC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bc_status {
  BC_OK = 0,
  BC_ERR_ARGUMENT = 1,
  BC_ERR_STRUCTURE = 2,
  BC_ERR_PARSE = 3,
  BC_ERR_IO = 4,
  BC_ERR_FIT = 5,
  BC_ERR_INFEASIBLE = 6,
  BC_ERR_TIMEOUT = 7,
  BC_ERR_EMPTY_CANDIDATES = 8,
  BC_ERR_INTERNAL = 9
} bc_status;

typedef struct bc_complex bc_complex; /* binary chain complex */
typedef struct bc_soft bc_soft;       /* probabilistic complex */
typedef struct bc_points bc_points;   /* optionally labelled point cloud */
typedef struct bc_report bc_report;   /* evaluation report */

BC_API const char* bc_version(void);
BC_API const char* bc_status_name(bc_status status);
/* Message of the last failed call on this thread; "" when none. */
BC_API const char* bc_last_error(void);
/* Record locus of the last parse error on this thread; "" when none. */
BC_API const char* bc_last_error_locus(void);
/* Releases strings returned through char** out-parameters. */
BC_API void bc_string_free(char* s);

/* ------------------------------------------------------------ complexes */

BC_API bc_status bc_complex_load(const char* path, int lenient, bc_complex** out);
BC_API bc_status bc_complex_save(const bc_complex* c, const char* path);
BC_API bc_status bc_complex_clone(const bc_complex* c, bc_complex** out);
BC_API void bc_complex_free(bc_complex* c);
BC_API bc_status bc_complex_counts(const bc_complex* c, int* faces, int* edges, int* vertices);
/* out[3] = manifold, endpoint, closure. */
BC_API bc_status bc_complex_residuals(const bc_complex* c, double out[3]);
BC_API bc_status bc_complex_is_valid(const bc_complex* c, int* valid);
/* 1 when both complexes carry identical incidence matrices. */
BC_API bc_status bc_complex_same_topology(const bc_complex* a, const bc_complex* b, int* same);
/* Validity ratio and a JSON array of violations. */
BC_API bc_status bc_complex_validity(const bc_complex* c, double threshold, double* ratio, int* pairs, char** violations_json);
/* OBJ mesh; warnings (one per line) may be NULL. */
BC_API bc_status bc_complex_export_mesh(const bc_complex* c, const char* path, int resolution, int* triangles, char** warnings);

BC_API bc_status bc_soft_load(const char* path, int lenient, bc_soft** out);
BC_API bc_status bc_soft_save(const bc_soft* s, const char* path);
BC_API void bc_soft_free(bc_soft* s);
BC_API bc_status bc_soft_counts(const bc_soft* s, int* patches, int* curves, int* corners);

/* ------------------------------------------------------------ synthesis */

/* "cube", "capped_cylinder", "sphere", "l_bracket", "prism" or "prism<n>". */
BC_API bc_status bc_synth_shape(const char* name, bc_complex** out);
/* Space-separated list of the standard shape families. */
BC_API const char* bc_shape_families(void);

/* halfspaces: num_halfspaces rows of (nx, ny, nz, offset); points with
 * n.x > offset are removed. */
BC_API bc_status bc_sample_points(const bc_complex* c, int n, double sigma, const double* halfspaces, int num_halfspaces,
                                  uint64_t seed, bc_points** out);

typedef struct bc_corrupt_params {
  double sigma_g;
  double beta;
  double topology_beta;
  int spurious;
  int far;
  uint64_t seed;
} bc_corrupt_params;

BC_API void bc_corrupt_params_default(bc_corrupt_params* p);
BC_API bc_status bc_corrupt(const bc_complex* c, const bc_corrupt_params* p, bc_soft** out);

/* ------------------------------------------------------------ points */

BC_API bc_status bc_points_load(const char* path, bc_points** out);
BC_API bc_status bc_points_save(const bc_points* p, const char* path);
BC_API void bc_points_free(bc_points* p);
BC_API bc_status bc_points_count(const bc_points* p, int* count, int* labelled);

/* ------------------------------------------------------------ extraction */

typedef struct bc_extract_params {
  double validness_cutoff;
  double retry_cutoff;
  int retry;
  double nms_threshold;
  double fitness_eps;
  double w;
  double unary_weight;
  double binary_weight;
  double pair_threshold;
  double time_limit_s;
} bc_extract_params;

typedef struct bc_extract_info {
  double objective;
  double gap;
  double cutoff_used;
  int retried;
  int optimal;
  long nodes;
} bc_extract_info;

BC_API void bc_extract_params_default(bc_extract_params* p);
/* info may be NULL. */
BC_API bc_status bc_extract(const bc_soft* s, const bc_extract_params* p, bc_complex** out, bc_extract_info* info);
/* CPLEX LP text of the extraction program (first attempt's cutoff). */
BC_API bc_status bc_extract_lp(const bc_soft* s, const bc_extract_params* p, char** lp);

/* ------------------------------------------------------------ refinement */

typedef struct bc_refine_params {
  int k1;
  int k2;
  double point_weight;
  double adjacency_weight;
  double stabilization_weight;
  double assignment_threshold;
  int use_axis_cues;
  int max_iterations;
} bc_refine_params;

typedef struct bc_refine_info {
  double initial_energy;
  double final_energy;
  int rejected;
  int flags;
  int warnings;
} bc_refine_info;

BC_API void bc_refine_params_default(bc_refine_params* p);
/* messages (flags then warnings, one per line) may be NULL. */
BC_API bc_status bc_refine(const bc_complex* c, const bc_points* points, const bc_refine_params* p, bc_complex** out,
                           bc_refine_info* info, char** messages);

/* ------------------------------------------------------------ evaluation */

typedef struct bc_eval_params {
  double delta;
  double eps_cov;
  double validity_threshold;
} bc_eval_params;

BC_API void bc_eval_params_default(bc_eval_params* p);
/* points may be NULL; labelled points index gt patches. */
BC_API bc_status bc_evaluate(const bc_complex* pred, const bc_complex* gt, const bc_points* points, const bc_eval_params* p,
                             bc_report** out);
BC_API void bc_report_free(bc_report* r);
/* Looks up a flat report key such as "patch_fscore"; BC_ERR_ARGUMENT when
 * the key is unknown or undefined for this report. */
BC_API bc_status bc_report_get(const bc_report* r, const char* key, double* value);
/* JSON object; extra_json (may be NULL) is an object merged into it. */
BC_API bc_status bc_report_json(const bc_report* r, const char* extra_json, char** out);
BC_API bc_status bc_report_text(const bc_report* r, char** out);

/* Writes text atomically (temporary file + rename). */
BC_API bc_status bc_write_file(const char* path, const char* text);

#ifdef __cplusplus
}
#endif

#endif /* BREPCHAIN_C_H */
