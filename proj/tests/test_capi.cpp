// Exercises the C interface only; this binary links the shared library and
// nothing else from the project.

#include "brepchain_c.h"

#include <gtest/gtest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path d = fs::temp_directory_path() / "brepchain_capi";
  fs::create_directories(d);
  return d / name;
}

}  // namespace

TEST(CApi, StatusNames) {
  EXPECT_STREQ(bc_status_name(BC_OK), "ok");
  EXPECT_NE(std::string(bc_status_name(BC_ERR_PARSE)), "");
  EXPECT_NE(std::string(bc_version()), "");
  EXPECT_NE(std::string(bc_shape_families()).find("capped_cylinder"), std::string::npos);
}

TEST(CApi, SynthCountsAndValidity) {
  bc_complex* c = nullptr;
  ASSERT_EQ(bc_synth_shape("cube", &c), BC_OK);
  int f = 0, e = 0, v = 0;
  ASSERT_EQ(bc_complex_counts(c, &f, &e, &v), BC_OK);
  EXPECT_EQ(f, 6);
  EXPECT_EQ(e, 12);
  EXPECT_EQ(v, 8);
  double r[3] = {1, 1, 1};
  ASSERT_EQ(bc_complex_residuals(c, r), BC_OK);
  EXPECT_EQ(r[0] + r[1] + r[2], 0.0);
  int valid = 0;
  ASSERT_EQ(bc_complex_is_valid(c, &valid), BC_OK);
  EXPECT_EQ(valid, 1);
  double ratio = 0;
  int pairs = 0;
  char* viol = nullptr;
  ASSERT_EQ(bc_complex_validity(c, 0.03, &ratio, &pairs, &viol), BC_OK);
  EXPECT_EQ(ratio, 1.0);
  EXPECT_GT(pairs, 0);
  EXPECT_STREQ(viol, "[]");
  bc_string_free(viol);
  bc_complex_free(c);
}

TEST(CApi, ArgumentErrors) {
  bc_complex* c = nullptr;
  EXPECT_EQ(bc_synth_shape("prism2", &c), BC_ERR_ARGUMENT);
  EXPECT_EQ(c, nullptr);
  EXPECT_NE(std::string(bc_last_error()), "");
  EXPECT_EQ(bc_synth_shape("blob", &c), BC_ERR_ARGUMENT);
  EXPECT_EQ(bc_synth_shape(nullptr, &c), BC_ERR_ARGUMENT);
  EXPECT_EQ(bc_complex_counts(nullptr, nullptr, nullptr, nullptr), BC_ERR_ARGUMENT);
}

TEST(CApi, FullPipeline) {
  bc_complex* gt = nullptr;
  ASSERT_EQ(bc_synth_shape("capped_cylinder", &gt), BC_OK);
  bc_points* pts = nullptr;
  ASSERT_EQ(bc_sample_points(gt, 3000, 0.0, nullptr, 0, 5, &pts), BC_OK);
  int count = 0, labelled = 0;
  ASSERT_EQ(bc_points_count(pts, &count, &labelled), BC_OK);
  EXPECT_EQ(count, 3000);
  EXPECT_EQ(labelled, 1);

  bc_corrupt_params cp;
  bc_corrupt_params_default(&cp);
  cp.sigma_g = 0.01;
  cp.beta = 0.15;
  cp.topology_beta = 0.15;
  cp.spurious = 2;
  cp.seed = 3;
  bc_soft* soft = nullptr;
  ASSERT_EQ(bc_corrupt(gt, &cp, &soft), BC_OK);

  bc_extract_params ep;
  bc_extract_params_default(&ep);
  EXPECT_EQ(ep.validness_cutoff, 0.3);
  EXPECT_EQ(ep.nms_threshold, 0.05);
  bc_complex* ex = nullptr;
  bc_extract_info info{};
  ASSERT_EQ(bc_extract(soft, &ep, &ex, &info), BC_OK) << bc_last_error();
  EXPECT_EQ(info.optimal, 1);
  int f = 0, e = 0, v = 0;
  bc_complex_counts(ex, &f, &e, &v);
  EXPECT_EQ(f, 3);
  EXPECT_EQ(e, 2);

  char* lp = nullptr;
  ASSERT_EQ(bc_extract_lp(soft, &ep, &lp), BC_OK);
  EXPECT_NE(std::string(lp).find("Subject To"), std::string::npos);
  bc_string_free(lp);

  bc_refine_params rp;
  bc_refine_params_default(&rp);
  EXPECT_EQ(rp.k1, 3);
  EXPECT_EQ(rp.k2, 5);
  bc_complex* refined = nullptr;
  bc_refine_info ri{};
  ASSERT_EQ(bc_refine(ex, pts, &rp, &refined, &ri, nullptr), BC_OK) << bc_last_error();
  EXPECT_LE(ri.final_energy, ri.initial_energy);
  int same = 0;
  ASSERT_EQ(bc_complex_same_topology(ex, refined, &same), BC_OK);
  EXPECT_EQ(same, 1);

  bc_eval_params evp;
  bc_eval_params_default(&evp);
  bc_report* rep = nullptr;
  ASSERT_EQ(bc_evaluate(refined, gt, pts, &evp, &rep), BC_OK);
  double fscore = 0, vr = 0;
  ASSERT_EQ(bc_report_get(rep, "patch_fscore", &fscore), BC_OK);
  ASSERT_EQ(bc_report_get(rep, "validity_ratio", &vr), BC_OK);
  EXPECT_EQ(fscore, 1.0);
  EXPECT_EQ(vr, 1.0);
  double dummy;
  EXPECT_EQ(bc_report_get(rep, "no_such_key", &dummy), BC_ERR_ARGUMENT);
  char* json = nullptr;
  ASSERT_EQ(bc_report_json(rep, R"({"run":"capi"})", &json), BC_OK);
  EXPECT_NE(std::string(json).find("\"run\""), std::string::npos);
  bc_string_free(json);
  EXPECT_EQ(bc_report_json(rep, "{not json", &json), BC_ERR_ARGUMENT);

  fs::path obj = scratch("refined.obj");
  int tris = 0;
  ASSERT_EQ(bc_complex_export_mesh(refined, obj.c_str(), 16, &tris, nullptr), BC_OK);
  EXPECT_GT(tris, 0);
  EXPECT_TRUE(fs::exists(obj));

  bc_report_free(rep);
  bc_complex_free(refined);
  bc_complex_free(ex);
  bc_soft_free(soft);
  bc_points_free(pts);
  bc_complex_free(gt);
}

TEST(CApi, FilesAndParseErrors) {
  bc_complex* c = nullptr;
  ASSERT_EQ(bc_synth_shape("l_bracket", &c), BC_OK);
  fs::path p = scratch("lb.json");
  ASSERT_EQ(bc_complex_save(c, p.c_str()), BC_OK);
  bc_complex* back = nullptr;
  ASSERT_EQ(bc_complex_load(p.c_str(), 0, &back), BC_OK);
  int same = 0;
  bc_complex_same_topology(c, back, &same);
  EXPECT_EQ(same, 1);
  bc_soft* soft = nullptr;
  ASSERT_EQ(bc_soft_load(p.c_str(), 0, &soft), BC_OK);
  int np = 0, nc = 0, nv = 0;
  bc_soft_counts(soft, &np, &nc, &nv);
  EXPECT_EQ(np, 8);

  fs::path bad = scratch("bad.json");
  ASSERT_EQ(bc_write_file(bad.c_str(), "{\"format\":"), BC_OK);
  bc_complex* none = nullptr;
  EXPECT_EQ(bc_complex_load(bad.c_str(), 0, &none), BC_ERR_PARSE);
  EXPECT_EQ(none, nullptr);
  EXPECT_EQ(bc_complex_load(scratch("absent.json").c_str(), 0, &none), BC_ERR_IO);

  bc_soft_free(soft);
  bc_complex_free(back);
  bc_complex_free(c);
}

TEST(CApi, EmptyCandidates) {
  bc_complex* gt = nullptr;
  ASSERT_EQ(bc_synth_shape("sphere", &gt), BC_OK);
  bc_corrupt_params cp;
  bc_corrupt_params_default(&cp);
  bc_soft* soft = nullptr;
  ASSERT_EQ(bc_corrupt(gt, &cp, &soft), BC_OK);
  bc_extract_params ep;
  bc_extract_params_default(&ep);
  ep.validness_cutoff = 1.5;
  ep.retry = 0;
  bc_complex* out = nullptr;
  EXPECT_EQ(bc_extract(soft, &ep, &out, nullptr), BC_ERR_EMPTY_CANDIDATES);
  EXPECT_NE(std::string(bc_last_error()).find("cutoff"), std::string::npos);
  bc_soft_free(soft);
  bc_complex_free(gt);
}
