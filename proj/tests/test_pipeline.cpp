#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "mtd/pipeline.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using namespace mtd;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           fs::path("mtd_pipe_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

// writes the synthetic instance to disk and fills the matching options
PipelineOptions stage_instance(const synthetic::Instance& inst,
                               const TempDir& tmp) {
  write_ppm(tmp.file("rgb.ppm"), inst.rgb);
  write_float_map(tmp.file("rel.pfm"), inst.rel);
  write_float_map(tmp.file("gt.pfm"), inst.gt);
  write_seeds(tmp.file("seeds.csv"), inst.seeds);
  write_pgm16(tmp.file("segments.pgm"), inst.labels);
  write_config(tmp.file("config.cfg"), inst.config);

  PipelineOptions opts;
  opts.config_path = tmp.file("config.cfg");
  opts.rgb_path = tmp.file("rgb.ppm");
  opts.rel_path = tmp.file("rel.pfm");
  opts.seeds_path = tmp.file("seeds.csv");
  opts.segments_path = tmp.file("segments.pgm");
  opts.gt_path = tmp.file("gt.pfm");
  opts.out_path = tmp.file("out.pfm");
  return opts;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("full pipeline recovers the synthetic instance") {
  TempDir tmp;
  const auto inst = synthetic::build_piecewise_instance();
  const PipelineOptions opts = stage_instance(inst, tmp);

  const PipelineResult res = run_pipeline(opts);
  CHECK(res.error.empty());
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.report.has_value());
  CHECK(res.report->absrel <= 1e-3);
  CHECK(res.report->delta1 == 1.0);

  const ScalarGrid out = read_float_map(opts.out_path);
  CHECK(out.rows() == inst.gt.rows());
  CHECK(out.cols() == inst.gt.cols());
}

TEST_CASE("no-refine still produces accurate coarse output") {
  TempDir tmp;
  const auto inst = synthetic::build_piecewise_instance();
  PipelineOptions opts = stage_instance(inst, tmp);
  opts.no_refine = true;
  // graph propagation uses soft anchors, which trades a little per-segment
  // accuracy for smoothness; skip it so coarse calibration is isolated
  opts.no_graph = true;

  const PipelineResult res = run_pipeline(opts);
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.report.has_value());
  // every segment is seeded, so per-segment calibration is exact
  CHECK(res.report->absrel <= 1e-3);
}

TEST_CASE("graph smoothing keeps coarse output within a few percent") {
  TempDir tmp;
  const auto inst = synthetic::build_piecewise_instance();
  PipelineOptions opts = stage_instance(inst, tmp);
  opts.no_refine = true;

  const PipelineResult res = run_pipeline(opts);
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.report.has_value());
  CHECK(res.report->absrel <= 0.05);
}

TEST_CASE("no-graph fills unseeded segments with the anchor mean") {
  TempDir tmp;
  auto inst = synthetic::build_piecewise_instance({true, true, true, true,
                                                   false, false});
  PipelineOptions opts = stage_instance(inst, tmp);
  opts.no_graph = true;
  opts.no_refine = true;

  const PipelineResult res = run_pipeline(opts);
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.report.has_value());
  // distortions are within a few percent of each other by construction
  CHECK(res.report->absrel <= 0.1);
}

TEST_CASE("missing seeds file is an input error naming the path") {
  TempDir tmp;
  const auto inst = synthetic::build_piecewise_instance();
  PipelineOptions opts = stage_instance(inst, tmp);
  opts.seeds_path = tmp.file("nonexistent.csv");

  const PipelineResult res = run_pipeline(opts);
  CHECK(res.exit_code == 2);
  CHECK(res.error.find("nonexistent.csv") != std::string::npos);
}

TEST_CASE("out-of-bounds seed is an input error") {
  TempDir tmp;
  const auto inst = synthetic::build_piecewise_instance();
  PipelineOptions opts = stage_instance(inst, tmp);
  SeedSet bad = inst.seeds;
  bad.entries.push_back({500, 2, 1.0});
  write_seeds(opts.seeds_path, bad);

  const PipelineResult res = run_pipeline(opts);
  CHECK(res.exit_code == 2);
  CHECK(res.error.find("out of bounds") != std::string::npos);
}

TEST_CASE("empty evaluation mask maps to exit code 4") {
  TempDir tmp;
  const auto inst = synthetic::build_piecewise_instance();
  PipelineOptions opts = stage_instance(inst, tmp);
  opts.eval_min_depth = 1e6;  // nothing in (min, max]

  const PipelineResult res = run_pipeline(opts);
  CHECK(res.exit_code == 4);
}

TEST_CASE("reruns on identical inputs are byte identical") {
  TempDir tmp;
  const auto inst = synthetic::build_piecewise_instance();
  PipelineOptions opts = stage_instance(inst, tmp);

  REQUIRE(run_pipeline(opts).exit_code == 0);
  const std::string first = slurp(opts.out_path);
  opts.out_path = tmp.file("out2.pfm");
  REQUIRE(run_pipeline(opts).exit_code == 0);
  CHECK(first == slurp(opts.out_path));
  CHECK_FALSE(first.empty());
}

TEST_CASE("internal segmentation path works on the flat-color instance") {
  TempDir tmp;
  const auto inst = synthetic::build_piecewise_instance();
  PipelineOptions opts = stage_instance(inst, tmp);
  opts.segments_path.clear();  // fall back to felzenszwalb on the ppm

  const PipelineResult res = run_pipeline(opts);
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.report.has_value());
  // flat rectangle colors segment cleanly, so accuracy stays high
  CHECK(res.report->absrel <= 0.01);
}

TEST_CASE("dump directory receives the intermediate stages") {
  TempDir tmp;
  const auto inst = synthetic::build_piecewise_instance();
  PipelineOptions opts = stage_instance(inst, tmp);
  opts.dump_dir = tmp.file("dump");

  REQUIRE(run_pipeline(opts).exit_code == 0);
  for (const char* name : {"transfer_raw", "coarse", "potential",
                           "geodesic_cost", "refined"}) {
    CHECK(fs::exists(fs::path(opts.dump_dir) / (std::string(name) + ".pfm")));
  }
}
