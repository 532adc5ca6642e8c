#include "mtd/pipeline.hpp"

#include <Eigen/Core>
#include <filesystem>
#include <vector>

#include "mtd/calibrate.hpp"
#include "mtd/graphopt.hpp"
#include "mtd/refine.hpp"
#include "mtd/segmentation.hpp"

namespace mtd {
namespace {

[[noreturn]] void input_error(const std::string& stage,
                              const std::string& what) {
  throw FormatError("[" + stage + "] " + what);
}

void dump(const std::string& dir, const std::string& name,
          const ScalarGrid& g) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  write_float_map((std::filesystem::path(dir) / (name + ".pfm")).string(), g);
}

}  // namespace

PipelineResult run_pipeline(const PipelineOptions& opts) {
  PipelineResult result;
  try {
    Eigen::setNbThreads(std::max(1, opts.threads));

    PipelineConfig cfg;
    if (!opts.config_path.empty()) cfg = read_config(opts.config_path);
    if (opts.fit_override) cfg.fit_mode = *opts.fit_override;
    if (opts.domain_override) cfg.domain = *opts.domain_override;
    cfg.validate();

    const RgbImage rgb = read_ppm(opts.rgb_path);
    const ScalarGrid rel = read_float_map(opts.rel_path);
    if (rel.rows() != rgb.rows() || rel.cols() != rgb.cols()) {
      input_error("load", "shape mismatch between " + opts.rgb_path + " and " +
                              opts.rel_path);
    }

    const SeedSet seeds = read_seeds(opts.seeds_path);
    for (const Seed& s : seeds.entries) {
      if (!rel.in_bounds(s.row, s.col)) {
        input_error("load", opts.seeds_path + ": seed (" +
                                std::to_string(s.row) + "," +
                                std::to_string(s.col) + ") out of bounds");
      }
    }

    SegmentMap seg;
    if (!opts.segments_path.empty()) {
      const Eigen::ArrayXXi labels = read_pgm16(opts.segments_path);
      if (labels.rows() != rgb.rows() || labels.cols() != rgb.cols()) {
        input_error("segment", opts.segments_path + ": shape mismatch");
      }
      seg = relabel_external(labels);
    } else {
      seg = felzenszwalb(rgb, cfg.seg_scale, cfg.seg_min_size);
    }

    CalibrationResult calib = calibrate_anchored(rel, seeds, seg, cfg);
    dump(opts.dump_dir, "transfer_raw", calib.transfer);

    if (cfg.bilateral_iters > 0 && calib.transfer.valid.any()) {
      const ScalarGrid filtered =
          bilateral_suppress(calib.transfer, rgb, cfg);
      dump(opts.dump_dir, "transfer_filtered", filtered);
    }

    std::vector<CalibParams> params;
    if (opts.no_graph) {
      // per-segment only: unanchored segments take the global anchor mean
      double mean_a = 0.0, mean_b = 0.0;
      int anchors = 0;
      for (const CalibParams& p : calib.params) {
        if (p.anchored) {
          mean_a += p.a;
          mean_b += p.b;
          ++anchors;
        }
      }
      if (anchors == 0) input_error("calibrate", "no segment contains a seed");
      mean_a /= anchors;
      mean_b /= anchors;
      params = calib.params;
      for (CalibParams& p : params) {
        if (!p.anchored) {
          p.a = mean_a;
          p.b = mean_b;
        }
      }
    } else {
      const SegmentGraph graph = build_graph(seg, calib.params, cfg.knn);
      params = propagate(graph).params;
    }

    const ScalarGrid coarse = lift_to_pixels(seg, params, rel, cfg);
    dump(opts.dump_dir, "coarse", coarse);

    ScalarGrid out = coarse;
    if (!opts.no_refine) {
      const ScalarGrid phi = potential(coarse);
      dump(opts.dump_dir, "potential", phi);

      std::vector<std::pair<int, int>> sources;
      sources.reserve(seeds.size());
      for (const Seed& s : seeds.entries) sources.emplace_back(s.row, s.col);
      if (!sources.empty()) {
        const GeodesicField geo = geodesic_dp(phi, sources, cfg.dp_sweeps);
        dump(opts.dump_dir, "geodesic_cost", geo.cost);
        out = refine_depth(coarse, seeds, geo, cfg);
      }
    }
    dump(opts.dump_dir, "refined", out);
    write_float_map(opts.out_path, out);

    if (!opts.gt_path.empty()) {
      const ScalarGrid gt = read_float_map(opts.gt_path);
      if (gt.rows() != out.rows() || gt.cols() != out.cols()) {
        input_error("eval", opts.gt_path + ": shape mismatch");
      }
      result.report =
          evaluate(out, gt, opts.eval_min_depth, opts.eval_max_depth);
    }
  } catch (const NumericalError& e) {
    result.exit_code = 3;
    result.error = e.what();
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    result.exit_code = what.find("empty evaluation mask") != std::string::npos
                           ? 4
                           : 2;
    result.error = what;
  } catch (const std::exception& e) {
    result.exit_code = 2;
    result.error = e.what();
  }
  return result;
}

}  // namespace mtd
