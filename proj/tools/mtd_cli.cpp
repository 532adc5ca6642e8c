#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <string>

#include "mtd/calibrate.hpp"
#include "mtd/io.hpp"
#include "mtd/metrics.hpp"
#include "mtd/pipeline.hpp"
#include "mtd/refine.hpp"
#include "mtd/sampler.hpp"
#include "mtd/segmentation.hpp"

namespace {

int cmd_run(const mtd::PipelineOptions& opts) {
  const mtd::PipelineResult result = mtd::run_pipeline(opts);
  if (result.exit_code != 0) {
    std::cerr << "error: " << result.error << "\n";
    return result.exit_code;
  }
  if (result.report) {
    std::cout << result.report->to_key_values();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-seed metric depth recovery pipeline"};
  app.require_subcommand(1);

  // run --------------------------------------------------------------------
  mtd::PipelineOptions opts;
  std::string fit_name, domain_name;
  std::uint64_t rng_seed = 0;

  auto* run = app.add_subcommand("run", "Full coarse-to-fine pipeline");
  run->add_option("--config", opts.config_path, "key=value config file");
  run->add_option("--rgb", opts.rgb_path, "color image (PPM P6)")->required();
  run->add_option("--rel", opts.rel_path, "relative depth (PFM)")->required();
  run->add_option("--seeds", opts.seeds_path, "seeds CSV")->required();
  run->add_option("--out", opts.out_path, "output metric depth (PFM)")
      ->required();
  run->add_option("--gt", opts.gt_path, "ground truth (PFM); prints metrics");
  run->add_option("--segments", opts.segments_path,
                  "external segment labels (16-bit PGM)");
  run->add_flag("--no-refine", opts.no_refine, "stop after the coarse stage");
  run->add_flag("--no-graph", opts.no_graph,
                "skip graph propagation; unanchored segments use the global "
                "anchor mean");
  run->add_option("--fit", fit_name,
                  "least_squares|median|mean|moment|quantile");
  run->add_option("--domain", domain_name, "inverse|depth");
  run->add_option("--dump-intermediate", opts.dump_dir,
                  "write every stage grid into this directory");
  run->add_option("--threads", opts.threads, "worker threads (default 1)");
  run->add_option("--rng-seed", rng_seed, "seed for randomized subcommands");
  run->add_option("--min-depth", opts.eval_min_depth,
                  "evaluation mask lower bound (default 1e-3)");
  run->add_option("--max-depth", opts.eval_max_depth,
                  "evaluation mask upper bound (default 1e9)");

  // segment ----------------------------------------------------------------
  std::string seg_rgb, seg_out;
  double seg_scale = 300.0;
  int seg_min_size = 20;
  auto* segment = app.add_subcommand("segment", "Superpixel segmentation only");
  segment->add_option("--rgb", seg_rgb, "color image (PPM P6)")->required();
  segment->add_option("--out", seg_out, "label map (16-bit PGM)")->required();
  segment->add_option("--scale", seg_scale, "segmentation scale (default 300)");
  segment->add_option("--min-size", seg_min_size,
                      "minimum segment size (default 20)");

  // sample -----------------------------------------------------------------
  std::string smp_gt, smp_out, smp_mode = "random";
  double smp_fraction = 0.0005, smp_noise_fraction = 0.0, smp_sigma = 0.05;
  int smp_lines = 64;
  auto* sample = app.add_subcommand("sample",
                                    "Generate seeds from dense ground truth");
  sample->add_option("--gt", smp_gt, "ground truth (PFM)")->required();
  sample->add_option("--out", smp_out, "seeds CSV")->required();
  sample->add_option("--mode", smp_mode, "random|lidar (default random)");
  sample->add_option("--fraction", smp_fraction,
                     "sampled fraction of valid pixels (default 0.0005)");
  sample->add_option("--noise-fraction", smp_noise_fraction,
                     "fraction of seeds perturbed (default 0)");
  sample->add_option("--noise-sigma", smp_sigma,
                     "relative noise sigma (default 0.05)");
  sample->add_option("--lines", smp_lines, "scanlines for lidar mode");
  sample->add_option("--rng-seed", rng_seed, "RNG seed (default 0)");

  // eval -------------------------------------------------------------------
  std::string ev_pred, ev_gt, ev_csv;
  double ev_min = 1e-3, ev_max = 1e9;
  auto* eval_cmd = app.add_subcommand("eval", "Depth metrics");
  eval_cmd->add_option("--pred", ev_pred, "prediction (PFM)")->required();
  eval_cmd->add_option("--gt", ev_gt, "ground truth (PFM)")->required();
  eval_cmd->add_option("--min-depth", ev_min, "mask lower bound");
  eval_cmd->add_option("--max-depth", ev_max, "mask upper bound");
  eval_cmd->add_option("--csv", ev_csv, "also append a CSV row to this file");

  // potential --------------------------------------------------------------
  std::string pot_in, pot_out;
  auto* pot = app.add_subcommand("potential", "Discontinuity potential only");
  pot->add_option("--depth", pot_in, "depth map (PFM)")->required();
  pot->add_option("--out", pot_out, "potential (PFM)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // bad flags are input errors; keep --help on the success path
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      if (!fit_name.empty()) {
        opts.fit_override = mtd::fit_mode_from_string(fit_name);
      }
      if (!domain_name.empty()) {
        if (domain_name == "inverse") {
          opts.domain_override = mtd::ProxyDomain::Inverse;
        } else if (domain_name == "depth") {
          opts.domain_override = mtd::ProxyDomain::Depth;
        } else {
          std::cerr << "error: unknown domain '" << domain_name << "'\n";
          return 2;
        }
      }
      return cmd_run(opts);
    }
    if (segment->parsed()) {
      const mtd::RgbImage img = mtd::read_ppm(seg_rgb);
      const mtd::SegmentMap seg =
          mtd::felzenszwalb(img, seg_scale, seg_min_size);
      mtd::write_pgm16(seg_out, seg.labels);
      std::cout << "segments = " << seg.count() << "\n";
      return 0;
    }
    if (sample->parsed()) {
      const mtd::ScalarGrid gt = mtd::read_float_map(smp_gt);
      mtd::SeedSet seeds;
      if (smp_mode == "random") {
        seeds = mtd::random_sample(gt, smp_fraction, smp_noise_fraction,
                                   smp_sigma, rng_seed);
      } else if (smp_mode == "lidar") {
        seeds = mtd::lidar_scan_sample(gt, smp_lines, rng_seed);
      } else {
        std::cerr << "error: unknown sample mode '" << smp_mode << "'\n";
        return 2;
      }
      mtd::write_seeds(smp_out, seeds);
      std::cout << "seeds = " << seeds.size() << "\n";
      return 0;
    }
    if (eval_cmd->parsed()) {
      const mtd::ScalarGrid pred = mtd::read_float_map(ev_pred);
      const mtd::ScalarGrid gt = mtd::read_float_map(ev_gt);
      const mtd::MetricReport rep = mtd::evaluate(pred, gt, ev_min, ev_max);
      std::cout << rep.to_key_values();
      if (!ev_csv.empty()) {
        std::ofstream csv(ev_csv, std::ios::app);
        csv << rep.to_csv_row() << "\n";
      }
      return 0;
    }
    if (pot->parsed()) {
      const mtd::ScalarGrid z = mtd::read_float_map(pot_in);
      mtd::write_float_map(pot_out, mtd::potential(z));
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    std::cerr << "error: " << what << "\n";
    return what.find("empty evaluation mask") != std::string::npos ? 4 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
