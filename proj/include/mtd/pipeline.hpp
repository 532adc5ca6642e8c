#ifndef MTD_PIPELINE_HPP
#define MTD_PIPELINE_HPP

#include <optional>
#include <string>

#include "mtd/io.hpp"
#include "mtd/metrics.hpp"

namespace mtd {

struct PipelineOptions {
  std::string config_path;    // empty: all defaults
  std::string rgb_path;       // PPM P6
  std::string rel_path;       // relative depth PFM
  std::string seeds_path;     // seeds CSV
  std::string out_path;       // output PFM
  std::string gt_path;        // optional ground truth PFM
  std::string segments_path;  // optional external labels, 16-bit PGM
  std::string dump_dir;       // optional per-stage dumps
  bool no_refine = false;
  bool no_graph = false;
  std::optional<FitMode> fit_override;
  std::optional<ProxyDomain> domain_override;
  double eval_min_depth = 1e-3;
  double eval_max_depth = 1e9;
  int threads = 1;
};

struct PipelineResult {
  int exit_code = 0;  // 0 ok, 2 input error, 3 numerical, 4 empty eval mask
  std::string error;
  std::optional<MetricReport> report;
};

PipelineResult run_pipeline(const PipelineOptions& opts);

}  // namespace mtd

#endif
