#ifndef MTD_METRICS_HPP
#define MTD_METRICS_HPP

#include <string>

#include "mtd/grid.hpp"

namespace mtd {

struct MetricReport {
  double rmse = 0.0;
  double mae = 0.0;
  double absrel = 0.0;
  double sqrel = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  double silog = 0.0;
  long valid_count = 0;
  long clamped_count = 0;  // non-positive predictions clamped for log metrics

  std::string to_key_values() const;
  static std::string csv_header();
  std::string to_csv_row() const;
};

// Errors over pixels where both grids are valid and gt is in
// (min_depth, max_depth]. delta_i uses max(p/g, g/p) < 1.25^i strictly;
// predictions <= 0 count as delta failures and are clamped to min_depth for
// the log-based metric.
MetricReport evaluate(const ScalarGrid& pred, const ScalarGrid& gt,
                      double min_depth, double max_depth);

}  // namespace mtd

#endif
