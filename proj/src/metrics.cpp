#include "mtd/metrics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace mtd {

std::string MetricReport::to_key_values() const {
  std::ostringstream out;
  out.precision(12);
  out << "rmse = " << rmse << "\n"
      << "mae = " << mae << "\n"
      << "absrel = " << absrel << "\n"
      << "sqrel = " << sqrel << "\n"
      << "delta1 = " << delta1 << "\n"
      << "delta2 = " << delta2 << "\n"
      << "delta3 = " << delta3 << "\n"
      << "silog = " << silog << "\n"
      << "valid_count = " << valid_count << "\n"
      << "clamped_count = " << clamped_count << "\n";
  return out.str();
}

std::string MetricReport::csv_header() {
  return "rmse,mae,absrel,sqrel,delta1,delta2,delta3,silog,valid_count,"
         "clamped_count";
}

std::string MetricReport::to_csv_row() const {
  std::ostringstream out;
  out.precision(12);
  out << rmse << "," << mae << "," << absrel << "," << sqrel << "," << delta1
      << "," << delta2 << "," << delta3 << "," << silog << "," << valid_count
      << "," << clamped_count;
  return out.str();
}

MetricReport evaluate(const ScalarGrid& pred, const ScalarGrid& gt,
                      double min_depth, double max_depth) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols()) {
    throw std::invalid_argument("evaluate: shape mismatch");
  }

  MetricReport rep;
  double sum_sq = 0.0, sum_abs = 0.0, sum_absrel = 0.0, sum_sqrel = 0.0;
  std::vector<double> log_errors;
  long d1 = 0, d2 = 0, d3 = 0;

  for (Eigen::Index r = 0; r < gt.rows(); ++r) {
    for (Eigen::Index c = 0; c < gt.cols(); ++c) {
      if (!pred.valid(r, c) || !gt.valid(r, c)) continue;
      const double g = gt(r, c);
      if (!(g > min_depth && g <= max_depth)) continue;
      const double p = pred(r, c);
      ++rep.valid_count;

      const double err = p - g;
      sum_sq += err * err;
      sum_abs += std::abs(err);
      sum_absrel += std::abs(err) / g;
      sum_sqrel += err * err / g;

      if (p > 0.0) {
        const double ratio = std::max(p / g, g / p);
        if (ratio < 1.25) ++d1;
        if (ratio < 1.25 * 1.25) ++d2;
        if (ratio < 1.25 * 1.25 * 1.25) ++d3;
      }
      const double p_log = p > 0.0 ? p : (++rep.clamped_count, min_depth);
      log_errors.push_back(std::log(p_log) - std::log(g));
    }
  }
  if (rep.valid_count == 0) {
    throw std::invalid_argument("evaluate: empty evaluation mask");
  }

  const double n = double(rep.valid_count);
  rep.rmse = std::sqrt(sum_sq / n);
  rep.mae = sum_abs / n;
  rep.absrel = sum_absrel / n;
  rep.sqrel = sum_sqrel / n;
  rep.delta1 = d1 / n;
  rep.delta2 = d2 / n;
  rep.delta3 = d3 / n;
  // two-pass variance: the textbook E[e^2] - E[e]^2 form cancels
  // catastrophically when the log errors share a large common offset
  double mean_log = 0.0;
  for (double e : log_errors) mean_log += e;
  mean_log /= n;
  double var = 0.0;
  for (double e : log_errors) var += (e - mean_log) * (e - mean_log);
  rep.silog = std::sqrt(var / n);
  return rep;
}

}  // namespace mtd
