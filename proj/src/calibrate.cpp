#include "mtd/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mtd {
namespace {

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

double stddev(std::span<const double> v, double mu) {
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / double(v.size() - 1));
}

// Linearly interpolated empirical quantile.
double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * double(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - double(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

double median(std::span<const double> v) {
  return quantile(std::vector<double>(v.begin(), v.end()), 0.5);
}

bool constant_samples(std::span<const double> v) {
  for (double x : v) {
    if (x != v.front()) return false;
  }
  return true;
}

}  // namespace

double depth_to_proxy(double z, double kappa, double epsilon) {
  if (!(z > 0.0)) {
    throw std::invalid_argument("depth_to_proxy: depth must be positive");
  }
  return kappa / (z + epsilon);
}

double proxy_to_depth(double xi, double kappa, double epsilon) {
  if (!(xi > 0.0)) {
    throw std::invalid_argument("proxy_to_depth: proxy must be positive");
  }
  return std::max(kappa / xi - epsilon, 0.0);
}

CalibParams fit_segment(std::span<const double> d_samples,
                        std::span<const double> xi_samples, FitMode mode) {
  if (d_samples.empty() || d_samples.size() != xi_samples.size()) {
    throw std::invalid_argument("fit_segment: need matched nonempty samples");
  }
  for (double xi : xi_samples) {
    if (!(xi > 0.0)) {
      throw std::invalid_argument("fit_segment: non-positive proxy sample");
    }
  }

  CalibParams p;
  p.anchored = true;

  const bool degenerate = d_samples.size() < 2 || constant_samples(d_samples);
  if (degenerate || mode == FitMode::Mean) {
    p.a = mean(xi_samples) / mean(d_samples);
    p.b = 0.0;
    return p;
  }

  switch (mode) {
    case FitMode::LeastSquares: {
      const double md = mean(d_samples), mxi = mean(xi_samples);
      double sdd = 0.0, sdx = 0.0;
      for (std::size_t i = 0; i < d_samples.size(); ++i) {
        sdd += (d_samples[i] - md) * (d_samples[i] - md);
        sdx += (d_samples[i] - md) * (xi_samples[i] - mxi);
      }
      p.a = sdx / sdd;
      p.b = mxi - p.a * md;
      break;
    }
    case FitMode::Moment: {
      const double md = mean(d_samples), mxi = mean(xi_samples);
      p.a = stddev(xi_samples, mxi) / stddev(d_samples, md);
      p.b = mxi - p.a * md;
      break;
    }
    case FitMode::Quantile: {
      std::vector<double> d(d_samples.begin(), d_samples.end());
      std::vector<double> xi(xi_samples.begin(), xi_samples.end());
      const double iqr_d = quantile(d, 0.75) - quantile(d, 0.25);
      const double iqr_xi = quantile(xi, 0.75) - quantile(xi, 0.25);
      if (iqr_d == 0.0) {  // quartiles collapsed; degrade like constant d
        p.a = mean(xi_samples) / mean(d_samples);
        p.b = 0.0;
      } else {
        p.a = iqr_xi / iqr_d;
        p.b = median(xi_samples) - p.a * median(d_samples);
      }
      break;
    }
    case FitMode::Median:
      p.a = median(xi_samples) / median(d_samples);
      p.b = 0.0;
      break;
    case FitMode::Mean:
      break;  // handled above
  }
  return p;
}

CalibrationResult calibrate_anchored(const ScalarGrid& d, const SeedSet& seeds,
                                     const SegmentMap& seg,
                                     const PipelineConfig& cfg) {
  if (d.rows() != seg.rows() || d.cols() != seg.cols()) {
    throw std::invalid_argument("calibrate_anchored: shape mismatch");
  }

  const ProxyModel proxy{cfg.domain, cfg.kappa, cfg.epsilon};

  CalibrationResult result;
  result.transfer = ScalarGrid(d.rows(), d.cols(), 0.0, false);
  result.params.assign(seg.count(), CalibParams{});

  std::vector<std::vector<double>> d_by_seg(seg.count());
  std::vector<std::vector<double>> xi_by_seg(seg.count());
  for (const Seed& s : seeds.entries) {
    if (!d.in_bounds(s.row, s.col)) {
      throw std::invalid_argument("calibrate_anchored: seed out of bounds");
    }
    if (!d.valid(s.row, s.col)) {
      ++result.dropped_seeds;
      continue;
    }
    const int id = seg.labels(s.row, s.col);
    d_by_seg[id].push_back(d(s.row, s.col));
    xi_by_seg[id].push_back(proxy.to_proxy(s.value));
  }

  const int width = static_cast<int>(seg.cols());
  for (int i = 0; i < seg.count(); ++i) {
    if (d_by_seg[i].empty()) continue;
    result.params[i] = fit_segment(d_by_seg[i], xi_by_seg[i], cfg.fit_mode);
    for (int flat : seg.pixels[i]) {
      const int r = flat / width, c = flat % width;
      if (!d.valid(r, c)) continue;
      result.transfer(r, c) =
          std::max(result.params[i].a * d(r, c) + result.params[i].b,
                   cfg.d_min);
      result.transfer.valid(r, c) = true;
    }
  }
  return result;
}

ScalarGrid bilateral_suppress(const ScalarGrid& t, const RgbImage& img,
                              const PipelineConfig& cfg) {
  if (t.rows() != img.rows() || t.cols() != img.cols()) {
    throw std::invalid_argument("bilateral_suppress: shape mismatch");
  }
  if (!t.valid.any()) {
    throw std::invalid_argument("bilateral_suppress: no defined pixels");
  }

  const int hw = static_cast<int>(std::ceil(2.0 * cfg.sigma_spatial));
  const double inv2s1 = 1.0 / (2.0 * cfg.sigma_spatial * cfg.sigma_spatial);
  const double inv2s2 = 1.0 / (2.0 * cfg.sigma_range * cfg.sigma_range);

  Eigen::ArrayXXd spatial(2 * hw + 1, 2 * hw + 1);
  for (int dr = -hw; dr <= hw; ++dr) {
    for (int dc = -hw; dc <= hw; ++dc) {
      spatial(dr + hw, dc + hw) = std::exp(-(dr * dr + dc * dc) * inv2s1);
    }
  }

  const Eigen::Index rows = t.rows(), cols = t.cols();
  Eigen::ArrayXXd lum(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      lum(r, c) = img.luminance(r, c);
    }
  }

  ScalarGrid cur = t;
  ScalarGrid next(rows, cols, 0.0, false);
  for (int iter = 0; iter < cfg.bilateral_iters; ++iter) {
    // soft-min in a shifted frame so exp(-T) cannot overflow
    double shift = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < cur.size(); ++i) {
      if (cur.valid.data()[i]) shift = std::min(shift, cur.values.data()[i]);
    }
    Eigen::ArrayXXd exp_neg = Eigen::ArrayXXd::Zero(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (cur.valid(r, c)) exp_neg(r, c) = std::exp(-(cur(r, c) - shift));
      }
    }

    for (Eigen::Index r = 0; r < rows; ++r) {
      const int r0 = static_cast<int>(std::max<Eigen::Index>(0, r - hw));
      const int r1 = static_cast<int>(std::min<Eigen::Index>(rows - 1, r + hw));
      for (Eigen::Index c = 0; c < cols; ++c) {
        const int c0 = static_cast<int>(std::max<Eigen::Index>(0, c - hw));
        const int c1 = static_cast<int>(std::min<Eigen::Index>(cols - 1, c + hw));
        double num = 0.0, den = 0.0;
        double window_min = std::numeric_limits<double>::infinity();
        bool any = false;
        for (int qr = r0; qr <= r1; ++qr) {
          for (int qc = c0; qc <= c1; ++qc) {
            if (!cur.valid(qr, qc)) continue;
            any = true;
            const double dlum = lum(r, c) - lum(qr, qc);
            const double k = spatial(qr - r + hw, qc - c + hw) *
                             std::exp(-dlum * dlum * inv2s2);
            num += k * exp_neg(qr, qc);
            den += k;
            window_min = std::min(window_min, cur(qr, qc));
          }
        }
        if (!any) {
          next.valid(r, c) = false;
          continue;
        }
        next.valid(r, c) = true;
        const double ratio = num / den;
        // underflowed ratio means every neighbor sits far above the global
        // minimum; the soft-min saturates to the window minimum
        next(r, c) = ratio > 0.0 ? shift - std::log(ratio) : window_min;
      }
    }
    std::swap(cur, next);
  }
  return cur;
}

}  // namespace mtd
