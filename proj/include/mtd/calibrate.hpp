#ifndef MTD_CALIBRATE_HPP
#define MTD_CALIBRATE_HPP

#include <span>
#include <vector>

#include "mtd/grid.hpp"
#include "mtd/io.hpp"
#include "mtd/segmentation.hpp"

namespace mtd {

// Affine calibration g(x) = max{a x + b, d_min} for one segment.
struct CalibParams {
  double a = 0.0;
  double b = 0.0;
  bool anchored = false;
};

// Conversion between metric depth and the scalar proxy xi = kappa / (z + eps).
// With domain == Depth the proxy is the depth itself (ablation path).
double depth_to_proxy(double z, double kappa, double epsilon);
double proxy_to_depth(double xi, double kappa, double epsilon);

struct ProxyModel {
  ProxyDomain domain = ProxyDomain::Inverse;
  double kappa = 1.0;
  double epsilon = 0.0;

  double to_proxy(double z) const {
    return domain == ProxyDomain::Inverse ? depth_to_proxy(z, kappa, epsilon)
                                          : z;
  }
  double to_depth(double xi) const {
    return domain == ProxyDomain::Inverse ? proxy_to_depth(xi, kappa, epsilon)
                                          : xi;
  }
};

// Fits (a, b) from paired samples of relative depth and proxy values.
// Degenerate inputs (single sample or constant d) fall back to mean scaling
// a = mean(xi)/mean(d), b = 0 in every mode.
CalibParams fit_segment(std::span<const double> d_samples,
                        std::span<const double> xi_samples, FitMode mode);

struct CalibrationResult {
  ScalarGrid transfer;              // proxy values, invalid where undefined
  std::vector<CalibParams> params;  // one per segment, anchored flag set
  int dropped_seeds = 0;            // seeds landing on invalid relative depth
};

// Fits every segment that contains at least one seed and fills the transfer
// map over those segments via g_i(d(p)).
CalibrationResult calibrate_anchored(const ScalarGrid& d, const SeedSet& seeds,
                                     const SegmentMap& seg,
                                     const PipelineConfig& cfg);

// Edge-preserving soft-min filter on the transfer map. Undefined pixels with
// defined neighbors inside the window acquire values; isolated undefined
// pixels stay undefined.
ScalarGrid bilateral_suppress(const ScalarGrid& t, const RgbImage& img,
                              const PipelineConfig& cfg);

}  // namespace mtd

#endif
