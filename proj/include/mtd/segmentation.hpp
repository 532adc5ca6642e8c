#ifndef MTD_SEGMENTATION_HPP
#define MTD_SEGMENTATION_HPP

#include <Eigen/Core>
#include <vector>

#include "mtd/grid.hpp"

namespace mtd {

// Partition of the image into superpixels. Labels are dense 0-based ids,
// contiguous over 0..count()-1.
struct SegmentMap {
  Eigen::ArrayXXi labels;
  std::vector<std::vector<int>> pixels;  // flat indices r * width + c
  std::vector<Eigen::Vector2d> centroids;  // (row, col) means

  int count() const { return static_cast<int>(pixels.size()); }
  Eigen::Index rows() const { return labels.rows(); }
  Eigen::Index cols() const { return labels.cols(); }
};

// Graph-based segmentation on the 8-connected pixel lattice. Edge weights are
// Euclidean RGB distances (8-bit units) after Gaussian pre-smoothing with
// sigma 0.8. Components smaller than min_size are absorbed into their
// lowest-weight neighbor. Deterministic: ties broken by edge index under a
// stable sort, relabeling in raster order of first occurrence.
SegmentMap felzenszwalb(const RgbImage& img, double scale, int min_size);

// Compacts an externally produced label image to contiguous ids and computes
// per-segment pixel lists and centroids.
SegmentMap relabel_external(const Eigen::ArrayXXi& labels);

}  // namespace mtd

#endif
