#ifndef MTD_GRID_HPP
#define MTD_GRID_HPP

#include <Eigen/Core>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mtd {

// Dense raster with a per-pixel validity mask. Pixel (r, c) has image
// coordinates u = c (horizontal) and v = r (vertical).
template <typename Scalar>
struct Grid {
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

  Array values;
  Mask valid;

  Grid() = default;
  Grid(Eigen::Index rows, Eigen::Index cols, Scalar fill = Scalar(0),
       bool all_valid = true)
      : values(Array::Constant(rows, cols, fill)),
        valid(Mask::Constant(rows, cols, all_valid)) {}

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  Eigen::Index size() const { return values.size(); }

  Scalar& operator()(Eigen::Index r, Eigen::Index c) { return values(r, c); }
  Scalar operator()(Eigen::Index r, Eigen::Index c) const {
    return values(r, c);
  }
  bool is_valid(Eigen::Index r, Eigen::Index c) const { return valid(r, c); }

  bool in_bounds(Eigen::Index r, Eigen::Index c) const {
    return r >= 0 && r < rows() && c >= 0 && c < cols();
  }
};

using ScalarGrid = Grid<double>;

// Three-channel color image, intensities in [0, 1].
struct RgbImage {
  Eigen::ArrayXXd r, g, b;

  RgbImage() = default;
  RgbImage(Eigen::Index rows, Eigen::Index cols)
      : r(Eigen::ArrayXXd::Zero(rows, cols)),
        g(Eigen::ArrayXXd::Zero(rows, cols)),
        b(Eigen::ArrayXXd::Zero(rows, cols)) {}

  Eigen::Index rows() const { return r.rows(); }
  Eigen::Index cols() const { return r.cols(); }

  double luminance(Eigen::Index row, Eigen::Index col) const {
    return 0.299 * r(row, col) + 0.587 * g(row, col) + 0.114 * b(row, col);
  }
};

struct Seed {
  int row = 0;
  int col = 0;
  double value = 0.0;  // metric depth, meters
};

struct SeedSet {
  std::vector<Seed> entries;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
};

// Central second differences along u (columns) and v (rows) with replicate
// padding at the image border. Differences touching an invalid neighbor are
// marked invalid.
std::pair<ScalarGrid, ScalarGrid> second_differences(const ScalarGrid& g);

}  // namespace mtd

#endif
