#include "mtd/grid.hpp"

#include <cmath>

namespace mtd {

std::pair<ScalarGrid, ScalarGrid> second_differences(const ScalarGrid& g) {
  const Eigen::Index rows = g.rows();
  const Eigen::Index cols = g.cols();
  if (rows < 3 || cols < 3) {
    throw std::invalid_argument(
        "second_differences: grid must be at least 3x3");
  }

  ScalarGrid zuu(rows, cols, 0.0, false);
  ScalarGrid zvv(rows, cols, 0.0, false);

  auto clamp_r = [rows](Eigen::Index r) {
    return r < 0 ? Eigen::Index(0) : (r >= rows ? rows - 1 : r);
  };
  auto clamp_c = [cols](Eigen::Index c) {
    return c < 0 ? Eigen::Index(0) : (c >= cols ? cols - 1 : c);
  };

  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!g.valid(r, c)) continue;
      const Eigen::Index cl = clamp_c(c - 1), cr = clamp_c(c + 1);
      const Eigen::Index ru = clamp_r(r - 1), rd = clamp_r(r + 1);
      if (g.valid(r, cl) && g.valid(r, cr)) {
        zuu(r, c) = g(r, cl) - 2.0 * g(r, c) + g(r, cr);
        zuu.valid(r, c) = true;
      }
      if (g.valid(ru, c) && g.valid(rd, c)) {
        zvv(r, c) = g(ru, c) - 2.0 * g(r, c) + g(rd, c);
        zvv.valid(r, c) = true;
      }
    }
  }
  return {std::move(zuu), std::move(zvv)};
}

}  // namespace mtd
