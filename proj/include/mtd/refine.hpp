#ifndef MTD_REFINE_HPP
#define MTD_REFINE_HPP

#include <Eigen/Core>
#include <array>
#include <vector>

#include "mtd/grid.hpp"
#include "mtd/io.hpp"

namespace mtd {

// 8-neighborhood offsets (row, col) and their step lengths.
inline constexpr std::array<std::array<int, 2>, 8> kNeighborOffsets = {{
    {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}}};

inline double step_length(int neighbor) {
  const auto& o = kNeighborOffsets[neighbor];
  return (o[0] != 0 && o[1] != 0) ? 1.4142135623730951 : 1.0;
}

// Discontinuity potential phi = sqrt(z_uu^2 + z_vv^2). Pixels whose second
// differences touch an invalid neighbor get the maximum finite phi of the
// grid, so holes act as walls.
ScalarGrid potential(const ScalarGrid& z_coarse);

struct GeodesicField {
  ScalarGrid cost;          // d_phi, 0 at sources
  Eigen::ArrayXXi pred;     // index into kNeighborOffsets, -1 at sources
};

// Minimum accumulated step cost l * phi(destination) from the source pixels,
// computed by alternating causal/anticausal raster sweeps until the fixed
// point. Matches the 8-connected shortest-path distance.
GeodesicField geodesic_dp(const ScalarGrid& phi,
                          const std::vector<std::pair<int, int>>& sources,
                          int min_sweeps = 4);

// Seed-consistent depth propagation: pixels are visited in increasing
// geodesic cost; each takes a local-model prediction from its predecessor's
// window and blends it in with harmonic steps 1/(k+1). Seed pixels keep their
// metric values exactly.
ScalarGrid refine_depth(const ScalarGrid& z_coarse, const SeedSet& seeds,
                        const GeodesicField& geo, const PipelineConfig& cfg);

}  // namespace mtd

#endif
