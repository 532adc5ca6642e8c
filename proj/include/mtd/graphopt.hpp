#ifndef MTD_GRAPHOPT_HPP
#define MTD_GRAPHOPT_HPP

#include <Eigen/Core>
#include <stdexcept>
#include <vector>

#include "mtd/calibrate.hpp"
#include "mtd/segmentation.hpp"

namespace mtd {

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GraphEdge {
  int i = 0;
  int j = 0;
  double w = 0.0;
};

// kNN segment graph. Edges are union-symmetrized (one entry per unordered
// pair) with weight exp(-dist / tau); tau is the median retained centroid
// distance.
struct SegmentGraph {
  std::vector<CalibParams> nodes;
  std::vector<Eigen::Vector2d> centroids;
  std::vector<GraphEdge> edges;
  double tau = 1.0;
};

SegmentGraph build_graph(const SegmentMap& seg,
                         const std::vector<CalibParams>& anchors, int knn);

struct PropagateResult {
  std::vector<CalibParams> params;
  int unreachable_nodes = 0;  // anchor-free components, given the anchor mean
};

// Minimizes sum_{i in Q} lambda |theta_i - theta_hat_i|^2
//         + sum_{(i,j)} w_ij |theta_i - theta_j|^2
// via the normal equations (lambda D_Q + L_w) theta = lambda D_Q theta_hat,
// solved per coordinate by Jacobi-preconditioned conjugate gradient.
PropagateResult propagate(const SegmentGraph& graph,
                          double anchor_weight = 1.0);

// Applies g_i to the relative depth over each segment and converts the proxy
// back to metric depth.
ScalarGrid lift_to_pixels(const SegmentMap& seg,
                          const std::vector<CalibParams>& params,
                          const ScalarGrid& d, const PipelineConfig& cfg);

}  // namespace mtd

#endif
