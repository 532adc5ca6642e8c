#include "mtd/graphopt.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

namespace mtd {

SegmentGraph build_graph(const SegmentMap& seg,
                         const std::vector<CalibParams>& anchors, int knn) {
  if (seg.count() < 1) {
    throw std::invalid_argument("build_graph: need at least one segment");
  }
  if (static_cast<int>(anchors.size()) != seg.count()) {
    throw std::invalid_argument("build_graph: anchor list size mismatch");
  }

  SegmentGraph graph;
  graph.nodes = anchors;
  graph.centroids = seg.centroids;

  const int n = seg.count();
  std::map<std::pair<int, int>, double> retained;  // (i<j) -> distance
  std::vector<std::pair<double, int>> order(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      order[j] = {(graph.centroids[i] - graph.centroids[j]).norm(), j};
    }
    std::stable_sort(order.begin(), order.end());
    int kept = 0;
    for (const auto& [dist, j] : order) {
      if (j == i) continue;
      if (kept >= knn) break;
      retained[{std::min(i, j), std::max(i, j)}] = dist;
      ++kept;
    }
  }

  std::vector<double> dists;
  dists.reserve(retained.size());
  for (const auto& [key, dist] : retained) dists.push_back(dist);
  double tau = 1.0;
  if (!dists.empty()) {
    std::sort(dists.begin(), dists.end());
    const std::size_t m = dists.size();
    tau = (m % 2 == 1) ? dists[m / 2]
                       : 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
    if (tau <= 0.0) tau = 1.0;
  }
  graph.tau = tau;

  graph.edges.reserve(retained.size());
  for (const auto& [key, dist] : retained) {
    graph.edges.push_back({key.first, key.second, std::exp(-dist / tau)});
  }
  return graph;
}

PropagateResult propagate(const SegmentGraph& graph, double anchor_weight) {
  const int n = static_cast<int>(graph.nodes.size());

  // connected components over the sparsified edges
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const GraphEdge& e : graph.edges) {
    parent[find(e.i)] = find(e.j);
  }

  std::vector<bool> component_anchored(n, false);
  int anchor_count = 0;
  double mean_a = 0.0, mean_b = 0.0;
  for (int i = 0; i < n; ++i) {
    if (graph.nodes[i].anchored) {
      component_anchored[find(i)] = true;
      mean_a += graph.nodes[i].a;
      mean_b += graph.nodes[i].b;
      ++anchor_count;
    }
  }
  if (anchor_count == 0) {
    throw std::invalid_argument("propagate: no anchored node");
  }
  mean_a /= anchor_count;
  mean_b /= anchor_count;

  // solve only over anchor-reachable nodes; the rest are singular
  std::vector<int> dense_of(n, -1);
  std::vector<int> node_of;
  for (int i = 0; i < n; ++i) {
    if (component_anchored[find(i)]) {
      dense_of[i] = static_cast<int>(node_of.size());
      node_of.push_back(i);
    }
  }
  const int m = static_cast<int>(node_of.size());

  PropagateResult result;
  result.params.assign(n, CalibParams{});
  result.unreachable_nodes = n - m;
  for (int i = 0; i < n; ++i) {
    if (dense_of[i] < 0) {
      result.params[i].a = mean_a;
      result.params[i].b = mean_b;
    }
    result.params[i].anchored = graph.nodes[i].anchored;
  }
  if (m == 0) return result;

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> triplets;
  triplets.reserve(graph.edges.size() * 4 + m);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
  for (const GraphEdge& e : graph.edges) {
    const int di = dense_of[e.i], dj = dense_of[e.j];
    if (di < 0 || dj < 0) continue;
    triplets.emplace_back(di, dj, -e.w);
    triplets.emplace_back(dj, di, -e.w);
    diag[di] += e.w;
    diag[dj] += e.w;
  }
  Eigen::VectorXd rhs_a = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd rhs_b = Eigen::VectorXd::Zero(m);
  for (int k = 0; k < m; ++k) {
    const CalibParams& node = graph.nodes[node_of[k]];
    if (node.anchored) {
      diag[k] += anchor_weight;
      rhs_a[k] = anchor_weight * node.a;
      rhs_b[k] = anchor_weight * node.b;
    }
    triplets.emplace_back(k, k, 0.0);  // ensure diagonal entry exists
  }
  for (int k = 0; k < m; ++k) triplets.emplace_back(k, k, diag[k]);

  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                           Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  cg.setMaxIterations(10 * m);
  cg.setTolerance(1e-14);
  cg.compute(A);

  const double theta_scale = std::max({1.0, rhs_a.lpNorm<Eigen::Infinity>() /
                                                std::max(anchor_weight, 1.0),
                                       rhs_b.lpNorm<Eigen::Infinity>() /
                                           std::max(anchor_weight, 1.0)});
  auto solve_coord = [&](const Eigen::VectorXd& rhs) {
    Eigen::VectorXd x = cg.solve(rhs);
    const double residual = (A * x - rhs).lpNorm<Eigen::Infinity>();
    if (!(residual <= 1e-8 * std::max(anchor_weight, 1.0) * theta_scale)) {
      throw NumericalError("propagate: conjugate gradient did not converge");
    }
    return x;
  };
  const Eigen::VectorXd sol_a = solve_coord(rhs_a);
  const Eigen::VectorXd sol_b = solve_coord(rhs_b);

  for (int k = 0; k < m; ++k) {
    result.params[node_of[k]].a = sol_a[k];
    result.params[node_of[k]].b = sol_b[k];
  }
  return result;
}

ScalarGrid lift_to_pixels(const SegmentMap& seg,
                          const std::vector<CalibParams>& params,
                          const ScalarGrid& d, const PipelineConfig& cfg) {
  if (static_cast<int>(params.size()) != seg.count()) {
    throw std::invalid_argument("lift_to_pixels: params do not cover segments");
  }
  if (d.rows() != seg.rows() || d.cols() != seg.cols()) {
    throw std::invalid_argument("lift_to_pixels: shape mismatch");
  }

  const ProxyModel proxy{cfg.domain, cfg.kappa, cfg.epsilon};
  ScalarGrid z(d.rows(), d.cols(), 0.0, false);
  for (Eigen::Index r = 0; r < d.rows(); ++r) {
    for (Eigen::Index c = 0; c < d.cols(); ++c) {
      if (!d.valid(r, c)) continue;
      const CalibParams& p = params[seg.labels(r, c)];
      const double xi = std::max(p.a * d(r, c) + p.b, cfg.d_min);
      z(r, c) = proxy.to_depth(xi);
      z.valid(r, c) = true;
    }
  }
  return z;
}

}  // namespace mtd
