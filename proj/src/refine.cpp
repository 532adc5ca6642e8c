#include "mtd/refine.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mtd {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cubic B-spline kernel, support (-2, 2).
double bspline3(double x) {
  x = std::abs(x);
  if (x < 1.0) return (4.0 - 6.0 * x * x + 3.0 * x * x * x) / 6.0;
  if (x < 2.0) return (2.0 - x) * (2.0 - x) * (2.0 - x) / 6.0;
  return 0.0;
}

int basis_size(Basis basis) { return basis == Basis::Polynomial ? 3 : 9; }

void eval_basis(Basis basis, double du, double dv, double* out) {
  if (basis == Basis::Polynomial) {
    out[0] = 1.0;
    out[1] = du;
    out[2] = dv;
    return;
  }
  // tensor of cubic B-splines centered on the step domain {-1, 0, 1}
  const double bu[3] = {bspline3(du + 1.0), bspline3(du), bspline3(du - 1.0)};
  const double bv[3] = {bspline3(dv + 1.0), bspline3(dv), bspline3(dv - 1.0)};
  int k = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out[k++] = bu[i] * bv[j];
  }
}

}  // namespace

ScalarGrid potential(const ScalarGrid& z_coarse) {
  auto [zuu, zvv] = second_differences(z_coarse);

  ScalarGrid phi(z_coarse.rows(), z_coarse.cols(), 0.0, true);
  double max_finite = 0.0;
  for (Eigen::Index r = 0; r < phi.rows(); ++r) {
    for (Eigen::Index c = 0; c < phi.cols(); ++c) {
      if (zuu.valid(r, c) && zvv.valid(r, c)) {
        phi(r, c) = std::hypot(zuu(r, c), zvv(r, c));
        max_finite = std::max(max_finite, phi(r, c));
      } else {
        phi(r, c) = -1.0;  // placeholder, patched below
      }
    }
  }
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    if (phi.values.data()[i] < 0.0) phi.values.data()[i] = max_finite;
  }
  return phi;
}

GeodesicField geodesic_dp(const ScalarGrid& phi,
                          const std::vector<std::pair<int, int>>& sources,
                          int min_sweeps) {
  if (sources.empty()) {
    throw std::invalid_argument("geodesic_dp: empty source set");
  }
  const Eigen::Index rows = phi.rows(), cols = phi.cols();

  GeodesicField geo;
  geo.cost = ScalarGrid(rows, cols, kInf, true);
  geo.pred = Eigen::ArrayXXi::Constant(rows, cols, -1);
  for (const auto& [r, c] : sources) {
    if (!phi.in_bounds(r, c)) {
      throw std::invalid_argument("geodesic_dp: source out of bounds");
    }
    geo.cost(r, c) = 0.0;
  }

  // causal neighbors precede (r, c) in raster order; anticausal follow it
  const int causal[4] = {0, 1, 2, 3};      // NW N NE W
  const int anticausal[4] = {7, 6, 5, 4};  // SE S SW E

  auto relax = [&](Eigen::Index r, Eigen::Index c, const int* half) {
    bool changed = false;
    const double step_phi = phi(r, c);
    for (int h = 0; h < 4; ++h) {
      const int nb = half[h];
      const Eigen::Index qr = r + kNeighborOffsets[nb][0];
      const Eigen::Index qc = c + kNeighborOffsets[nb][1];
      if (qr < 0 || qr >= rows || qc < 0 || qc >= cols) continue;
      const double cand = geo.cost(qr, qc) + step_length(nb) * step_phi;
      if (cand < geo.cost(r, c)) {
        geo.cost(r, c) = cand;
        // predecessor offset points from q to p, i.e. the reverse step
        geo.pred(r, c) = 7 - nb;
        changed = true;
      }
    }
    return changed;
  };

  const long max_pairs = std::max<long>(min_sweeps, rows * cols);
  for (long pass = 0; pass < max_pairs; ++pass) {
    bool changed = false;
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        changed |= relax(r, c, causal);
      }
    }
    for (Eigen::Index r = rows - 1; r >= 0; --r) {
      for (Eigen::Index c = cols - 1; c >= 0; --c) {
        changed |= relax(r, c, anticausal);
      }
    }
    if (!changed && pass + 1 >= min_sweeps) break;
  }
  return geo;
}

ScalarGrid refine_depth(const ScalarGrid& z_coarse, const SeedSet& seeds,
                        const GeodesicField& geo, const PipelineConfig& cfg) {
  const Eigen::Index rows = z_coarse.rows(), cols = z_coarse.cols();
  if (geo.cost.rows() != rows || geo.cost.cols() != cols) {
    throw std::invalid_argument("refine_depth: geodesic field shape mismatch");
  }

  ScalarGrid z = z_coarse;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> is_seed =
      Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(rows, cols,
                                                                   false);
  for (const Seed& s : seeds.entries) {
    if (!z.in_bounds(s.row, s.col)) {
      throw std::invalid_argument("refine_depth: seed out of bounds");
    }
    z(s.row, s.col) = s.value;
    z.valid(s.row, s.col) = true;
    is_seed(s.row, s.col) = true;
  }

  // settle order: increasing geodesic cost. Cost ties are broken by depth in
  // the predecessor forest so that a predecessor always settles before the
  // pixels it feeds, even across zero-cost plateaus; remaining ties fall back
  // to raster order via the stable sort.
  const int width = static_cast<int>(cols);
  std::vector<int> depth(static_cast<std::size_t>(rows * cols), -1);
  for (int flat = 0; flat < rows * cols; ++flat) {
    int cur = flat;
    std::vector<int> chain;
    while (depth[cur] < 0) {
      const int p = geo.pred(cur / width, cur % width);
      if (p < 0) {
        depth[cur] = 0;
        break;
      }
      chain.push_back(cur);
      cur = (cur / width - kNeighborOffsets[p][0]) * width +
            (cur % width - kNeighborOffsets[p][1]);
    }
    int d = depth[cur];
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      depth[*it] = ++d;
    }
  }

  std::vector<int> order(static_cast<std::size_t>(rows * cols));
  std::iota(order.begin(), order.end(), 0);
  auto cost_at = [&](int flat) {
    return geo.cost(flat / width, flat % width);
  };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (cost_at(a) != cost_at(b)) return cost_at(a) < cost_at(b);
    return depth[a] < depth[b];
  });

  const int nb_terms = basis_size(cfg.basis);
  // bounded sizes keep the per-pixel fits heap-free
  using Design = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 9, 9>;
  using Rhs = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 9, 1>;
  Design design(9, nb_terms);
  Rhs rhs(9);
  double feat[9];

  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> available(rows, cols);

  for (int k = 0; k < cfg.dp_order; ++k) {
    // pass 0 only trusts seeds and already-settled pixels; later passes
    // re-fit from the full current estimate
    if (k == 0) {
      available = is_seed;
    } else {
      available = z.valid;
    }

    for (int flat : order) {
      const int r = flat / width, c = flat % width;
      if (is_seed(r, c)) {
        available(r, c) = true;
        continue;
      }
      if (!z.valid(r, c) || !std::isfinite(geo.cost(r, c))) continue;
      const int pred = geo.pred(r, c);
      if (pred < 0) continue;
      const int qr = r - kNeighborOffsets[pred][0];
      const int qc = c - kNeighborOffsets[pred][1];

      // gather usable pixels in q's 3x3 window, excluding p itself
      int count = 0;
      Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
      Eigen::Vector3d atb = Eigen::Vector3d::Zero();
      const bool plane = cfg.basis == Basis::Polynomial;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int wr = qr + dr, wc = qc + dc;
          if (wr < 0 || wr >= rows || wc < 0 || wc >= cols) continue;
          if (wr == r && wc == c) continue;
          if (!available(wr, wc) || !z.valid(wr, wc)) continue;
          if (plane) {
            // accumulate the 3x3 normal equations of the plane fit in place
            const Eigen::Vector3d row(1.0, double(dc), double(dr));
            ata.noalias() += row * row.transpose();
            atb.noalias() += row * z(wr, wc);
          } else {
            eval_basis(cfg.basis, double(dc), double(dr), feat);
            for (int t = 0; t < nb_terms; ++t) design(count, t) = feat[t];
            rhs(count) = z(wr, wc);
          }
          ++count;
        }
      }

      double pred_z;
      bool fitted = false;
      if (count >= 3) {
        if (plane) {
          const Eigen::FullPivLU<Eigen::Matrix3d> lu(ata);
          if (lu.rank() == 3) {
            const Eigen::Vector3d alpha = lu.solve(atb);
            pred_z = alpha[0] + alpha[1] * double(c - qc) +
                     alpha[2] * double(r - qr);
            fitted = true;
          }
        } else {
          Eigen::CompleteOrthogonalDecomposition<Design> cod(
              design.topRows(count));
          const Rhs alpha = cod.solve(rhs.head(count));
          eval_basis(cfg.basis, double(c - qc), double(r - qr), feat);
          pred_z = 0.0;
          for (int t = 0; t < nb_terms; ++t) pred_z += alpha[t] * feat[t];
          fitted = true;
        }
      }
      if (!fitted) {
        // too little settled support for a plane: carry the predecessor value
        // forward along the coarse increment, which is exact whenever the
        // coarse map has the right local shape
        if (z_coarse.valid(r, c) && z_coarse.valid(qr, qc)) {
          pred_z = z(qr, qc) + (z_coarse(r, c) - z_coarse(qr, qc));
        } else {
          pred_z = z(qr, qc);
        }
      }

      const double step = 1.0 / double(k + 1);
      z(r, c) = (1.0 - step) * z(r, c) + step * pred_z;
      if (k == 0) available(r, c) = true;
    }
  }
  return z;
}

}  // namespace mtd
