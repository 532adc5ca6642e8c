#include "mtd/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mtd {
namespace {

struct DisjointSet {
  std::vector<int> parent, rank_, size_;

  explicit DisjointSet(int n) : parent(n), rank_(n, 0), size_(n, 1) {
    std::iota(parent.begin(), parent.end(), 0);
  }

  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }

  int join(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent[b] = a;
    size_[a] += size_[b];
    if (rank_[a] == rank_[b]) ++rank_[a];
    return a;
  }

  int size(int x) { return size_[find(x)]; }
};

Eigen::ArrayXXd gaussian_smooth(const Eigen::ArrayXXd& src, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;

  const Eigen::Index rows = src.rows(), cols = src.cols();
  auto clampi = [](Eigen::Index v, Eigen::Index hi) {
    return v < 0 ? Eigen::Index(0) : (v >= hi ? hi - 1 : v);
  };

  Eigen::ArrayXXd tmp(rows, cols), dst(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[i + radius] * src(r, clampi(c + i, cols));
      }
      tmp(r, c) = acc;
    }
  }
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[i + radius] * tmp(clampi(r + i, rows), c);
      }
      dst(r, c) = acc;
    }
  }
  return dst;
}

struct PixelEdge {
  int a, b;
  float w;
};

}  // namespace

SegmentMap felzenszwalb(const RgbImage& img, double scale, int min_size) {
  const Eigen::Index rows = img.rows(), cols = img.cols();
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("felzenszwalb: empty image");
  }
  if (min_size < 1) min_size = 1;

  // edge weights in 8-bit units to match the conventional scale parameter
  const Eigen::ArrayXXd r = gaussian_smooth(img.r * 255.0, 0.8);
  const Eigen::ArrayXXd g = gaussian_smooth(img.g * 255.0, 0.8);
  const Eigen::ArrayXXd b = gaussian_smooth(img.b * 255.0, 0.8);

  const int w = static_cast<int>(cols), h = static_cast<int>(rows);
  auto idx = [w](int rr, int cc) { return rr * w + cc; };
  auto weight = [&](int r0, int c0, int r1, int c1) {
    const double dr = r(r0, c0) - r(r1, c1);
    const double dg = g(r0, c0) - g(r1, c1);
    const double db = b(r0, c0) - b(r1, c1);
    return static_cast<float>(std::sqrt(dr * dr + dg * dg + db * db));
  };

  std::vector<PixelEdge> edges;
  edges.reserve(static_cast<std::size_t>(h) * w * 4);
  for (int rr = 0; rr < h; ++rr) {
    for (int cc = 0; cc < w; ++cc) {
      if (cc + 1 < w)
        edges.push_back({idx(rr, cc), idx(rr, cc + 1), weight(rr, cc, rr, cc + 1)});
      if (rr + 1 < h)
        edges.push_back({idx(rr, cc), idx(rr + 1, cc), weight(rr, cc, rr + 1, cc)});
      if (rr + 1 < h && cc + 1 < w)
        edges.push_back({idx(rr, cc), idx(rr + 1, cc + 1), weight(rr, cc, rr + 1, cc + 1)});
      if (rr + 1 < h && cc > 0)
        edges.push_back({idx(rr, cc), idx(rr + 1, cc - 1), weight(rr, cc, rr + 1, cc - 1)});
    }
  }
  std::stable_sort(edges.begin(), edges.end(),
                   [](const PixelEdge& a, const PixelEdge& b) { return a.w < b.w; });

  DisjointSet ds(h * w);
  std::vector<float> internal(static_cast<std::size_t>(h) * w, 0.0f);
  for (const PixelEdge& e : edges) {
    const int a = ds.find(e.a), b2 = ds.find(e.b);
    if (a == b2) continue;
    const float ta = internal[a] + static_cast<float>(scale) / ds.size_[a];
    const float tb = internal[b2] + static_cast<float>(scale) / ds.size_[b2];
    if (e.w <= std::min(ta, tb)) {
      const int root = ds.join(a, b2);
      internal[root] = e.w;
    }
  }

  // absorb small components along the lowest-weight boundary edges
  for (const PixelEdge& e : edges) {
    const int a = ds.find(e.a), b2 = ds.find(e.b);
    if (a != b2 && (ds.size_[a] < min_size || ds.size_[b2] < min_size)) {
      ds.join(a, b2);
    }
  }

  Eigen::ArrayXXi roots(rows, cols);
  for (int rr = 0; rr < h; ++rr) {
    for (int cc = 0; cc < w; ++cc) {
      roots(rr, cc) = ds.find(idx(rr, cc));
    }
  }
  return relabel_external(roots);
}

SegmentMap relabel_external(const Eigen::ArrayXXi& labels) {
  if (labels.size() == 0) {
    throw std::invalid_argument("relabel_external: empty label image");
  }
  const int max_label = labels.maxCoeff();
  const int min_label = labels.minCoeff();
  if (min_label < 0) {
    throw std::invalid_argument("relabel_external: negative label");
  }

  std::vector<int> lut(static_cast<std::size_t>(max_label) + 1, -1);
  SegmentMap seg;
  seg.labels.resize(labels.rows(), labels.cols());
  const int width = static_cast<int>(labels.cols());
  int next_id = 0;
  for (Eigen::Index r = 0; r < labels.rows(); ++r) {
    for (Eigen::Index c = 0; c < labels.cols(); ++c) {
      int& slot = lut[labels(r, c)];
      if (slot < 0) {
        slot = next_id++;
        seg.pixels.emplace_back();
        seg.centroids.emplace_back(Eigen::Vector2d::Zero());
      }
      seg.labels(r, c) = slot;
      seg.pixels[slot].push_back(static_cast<int>(r) * width +
                                 static_cast<int>(c));
      seg.centroids[slot] += Eigen::Vector2d(double(r), double(c));
    }
  }
  for (int i = 0; i < seg.count(); ++i) {
    seg.centroids[i] /= double(seg.pixels[i].size());
  }
  return seg;
}

}  // namespace mtd
