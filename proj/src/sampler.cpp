#include "mtd/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace mtd {

SeedSet random_sample(const ScalarGrid& gt, double fraction,
                      double noise_fraction, double noise_sigma,
                      std::uint64_t rng_seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("random_sample: fraction must be in (0, 1]");
  }
  if (noise_fraction < 0.0 || noise_fraction > 1.0) {
    throw std::invalid_argument("random_sample: noise_fraction out of range");
  }

  std::vector<std::pair<int, int>> valid_pixels;
  for (Eigen::Index r = 0; r < gt.rows(); ++r) {
    for (Eigen::Index c = 0; c < gt.cols(); ++c) {
      if (gt.valid(r, c) && gt(r, c) > 0.0) {
        valid_pixels.emplace_back(int(r), int(c));
      }
    }
  }
  if (valid_pixels.empty()) {
    throw std::invalid_argument("random_sample: no valid pixels");
  }

  std::size_t count = static_cast<std::size_t>(
      std::llround(fraction * double(valid_pixels.size())));
  count = std::clamp<std::size_t>(count, 1, valid_pixels.size());

  std::mt19937_64 rng(rng_seed);
  std::shuffle(valid_pixels.begin(), valid_pixels.end(), rng);

  SeedSet seeds;
  seeds.entries.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& [r, c] = valid_pixels[i];
    seeds.entries.push_back({r, c, gt(r, c)});
  }

  const std::size_t noisy =
      static_cast<std::size_t>(std::llround(noise_fraction * double(count)));
  std::normal_distribution<double> noise(0.0, noise_sigma);
  for (std::size_t i = 0; i < noisy; ++i) {
    double factor = 1.0 + noise(rng);
    seeds.entries[i].value =
        std::max(seeds.entries[i].value * factor, 1e-9);
  }
  return seeds;
}

SeedSet lidar_scan_sample(const ScalarGrid& gt, int lines,
                          std::uint64_t rng_seed) {
  if (lines < 1) {
    throw std::invalid_argument("lidar_scan_sample: lines must be >= 1");
  }
  const int rows = static_cast<int>(gt.rows());
  const int cols = static_cast<int>(gt.cols());
  const bool jitter = rows / std::max(lines, 1) > 2;

  std::mt19937_64 rng(rng_seed);
  std::uniform_int_distribution<int> wobble(-1, 1);

  SeedSet seeds;
  std::set<std::pair<int, int>> used;
  for (int i = 0; i < lines; ++i) {
    const int base = static_cast<int>(double(rows) * (i + 0.5) / lines);
    for (int c = 0; c < cols; ++c) {
      int r = base + (jitter ? wobble(rng) : 0);
      r = std::clamp(r, 0, rows - 1);
      if (!gt.valid(r, c) || !(gt(r, c) > 0.0)) continue;
      if (!used.insert({r, c}).second) continue;
      seeds.entries.push_back({r, c, gt(r, c)});
    }
  }
  return seeds;
}

}  // namespace mtd
