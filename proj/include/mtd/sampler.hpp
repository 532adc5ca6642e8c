#ifndef MTD_SAMPLER_HPP
#define MTD_SAMPLER_HPP

#include <cstdint>

#include "mtd/grid.hpp"

namespace mtd {

// Uniform sample (without replacement) of valid ground-truth pixels. A
// noise_fraction subset is perturbed multiplicatively by (1 + N(0, sigma)).
// Deterministic for a fixed rng_seed.
SeedSet random_sample(const ScalarGrid& gt, double fraction,
                      double noise_fraction, double noise_sigma,
                      std::uint64_t rng_seed);

// Seeds along `lines` evenly spaced horizontal scanlines. Rows get a +-1
// pixel jitter when the line spacing exceeds two rows; denser scans are
// placed exactly.
SeedSet lidar_scan_sample(const ScalarGrid& gt, int lines,
                          std::uint64_t rng_seed);

}  // namespace mtd

#endif
