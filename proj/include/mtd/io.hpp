#ifndef MTD_IO_HPP
#define MTD_IO_HPP

#include <Eigen/Core>
#include <stdexcept>
#include <string>

#include "mtd/grid.hpp"

namespace mtd {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FitMode { LeastSquares, Median, Mean, Moment, Quantile };
enum class Basis { Polynomial, Bspline };
enum class ProxyDomain { Inverse, Depth };

struct PipelineConfig {
  double kappa = 1.0;          // proxy scale
  double epsilon = 1e-6;       // stability constant
  double d_min = 1e-6;         // calibration clamp
  double seg_scale = 300.0;    // Felzenszwalb scale k
  int seg_min_size = 20;       // pixels
  int knn = 8;                 // N nearest neighbors
  double sigma_spatial = 3.0;  // bilateral sigma_1, pixels
  double sigma_range = 0.1;    // bilateral sigma_2, intensity
  int bilateral_iters = 2;
  FitMode fit_mode = FitMode::LeastSquares;
  Basis basis = Basis::Polynomial;
  int dp_order = 3;  // k in the harmonic update
  int dp_sweeps = 4;
  ProxyDomain domain = ProxyDomain::Inverse;

  void validate() const;
};

std::string to_string(FitMode m);
std::string to_string(Basis b);
FitMode fit_mode_from_string(const std::string& s);
Basis basis_from_string(const std::string& s);

// Portable Float Map, grayscale "Pf". Rows are stored bottom-up; the sign of
// the scale token selects endianness. Invalid pixels are written as 0 together
// with an empty sidecar file "<path>.holes"; on read, the sidecar's presence
// makes 0 a missing-data sentinel. Non-finite samples are always invalid.
ScalarGrid read_float_map(const std::string& path);
void write_float_map(const std::string& path, const ScalarGrid& g);

// Seeds as text: one "row,col,depth_m" per line, '#' starts a comment.
SeedSet read_seeds(const std::string& path);
void write_seeds(const std::string& path, const SeedSet& seeds);

// Flat "key = value" config, unknown keys rejected, absent keys defaulted.
PipelineConfig read_config(const std::string& path);
void write_config(const std::string& path, const PipelineConfig& cfg);

// Segment labels as binary PGM (P5), maxval 65535, big-endian samples.
Eigen::ArrayXXi read_pgm16(const std::string& path);
void write_pgm16(const std::string& path, const Eigen::ArrayXXi& labels);

// Color input as binary PPM (P6), maxval 255, mapped to [0, 1].
RgbImage read_ppm(const std::string& path);
void write_ppm(const std::string& path, const RgbImage& img);

}  // namespace mtd

#endif
