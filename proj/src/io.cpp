#include "mtd/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace mtd {
namespace {

[[noreturn]] void fail(const std::string& path, std::size_t offset,
                       const std::string& what) {
  throw FormatError(path + ": " + what + " (byte offset " +
                    std::to_string(offset) + ")");
}

// Reads one whitespace-delimited token, tracking the byte offset.
std::string next_token(std::istream& in, std::size_t& offset) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    ++offset;
    if (!std::isspace(ch)) {
      tok.push_back(static_cast<char>(ch));
      break;
    }
  }
  while ((ch = in.get()) != EOF) {
    ++offset;
    if (std::isspace(ch)) break;
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

bool host_is_little_endian() {
  return std::endian::native == std::endian::little;
}

void swap4(char* p) {
  std::swap(p[0], p[3]);
  std::swap(p[1], p[2]);
}

std::string holes_sidecar(const std::string& path) { return path + ".holes"; }

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

void PipelineConfig::validate() const {
  auto check = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("config: ") + what);
  };
  check(kappa > 0, "kappa must be > 0");
  check(epsilon >= 0, "epsilon must be >= 0");
  check(d_min > 0, "d_min must be > 0");
  check(seg_scale > 0, "seg_scale must be > 0");
  check(seg_min_size >= 1, "seg_min_size must be >= 1");
  check(knn >= 1, "knn must be >= 1");
  check(sigma_spatial > 0, "sigma_spatial must be > 0");
  check(sigma_range > 0, "sigma_range must be > 0");
  check(bilateral_iters >= 0, "bilateral_iters must be >= 0");
  check(dp_order >= 1, "dp_order must be >= 1");
  check(dp_sweeps >= 1, "dp_sweeps must be >= 1");
}

std::string to_string(FitMode m) {
  switch (m) {
    case FitMode::LeastSquares: return "least_squares";
    case FitMode::Median: return "median";
    case FitMode::Mean: return "mean";
    case FitMode::Moment: return "moment";
    case FitMode::Quantile: return "quantile";
  }
  return "least_squares";
}

std::string to_string(Basis b) {
  return b == Basis::Polynomial ? "polynomial" : "bspline";
}

FitMode fit_mode_from_string(const std::string& s) {
  if (s == "least_squares") return FitMode::LeastSquares;
  if (s == "median") return FitMode::Median;
  if (s == "mean") return FitMode::Mean;
  if (s == "moment") return FitMode::Moment;
  if (s == "quantile") return FitMode::Quantile;
  throw std::invalid_argument("unknown fit_mode: " + s);
}

Basis basis_from_string(const std::string& s) {
  if (s == "polynomial") return Basis::Polynomial;
  if (s == "bspline") return Basis::Bspline;
  throw std::invalid_argument("unknown basis: " + s);
}

ScalarGrid read_float_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path + ": cannot open");
  std::size_t offset = 0;

  std::string magic = next_token(in, offset);
  if (magic != "Pf") fail(path, 0, "expected 'Pf' magic, got '" + magic + "'");

  const std::string wtok = next_token(in, offset);
  const std::string htok = next_token(in, offset);
  const std::string stok = next_token(in, offset);
  long w = 0, h = 0;
  double scale = 0.0;
  try {
    w = std::stol(wtok);
    h = std::stol(htok);
    scale = std::stod(stok);
  } catch (const std::exception&) {
    fail(path, offset, "malformed header");
  }
  if (w < 1 || h < 1) fail(path, offset, "non-positive dimensions");
  if (scale == 0.0) fail(path, offset, "zero scale token");
  const bool file_little = scale < 0.0;

  const bool has_holes = std::filesystem::exists(holes_sidecar(path));

  ScalarGrid g(h, w, 0.0, true);
  std::vector<char> row_buf(static_cast<std::size_t>(w) * 4);
  for (long file_row = 0; file_row < h; ++file_row) {
    in.read(row_buf.data(), static_cast<std::streamsize>(row_buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(row_buf.size())) {
      fail(path, offset + static_cast<std::size_t>(in.gcount()),
           "truncated payload");
    }
    const long r = h - 1 - file_row;  // bottom-up storage
    for (long c = 0; c < w; ++c) {
      char bytes[4];
      std::memcpy(bytes, row_buf.data() + c * 4, 4);
      if (file_little != host_is_little_endian()) swap4(bytes);
      float v;
      std::memcpy(&v, bytes, 4);
      g(r, c) = static_cast<double>(v);
      g.valid(r, c) = std::isfinite(v) && !(has_holes && v == 0.0f);
    }
    offset += row_buf.size();
  }
  return g;
}

void write_float_map(const std::string& path, const ScalarGrid& g) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(path + ": cannot open for writing");
  out << "Pf\n" << g.cols() << " " << g.rows() << "\n-1.0\n";

  const bool any_hole = !g.valid.all();
  std::vector<char> row_buf(static_cast<std::size_t>(g.cols()) * 4);
  for (Eigen::Index file_row = 0; file_row < g.rows(); ++file_row) {
    const Eigen::Index r = g.rows() - 1 - file_row;
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
      float v = g.valid(r, c) ? static_cast<float>(g(r, c)) : 0.0f;
      char bytes[4];
      std::memcpy(bytes, &v, 4);
      if (!host_is_little_endian()) swap4(bytes);
      std::memcpy(row_buf.data() + c * 4, bytes, 4);
    }
    out.write(row_buf.data(), static_cast<std::streamsize>(row_buf.size()));
  }
  if (!out) throw FormatError(path + ": write failed");
  out.close();

  const std::string sidecar = holes_sidecar(path);
  if (any_hole) {
    std::ofstream(sidecar, std::ios::trunc);
  } else {
    std::filesystem::remove(sidecar);
  }
}

SeedSet read_seeds(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open");
  SeedSet seeds;
  std::set<std::pair<int, int>> used;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    Seed s;
    if (!(ss >> s.row >> s.col >> s.value)) {
      throw FormatError(path + ": unparsable seed at line " +
                        std::to_string(line_no));
    }
    std::string extra;
    if (ss >> extra) {
      throw FormatError(path + ": trailing data at line " +
                        std::to_string(line_no));
    }
    if (s.row < 0 || s.col < 0) {
      throw FormatError(path + ": negative index at line " +
                        std::to_string(line_no));
    }
    if (!(s.value > 0.0) || !std::isfinite(s.value)) {
      throw FormatError(path + ": non-positive depth at line " +
                        std::to_string(line_no));
    }
    if (!used.insert({s.row, s.col}).second) {
      throw FormatError(path + ": duplicate coordinate at line " +
                        std::to_string(line_no));
    }
    seeds.entries.push_back(s);
  }
  return seeds;
}

void write_seeds(const std::string& path, const SeedSet& seeds) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError(path + ": cannot open for writing");
  out.precision(17);
  for (const Seed& s : seeds.entries) {
    out << s.row << "," << s.col << "," << s.value << "\n";
  }
}

PipelineConfig read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open");
  PipelineConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(path + ": expected key=value at line " +
                        std::to_string(line_no));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    try {
      if (key == "kappa") cfg.kappa = std::stod(val);
      else if (key == "epsilon") cfg.epsilon = std::stod(val);
      else if (key == "d_min") cfg.d_min = std::stod(val);
      else if (key == "seg_scale") cfg.seg_scale = std::stod(val);
      else if (key == "seg_min_size") cfg.seg_min_size = std::stoi(val);
      else if (key == "knn") cfg.knn = std::stoi(val);
      else if (key == "sigma_spatial") cfg.sigma_spatial = std::stod(val);
      else if (key == "sigma_range") cfg.sigma_range = std::stod(val);
      else if (key == "bilateral_iters") cfg.bilateral_iters = std::stoi(val);
      else if (key == "fit_mode") cfg.fit_mode = fit_mode_from_string(val);
      else if (key == "basis") cfg.basis = basis_from_string(val);
      else if (key == "dp_order") cfg.dp_order = std::stoi(val);
      else if (key == "dp_sweeps") cfg.dp_sweeps = std::stoi(val);
      else if (key == "domain") {
        if (val == "inverse") cfg.domain = ProxyDomain::Inverse;
        else if (val == "depth") cfg.domain = ProxyDomain::Depth;
        else throw std::invalid_argument("unknown domain: " + val);
      } else {
        throw FormatError(path + ": unknown key '" + key + "' at line " +
                          std::to_string(line_no));
      }
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw FormatError(path + ": bad value for '" + key + "' at line " +
                        std::to_string(line_no) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

void write_config(const std::string& path, const PipelineConfig& cfg) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError(path + ": cannot open for writing");
  out.precision(17);
  out << "kappa = " << cfg.kappa << "\n"
      << "epsilon = " << cfg.epsilon << "\n"
      << "d_min = " << cfg.d_min << "\n"
      << "seg_scale = " << cfg.seg_scale << "\n"
      << "seg_min_size = " << cfg.seg_min_size << "\n"
      << "knn = " << cfg.knn << "\n"
      << "sigma_spatial = " << cfg.sigma_spatial << "\n"
      << "sigma_range = " << cfg.sigma_range << "\n"
      << "bilateral_iters = " << cfg.bilateral_iters << "\n"
      << "fit_mode = " << to_string(cfg.fit_mode) << "\n"
      << "basis = " << to_string(cfg.basis) << "\n"
      << "dp_order = " << cfg.dp_order << "\n"
      << "dp_sweeps = " << cfg.dp_sweeps << "\n"
      << "domain = "
      << (cfg.domain == ProxyDomain::Inverse ? "inverse" : "depth") << "\n";
}

Eigen::ArrayXXi read_pgm16(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path + ": cannot open");
  std::size_t offset = 0;
  const std::string magic = next_token(in, offset);
  if (magic != "P5") fail(path, 0, "expected 'P5' magic");
  long w = 0, h = 0, maxval = 0;
  try {
    w = std::stol(next_token(in, offset));
    h = std::stol(next_token(in, offset));
    maxval = std::stol(next_token(in, offset));
  } catch (const std::exception&) {
    fail(path, offset, "malformed header");
  }
  if (w < 1 || h < 1) fail(path, offset, "non-positive dimensions");
  if (maxval != 65535) fail(path, offset, "expected maxval 65535");

  Eigen::ArrayXXi labels(h, w);
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * 2);
  for (long r = 0; r < h; ++r) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size()));
    if (in.gcount() != static_cast<std::streamsize>(row.size())) {
      fail(path, offset + static_cast<std::size_t>(in.gcount()),
           "truncated payload");
    }
    for (long c = 0; c < w; ++c) {
      labels(r, c) = (int(row[c * 2]) << 8) | int(row[c * 2 + 1]);
    }
    offset += row.size();
  }
  return labels;
}

void write_pgm16(const std::string& path, const Eigen::ArrayXXi& labels) {
  if (labels.size() > 0 && (labels.minCoeff() < 0 || labels.maxCoeff() > 65535)) {
    throw FormatError(path + ": labels out of 16-bit range");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(path + ": cannot open for writing");
  out << "P5\n" << labels.cols() << " " << labels.rows() << "\n65535\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(labels.cols()) * 2);
  for (Eigen::Index r = 0; r < labels.rows(); ++r) {
    for (Eigen::Index c = 0; c < labels.cols(); ++c) {
      row[c * 2] = static_cast<unsigned char>(labels(r, c) >> 8);
      row[c * 2 + 1] = static_cast<unsigned char>(labels(r, c) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw FormatError(path + ": write failed");
}

RgbImage read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path + ": cannot open");
  std::size_t offset = 0;
  const std::string magic = next_token(in, offset);
  if (magic != "P6") fail(path, 0, "expected 'P6' magic");
  long w = 0, h = 0, maxval = 0;
  try {
    w = std::stol(next_token(in, offset));
    h = std::stol(next_token(in, offset));
    maxval = std::stol(next_token(in, offset));
  } catch (const std::exception&) {
    fail(path, offset, "malformed header");
  }
  if (w < 1 || h < 1) fail(path, offset, "non-positive dimensions");
  if (maxval != 255) fail(path, offset, "expected maxval 255");

  RgbImage img(h, w);
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * 3);
  for (long r = 0; r < h; ++r) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size()));
    if (in.gcount() != static_cast<std::streamsize>(row.size())) {
      fail(path, offset + static_cast<std::size_t>(in.gcount()),
           "truncated payload");
    }
    for (long c = 0; c < w; ++c) {
      img.r(r, c) = row[c * 3] / 255.0;
      img.g(r, c) = row[c * 3 + 1] / 255.0;
      img.b(r, c) = row[c * 3 + 2] / 255.0;
    }
    offset += row.size();
  }
  return img;
}

void write_ppm(const std::string& path, const RgbImage& img) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(path + ": cannot open for writing");
  out << "P6\n" << img.cols() << " " << img.rows() << "\n255\n";
  auto quantize = [](double v) {
    const double q = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
    return static_cast<unsigned char>(q);
  };
  std::vector<unsigned char> row(static_cast<std::size_t>(img.cols()) * 3);
  for (Eigen::Index r = 0; r < img.rows(); ++r) {
    for (Eigen::Index c = 0; c < img.cols(); ++c) {
      row[c * 3] = quantize(img.r(r, c));
      row[c * 3 + 1] = quantize(img.g(r, c));
      row[c * 3 + 2] = quantize(img.b(r, c));
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw FormatError(path + ": write failed");
}

}  // namespace mtd
