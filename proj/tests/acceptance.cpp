// End-to-end acceptance suite. Each numbered check prints one PASS/FAIL line;
// the process exits nonzero if any hard check fails. The performance check is
// a soft target and never gates the exit code.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mtd/calibrate.hpp"
#include "mtd/graphopt.hpp"
#include "mtd/metrics.hpp"
#include "mtd/pipeline.hpp"
#include "mtd/refine.hpp"
#include "mtd/segmentation.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using namespace mtd;
using Clock = std::chrono::steady_clock;

namespace {

int hard_failures = 0;

void report(int id, bool ok, const std::string& label,
            const std::string& detail = "", bool soft = false) {
  if (!ok && !soft) ++hard_failures;
  std::printf("%s %d: %s%s%s\n", ok ? "PASS" : (soft ? "FAIL (soft)" : "FAIL"),
              id, label.c_str(), detail.empty() ? "" : " -- ",
              detail.c_str());
}

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           fs::path("mtd_accept_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

PipelineOptions stage_instance(const synthetic::Instance& inst,
                               const TempDir& tmp) {
  write_ppm(tmp.file("rgb.ppm"), inst.rgb);
  write_float_map(tmp.file("rel.pfm"), inst.rel);
  write_float_map(tmp.file("gt.pfm"), inst.gt);
  write_seeds(tmp.file("seeds.csv"), inst.seeds);
  write_pgm16(tmp.file("segments.pgm"), inst.labels);
  write_config(tmp.file("config.cfg"), inst.config);

  PipelineOptions opts;
  opts.config_path = tmp.file("config.cfg");
  opts.rgb_path = tmp.file("rgb.ppm");
  opts.rel_path = tmp.file("rel.pfm");
  opts.seeds_path = tmp.file("seeds.csv");
  opts.segments_path = tmp.file("segments.pgm");
  opts.gt_path = tmp.file("gt.pfm");
  opts.out_path = tmp.file("out.pfm");
  return opts;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

// quadratic-dominated smooth test function; see the bound derivation checks
std::function<double(double, double)> random_smooth(std::mt19937& rng) {
  std::uniform_real_distribution<double> amp(0.1, 0.3), freq(0.2, 0.4),
      phase(0.0, 6.28), quad(0.15, 0.3), sign(0.0, 1.0), mix(-0.1, 0.1);
  const double a1 = amp(rng), wu = freq(rng), wv = freq(rng);
  const double pu = phase(rng), pv = phase(rng);
  const double qu = (sign(rng) < 0.5 ? -1.0 : 1.0) * quad(rng);
  const double qv = (sign(rng) < 0.5 ? -1.0 : 1.0) * quad(rng);
  const double quv = mix(rng);
  return [=](double u, double v) {
    return a1 * std::sin(wu * u + pu) * std::sin(wv * v + pv) +
           qu * u * u + qv * v * v + quv * u * v;
  };
}

SegmentGraph random_connected_graph(std::mt19937& rng, int n,
                                    int anchor_count) {
  SegmentGraph g;
  std::uniform_real_distribution<double> pos(0.0, 100.0), w(0.05, 1.0),
      theta(-2.0, 2.0);
  g.nodes.resize(n);
  g.centroids.resize(n);
  for (int i = 0; i < n; ++i) {
    g.centroids[i] = Eigen::Vector2d(pos(rng), pos(rng));
    g.nodes[i] = {theta(rng), theta(rng), false};
  }
  for (int i = 1; i < n; ++i) {
    g.edges.push_back({int(rng() % i), i, w(rng)});
  }
  for (int e = 0; e < n / 2; ++e) {
    const int i = int(rng() % n), j = int(rng() % n);
    if (i != j) g.edges.push_back({std::min(i, j), std::max(i, j), w(rng)});
  }
  while (anchor_count-- > 0) g.nodes[rng() % n].anchored = true;
  if (std::none_of(g.nodes.begin(), g.nodes.end(),
                   [](const CalibParams& p) { return p.anchored; })) {
    g.nodes[0].anchored = true;
  }
  return g;
}

// ---- criterion 1: geodesic cost against a Dijkstra reference ---------------
void check_geodesic_oracle() {
  const auto t0 = Clock::now();
  std::mt19937 rng(101);
  std::uniform_real_distribution<double> v(0.0, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    ScalarGrid phi(32, 32);
    for (int r = 0; r < 32; ++r)
      for (int c = 0; c < 32; ++c) phi(r, c) = v(rng);
    std::vector<std::pair<int, int>> sources;
    const int ns = 1 + int(rng() % 5);
    for (int s = 0; s < ns; ++s) {
      sources.emplace_back(int(rng() % 32), int(rng() % 32));
    }
    const GeodesicField geo = geodesic_dp(phi, sources);
    const Eigen::ArrayXXd oracle = oracles::dijkstra_cost(phi, sources);
    worst = std::max(worst, (geo.cost.values - oracle).abs().maxCoeff());
  }
  const double elapsed = ms_since(t0);
  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "max deviation %.2e over 50 grids, %.0f ms", worst, elapsed);
  report(1, worst <= 1e-9 && elapsed < 5000.0,
         "geodesic sweeps match the shortest-path reference on 32x32 grids",
         detail);
}

// ---- criterion 2: least-squares fit against a pseudo-inverse reference ----
void check_least_squares_oracle() {
  std::mt19937 rng(103);
  // keep xi strictly positive: proxy samples are inverse depths
  std::uniform_real_distribution<double> slope(0.2, 3.0), offset(0.05, 2.0),
      depth(0.1, 5.0), noise(-0.01, 0.01);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 3 + int(rng() % 48);
    const double a = slope(rng), b = offset(rng);
    std::vector<double> d(n), xi(n);
    for (int i = 0; i < n; ++i) {
      d[i] = depth(rng);
      xi[i] = a * d[i] + b + noise(rng);
    }
    const CalibParams fit = fit_segment(d, xi, FitMode::LeastSquares);
    const auto [oa, ob] = oracles::pinv_fit(d, xi);
    const double scale = std::max({1.0, std::abs(oa), std::abs(ob)});
    worst = std::max({worst, std::abs(fit.a - oa) / scale,
                      std::abs(fit.b - ob) / scale});
  }
  char detail[96];
  std::snprintf(detail, sizeof(detail),
                "max relative deviation %.2e over 1000 fits", worst);
  report(2, worst <= 1e-9,
         "least-squares calibration matches the pseudo-inverse reference",
         detail);
}

// ---- criterion 3: graph propagation against a dense direct solve ----------
void check_graph_oracle() {
  std::mt19937 rng(107);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + int(rng() % 48);
    const SegmentGraph g = random_connected_graph(rng, n, 1 + int(rng() % 4));
    const PropagateResult res = propagate(g);
    const auto oracle = oracles::dense_propagate(g);
    double scale = 1.0;
    for (const auto& p : oracle) {
      scale = std::max({scale, std::abs(p.a), std::abs(p.b)});
    }
    for (int i = 0; i < n; ++i) {
      worst = std::max({worst, std::abs(res.params[i].a - oracle[i].a) / scale,
                        std::abs(res.params[i].b - oracle[i].b) / scale});
    }
  }

  // single anchor: the constant solution zeroes the objective
  double single_worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    SegmentGraph g = random_connected_graph(rng, 20, 0);
    for (auto& nd : g.nodes) nd.anchored = false;
    const int anchor = int(rng() % 20);
    g.nodes[anchor].anchored = true;
    const double ta = g.nodes[anchor].a, tb = g.nodes[anchor].b;
    const PropagateResult res = propagate(g);
    for (const auto& p : res.params) {
      single_worst = std::max(
          {single_worst, std::abs(p.a - ta), std::abs(p.b - tb)});
    }
  }
  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "max relative deviation %.2e; single-anchor deviation %.2e",
                worst, single_worst);
  report(3, worst <= 1e-7 && single_worst <= 1e-10,
         "graph propagation matches the dense direct solve", detail);
}

// ---- criterion 4: exact recovery on the piecewise instance ----------------
void check_exact_recovery() {
  TempDir tmp;
  const auto inst = synthetic::build_piecewise_instance();
  const PipelineOptions opts = stage_instance(inst, tmp);

  const auto t0 = Clock::now();
  const PipelineResult res = run_pipeline(opts);
  const double elapsed = ms_since(t0);

  const double max_depth = inst.gt.values.maxCoeff();
  const bool ok = res.exit_code == 0 && res.report &&
                  res.report->absrel <= 1e-3 &&
                  res.report->rmse <= 1e-3 * max_depth && elapsed < 2000.0;
  char detail[160];
  if (res.report) {
    std::snprintf(detail, sizeof(detail),
                  "AbsRel %.2e, RMSE %.2e (limit %.2e), %.0f ms",
                  res.report->absrel, res.report->rmse, 1e-3 * max_depth,
                  elapsed);
  } else {
    std::snprintf(detail, sizeof(detail), "exit %d: %s", res.exit_code,
                  res.error.c_str());
  }
  report(4, ok, "piecewise-affine instance is recovered end to end", detail);
}

// ---- criterion 5: propagation into unseeded segments ----------------------
void check_unseeded_propagation() {
  TempDir tmp;
  const auto inst = synthetic::build_piecewise_instance(
      {true, true, true, true, false, false});
  PipelineOptions opts = stage_instance(inst, tmp);
  // the subject here is the propagated coarse depth; pixel refinement has no
  // seeds inside the unseeded segments to anchor to and is judged separately
  opts.no_refine = true;
  const PipelineResult res = run_pipeline(opts);

  // maximum principle on the propagated parameters, checked in process
  const SegmentMap seg = relabel_external(inst.labels);
  const CalibrationResult calib =
      calibrate_anchored(inst.rel, inst.seeds, seg, inst.config);
  const SegmentGraph graph = build_graph(seg, calib.params, inst.config.knn);
  const PropagateResult prop = propagate(graph);
  double lo_a = 1e300, hi_a = -1e300, lo_b = 1e300, hi_b = -1e300;
  for (const auto& p : calib.params) {
    if (!p.anchored) continue;
    lo_a = std::min(lo_a, p.a);
    hi_a = std::max(hi_a, p.a);
    lo_b = std::min(lo_b, p.b);
    hi_b = std::max(hi_b, p.b);
  }
  bool bounded = true;
  for (const auto& p : prop.params) {
    bounded = bounded && p.a >= lo_a - 1e-9 && p.a <= hi_a + 1e-9 &&
              p.b >= lo_b - 1e-9 && p.b <= hi_b + 1e-9;
  }

  const bool ok = res.exit_code == 0 && res.report &&
                  res.report->absrel <= 0.05 && bounded;
  char detail[128];
  if (res.report) {
    std::snprintf(detail, sizeof(detail),
                  "AbsRel %.3f with 2 of 6 segments unseeded; bounds %s",
                  res.report->absrel, bounded ? "held" : "violated");
  } else {
    std::snprintf(detail, sizeof(detail), "exit %d: %s", res.exit_code,
                  res.error.c_str());
  }
  report(5, ok, "graph propagation covers unseeded segments", detail);
}

// ---- criterion 6: symmetric remainder identities and pathwise bound -------
void check_remainder_suite() {
  std::mt19937 rng(109);
  double worst_sym = 0.0, worst_affine = 0.0;
  {
    const auto f = random_smooth(rng);
    const double h = 0.5;
    const int n = 17;
    Eigen::ArrayXXd z(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) z(r, c) = f(c * h, r * h);
    for (int trial = 0; trial < 300; ++trial) {
      const int pr = 1 + int(rng() % (n - 2)), pc = 1 + int(rng() % (n - 2));
      const int qr = 1 + int(rng() % (n - 2)), qc = 1 + int(rng() % (n - 2));
      worst_sym = std::max(
          worst_sym, std::abs(oracles::remainder(z, h, pr, pc, qr, qc) +
                              oracles::remainder(z, h, qr, qc, pr, pc)));
    }
    Eigen::ArrayXXd affine(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) affine(r, c) = 0.3 + 1.7 * c * h - 0.6 * r;
    for (int trial = 0; trial < 100; ++trial) {
      const int pr = 1 + int(rng() % (n - 2)), pc = 1 + int(rng() % (n - 2));
      const int qr = 1 + int(rng() % (n - 2)), qc = 1 + int(rng() % (n - 2));
      worst_affine = std::max(
          worst_affine, std::abs(oracles::remainder(affine, h, pr, pc, qr,
                                                    qc)));
    }
  }

  // pathwise bound at the finest spacing, 10% discretization slack
  bool bound_ok = true;
  const double h = 0.25;
  const int scale = 4, n = 33;
  const std::vector<std::array<int, 4>> pairs = {
      {1, 1, 6, 5}, {2, 6, 6, 2}, {1, 4, 7, 7}, {3, 1, 3, 7}, {6, 6, 1, 2}};
  for (int grid = 0; grid < 20; ++grid) {
    const auto f = random_smooth(rng);
    Eigen::ArrayXXd z(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) z(r, c) = f(c * h, r * h);
    Eigen::ArrayXXd phi = Eigen::ArrayXXd::Zero(n, n);
    for (int r = 1; r < n - 1; ++r) {
      for (int c = 1; c < n - 1; ++c) {
        const double zuu =
            (z(r, c - 1) - 2.0 * z(r, c) + z(r, c + 1)) / (h * h);
        const double zvv =
            (z(r - 1, c) - 2.0 * z(r, c) + z(r + 1, c)) / (h * h);
        phi(r, c) = std::hypot(zuu, zvv);
      }
    }
    for (const auto& [pr, pc, qr, qc] : pairs) {
      const int ipr = pr * scale, ipc = pc * scale;
      const int iqr = qr * scale, iqc = qc * scale;
      const double R = oracles::remainder(z, h, ipr, ipc, iqr, iqc);
      const double bound = std::min(
          oracles::l_path_integral(phi, h, ipr, ipc, iqr, iqc, true),
          oracles::l_path_integral(phi, h, ipr, ipc, iqr, iqc, false));
      bound_ok = bound_ok && std::abs(R) <= 1.1 * bound + 1e-12;
    }
  }

  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "antisymmetry %.2e, affine %.2e, bound %s", worst_sym,
                worst_affine, bound_ok ? "held on 20 grids" : "violated");
  report(6, worst_sym <= 1e-12 && worst_affine <= 1e-9 && bound_ok,
         "symmetric remainder identities and pathwise bound", detail);
}

// ---- criterion 7: metric fixtures and scale invariance --------------------
void check_metrics() {
  bool ok = true;
  std::mt19937 rng(113);
  std::uniform_real_distribution<double> v(0.3, 6.0);
  ScalarGrid gt(6, 6);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) gt(r, c) = v(rng);

  const MetricReport ident = evaluate(gt, gt, 1e-3, 1e3);
  ok = ok && ident.rmse == 0.0 && ident.mae == 0.0 && ident.absrel == 0.0 &&
       ident.delta1 == 1.0 && ident.delta3 == 1.0 && ident.silog == 0.0;

  ScalarGrid doubled = gt;
  doubled.values *= 2.0;
  const MetricReport twice = evaluate(doubled, gt, 1e-3, 1e3);
  ok = ok && twice.absrel == 1.0 && twice.delta1 == 0.0 &&
       twice.delta2 == 0.0 && twice.delta3 == 0.0 && twice.silog <= 1e-12;

  ScalarGrid g2(1, 2), p2(1, 2);
  g2(0, 0) = 1.0;
  g2(0, 1) = 2.0;
  p2(0, 0) = 1.1;
  p2(0, 1) = 1.9;
  const MetricReport pair = evaluate(p2, g2, 1e-3, 1e3);
  ok = ok && std::abs(pair.mae - 0.1) <= 1e-12 &&
       std::abs(pair.rmse - 0.1) <= 1e-12 &&
       std::abs(pair.absrel - 0.075) <= 1e-12;

  ScalarGrid pred(6, 6);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) pred(r, c) = v(rng);
  const double base = evaluate(pred, gt, 1e-3, 1e3).silog;
  double worst = 0.0;
  std::uniform_real_distribution<double> s(0.01, 100.0);
  for (int trial = 0; trial < 100; ++trial) {
    ScalarGrid scaled = pred;
    scaled.values *= s(rng);
    worst = std::max(worst,
                     std::abs(evaluate(scaled, gt, 1e-3, 1e3).silog - base));
  }
  ok = ok && worst <= 1e-12;

  char detail[96];
  std::snprintf(detail, sizeof(detail),
                "fixtures matched; SI-log drift %.2e over 100 rescalings",
                worst);
  report(7, ok, "evaluation metrics match hand-computed fixtures", detail);
}

// ---- criterion 8: determinism ---------------------------------------------
void check_determinism() {
  TempDir tmp;
  const auto inst = synthetic::build_piecewise_instance();
  PipelineOptions opts = stage_instance(inst, tmp);
  const PipelineResult r1 = run_pipeline(opts);
  const std::string first = slurp(opts.out_path);
  opts.out_path = tmp.file("out2.pfm");
  const PipelineResult r2 = run_pipeline(opts);
  const std::string second = slurp(opts.out_path);
  const bool ok = r1.exit_code == 0 && r2.exit_code == 0 && !first.empty() &&
                  first == second;
  report(8, ok, "repeated runs produce byte-identical outputs");
}

// ---- criterion 9 (soft): back-end runtime ---------------------------------
void check_performance() {
  const auto inst = synthetic::build_piecewise_instance(
      {true, true, true, true, true, true}, 480, 640);
  const SegmentMap seg = relabel_external(inst.labels);

  const auto t0 = Clock::now();
  const CalibrationResult calib =
      calibrate_anchored(inst.rel, inst.seeds, seg, inst.config);
  const SegmentGraph graph = build_graph(seg, calib.params, inst.config.knn);
  const PropagateResult prop = propagate(graph);
  const ScalarGrid coarse =
      lift_to_pixels(seg, prop.params, inst.rel, inst.config);
  const ScalarGrid phi = potential(coarse);
  std::vector<std::pair<int, int>> sources;
  for (const Seed& s : inst.seeds.entries) {
    sources.emplace_back(s.row, s.col);
  }
  const GeodesicField geo =
      geodesic_dp(phi, sources, inst.config.dp_sweeps);
  const ScalarGrid refined =
      refine_depth(coarse, inst.seeds, geo, inst.config);
  const double elapsed = ms_since(t0);

  const bool within = elapsed <= 500.0 && refined.values.isFinite().all();
  char detail[96];
  std::snprintf(detail, sizeof(detail),
                "480x640 back end (segmentation excluded) took %.0f ms, "
                "soft target 500 ms", elapsed);
  report(9, within, "single-threaded back-end runtime (informational)",
         detail, /*soft=*/true);
}

}  // namespace

int main() {
  check_geodesic_oracle();
  check_least_squares_oracle();
  check_graph_oracle();
  check_exact_recovery();
  check_unseeded_propagation();
  check_remainder_suite();
  check_metrics();
  check_determinism();
  check_performance();
  if (hard_failures > 0) {
    std::printf("%d criterion(s) failed\n", hard_failures);
    return 1;
  }
  std::printf("all acceptance criteria satisfied\n");
  return 0;
}
