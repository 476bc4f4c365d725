#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "irsp/irsp.h"
#include "irsp/pipeline.hpp"
#include "irsp/specialfn.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace irsp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<double> log_points(double lo, double hi, int count) {
  return log_space(lo, hi, count);
}

double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_line(lx, ly).slope;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::current_path() / "acceptance_runs" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ExperimentConfig config_from(const std::string& text, const std::string& root) {
  ExperimentConfig c = ExperimentConfig::parse(text);
  c.set("output", (scratch(root)).string());
  return c;
}

const char* kAcoustic2 =
    "model = acoustic2\n"
    "order = 2\n"
    "grid.n = 256\n"
    "grid.half_width = 2\n"
    "bumps = 0,0,1,1\n"
    "points = circle:8:3\n"
    "sweep.q = 150\n"
    "sweep.step = 0.2\n"
    "seed = 1\n";

// Criterion-3 settings; the profile is shared with criterion 13.
const json& ergodic_profile() {
  static const json prof = [] {
    const ExperimentConfig c = config_from(kAcoustic2, "ergodicity");
    return json::parse(cmd_sweep(c, true).report);
  }();
  return prof;
}

Outcome hankel_truncation() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ts = log_points(10.0, 1000.0, 61);
  Outcome o{true, ""};
  for (int n = 0; n <= 2; ++n) {
    std::vector<double> err;
    for (double t : ts) err.push_back(std::abs(specialfn::hankel1(0, t) - specialfn::hankel1_trunc(0, n, t)));
    const double s = log_slope(ts, err);
    const double want = -(n + 1.5);
    o.pass = o.pass && std::abs(s - want) <= 0.1;
    o.detail += "N=" + std::to_string(n) + " slope " + fmt("%.4f", s) + " (want " + fmt("%.1f", want) + ")  ";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.pass = o.pass && secs < 1.0;
  o.detail += "time " + fmt("%.3f", secs) + " s";
  return o;
}

Outcome field_truncation() {
  ExperimentConfig c = ExperimentConfig::parse(kAcoustic2);
  c.set("grid.n", "64");
  const FieldSample s = sample_field(c.field_spec(), c.seed());
  const Point x{3.0, 0.0, 0.0};
  const auto ks = log_points(5.0, 200.0, 40);
  std::vector<double> err;
  for (double k : ks) err.push_back(std::abs(acoustic_field(s, k, x) - acoustic_field_trunc(s, k, x, 2)));
  const double slope = log_slope(ks, err);
  return {std::abs(slope + 3.5) <= 0.15,
          "slope " + fmt("%.3f", slope) + " (want -3.5 +- 0.15), 64^2 grid, x = (3, 0)"};
}

Outcome ergodicity() {
  const json& prof = ergodic_profile();
  const auto rel = prof.at("relative_error").get<std::vector<double>>();
  double worst = 0.0, mean = 0.0;
  for (double r : rel) {
    worst = std::max(worst, r);
    mean += r / static_cast<double>(rel.size());
  }
  return {worst <= 0.10, "max relative error " + fmt("%.4f", worst) + ", mean " + fmt("%.4f", mean) +
                             " over 8 points (limit 0.10)"};
}

Outcome profile_proportionality() {
  ExperimentConfig c = config_from(kAcoustic2, "proportionality");
  c.set("points", "spiral:16:2:4.5");
  c.set("sweep.oracle", "false");
  const json prof = json::parse(cmd_sweep(c, true).report);
  const double r = prof.at("estimate_potential_correlation").get<double>();
  return {r >= 0.98, "Pearson r " + fmt("%.4f", r) + " over 16 points (want >= 0.98)"};
}

Outcome acoustic3_spot() {
  ExperimentConfig c = ExperimentConfig::parse(
      "model = acoustic3\norder = 3\ngrid.n = 32\ngrid.half_width = 0.8\nbumps = 0,0,0,0.4,1\n"
      "points = spiral:16:1.45:3\nsweep.q = 60\nsweep.step = 0.25\nseed = 1\n");
  const FieldSpec spec = c.field_spec();
  const auto pts = c.measurements().points;
  double flat = 0.0;
  for (const auto& x : pts) {
    std::vector<double> w;
    for (double k = 30.0; k <= 60.0 + 1e-9; k += 2.5) {
      w.push_back(std::pow(k, spec.order) * covariance_moment(spec, k, x, WaveModel::Acoustic3));
    }
    flat = std::max(flat, relative_variation(w));
  }
  const SweepResult res = run_sweep(sample_field(spec, c.seed()), WaveModel::Acoustic3, c.sweep(), pts);
  std::vector<double> pot;
  for (const auto& x : pts) pot.push_back(riesz_potential(spec.strength, 3, x, 2.0));
  const double r = pearson_correlation(res.estimate, pot);
  return {flat <= 0.15 && r >= 0.95, "flatness " + fmt("%.4f", flat) + " (limit 0.15), Pearson r " +
                                         fmt("%.4f", r) + " (want >= 0.95)"};
}

// omega^p E|u|^2 at spot frequencies.
std::vector<double> weighted_moments(const MomentOracle& oracle, const Point& x,
                                     const std::vector<double>& omegas, double p) {
  std::vector<double> out;
  for (double w : omegas) out.push_back(std::pow(w, p) * oracle.second_moment(w, x));
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

Outcome elastic2() {
  ExperimentConfig c = ExperimentConfig::parse(
      "model = elastic2\norder = 2\ngrid.n = 256\ngrid.half_width = 2\nbumps = 0,0,1,1\n"
      "elastic.lambda = 2\nelastic.mu = 1\npoints = spiral:16:2:4.5\nseed = 1\n");
  const FieldSpec spec = c.field_spec();
  const ElasticParams e = c.elastic();
  const MomentOracle oracle(spec, WaveModel::Elastic2, e);
  const std::vector<double> omegas{40, 50, 60, 70, 80, 90, 100, 110, 120};
  const double p = spec.order + 1.0;
  const double flat = relative_variation(weighted_moments(oracle, {3.0, 0.0, 0.0}, omegas, p));
  std::vector<double> plateau, pot;
  for (const auto& x : c.measurements().points) {
    plateau.push_back(mean_of(weighted_moments(oracle, x, {40, 80, 120}, p)));
    pot.push_back(riesz_potential(spec.strength, 2, x, 1.0));
  }
  const double r = pearson_correlation(plateau, pot);
  return {flat <= 0.15 && r >= 0.95, "flatness " + fmt("%.4f", flat) + " at (3, 0) (limit 0.15), Pearson r " +
                                         fmt("%.4f", r) + " (want >= 0.95)"};
}

Outcome elastic3_constant() {
  ExperimentConfig c = ExperimentConfig::parse(
      "model = elastic3\norder = 3\ngrid.n = 24\ngrid.half_width = 0.8\nbumps = 0,0,0,0.4,1\n"
      "elastic.lambda = 2\nelastic.mu = 1\npoints = spiral:12:1.45:2.5\nseed = 1\n");
  const FieldSpec spec = c.field_spec();
  const ElasticParams e = c.elastic();
  const MomentOracle oracle(spec, WaveModel::Elastic3, e);
  std::vector<double> plateau, pot;
  for (const auto& x : c.measurements().points) {
    plateau.push_back(mean_of(weighted_moments(oracle, x, {8.0, 11.0, 14.0}, spec.order)));
    pot.push_back(riesz_potential(spec.strength, 3, x, 2.0));
  }
  const double fitted = fit_empirical_constant(plateau, pot);
  const double target = std::pow(e.cp(), 4.0 - spec.order) / (128.0 * kPi * kPi);
  const double ratio = fitted / target;
  return {std::abs(ratio - 1.0) <= 0.25, "fitted " + fmt("%.6g", fitted) + ", target " +
                                             fmt("%.6g", target) + ", ratio " + fmt("%.3f", ratio) +
                                             " (want within 25%)"};
}

Outcome decorrelation() {
  ExperimentConfig c = ExperimentConfig::parse(kAcoustic2);
  c.set("grid.n", "128");
  const FieldSpec spec = c.field_spec();
  const Point x{3.0, 0.0, 0.0};
  const MomentOracle oracle(spec, WaveModel::Acoustic2);
  const auto base = oracle.spectra(40.0, x);
  Outcome o{true, ""};
  for (double d : {10.0, 15.0, 20.0}) {
    const Decorrelation dc = frequency_decorrelation(spec, x, 40.0, 40.0 + d, 500, 1);
    const double ratio = std::abs(dc.conjugated) / dc.power;
    const double exact = std::abs(oracle.conjugated(base, 0, oracle.spectra(40.0 + d, x), 0)) /
                         oracle.second_moment(base);
    o.pass = o.pass && ratio < 0.05;
    o.detail += "D=" + fmt("%.0f", d) + " ratio " + fmt("%.4f", ratio) + " (exact " + fmt("%.4f", exact) + ")  ";
  }
  o.detail += "limit 0.05, 500 seeds";
  return o;
}

Outcome fourth_moment() {
  ExperimentConfig c = ExperimentConfig::parse(kAcoustic2);
  c.set("grid.n", "64");
  const FieldSpec spec = c.field_spec();
  const Point a{3.0, 0.0, 0.0};
  const Point b{3.0, 0.3, 0.0};
  std::vector<double> xs, ys;
  for (std::uint64_t seed = 1; seed <= 2000; ++seed) {
    const FieldSample s = sample_field(spec, seed);
    xs.push_back(acoustic_field(s, 10.0, a).real());
    ys.push_back(acoustic_field(s, 10.0, b).real());
  }
  const FourthMoment fm = fourth_moment_identity(xs, ys);
  return {std::abs(fm.z()) <= 3.0, "lhs " + fmt("%.6g", fm.lhs) + ", rhs " + fmt("%.6g", fm.rhs) +
                                       ", z " + fmt("%.3f", fm.z()) + " (want |z| <= 3), 2000 seeds"};
}

Outcome closed_loop() {
  ExperimentConfig c = ExperimentConfig::parse(
      "model = acoustic2\nbumps = 0,0,1,1\npoints = circle:24:3\ninversion.grid_n = 32\nseed = 1\n");
  const FieldSpec spec = c.field_spec();
  const auto pts = c.measurements().points;
  const Grid grid = c.inversion_grid();
  const KernelOperator op = assemble_kernel(pts, grid, 1.0, 1.0);
  const Eigen::VectorXd truth = discretize(spec.strength, grid);
  Eigen::VectorXd t(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    t[static_cast<Eigen::Index>(i)] = riesz_potential(spec.strength, 2, pts[i], 1.0);
  }
  const double rms = t.norm() / std::sqrt(static_cast<double>(t.size()));
  std::mt19937_64 rng(c.seed());
  std::normal_distribution<double> normal;
  Eigen::VectorXd noisy = t;
  for (Eigen::Index i = 0; i < noisy.size(); ++i) noisy[i] += 0.01 * rms * normal(rng);
  const LCurve clean = lcurve(op, t, c.lambda_grid(), false, truth);
  const LCurve dirty = lcurve(op, noisy, c.lambda_grid(), false, truth);
  const double e0 = clean.solutions[clean.best].truth_error;
  const double e1 = dirty.solutions[dirty.best].truth_error;
  return {e0 <= 0.10 && e1 <= 0.25, "best-lambda error " + fmt("%.4f", e0) + " noiseless (limit 0.10), " +
                                        fmt("%.4f", e1) + " with 1% noise (limit 0.25)"};
}

Outcome laplacian() {
  const Grid g = Grid::centered(2, 24, 1.0);
  StrengthFunction s;
  s.bumps = {SmoothBump{{0.1, 0.1, 0.0}, 0.8, 1.0}};
  const Eigen::VectorXd phi = discretize(s, g);
  const Point x{3.0, 0.5, 0.0};
  const double d1 = laplacian_consistency(g, phi, x, 1.0, 1, 1e-3);
  const double d2 = laplacian_consistency(g, phi, x, 1.0, 2, 1e-2);
  return {d1 <= 1e-3 && d2 <= 1e-3,
          "(n,l)=(1,1) " + fmt("%.3g", d1) + ", (2,1) " + fmt("%.3g", d2) + " (limit 1e-3)"};
}

std::map<std::string, std::string> run_files(const char* root) {
  std::ostringstream text;
  text << "model = acoustic2\ngrid.n = 64\nsweep.q = 40\nseed = 7\noutput = " << root << "\n";
  irsp_config* cfg = nullptr;
  std::map<std::string, std::string> files;
  if (irsp_config_parse(text.str().c_str(), &cfg) != IRSP_OK) return files;
  char* dir = nullptr;
  const bool ok = irsp_cmd_sample(cfg, nullptr, nullptr) == IRSP_OK &&
                  irsp_cmd_sweep(cfg, 1, &dir, nullptr) == IRSP_OK;
  irsp_config_free(cfg);
  if (!ok) return files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    // Manifests carry timings; config.txt names the output root.
    if (name.rfind("manifest_", 0) == 0 || name == "config.txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    files[name] = std::string(std::istreambuf_iterator<char>(in), {});
  }
  irsp_string_free(dir);
  return files;
}

Outcome determinism() {
  const auto a = run_files(scratch("determinism_a").c_str());
  const auto b = run_files(scratch("determinism_b").c_str());
  if (a.empty()) return {false, std::string("run failed: ") + irsp_last_error()};
  std::string names;
  bool same = a.size() == b.size();
  for (const auto& [name, bytes] : a) {
    names += name + " ";
    const auto it = b.find(name);
    same = same && it != b.end() && it->second == bytes;
  }
  return {same, std::string(same ? "identical: " : "differ: ") + names};
}

Outcome constant_audit() {
  const json& c = ergodic_profile().at("constants");
  const double paper = c.at("paper").get<double>();
  const double fitted = c.at("empirical").get<double>();
  const bool flagged = c.at("sign_discrepancy").get<bool>();
  const bool signs_differ = (paper > 0.0) != (fitted > 0.0);
  return {flagged == signs_differ && flagged,
          "fitted C " + fmt("%.6g", fitted) + " (estimate fit " +
              fmt("%.6g", c.at("empirical_estimate").get<double>()) + "), printed C_2/(8 pi) " +
              fmt("%.6g", paper) + ", sign discrepancy " + (flagged ? "flagged" : "not flagged")};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

const std::map<int, Criterion>& criteria() {
  static const std::map<int, Criterion> all{
      {1, {"Hankel truncation law", hankel_truncation}},
      {2, {"field truncation law", field_truncation}},
      {3, {"ergodicity (2D acoustic)", ergodicity}},
      {4, {"profile proportionality", profile_proportionality}},
      {5, {"3D acoustic spot check", acoustic3_spot}},
      {6, {"elastic 2D", elastic2}},
      {7, {"elastic 3D constant", elastic3_constant}},
      {8, {"frequency decorrelation", decorrelation}},
      {9, {"Gaussian fourth-moment identity", fourth_moment}},
      {10, {"closed-loop inversion", closed_loop}},
      {11, {"Laplacian identity", laplacian}},
      {12, {"determinism", determinism}},
      {13, {"2D acoustic constant audit", constant_audit}},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> picked;
  app.add_option("--criterion,-c", picked, "criterion numbers (default: all)");
  CLI11_PARSE(app, argc, argv);
  if (picked.empty()) {
    for (const auto& [n, _] : criteria()) picked.push_back(n);
  }

  int failed = 0;
  for (int n : picked) {
    const auto it = criteria().find(n);
    if (it == criteria().end()) {
      std::fprintf(stderr, "unknown criterion %d\n", n);
      return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %-34s %s  %s  [%.1f s]\n", n, it->second.name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
