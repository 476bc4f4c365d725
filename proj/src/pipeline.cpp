#include "irsp/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "irsp/specialfn.hpp"

#ifndef IRSP_VERSION
#define IRSP_VERSION "0.0.0"
#endif

namespace irsp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<ConfigKey> kSchema = {
    {"model", "acoustic2", "acoustic2 | acoustic3 | elastic2 | elastic3"},
    {"order", "auto", "spectral order m, d <= m < d + 1/2; auto = d"},
    {"grid.n", "auto", "source grid nodes per axis; auto = 64 (2D) or 32 (3D)"},
    {"grid.half_width", "2", "source grid box [-w, w]^d"},
    {"bumps", "auto", "'cx,cy[,cz],radius,amplitude; ...'; auto = unit bump at the origin"},
    {"elastic.lambda", "2", "Lame lambda"},
    {"elastic.mu", "1", "Lame mu"},
    {"points", "auto",
     "circle:N:R | sphere:N:R | spiral:N:RMIN:RMAX | 'x,y[,z]; ...'; auto = circle:8:3 or "
     "sphere:8:3"},
    {"delta_star", "1", "minimum distance from points to supp phi"},
    {"sweep.q", "150", "upper frequency Q of the band [1, Q]"},
    {"sweep.step", "0.2", "frequency step"},
    {"sweep.oracle", "true", "also integrate the ensemble moment over the sweep"},
    {"sweep.variance", "false", "predict the single-realization standard deviation"},
    {"forward.frequencies", "5,10,20,40", "frequencies for the forward command"},
    {"forward.truncated", "false", "use the truncated Hankel kernels (2D)"},
    {"inversion.source", "profile", "profile | analytic"},
    {"inversion.data", "estimate", "estimate | oracle (profile column to invert)"},
    {"inversion.constants", "empirical", "empirical | paper | unit"},
    {"inversion.grid_n", "32", "reconstruction grid nodes per axis"},
    {"inversion.half_width", "auto", "reconstruction box [-w, w]^d; auto covers supp phi"},
    {"inversion.lambda_min", "1e-8", "smallest Tikhonov parameter"},
    {"inversion.lambda_max", "1e-1", "largest Tikhonov parameter"},
    {"inversion.lambda_count", "29", "number of log-spaced parameters"},
    {"inversion.nonneg", "false", "project onto phi >= 0"},
    {"inversion.noise", "0", "relative additive noise for analytic data"},
    {"sample.format", "binary", "binary | csv"},
    {"sample.slope_seeds", "20", "realizations for the spectral-slope diagnostic"},
    {"seed", "1", "random seed"},
    {"output", "runs", "root output directory"},
    {"threads", "1", "worker threads"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

double to_number(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::Config, key + ": not a number: '" + text + "'");
  }
  return v;
}

std::vector<double> to_numbers(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& t : split(text, ',')) out.push_back(to_number(key, t));
  return out;
}

bool is_key(const std::string& key) {
  for (const auto& k : kSchema) {
    if (key == k.name) return true;
  }
  return false;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json point_json(const Point& p, int dim) {
  json a = json::array();
  for (int i = 0; i < dim; ++i) a.push_back(p[static_cast<std::size_t>(i)]);
  return a;
}

class Stopwatch {
 public:
  explicit Stopwatch(RunManifest& m) : manifest_(m), start_(now_seconds()) {}
  void lap(const std::string& stage) {
    const double t = now_seconds();
    manifest_.timings.emplace_back(stage, t - start_);
    start_ = t;
  }

 private:
  RunManifest& manifest_;
  double start_;
};

CommandResult begin(const ExperimentConfig& config, const std::string& command) {
  config.validate();
  CommandResult r;
  r.run_dir = run_directory(config);
  std::error_code ec;
  fs::create_directories(r.run_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + r.run_dir + ": " + ec.message());
  r.manifest.config_hash = config.hash_hex();
  r.manifest.version = version_string();
  r.manifest.command = command;
  write_text(fs::path(r.run_dir) / "config.txt", config.serialize());
  return r;
}

void finish(CommandResult& r) {
  write_text(fs::path(r.run_dir) / ("manifest_" + r.manifest.command + ".json"),
             r.manifest.to_json());
}

bool sample_exists(const std::string& dir) {
  return fs::exists(fs::path(dir) / "sample.json");
}

FieldSample load_sample(const std::string& dir) {
  if (!sample_exists(dir)) {
    throw Error(ErrorCode::MissingInput, "no sample in " + dir + " (run 'sample' first)");
  }
  return read_sample((fs::path(dir) / "sample").string());
}

FieldSample make_sample(const ExperimentConfig& config) {
  const FieldSpec spec = config.field_spec();
  return spec.components == 1 ? sample_field(spec, config.seed())
                              : sample_vector_field(spec, config.seed());
}

// Validation-suite bookkeeping.
struct Checks {
  json items = json::array();
  bool passed = true;
  void add(const std::string& name, double value, double threshold, bool ok) {
    items.push_back({{"name", name}, {"value", value}, {"threshold", threshold}, {"pass", ok}});
    passed = passed && ok;
  }
  void at_most(const std::string& name, double value, double threshold) {
    add(name, value, threshold, std::isfinite(value) && value <= threshold);
  }
};

void suite_specialfn(Checks& c) {
  using namespace specialfn;
  double wr = 0.0;
  double ref = 0.0;
  for (double t = 0.1; t <= 100.0; t *= 1.07) {
    const double w = bessel(BesselKind::J, 1, t) * bessel(BesselKind::Y, 0, t) -
                     bessel(BesselKind::J, 0, t) * bessel(BesselKind::Y, 1, t);
    wr = std::max(wr, std::abs(w - 2.0 / (kPi * t)) * t);
    for (int n = 0; n <= 2; ++n) {
      ref = std::max(ref, std::abs(bessel(BesselKind::J, n, t) - std::cyl_bessel_j(n, t)));
      ref = std::max(ref, std::abs(bessel(BesselKind::Y, n, t) - std::cyl_neumann(n, t)));
    }
  }
  c.at_most("wronskian_scaled_error", wr, 1e-9);
  c.at_most("std_bessel_max_abs_diff", ref, 1e-12);

  double jump = 0.0;
  for (double edge : {8.0, 25.0}) {
    for (int n = 0; n <= 2; ++n) {
      for (auto kind : {BesselKind::J, BesselKind::Y}) {
        const double a = bessel(kind, n, std::nextafter(edge, 0.0));
        const double b = bessel(kind, n, std::nextafter(edge, 100.0));
        jump = std::max(jump, std::abs(a - b));
      }
    }
  }
  c.at_most("branch_jump", jump, 1e-12);

  for (int terms = 0; terms <= 2; ++terms) {
    std::vector<double> lx, ly;
    for (double t = 10.0; t <= 1000.0; t *= 1.2) {
      lx.push_back(std::log(t));
      ly.push_back(std::log(std::abs(hankel1(0, t) - hankel1_trunc(0, terms, t))));
    }
    const double slope = fit_line(lx, ly).slope;
    c.at_most("truncation_slope_N" + std::to_string(terms), std::abs(slope + terms + 1.5), 0.1);
  }
}

void suite_greens(Checks& c) {
  const Point y{0.1, -0.2, 0.0};
  const Point y3{0.1, -0.2, 0.3};
  double trace = 0.0;
  double sym = 0.0;
  double fd = 0.0;
  for (double kappa : {1.0, 5.0, 20.0}) {
    for (const Point& x : {Point{1.5, 0.3, 0.0}, Point{-0.7, 2.0, 0.0}}) {
      for (int dim : {2, 3}) {
        const Point& src = dim == 2 ? y : y3;
        const Point xx = dim == 2 ? x : Point{x[0], x[1], -0.4};
        const Complex p = phi(dim, xx, src, kappa);
        trace = std::max(trace, std::abs(hess_phi(dim, xx, src, kappa).trace() + kappa * kappa * p) /
                                    (kappa * kappa * std::abs(p)));
        sym = std::max(sym, std::abs(p - phi(dim, src, xx, kappa)) / std::abs(p));

        // Central differences of the gradient of Phi.
        const double h = 1e-4 / kappa;
        const GreenTensor hess = hess_phi(dim, xx, src, kappa);
        for (int i = 0; i < dim; ++i) {
          for (int j = 0; j < dim; ++j) {
            Point a = xx, b = xx, cpt = xx, d = xx;
            a[static_cast<std::size_t>(i)] += h;
            a[static_cast<std::size_t>(j)] += h;
            b[static_cast<std::size_t>(i)] += h;
            b[static_cast<std::size_t>(j)] -= h;
            cpt[static_cast<std::size_t>(i)] -= h;
            cpt[static_cast<std::size_t>(j)] += h;
            d[static_cast<std::size_t>(i)] -= h;
            d[static_cast<std::size_t>(j)] -= h;
            const Complex num = (phi(dim, a, src, kappa) - phi(dim, b, src, kappa) -
                                 phi(dim, cpt, src, kappa) + phi(dim, d, src, kappa)) /
                                (4.0 * h * h);
            fd = std::max(fd, std::abs(num - hess(i, j)) / (kappa * kappa * std::abs(p) + 1e-300));
          }
        }
      }
    }
  }
  c.at_most("hessian_trace_identity", trace, 1e-10);
  c.at_most("reciprocity", sym, 1e-13);
  c.at_most("hessian_finite_difference", fd, 1e-5);

  ElasticParams e{1.0, 2.0, 1.0};
  double gtrace = 0.0;
  double gsym = 0.0;
  for (double omega : {2.0, 10.0, 40.0}) {
    e.omega = omega;
    for (int dim : {2, 3}) {
      const Point x{1.3, -0.4, dim == 3 ? 0.6 : 0.0};
      const Point& src = dim == 2 ? y : y3;
      const GreenTensor g = navier_green(dim, x, src, e);
      const Complex expect = (dim - 1.0) / e.mu * phi(dim, x, src, e.ks()) +
                             phi(dim, x, src, e.kp()) / (e.lambda + 2.0 * e.mu);
      gtrace = std::max(gtrace, std::abs(g.trace() - expect) / std::abs(expect));
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
          gsym = std::max(gsym, std::abs(g(i, j) - g(j, i)) / std::abs(expect));
        }
      }
    }
  }
  c.at_most("navier_trace_identity", gtrace, 1e-10);
  c.at_most("navier_symmetry", gsym, 1e-14);
}

void suite_ergodic(Checks& c) {
  FieldSpec spec;
  spec.dimension = 2;
  spec.order = 2.0;
  spec.grid = Grid::centered(2, 48, 2.0);
  spec.strength.bumps = {SmoothBump{{0.0, 0.0, 0.0}, 1.0, 1.0}};
  const Point x{3.0, 0.0, 0.0};
  const double kappa = 8.0;
  const int seeds = 300;

  std::vector<double> power;
  std::vector<double> re_a, re_b;
  power.reserve(seeds);
  for (int s = 0; s < seeds; ++s) {
    const FieldSample sample = sample_field(spec, 1000 + static_cast<std::uint64_t>(s));
    const Complex u = acoustic_field(sample, kappa, x);
    const Complex v = acoustic_field(sample, kappa + 0.5, x);
    power.push_back(std::norm(u));
    re_a.push_back(u.real());
    re_b.push_back(v.real());
  }
  double mean = 0.0;
  for (double p : power) mean += p;
  mean /= seeds;
  double var = 0.0;
  for (double p : power) var += (p - mean) * (p - mean);
  const double se = std::sqrt(var / (seeds - 1.0) / seeds);
  const double oracle = covariance_moment(spec, kappa, x, WaveModel::Acoustic2);
  c.at_most("second_moment_z", std::abs(mean - oracle) / se, 4.0);

  const FourthMoment fm = fourth_moment_identity(re_a, re_b);
  c.at_most("fourth_moment_z", std::abs(fm.z()), 3.0);

  FrequencySweep sweep = FrequencySweep::for_model(WaveModel::Acoustic2, 2.0, 3.0, 0.25);
  const double w = [&] {
    double s = 0.0;
    for (double v : sweep.weights()) s += v;
    return s;
  }();
  c.at_most("sweep_weights_sum_error", std::abs(w - 1.0), 1e-12);
}

void suite_inversion(Checks& c) {
  const Grid grid = Grid::centered(2, 24, 1.0);
  StrengthFunction s;
  s.bumps = {SmoothBump{{0.1, -0.1, 0.0}, 0.8, 1.0}};
  const Eigen::VectorXd phi = discretize(s, grid);
  const Point x{2.5, 0.7, 0.0};
  c.at_most("laplacian_n1_l1", laplacian_consistency(grid, phi, x, 1.0, 1, 1e-3), 1e-3);
  c.at_most("laplacian_n2_l1", laplacian_consistency(grid, phi, x, 1.0, 2, 1e-2), 1e-3);

  const double direct = riesz_potential(s, 2, x, 1.0);
  const double layered = layered_potential(s, 2, x, 1.0);
  c.at_most("coarea_relative_error", std::abs(direct - layered) / direct, 5e-3);

  const MeasurementSet ms = MeasurementSet::circle(12, 2.5);
  const KernelOperator op = assemble_kernel(ms.points, grid, 1.0, 1.0);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ms.points.size()));
  c.at_most("zero_data_solution_norm", tikhonov_solve(op, zero, 1e-3).phi.norm(), 0.0);

  const Eigen::VectorXd data = op.apply(phi);
  const LCurve lc = lcurve(op, data, log_space(1e-6, 1e-1, 11));
  double worst = 0.0;
  for (std::size_t i = 1; i < lc.solutions.size(); ++i) {
    worst = std::max(worst, lc.solutions[i - 1].residual - lc.solutions[i].residual);
  }
  c.at_most("residual_monotone_violation", worst, 1e-12 * data.norm());
}

}  // namespace

const char* version_string() { return IRSP_VERSION; }

const std::vector<ConfigKey>& config_schema() { return kSchema; }

ExperimentConfig::ExperimentConfig() {
  for (const auto& k : kSchema) values_[k.name] = k.fallback;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::Config, "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    if (!seen.insert(key).second) {
      throw Error(ErrorCode::Config, "line " + std::to_string(lineno) + ": duplicate key " + key);
    }
    cfg.set(key, trim(t.substr(eq + 1)));
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingInput, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ExperimentConfig::serialize() const {
  std::string out;
  for (const auto& k : kSchema) {
    out += k.name;
    out += " = ";
    out += values_.at(k.name);
    out += '\n';
  }
  return out;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (!is_key(key)) throw Error(ErrorCode::Config, "unknown key '" + key + "'");
  const std::string v = trim(value);
  if (v.empty()) throw Error(ErrorCode::Config, "empty value for '" + key + "'");
  if (v.find('\n') != std::string::npos) {
    throw Error(ErrorCode::Config, "multi-line value for '" + key + "'");
  }
  values_[key] = v;
}

const std::string& ExperimentConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorCode::Config, "unknown key '" + key + "'");
  return it->second;
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& k : kSchema) {
    const std::string name = k.name;
    if (name == "output" || name == "threads") continue;
    for (char ch : name + "=" + values_.at(name) + "\n") {
      h ^= static_cast<unsigned char>(ch);
      h *= 1099511628211ULL;
    }
  }
  return h;
}

std::string ExperimentConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

double ExperimentConfig::number(const std::string& key) const { return to_number(key, get(key)); }

int ExperimentConfig::integer(const std::string& key) const {
  const double v = number(key);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw Error(ErrorCode::Config, key + ": expected an integer");
  }
  return static_cast<int>(v);
}

bool ExperimentConfig::flag(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::Config, key + ": expected true or false");
}

WaveModel ExperimentConfig::model() const {
  try {
    return parse_wave_model(get("model"));
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, std::string("model: ") + e.what());
  }
}

int ExperimentConfig::dimension() const { return dimension_of(model()); }

double ExperimentConfig::order() const {
  return get("order") == "auto" ? static_cast<double>(dimension()) : number("order");
}

std::uint64_t ExperimentConfig::seed() const {
  const std::string& v = get("seed");
  std::size_t used = 0;
  unsigned long long s = 0;
  try {
    s = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || v[0] == '-') {
    throw Error(ErrorCode::Config, "seed: expected a nonnegative integer");
  }
  return s;
}

FieldSpec ExperimentConfig::field_spec() const {
  const int dim = dimension();
  FieldSpec spec;
  spec.dimension = dim;
  spec.order = order();
  spec.components = is_elastic(model()) ? dim : 1;
  const int n = get("grid.n") == "auto" ? (dim == 2 ? 64 : 32) : integer("grid.n");
  spec.grid = Grid::centered(dim, n, number("grid.half_width"));
  if (get("bumps") == "auto") {
    spec.strength.bumps = {SmoothBump{}};
  } else {
    for (const auto& item : split(get("bumps"), ';')) {
      const auto v = to_numbers("bumps", item);
      if (static_cast<int>(v.size()) != dim + 2) {
        throw Error(ErrorCode::Config, "bumps: each entry needs " + std::to_string(dim + 2) +
                                           " numbers (centre, radius, amplitude)");
      }
      SmoothBump b;
      for (int i = 0; i < dim; ++i) b.center[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
      b.radius = v[static_cast<std::size_t>(dim)];
      b.amplitude = v[static_cast<std::size_t>(dim + 1)];
      spec.strength.bumps.push_back(b);
    }
  }
  return spec;
}

ElasticParams ExperimentConfig::elastic() const {
  ElasticParams e;
  e.omega = 1.0;
  e.lambda = number("elastic.lambda");
  e.mu = number("elastic.mu");
  return e;
}

MeasurementSet ExperimentConfig::measurements() const {
  const int dim = dimension();
  MeasurementSet ms;
  ms.min_distance = number("delta_star");
  std::string spec = get("points");
  if (spec == "auto") spec = dim == 2 ? "circle:8:3" : "sphere:8:3";
  const auto parts = split(spec, ':');
  const auto count = [&](const std::string& t) {
    const double v = to_number("points", t);
    if (v < 1 || v != std::floor(v)) throw Error(ErrorCode::Config, "points: bad count");
    return static_cast<int>(v);
  };
  if (!parts.empty() && (parts[0] == "circle" || parts[0] == "sphere")) {
    if (parts.size() != 3) throw Error(ErrorCode::Config, "points: expected " + parts[0] + ":N:R");
    const int k = count(parts[1]);
    const double r = to_number("points", parts[2]);
    ms.points = dim == 2 ? MeasurementSet::circle(k, r).points : MeasurementSet::sphere(k, r).points;
  } else if (!parts.empty() && parts[0] == "spiral") {
    if (parts.size() != 4) throw Error(ErrorCode::Config, "points: expected spiral:N:RMIN:RMAX");
    const int k = count(parts[1]);
    const double r0 = to_number("points", parts[2]);
    const double r1 = to_number("points", parts[3]);
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < k; ++i) {
      const double r = k == 1 ? r0 : r0 + (r1 - r0) * i / (k - 1.0);
      const double a = golden * i;
      if (dim == 2) {
        ms.points.push_back({r * std::cos(a), r * std::sin(a), 0.0});
      } else {
        const double z = 1.0 - (2.0 * i + 1.0) / k;
        const double rho = std::sqrt(1.0 - z * z);
        ms.points.push_back({r * rho * std::cos(a), r * rho * std::sin(a), r * z});
      }
    }
  } else {
    for (const auto& item : split(spec, ';')) {
      const auto v = to_numbers("points", item);
      if (static_cast<int>(v.size()) != dim) {
        throw Error(ErrorCode::Config, "points: each point needs " + std::to_string(dim) +
                                           " coordinates");
      }
      Point p{0.0, 0.0, 0.0};
      for (int i = 0; i < dim; ++i) p[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
      ms.points.push_back(p);
    }
  }
  if (ms.points.empty()) throw Error(ErrorCode::Config, "points: none given");
  return ms;
}

FrequencySweep ExperimentConfig::sweep() const {
  return FrequencySweep::for_model(model(), order(), number("sweep.q"), number("sweep.step"));
}

Grid ExperimentConfig::inversion_grid() const {
  const int dim = dimension();
  double w = 0.0;
  if (get("inversion.half_width") == "auto") {
    const FieldSpec spec = field_spec();
    if (spec.strength.is_zero()) {
      w = 1.0;
    } else {
      const auto box = spec.strength.bounding_box(dim);
      for (int i = 0; i < dim; ++i) {
        w = std::max({w, std::abs(box[static_cast<std::size_t>(i)][0]),
                      std::abs(box[static_cast<std::size_t>(i)][1])});
      }
    }
  } else {
    w = number("inversion.half_width");
  }
  return Grid::centered(dim, integer("inversion.grid_n"), w);
}

std::vector<double> ExperimentConfig::lambda_grid() const {
  return log_space(number("inversion.lambda_min"), number("inversion.lambda_max"),
                   integer("inversion.lambda_count"));
}

std::vector<double> ExperimentConfig::forward_frequencies() const {
  return to_numbers("forward.frequencies", get("forward.frequencies"));
}

void ExperimentConfig::validate() const {
  const WaveModel m = model();
  const int dim = dimension_of(m);
  (void)order();
  const FieldSpec spec = field_spec();
  (void)measurements();
  for (const char* k : {"sweep.q", "sweep.step", "delta_star", "inversion.noise",
                        "elastic.lambda", "elastic.mu", "inversion.lambda_min",
                        "inversion.lambda_max"}) {
    (void)number(k);
  }
  for (const char* k : {"sweep.oracle", "sweep.variance", "forward.truncated", "inversion.nonneg"}) {
    (void)flag(k);
  }
  (void)seed();
  (void)forward_frequencies();
  if (integer("threads") < 1) throw Error(ErrorCode::Config, "threads must be >= 1");
  if (integer("sample.slope_seeds") < 0) throw Error(ErrorCode::Config, "sample.slope_seeds < 0");
  if (integer("inversion.grid_n") < 2) throw Error(ErrorCode::Config, "inversion.grid_n < 2");
  if (integer("inversion.lambda_count") < 1) {
    throw Error(ErrorCode::Config, "inversion.lambda_count < 1");
  }
  const auto one_of = [&](const char* key, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed) {
      if (get(key) == a) return;
    }
    throw Error(ErrorCode::Config, std::string(key) + ": unsupported value '" + get(key) + "'");
  };
  one_of("sample.format", {"binary", "csv"});
  one_of("inversion.source", {"profile", "analytic"});
  one_of("inversion.data", {"estimate", "oracle"});
  one_of("inversion.constants", {"empirical", "paper", "unit"});
  if (spec.dimension != dim) throw Error(ErrorCode::Config, "dimension does not match model");
}

std::string RunManifest::to_json() const {
  json j;
  j["config_hash"] = config_hash;
  j["version"] = version;
  j["command"] = command;
  j["outputs"] = outputs;
  json t = json::object();
  for (const auto& [stage, seconds] : timings) t[stage] = seconds;
  j["timings"] = t;
  return j.dump(2) + "\n";
}

std::string run_directory(const ExperimentConfig& config) {
  return (fs::path(config.get("output")) / config.hash_hex()).string();
}

CommandResult cmd_sample(const ExperimentConfig& config) {
  CommandResult r = begin(config, "sample");
  Stopwatch clock(r.manifest);
  const FieldSpec spec = config.field_spec();
  spec.validate();
  const FieldSample sample = make_sample(config);
  const auto format = config.get("sample.format") == "csv" ? SampleFormat::Csv : SampleFormat::Binary;
  const fs::path dir(r.run_dir);
  write_sample(sample, (dir / "sample").string(), format);
  clock.lap("sample");
  r.manifest.outputs.push_back((dir / "sample.json").string());
  r.manifest.outputs.push_back((dir / (format == SampleFormat::Csv ? "sample.csv" : "sample.bin")).string());

  json diag;
  diag["order"] = spec.order;
  diag["expected_slope"] = -spec.order;
  const int seeds = config.integer("sample.slope_seeds");
  if (seeds > 0) {
    const SpectralSlope s = latent_spectral_slope(spec, config.seed(), seeds);
    diag["spectral_slope"] = s.slope;
    diag["slope_k_min"] = s.k_min;
    diag["slope_k_max"] = s.k_max;
    diag["slope_seeds"] = s.seeds;
  }
  double peak = 0.0;
  for (const auto& comp : sample.values) {
    for (double v : comp) peak = std::max(peak, std::abs(v));
  }
  diag["max_abs_value"] = peak;
  write_text(dir / "diagnostics.json", diag.dump(2) + "\n");
  clock.lap("diagnostics");
  r.manifest.outputs.push_back((dir / "diagnostics.json").string());
  r.report = diag.dump();
  finish(r);
  return r;
}

CommandResult cmd_forward(const ExperimentConfig& config) {
  CommandResult r = begin(config, "forward");
  Stopwatch clock(r.manifest);
  const FieldSample sample = load_sample(r.run_dir);
  const MeasurementSet ms = config.measurements();
  ms.validate(sample.spec.strength);
  ElasticParams e = config.elastic();
  const FieldTable table = evaluate_fields(sample, config.model(), config.forward_frequencies(),
                                           ms.points, e, config.flag("forward.truncated"));
  const fs::path out = fs::path(r.run_dir) / "fields.csv";
  write_field_csv(table, out.string());
  clock.lap("forward");
  r.manifest.outputs.push_back(out.string());
  finish(r);
  return r;
}

CommandResult cmd_sweep(const ExperimentConfig& config, bool seed_given) {
  CommandResult r = begin(config, "sweep");
  Stopwatch clock(r.manifest);
  const fs::path dir(r.run_dir);
  FieldSample sample;
  if (sample_exists(r.run_dir)) {
    sample = load_sample(r.run_dir);
  } else if (seed_given) {
    sample = make_sample(config);
  } else {
    throw Error(ErrorCode::MissingInput,
                "no sample in " + r.run_dir + " and no --seed given (run 'sample' first)");
  }
  const WaveModel model = config.model();
  const int dim = dimension_of(model);
  const MeasurementSet ms = config.measurements();
  ms.validate(sample.spec.strength);
  const FrequencySweep sweep = config.sweep();
  sweep.validate();
  const ElasticParams elastic = config.elastic();

  const SweepResult result = run_sweep(sample, model, sweep, ms.points, elastic);
  write_sweep_csv(result, sweep, (dir / "sweep.csv").string());
  clock.lap("sweep");
  r.manifest.outputs.push_back((dir / "sweep.csv").string());

  const double l = riesz_exponent(model);
  std::vector<double> potential;
  for (const auto& x : ms.points) potential.push_back(riesz_potential(sample.spec.strength, dim, x, l));

  json prof;
  prof["model"] = std::string(to_string(model));
  prof["order"] = sample.spec.order;
  prof["weight_exponent"] = sweep.weight_exponent;
  prof["q"] = sweep.upper;
  prof["step"] = sweep.step;
  prof["frequencies"] = result.frequencies.size();
  prof["riesz_exponent"] = l;
  json pts = json::array();
  for (const auto& x : ms.points) pts.push_back(point_json(x, dim));
  prof["points"] = pts;
  prof["estimate"] = result.estimate;
  prof["riesz_potential"] = potential;

  const double paper = paper_constant(model, sample.spec.order, elastic);
  const bool degenerate = sample.spec.strength.is_zero();
  json constants;
  constants["paper"] = paper;
  if (!degenerate) {
    constants["empirical_estimate"] = fit_empirical_constant(result.estimate, potential);
    if (ms.points.size() > 1) {
      prof["estimate_potential_correlation"] = pearson_correlation(result.estimate, potential);
    }
  }

  if (config.flag("sweep.oracle")) {
    VarianceOptions var;
    var.enabled = config.flag("sweep.variance");
    const OracleBand band = oracle_band_average(sample.spec, model, sweep, ms.points, elastic, var);
    prof["oracle"] = band.mean;
    if (var.enabled) prof["oracle_stddev"] = band.stddev;
    std::vector<double> rel;
    for (std::size_t i = 0; i < band.mean.size(); ++i) {
      rel.push_back(band.mean[i] > 0.0 ? std::abs(result.estimate[i] - band.mean[i]) / band.mean[i]
                                       : 0.0);
    }
    prof["relative_error"] = rel;
    if (!degenerate) {
      const double c = fit_empirical_constant(band.mean, potential);
      constants["empirical_oracle"] = c;
      if (ms.points.size() > 1) {
        prof["oracle_potential_correlation"] = pearson_correlation(band.mean, potential);
      }
    }
    clock.lap("oracle");
  }
  if (constants.contains("empirical_oracle") || constants.contains("empirical_estimate")) {
    const double c = constants.contains("empirical_oracle")
                         ? constants["empirical_oracle"].get<double>()
                         : constants["empirical_estimate"].get<double>();
    constants["empirical"] = c;
    constants["ratio_empirical_to_paper"] = paper != 0.0 ? c / paper : 0.0;
    constants["sign_discrepancy"] = (c > 0.0) != (paper > 0.0);
    if ((c > 0.0) != (paper > 0.0)) {
      warn("fitted constant " + std::to_string(c) + " and printed constant " +
           std::to_string(paper) + " differ in sign");
    }
  }
  prof["constants"] = constants;
  write_text(dir / "profile.json", prof.dump(2) + "\n");
  r.manifest.outputs.push_back((dir / "profile.json").string());
  r.report = prof.dump();
  finish(r);
  return r;
}

CommandResult cmd_invert(const ExperimentConfig& config) {
  CommandResult r = begin(config, "invert");
  Stopwatch clock(r.manifest);
  const fs::path dir(r.run_dir);
  const WaveModel model = config.model();
  const int dim = dimension_of(model);
  const FieldSpec spec = config.field_spec();
  const double l = riesz_exponent(model);

  std::vector<Point> points;
  std::vector<double> data;
  double constant = 1.0;
  if (config.get("inversion.source") == "analytic") {
    const MeasurementSet ms = config.measurements();
    ms.validate(spec.strength);
    points = ms.points;
    for (const auto& x : points) data.push_back(riesz_potential(spec.strength, dim, x, l));
    const double noise = config.number("inversion.noise");
    if (noise > 0.0) {
      double rms = 0.0;
      for (double t : data) rms += t * t;
      rms = std::sqrt(rms / static_cast<double>(data.size()));
      std::mt19937_64 rng(config.seed());
      std::normal_distribution<double> normal;
      for (double& t : data) t += noise * rms * normal(rng);
    }
    json prof;
    json pts = json::array();
    for (const auto& x : points) pts.push_back(point_json(x, dim));
    prof["points"] = pts;
    prof["estimate"] = data;
    prof["noise"] = noise;
    prof["constants"] = {{"empirical", 1.0}};
    write_text(dir / "profile_analytic.json", prof.dump(2) + "\n");
    r.manifest.outputs.push_back((dir / "profile_analytic.json").string());
  } else {
    const fs::path path = dir / "profile.json";
    if (!fs::exists(path)) {
      throw Error(ErrorCode::MissingInput, "no strength profile in " + r.run_dir +
                                               " (run 'sweep' first)");
    }
    const json prof = json::parse(read_text(path));
    for (const auto& p : prof.at("points")) {
      Point x{0.0, 0.0, 0.0};
      for (std::size_t i = 0; i < p.size() && i < 3; ++i) x[i] = p[i].get<double>();
      points.push_back(x);
    }
    const std::string column = config.get("inversion.data");
    if (!prof.contains(column)) {
      throw Error(ErrorCode::MissingInput, "profile has no '" + column + "' column");
    }
    data = prof.at(column).get<std::vector<double>>();
    const std::string mode = config.get("inversion.constants");
    if (mode == "paper") {
      constant = paper_constant(model, spec.order, config.elastic());
    } else if (mode == "empirical") {
      const json& c = prof.at("constants");
      if (!c.contains("empirical")) {
        throw Error(ErrorCode::MissingInput, "profile has no empirical constant");
      }
      constant = c.at("empirical").get<double>();
    }
  }
  clock.lap("load");

  const Grid grid = config.inversion_grid();
  const KernelOperator op = assemble_kernel(points, grid, l, constant);
  const Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(data.data(), static_cast<Eigen::Index>(data.size()));
  const Eigen::VectorXd truth = discretize(spec.strength, grid);
  const bool known = truth.norm() > 0.0;
  const LCurve lc = lcurve(op, t, config.lambda_grid(), config.flag("inversion.nonneg"),
                           known ? truth : Eigen::VectorXd());
  clock.lap("invert");

  const Reconstruction& corner = lc.solutions[lc.corner];
  const Reconstruction& best = lc.solutions[lc.best];
  {
    std::ostringstream csv;
    csv.precision(17);
    csv << "index,x,y" << (dim == 3 ? ",z" : "") << ",phi_corner,phi_best,phi_true\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Point p = grid.node(i);
      const auto e = static_cast<Eigen::Index>(i);
      csv << i << ',' << p[0] << ',' << p[1];
      if (dim == 3) csv << ',' << p[2];
      csv << ',' << corner.phi[e] << ',' << best.phi[e] << ',' << truth[e] << '\n';
    }
    write_text(dir / "reconstruction.csv", csv.str());
  }
  {
    std::ostringstream csv;
    csv.precision(17);
    csv << "lambda,residual,solution_norm,truth_error\n";
    for (const auto& s : lc.solutions) {
      csv << s.lambda << ',' << s.residual << ',' << s.solution_norm << ',' << s.truth_error << '\n';
    }
    write_text(dir / "lcurve.csv", csv.str());
  }
  json rep;
  rep["constant"] = constant;
  rep["exponent"] = l;
  rep["grid_n"] = grid.n;
  rep["grid_spacing"] = grid.spacing;
  rep["points"] = points.size();
  rep["corner"] = {{"lambda", corner.lambda}, {"residual", corner.residual},
                   {"solution_norm", corner.solution_norm}};
  if (known) {
    rep["corner"]["truth_error"] = corner.truth_error;
    rep["best"] = {{"lambda", best.lambda}, {"residual", best.residual},
                   {"truth_error", best.truth_error}};
  }
  write_text(dir / "reconstruction.json", rep.dump(2) + "\n");
  for (const char* f : {"reconstruction.csv", "lcurve.csv", "reconstruction.json"}) {
    r.manifest.outputs.push_back((dir / f).string());
  }
  r.report = rep.dump();
  finish(r);
  return r;
}

CommandResult cmd_validate(const ExperimentConfig& config, const std::string& suite) {
  const std::vector<std::string> all = {"specialfn", "greens", "ergodic", "inversion"};
  std::vector<std::string> chosen;
  if (suite == "all") {
    chosen = all;
  } else if (std::find(all.begin(), all.end(), suite) != all.end()) {
    chosen = {suite};
  } else {
    throw Error(ErrorCode::Config, "unknown validation suite '" + suite + "'");
  }
  CommandResult r = begin(config, "validate");
  Stopwatch clock(r.manifest);
  json rep;
  bool passed = true;
  for (const auto& name : chosen) {
    Checks c;
    if (name == "specialfn") suite_specialfn(c);
    if (name == "greens") suite_greens(c);
    if (name == "ergodic") suite_ergodic(c);
    if (name == "inversion") suite_inversion(c);
    rep[name] = {{"checks", c.items}, {"passed", c.passed}};
    passed = passed && c.passed;
    clock.lap(name);
  }
  rep["passed"] = passed;
  const fs::path out = fs::path(r.run_dir) / ("validate_" + suite + ".json");
  write_text(out, rep.dump(2) + "\n");
  r.manifest.outputs.push_back(out.string());
  r.report = rep.dump();
  r.passed = passed;
  finish(r);
  return r;
}

}  // namespace irsp
