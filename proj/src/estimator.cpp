#include "irsp/estimator.hpp"

#include <deque>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "quadrature.hpp"

namespace irsp {

FrequencySweep FrequencySweep::for_model(WaveModel model, double order, double upper,
                                         double step) {
  FrequencySweep s;
  s.upper = upper;
  s.step = step;
  s.weight_exponent = dimension_of(model) == 2 ? order + 1.0 : order;
  return s;
}

void FrequencySweep::validate() const {
  if (!(upper > lower)) throw Error(ErrorCode::Sweep, "sweep needs Q > 1");
  if (!(step > 0.0)) throw Error(ErrorCode::Sweep, "sweep step must be positive");
  if (step > 0.25 + 1e-12) {
    throw Error(ErrorCode::Sweep, "sweep step above 0.25 does not resolve frequency decorrelation");
  }
}

std::vector<double> FrequencySweep::nodes() const {
  validate();
  std::vector<double> out;
  const auto intervals = static_cast<long>(std::floor((upper - lower) / step + 1e-9));
  for (long i = 0; i <= intervals; ++i) out.push_back(lower + static_cast<double>(i) * step);
  if (upper - out.back() > 1e-9 * step) out.push_back(upper);
  else out.back() = upper;
  return out;
}

std::vector<double> FrequencySweep::weights() const {
  const auto k = nodes();
  std::vector<double> w(k.size(), 0.0);
  const double span = upper - lower;
  for (std::size_t i = 0; i + 1 < k.size(); ++i) {
    const double half = 0.5 * (k[i + 1] - k[i]) / span;
    w[i] += half;
    w[i + 1] += half;
  }
  return w;
}

namespace {

double field_power(const FieldVector& v) {
  return std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]);
}

}  // namespace

SweepResult run_sweep(const FieldSample& sample, WaveModel model, const FrequencySweep& sweep,
                      const std::vector<Point>& points, const ElasticParams& elastic) {
  const auto freqs = sweep.nodes();
  const auto w = sweep.weights();
  const FieldTable table = evaluate_fields(sample, model, freqs, points, elastic);
  SweepResult out;
  out.frequencies = freqs;
  out.points = points;
  out.power.assign(freqs.size(), std::vector<double>(points.size()));
  out.estimate.assign(points.size(), 0.0);
  for (std::size_t f = 0; f < freqs.size(); ++f) {
    const double scale = w[f] * std::pow(freqs[f], sweep.weight_exponent);
    for (std::size_t p = 0; p < points.size(); ++p) {
      out.power[f][p] = field_power(table.values[f][p]);
      out.estimate[p] += scale * out.power[f][p];
    }
  }
  return out;
}

double band_average(const FieldSample& sample, const FrequencySweep& sweep, const Point& x,
                    WaveModel model, const ElasticParams& elastic) {
  return run_sweep(sample, model, sweep, {x}, elastic).estimate[0];
}

double paper_constant(WaveModel model, double order, const ElasticParams& elastic) {
  const double m = order;
  switch (model) {
    case WaveModel::Acoustic2: return (-1.0 / 64.0) / (8.0 * kPi);
    case WaveModel::Acoustic3: return (1.0 / 8.0) / (16.0 * kPi * kPi);
    case WaveModel::Elastic2:
      elastic.validate();
      return (std::pow(elastic.cs(), 3.0 - m) + std::pow(elastic.cp(), 3.0 - m)) / (32.0 * kPi);
    case WaveModel::Elastic3: {
      elastic.validate();
      const double b1 = std::pow(elastic.cs(), 4.0 - m) / (128.0 * kPi * kPi);
      const double b3 =
          (std::pow(elastic.cs(), 4.0 - m) + std::pow(elastic.cp(), 4.0 - m)) / (128.0 * kPi * kPi);
      return b3 - b1;
    }
  }
  return 0.0;
}

int riesz_exponent(WaveModel model) { return dimension_of(model) == 2 ? 1 : 2; }

namespace {

double bump_potential(const SmoothBump& b, int dim, const Point& x, double l, int nr, int na) {
  const auto& radial = detail::gauss_legendre(nr);
  double total = 0.0;
  if (dim == 2) {
    for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
      const double rho = 0.5 * b.radius * (radial.nodes[i] + 1.0);
      const double phi = b(b.center + Point{rho, 0.0, 0.0});
      if (phi == 0.0) continue;
      double ring = 0.0;
      for (int k = 0; k < na; ++k) {
        const double a = 2.0 * kPi * k / na;
        const Point y = b.center + Point{rho * std::cos(a), rho * std::sin(a), 0.0};
        ring += std::pow(distance(x, y), -l);
      }
      total += radial.weights[i] * rho * phi * ring * (2.0 * kPi / na);
    }
    return total * 0.5 * b.radius;
  }
  const auto& polar = detail::gauss_legendre(na / 2);
  for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
    const double rho = 0.5 * b.radius * (radial.nodes[i] + 1.0);
    const double phi = b(b.center + Point{rho, 0.0, 0.0});
    if (phi == 0.0) continue;
    double shell = 0.0;
    for (std::size_t j = 0; j < polar.nodes.size(); ++j) {
      const double ct = polar.nodes[j];
      const double st = std::sqrt(1.0 - ct * ct);
      double ring = 0.0;
      for (int k = 0; k < na; ++k) {
        const double a = 2.0 * kPi * k / na;
        const Point y = b.center + rho * Point{st * std::cos(a), st * std::sin(a), ct};
        ring += std::pow(distance(x, y), -l);
      }
      shell += polar.weights[j] * ring * (2.0 * kPi / na);
    }
    total += radial.weights[i] * rho * rho * phi * shell;
  }
  return total * 0.5 * b.radius;
}

}  // namespace

double riesz_potential(const StrengthFunction& strength, int dim, const Point& x, double l,
                       double rel_tol) {
  if (dim != 2 && dim != 3) throw Error(ErrorCode::Domain, "dimension must be 2 or 3");
  if (!strength.is_zero() && strength.contains(x)) {
    throw Error(ErrorCode::Geometry, "Riesz potential evaluated inside the support");
  }
  double total = 0.0;
  for (const auto& b : strength.bumps) {
    if (b.amplitude == 0.0) continue;
    int nr = 24, na = 32;
    double prev = bump_potential(b, dim, x, l, nr, na);
    double cur = prev;
    for (int level = 0; level < 6; ++level) {
      nr *= 2;
      na *= 2;
      cur = bump_potential(b, dim, x, l, nr, na);
      if (std::abs(cur - prev) <= rel_tol * std::abs(cur)) break;
      prev = cur;
    }
    total += cur;
  }
  return total;
}

double analytic_strength(const StrengthFunction& strength, const Point& x, WaveModel model,
                         double order, ConstantsMode mode, double empirical_constant,
                         const ElasticParams& elastic) {
  const int dim = dimension_of(model);
  const double c =
      mode == ConstantsMode::Paper ? paper_constant(model, order, elastic) : empirical_constant;
  return c * riesz_potential(strength, dim, x, riesz_exponent(model));
}

double fit_empirical_constant(const std::vector<double>& target,
                              const std::vector<double>& potential) {
  if (target.size() != potential.size() || target.empty()) {
    throw Error(ErrorCode::Statistics, "constant fit needs paired, nonempty data");
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    num += target[i] * potential[i];
    den += potential[i] * potential[i];
  }
  if (den == 0.0) throw Error(ErrorCode::Statistics, "potential vanishes identically");
  return num / den;
}

MomentOracle::MomentOracle(const FieldSpec& spec, WaveModel model, const ElasticParams& elastic)
    : model_(model), elastic_(elastic), cov_(spec) {
  if (dimension_of(model) != spec.dimension) {
    throw Error(ErrorCode::Spec, "model dimension differs from the field spec");
  }
  sources_ = is_elastic(model) ? spec.dimension : 1;
  if (is_elastic(model)) elastic_.validate();
}

MomentOracle::Spectra MomentOracle::spectra(double frequency, const Point& x) const {
  const FieldSpec& spec = cov_.spec();
  if (!spec.strength.is_zero() && spec.strength.contains(x)) {
    throw Error(ErrorCode::Geometry, "receiver lies inside the source support");
  }
  const Grid& g = spec.grid;
  const int d = spec.dimension;
  const auto& sqrt_phi = cov_.sqrt_phi();
  Spectra s;
  s.frequency = frequency;
  s.outputs = sources_;
  const auto count = static_cast<std::size_t>(sources_ * sources_);
  s.kernels.assign(count, std::vector<Complex>(g.size()));
  ElasticParams ep = elastic_;
  ep.omega = frequency;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (sqrt_phi[j] == 0.0) continue;
    const Point y = g.node(j);
    if (!is_elastic(model_)) {
      s.kernels[0][j] = -phi(d, x, y, frequency);
      continue;
    }
    const GreenTensor gt = navier_green(d, x, y, ep);
    for (int c = 0; c < d; ++c) {
      for (int a = 0; a < d; ++a) {
        s.kernels[static_cast<std::size_t>(c * d + a)][j] = -gt(c, a);
      }
    }
  }
  for (auto& k : s.kernels) k = cov_.transform(k);
  return s;
}

double MomentOracle::second_moment(const Spectra& s) const {
  double total = 0.0;
  for (const auto& k : s.kernels) total += cov_.variance(k);
  return total;
}

double MomentOracle::second_moment(double frequency, const Point& x) const {
  return second_moment(spectra(frequency, x));
}

Complex MomentOracle::conjugated(const Spectra& a, int ca, const Spectra& b, int cb) const {
  Complex total{};
  for (int s = 0; s < sources_; ++s) {
    total += cov_.conjugated(a.kernels[static_cast<std::size_t>(ca * sources_ + s)],
                             b.kernels[static_cast<std::size_t>(cb * sources_ + s)]);
  }
  return total;
}

Complex MomentOracle::plain(const Spectra& a, int ca, const Spectra& b, int cb) const {
  Complex total{};
  for (int s = 0; s < sources_; ++s) {
    total += cov_.plain(a.kernels[static_cast<std::size_t>(ca * sources_ + s)],
                        b.kernels[static_cast<std::size_t>(cb * sources_ + s)]);
  }
  return total;
}

double MomentOracle::power_covariance(const Spectra& a, const Spectra& b) const {
  double total = 0.0;
  for (int ca = 0; ca < a.outputs; ++ca) {
    for (int cb = 0; cb < b.outputs; ++cb) {
      total += std::norm(conjugated(a, ca, b, cb)) + std::norm(plain(a, ca, b, cb));
    }
  }
  return total;
}

double covariance_moment(const FieldSpec& spec, double frequency, const Point& x, WaveModel model,
                         const ElasticParams& elastic) {
  if (spec.strength.is_zero()) return 0.0;
  return MomentOracle(spec, model, elastic).second_moment(frequency, x);
}

OracleBand oracle_band_average(const FieldSpec& spec, WaveModel model, const FrequencySweep& sweep,
                               const std::vector<Point>& points, const ElasticParams& elastic,
                               const VarianceOptions& variance) {
  const auto freqs = sweep.nodes();
  const auto w = sweep.weights();
  OracleBand out;
  out.mean.assign(points.size(), 0.0);
  out.moment.assign(freqs.size(), std::vector<double>(points.size(), 0.0));
  if (variance.enabled) out.stddev.assign(points.size(), 0.0);
  if (spec.strength.is_zero()) return out;
  const MomentOracle oracle(spec, model, elastic);
  const int stride = std::max(1, variance.stride);
  parallel_for(points.size(), [&](std::size_t p) {
    std::deque<std::pair<std::size_t, MomentOracle::Spectra>> window;
    double mean = 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      auto s = oracle.spectra(freqs[i], points[p]);
      const double moment = oracle.second_moment(s);
      out.moment[i][p] = moment;
      const double ai = w[i] * std::pow(freqs[i], sweep.weight_exponent);
      mean += ai * moment;
      if (!variance.enabled) continue;
      while (!window.empty() && freqs[i] - freqs[window.front().first] > variance.window) {
        window.pop_front();
      }
      const bool row_i = i % static_cast<std::size_t>(stride) == 0;
      if (row_i) var += stride * ai * ai * oracle.power_covariance(s, s);
      for (const auto& [j, sj] : window) {
        const bool row_j = j % static_cast<std::size_t>(stride) == 0;
        if (!row_i && !row_j) continue;
        const double aj = w[j] * std::pow(freqs[j], sweep.weight_exponent);
        const double c = oracle.power_covariance(s, sj);
        if (row_i) var += stride * ai * aj * c;
        if (row_j) var += stride * ai * aj * c;
      }
      window.emplace_back(i, std::move(s));
    }
    out.mean[p] = mean;
    if (variance.enabled) out.stddev[p] = std::sqrt(std::max(0.0, var));
  });
  return out;
}

Decorrelation frequency_decorrelation(const FieldSpec& spec, const Point& x, double kappa1,
                                      double kappa2, int n_seeds, std::uint64_t first_seed,
                                      WaveModel model, const ElasticParams& elastic) {
  if (n_seeds < 10) throw Error(ErrorCode::Statistics, "decorrelation needs at least 10 seeds");
  if (kappa1 < 1.0 || kappa2 < 1.0) throw Error(ErrorCode::Domain, "frequencies must be >= 1");
  const auto n = static_cast<std::size_t>(n_seeds);
  std::vector<Complex> u1(n), u2(n);
  parallel_for(n, [&](std::size_t s) {
    const FieldSample sample = sample_field(spec, first_seed + s);
    const SourceQuadrature quad(sample);
    if (is_elastic(model)) {
      ElasticParams e1 = elastic, e2 = elastic;
      e1.omega = kappa1;
      e2.omega = kappa2;
      u1[s] = quad.elastic(e1, x)[0];
      u2[s] = quad.elastic(e2, x)[0];
    } else {
      u1[s] = quad.acoustic(kappa1, x);
      u2[s] = quad.acoustic(kappa2, x);
    }
  });
  auto mean_se = [n](const std::vector<Complex>& v, Complex& mean, double& se) {
    mean = std::accumulate(v.begin(), v.end(), Complex{}) / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& z : v) ss += std::norm(z - mean);
    se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  };
  std::vector<Complex> conj_prod(n), plain_prod(n), power(n);
  for (std::size_t s = 0; s < n; ++s) {
    conj_prod[s] = u1[s] * std::conj(u2[s]);
    plain_prod[s] = u1[s] * u2[s];
    power[s] = std::norm(u1[s]);
  }
  Decorrelation out;
  out.seeds = n_seeds;
  mean_se(conj_prod, out.conjugated, out.conjugated_se);
  mean_se(plain_prod, out.plain, out.plain_se);
  Complex pm;
  mean_se(power, pm, out.power_se);
  out.power = pm.real();
  return out;
}

FourthMoment fourth_moment_identity(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 10) {
    throw Error(ErrorCode::Statistics, "fourth-moment check needs at least 10 paired samples");
  }
  const double n = static_cast<double>(x.size());
  double sx2 = 0.0, sy2 = 0.0, sxy = 0.0, sx2y2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx2 += x[i] * x[i];
    sy2 += y[i] * y[i];
    sxy += x[i] * y[i];
    sx2y2 += x[i] * x[i] * y[i] * y[i];
  }
  auto stats = [](double m, double a, double b, double c, double d) {
    const double lhs = d / m - (a / m) * (b / m);
    const double rhs = 2.0 * (c / m) * (c / m);
    return std::pair{lhs, rhs};
  };
  FourthMoment out;
  std::tie(out.lhs, out.rhs) = stats(n, sx2, sy2, sxy, sx2y2);
  std::vector<double> loo(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xx = x[i] * x[i], yy = y[i] * y[i];
    const auto [l, r] = stats(n - 1.0, sx2 - xx, sy2 - yy, sxy - x[i] * y[i], sx2y2 - xx * yy);
    loo[i] = l - r;
  }
  const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  out.stderr_diff = std::sqrt((n - 1.0) / n * ss);
  return out;
}

double relative_variation(const std::vector<double>& values) {
  if (values.empty()) throw Error(ErrorCode::Statistics, "no values");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  return (*hi - *lo) / mean;
}

void write_sweep_csv(const SweepResult& result, const FrequencySweep& sweep,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << "freq,point,power,weighted\n" << std::setprecision(17);
  for (std::size_t f = 0; f < result.frequencies.size(); ++f) {
    const double scale = std::pow(result.frequencies[f], sweep.weight_exponent);
    for (std::size_t p = 0; p < result.points.size(); ++p) {
      out << result.frequencies[f] << ',' << p << ',' << result.power[f][p] << ','
          << scale * result.power[f][p] << '\n';
    }
  }
}

}  // namespace irsp
