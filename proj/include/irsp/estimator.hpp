#pragma once

#include <string>
#include <vector>

#include "irsp/forward.hpp"

namespace irsp {

// Uniform frequency grid on [lower, upper] with trapezoid weights. The last
// interval is shortened when (upper - lower) / step is not an integer.
struct FrequencySweep {
  double lower = 1.0;
  double upper = 150.0;
  double step = 0.2;
  double weight_exponent = 3.0;  // p

  // p = m + 1 in two dimensions, p = m in three.
  static FrequencySweep for_model(WaveModel model, double order, double upper, double step);

  // upper > lower (ErrorCode::Sweep), 0 < step <= 0.25.
  void validate() const;
  std::vector<double> nodes() const;
  // Trapezoid weights divided by (upper - lower), so they sum to one.
  std::vector<double> weights() const;
};

enum class ProfileSource { BandAverage, Analytic, Ensemble };

struct StrengthProfile {
  std::vector<Point> points;
  std::vector<double> values;
  std::vector<double> uncertainty;  // empty when not applicable
  ProfileSource source = ProfileSource::BandAverage;
};

// One realization swept over frequency.
struct SweepResult {
  std::vector<double> frequencies;
  std::vector<Point> points;
  std::vector<std::vector<double>> power;  // |u|^2, [frequency][point]
  std::vector<double> estimate;            // T-hat per point
};

SweepResult run_sweep(const FieldSample& sample, WaveModel model, const FrequencySweep& sweep,
                      const std::vector<Point>& points, const ElasticParams& elastic = {});

// (1 / (Q - 1)) * trapezoid of kappa^p |u(x, kappa)|^2 over [1, Q].
double band_average(const FieldSample& sample, const FrequencySweep& sweep, const Point& x,
                    WaveModel model, const ElasticParams& elastic = {});

// The leading-order constants as printed: C_2/(8 pi), C_3/(16 pi^2), a_3 and
// b_3 - b_1, with c_m = 1 for the acoustic models.
double paper_constant(WaveModel model, double order, const ElasticParams& elastic = {});

// Kernel exponent l: 1 in two dimensions, 2 in three.
int riesz_exponent(WaveModel model);

// Integral of phi(y) / |x - y|^l over R^d, by Gauss-Legendre in the radius
// and trapezoid rules in the angles around each bump, refined until two
// successive levels agree to rel_tol.
double riesz_potential(const StrengthFunction& strength, int dim, const Point& x, double l,
                       double rel_tol = 1e-9);

enum class ConstantsMode { Paper, Empirical };

// C * riesz_potential. In Empirical mode C must be supplied (typically from
// fit_empirical_constant).
double analytic_strength(const StrengthFunction& strength, const Point& x, WaveModel model,
                         double order, ConstantsMode mode, double empirical_constant = 0.0,
                         const ElasticParams& elastic = {});

// Least-squares C through the origin for target = C * potential.
double fit_empirical_constant(const std::vector<double>& target,
                              const std::vector<double>& potential);

// Exact ensemble moments of the discretized field u(x, freq) for a FieldSpec.
class MomentOracle {
 public:
  MomentOracle(const FieldSpec& spec, WaveModel model, const ElasticParams& elastic = {});

  struct Spectra {
    double frequency = 0.0;
    int outputs = 1;                            // field components
    std::vector<std::vector<Complex>> kernels;  // [output * sources + source]
  };

  Spectra spectra(double frequency, const Point& x) const;

  // E sum_c |u_c|^2.
  double second_moment(const Spectra& s) const;
  double second_moment(double frequency, const Point& x) const;
  // E u_c(a) conj(u_c'(b)) and E u_c(a) u_c'(b).
  Complex conjugated(const Spectra& a, int ca, const Spectra& b, int cb) const;
  Complex plain(const Spectra& a, int ca, const Spectra& b, int cb) const;
  // Cov(sum_c |u_c(a)|^2, sum_c |u_c(b)|^2) for Gaussian u.
  double power_covariance(const Spectra& a, const Spectra& b) const;

  WaveModel model() const { return model_; }
  const FieldSpec& spec() const { return cov_.spec(); }

 private:
  std::vector<Complex> kernel_values(double frequency, const Point& x, int c, int a) const;

  WaveModel model_;
  ElasticParams elastic_;
  SpectralCovariance cov_;
  int sources_ = 1;
};

double covariance_moment(const FieldSpec& spec, double frequency, const Point& x, WaveModel model,
                         const ElasticParams& elastic = {});

// Ensemble band average at each point, and optionally the predicted standard
// deviation of the single-realization estimate. The variance sums pairs with
// |kappa_i - kappa_j| <= window, visiting every stride-th row.
struct OracleBand {
  std::vector<double> mean;
  std::vector<double> stddev;  // empty unless requested
  std::vector<std::vector<double>> moment;  // E|u|^2, [frequency][point]
};

struct VarianceOptions {
  bool enabled = false;
  double window = 8.0;
  int stride = 5;
};

OracleBand oracle_band_average(const FieldSpec& spec, WaveModel model, const FrequencySweep& sweep,
                               const std::vector<Point>& points, const ElasticParams& elastic = {},
                               const VarianceOptions& variance = {});

// Monte-Carlo estimates of E u(k1) conj(u(k2)) and E u(k1) u(k2) (first
// component) with standard errors, over seeds first_seed .. first_seed+n-1.
struct Decorrelation {
  Complex conjugated;
  Complex plain;
  double conjugated_se = 0.0;
  double plain_se = 0.0;
  double power = 0.0;  // mean |u(k1)|^2
  double power_se = 0.0;
  int seeds = 0;
};

Decorrelation frequency_decorrelation(const FieldSpec& spec, const Point& x, double kappa1,
                                      double kappa2, int n_seeds, std::uint64_t first_seed = 1,
                                      WaveModel model = WaveModel::Acoustic2,
                                      const ElasticParams& elastic = {});

// Gaussian fourth-moment identity E((X^2 - EX^2)(Y^2 - EY^2)) = 2 (EXY)^2 on
// paired samples. Standard error by jackknife on the difference.
struct FourthMoment {
  double lhs = 0.0;
  double rhs = 0.0;
  double stderr_diff = 0.0;
  double z() const { return stderr_diff > 0.0 ? (lhs - rhs) / stderr_diff : 0.0; }
};

FourthMoment fourth_moment_identity(const std::vector<double>& x, const std::vector<double>& y);

// (max - min) / mean.
double relative_variation(const std::vector<double>& values);

void write_sweep_csv(const SweepResult& result, const FrequencySweep& sweep,
                     const std::string& path);

}  // namespace irsp
