#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "irsp/core.hpp"

namespace irsp {

// phi(x) = amplitude * exp(1 - 1/(1 - |x - center|^2 / radius^2)) inside the
// ball, zero outside.
struct SmoothBump {
  Point center{0.0, 0.0, 0.0};
  double radius = 1.0;
  double amplitude = 1.0;

  double operator()(const Point& x) const;
};

// Sum of bumps. An empty list is the zero function.
struct StrengthFunction {
  std::vector<SmoothBump> bumps;

  double operator()(const Point& x) const;
  bool contains(const Point& x) const;  // x in the closed support
  double distance_to_support(const Point& x) const;
  // Axis-aligned bounding box of the support, per axis [lo, hi].
  std::array<std::array<double, 2>, 3> bounding_box(int dim) const;
  bool is_zero() const;
};

// Uniform cell-centred grid: node(i) = lower + (i + 1/2) h per axis, row-major
// with the last axis fastest.
struct Grid {
  int dim = 2;
  int n = 64;
  double spacing = 1.0 / 16.0;
  Point lower{-2.0, -2.0, 0.0};

  static Grid centered(int dim, int n, double half_width);

  std::size_t size() const;
  double cell_volume() const;
  Point node(std::size_t flat) const;
  std::array<int, 3> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::array<int, 3>& idx) const;
  double upper(int axis) const { return lower[static_cast<std::size_t>(axis)] + n * spacing; }
  bool operator==(const Grid&) const = default;
};

struct FieldSpec {
  int dimension = 2;
  double order = 2.0;  // m
  StrengthFunction strength;
  Grid grid;
  int components = 1;

  // Throws ErrorCode::Spec when d <= m < d + 1/2 fails, components is not 1
  // or d, or the grid box does not strictly contain the support.
  void validate() const;
};

enum class Polarity { Positive, Negated };

struct FieldSample {
  FieldSpec spec;
  std::uint64_t seed = 0;
  Polarity polarity = Polarity::Positive;
  // values[c][flat node index]
  std::vector<std::vector<double>> values;
};

// One realization: each component is sqrt(phi) h^{-d/2} K_{m/2} W with W unit
// white noise per node and K_{m/2} the periodic Fourier multiplier |xi|^{-m/2}
// (zero mode removed).
FieldSample sample_field(const FieldSpec& spec, std::uint64_t seed,
                         Polarity polarity = Polarity::Positive);

// Same as sample_field but requires components == d.
FieldSample sample_vector_field(const FieldSpec& spec, std::uint64_t seed,
                                Polarity polarity = Polarity::Positive);

// K_{m/2} W for one component, before the sqrt(phi) h^{-d/2} factor.
std::vector<double> latent_field(const FieldSpec& spec, std::uint64_t seed, int component,
                                 Polarity polarity = Polarity::Positive);

// Exact covariance of the synthesized field between two nodes (flat indices).
double discrete_covariance(const FieldSpec& spec, std::size_t y, std::size_t z);

// |xi_k|^{-m} on the periodic grid, zero at k = 0, in FFT index order.
std::vector<double> spectral_weights(const FieldSpec& spec);

// Exact second moments of linear functionals L_w(f) = sum_j w_j f_j h^d of
// one field component, with w_j = kernel_j evaluated over all nodes. The
// sqrt(phi) factor is applied internally.
class SpectralCovariance {
 public:
  explicit SpectralCovariance(const FieldSpec& spec);

  // DFT of sqrt(phi) * kernel over the grid.
  std::vector<Complex> transform(const std::vector<Complex>& kernel) const;

  // E L_a conj(L_b) and E L_a L_b from transformed kernels.
  Complex conjugated(const std::vector<Complex>& a_hat, const std::vector<Complex>& b_hat) const;
  Complex plain(const std::vector<Complex>& a_hat, const std::vector<Complex>& b_hat) const;
  double variance(const std::vector<Complex>& a_hat) const;

  const FieldSpec& spec() const { return spec_; }
  const std::vector<double>& sqrt_phi() const { return sqrt_phi_; }

 private:
  FieldSpec spec_;
  std::vector<double> weights_;
  std::vector<double> sqrt_phi_;
  std::vector<std::size_t> negated_;  // flat index of -k
  double scale_ = 0.0;
};

struct SpectralSlope {
  double slope = 0.0;
  double k_min = 0.0;
  double k_max = 0.0;
  int seeds = 0;
};

// Log-log slope of the power spectrum of the latent field K_{m/2} W, averaged
// over seeds first..first+count-1 and regressed over all modes with
// 2 <= |k| <= n/4 (in units of the fundamental frequency).
SpectralSlope latent_spectral_slope(const FieldSpec& spec, std::uint64_t first_seed, int count);

// Serialization: "<stem>.json" header plus "<stem>.bin" (float64 little
// endian, component-major) or "<stem>.csv" (one row per node).
enum class SampleFormat { Binary, Csv };
void write_sample(const FieldSample& sample, const std::string& stem, SampleFormat format);
FieldSample read_sample(const std::string& stem);

std::string spec_to_json(const FieldSpec& spec);
FieldSpec spec_from_json(const std::string& text);

}  // namespace irsp
