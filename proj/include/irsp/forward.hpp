#pragma once

#include <functional>
#include <string>
#include <vector>

#include "irsp/greens.hpp"
#include "irsp/randfield.hpp"

namespace irsp {

// Receiver locations U, each at least min_distance away from supp phi.
struct MeasurementSet {
  std::vector<Point> points;
  double min_distance = 1.0;

  // Throws ErrorCode::Geometry if any point is closer than min_distance.
  void validate(const StrengthFunction& strength) const;

  // count points evenly spaced on a circle (2D) or a Fibonacci sphere (3D).
  static MeasurementSet circle(int count, double radius, const Point& center = {0.0, 0.0, 0.0});
  static MeasurementSet sphere(int count, double radius, const Point& center = {0.0, 0.0, 0.0});
};

using FieldVector = std::array<Complex, 3>;  // entries beyond d are zero

// Midpoint-rule quadrature over the nonzero source cells of one sample.
class SourceQuadrature {
 public:
  explicit SourceQuadrature(const FieldSample& sample);

  int dimension() const { return dim_; }
  double spacing() const { return spacing_; }

  // u = -sum_j Phi_d(x, y_j, kappa) f_j h^d.
  Complex acoustic(double kappa, const Point& x) const;
  // Same with the kernel -(i/4) H_{0,N}(kappa r) in 2D; exact kernel in 3D.
  Complex acoustic_trunc(double kappa, const Point& x, int terms = 2) const;
  // u = -sum_j G(x, y_j) f_j h^d.
  FieldVector elastic(const ElasticParams& params, const Point& x) const;
  // The eight truncated kernels with H_{0,2}, H_{1,3}, H_{2,4}; 2D only.
  FieldVector elastic_trunc(const ElasticParams& params, const Point& x) const;

 private:
  void check_receiver(const Point& x) const;

  int dim_ = 2;
  int components_ = 1;
  double spacing_ = 0.0;
  double cell_volume_ = 0.0;
  StrengthFunction strength_;
  std::vector<Point> nodes_;
  std::vector<std::array<double, 3>> values_;
};

Complex acoustic_field(const FieldSample& sample, double kappa, const Point& x);
Complex acoustic_field_trunc(const FieldSample& sample, double kappa, const Point& x, int terms = 2);
FieldVector elastic_field(const FieldSample& sample, const ElasticParams& params, const Point& x);
FieldVector elastic_field_trunc(const FieldSample& sample, const ElasticParams& params,
                                const Point& x);

// Emits a warning when h exceeds one sixth of the wavelength 2 pi / kappa.
// Returns true when the grid is resolved.
bool check_resolution(double spacing, double kappa);

// |Delta_h u + kappa^2 u| / (kappa^2 |u|) with the (2d+1)-point Laplacian.
// If support is given, a stencil within 2 stencil_h of it is a geometry error.
double helmholtz_residual(const std::function<Complex(const Point&)>& field, double kappa,
                          const Point& x, double stencil_h, int dim,
                          const StrengthFunction* support = nullptr);

// Batch evaluation: values[f][p][c] for frequencies x points x components.
struct FieldTable {
  std::vector<double> frequencies;
  std::vector<Point> points;
  int components = 1;
  std::vector<std::vector<FieldVector>> values;
};

// Scalar fields use the frequencies as wavenumbers; elastic fields use them as
// omega with the supplied Lame parameters.
FieldTable evaluate_fields(const FieldSample& sample, WaveModel model,
                           const std::vector<double>& frequencies,
                           const std::vector<Point>& points, const ElasticParams& elastic = {},
                           bool truncated = false);

// CSV columns: freq, point, re_1, im_1[, re_2, im_2[, re_3, im_3]].
void write_field_csv(const FieldTable& table, const std::string& path);

}  // namespace irsp
