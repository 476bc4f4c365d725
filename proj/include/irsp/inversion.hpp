#pragma once

#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "irsp/randfield.hpp"

namespace irsp {

// A_ij = C |x_i - y_j|^{-l} h^d over all nodes y_j of a grid.
struct KernelOperator {
  std::vector<Point> points;
  Grid grid;
  double exponent = 1.0;  // l
  double constant = 1.0;  // C
  Eigen::MatrixXd matrix;

  Eigen::VectorXd apply(const Eigen::VectorXd& phi) const { return matrix * phi; }
};

// Points inside (or on) the grid box are a geometry error.
KernelOperator assemble_kernel(const std::vector<Point>& points, const Grid& grid, double l,
                               double constant);

// phi sampled at the grid nodes.
Eigen::VectorXd discretize(const StrengthFunction& strength, const Grid& grid);

struct Reconstruction {
  Eigen::VectorXd phi;
  double lambda = 0.0;
  bool nonneg = false;
  double residual = 0.0;       // ||A phi - T||
  double solution_norm = 0.0;  // ||phi||
  double truth_error = std::numeric_limits<double>::quiet_NaN();  // relative L2, if known
  int iterations = 0;          // projected-gradient iterations (nonneg only)
  double stationarity = 0.0;   // final projected-gradient norm (nonneg only)
};

// argmin ||A phi - T||^2 + lambda^2 ||phi||^2 via the SVD of A. With nonneg
// set, projected gradient (FISTA) from the clipped Tikhonov solution until the
// projected-gradient norm falls to 1e-8 relative to ||A^T T|| or the iteration
// cap is reached. lambda = 0 with rank-deficient A is a conditioning error.
Reconstruction tikhonov_solve(const KernelOperator& op, const Eigen::VectorXd& data,
                              double lambda, bool nonneg = false, int max_iterations = 20000);

// Relative L2 error ||phi - truth|| / ||truth||.
double relative_error(const Eigen::VectorXd& phi, const Eigen::VectorXd& truth);

struct LCurve {
  std::vector<Reconstruction> solutions;
  std::size_t corner = 0;  // index of maximum curvature in (log residual, log norm)
  std::size_t best = 0;    // index of minimum truth error, when a truth is given
};

// Solutions over the lambda grid (ascending). If truth is non-empty each
// solution carries its truth error.
LCurve lcurve(const KernelOperator& op, const Eigen::VectorXd& data,
              const std::vector<double>& lambdas, bool nonneg = false,
              const Eigen::VectorXd& truth = {});

// Logarithmically spaced values from lo to hi inclusive.
std::vector<double> log_space(double lo, double hi, int count);

// Prod_{j<n} (l + 2j)(l + 2j + 2 - d): the constant in
// Delta^n |x|^{-l} = factor * |x|^{-l-2n} in d dimensions.
double iterated_laplacian_factor(int dim, double l, int n);

// Applies the n-fold (2d+1)-point Laplacian with step stencil_h to
// T(x) = sum_j |x - y_j|^{-l} phi_j h^d and compares it with
// factor * sum_j |x - y_j|^{-l-2n} phi_j h^d. Returns
// |lap - factor K| / (max(1, |factor|) K). Stencils reaching within
// n * stencil_h of the grid box are a geometry error.
double laplacian_consistency(const Grid& grid, const Eigen::VectorXd& phi, const Point& x,
                             double l, int n, double stencil_h);

// Integral of phi over the circle (2D) or sphere (3D) of radius r about x.
double spherical_mean(const StrengthFunction& strength, int dim, const Point& x, double r);

// Integral over r of r^{-l} S(x, r), the layered form of the Riesz potential.
double layered_potential(const StrengthFunction& strength, int dim, const Point& x, double l);

}  // namespace irsp
