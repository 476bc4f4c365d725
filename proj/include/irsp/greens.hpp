#pragma once

#include <array>

#include "irsp/core.hpp"

namespace irsp {

// Lame parameters and angular frequency of the elastic medium.
struct ElasticParams {
  double omega = 1.0;
  double lambda = 1.0;
  double mu = 1.0;

  double cp() const { return 1.0 / std::sqrt(lambda + 2.0 * mu); }
  double cs() const { return 1.0 / std::sqrt(mu); }
  double kp() const { return cp() * omega; }
  double ks() const { return cs() * omega; }

  // mu > 0, lambda + mu > 0, omega > 0; throws ErrorCode::Spec otherwise.
  void validate() const;
};

// d x d complex matrix, stored 3 x 3 with unused entries zero when d = 2.
struct GreenTensor {
  int dim = 2;
  std::array<std::array<Complex, 3>, 3> m{};

  Complex& operator()(int i, int j) { return m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
  const Complex& operator()(int i, int j) const {
    return m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  Complex trace() const;
};

// Phi_2 = (i/4) H_0(kappa r), Phi_3 = exp(i kappa r) / (4 pi r).
Complex phi(int dim, const Point& x, const Point& y, double kappa);

// Hessian in x of Phi_d(x, y, kappa).
GreenTensor hess_phi(int dim, const Point& x, const Point& y, double kappa);

// Hessian in x of Phi_d(., y, kappa_s) - Phi_d(., y, kappa_p).
GreenTensor hess_phi_diff(int dim, const Point& x, const Point& y, const ElasticParams& params);

// G = (1/mu) Phi_d(kappa_s) I + (1/omega^2) hess_phi_diff.
GreenTensor navier_green(int dim, const Point& x, const Point& y, const ElasticParams& params);

}  // namespace irsp
