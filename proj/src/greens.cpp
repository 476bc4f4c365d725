#include "irsp/greens.hpp"

#include "irsp/specialfn.hpp"

namespace irsp {

namespace {

constexpr Complex kI{0.0, 1.0};

double separation(const Point& x, const Point& y) {
  const double r = distance(x, y);
  if (!(r > 0.0)) throw Error(ErrorCode::Singularity, "Green function evaluated at x = y");
  return r;
}

void check_dim(int dim) {
  if (dim != 2 && dim != 3) throw Error(ErrorCode::Domain, "dimension must be 2 or 3");
}

void check_kappa(double kappa) {
  if (!(kappa > 0.0)) throw Error(ErrorCode::Domain, "wavenumber must be positive");
}

// Radial coefficients of the Hessian: d2 Phi / dx_i dx_j = A delta_ij + B e_i e_j
// with e = (x - y) / r.
struct RadialHessian {
  Complex a;
  Complex b;
};

RadialHessian radial_hessian(int dim, double r, double kappa) {
  if (dim == 2) {
    const auto h = specialfn::hankel1_012(kappa * r);
    return {-(kappa * kI / 4.0) * h[1] / r, (kappa * kappa * kI / 4.0) * h[2]};
  }
  const Complex e = std::exp(kI * (kappa * r));
  const Complex near = e * (kI * kappa * r - 1.0);
  const double denom = 4.0 * kPi * r * r * r;
  return {near / denom, -3.0 * near / denom - kappa * kappa * e / (4.0 * kPi * r)};
}

GreenTensor assemble(int dim, const Point& x, const Point& y, double r, const RadialHessian& rh) {
  GreenTensor g;
  g.dim = dim;
  for (int i = 0; i < dim; ++i) {
    const double ei = (x[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)]) / r;
    for (int j = 0; j < dim; ++j) {
      const double ej = (x[static_cast<std::size_t>(j)] - y[static_cast<std::size_t>(j)]) / r;
      g(i, j) = rh.b * (ei * ej) + (i == j ? rh.a : Complex{});
    }
  }
  return g;
}

}  // namespace

void ElasticParams::validate() const {
  if (!(mu > 0.0)) throw Error(ErrorCode::Spec, "shear modulus mu must be positive");
  if (!(lambda + mu > 0.0)) throw Error(ErrorCode::Spec, "lambda + mu must be positive");
  if (!(omega > 0.0)) throw Error(ErrorCode::Spec, "angular frequency must be positive");
}

Complex GreenTensor::trace() const {
  Complex t{};
  for (int i = 0; i < dim; ++i) t += (*this)(i, i);
  return t;
}

Complex phi(int dim, const Point& x, const Point& y, double kappa) {
  check_dim(dim);
  check_kappa(kappa);
  const double r = separation(x, y);
  if (dim == 2) return (kI / 4.0) * specialfn::hankel1(0, kappa * r);
  return std::exp(kI * (kappa * r)) / (4.0 * kPi * r);
}

GreenTensor hess_phi(int dim, const Point& x, const Point& y, double kappa) {
  check_dim(dim);
  check_kappa(kappa);
  const double r = separation(x, y);
  return assemble(dim, x, y, r, radial_hessian(dim, r, kappa));
}

GreenTensor hess_phi_diff(int dim, const Point& x, const Point& y, const ElasticParams& params) {
  check_dim(dim);
  params.validate();
  const double r = separation(x, y);
  const auto s = radial_hessian(dim, r, params.ks());
  const auto p = radial_hessian(dim, r, params.kp());
  return assemble(dim, x, y, r, {s.a - p.a, s.b - p.b});
}

GreenTensor navier_green(int dim, const Point& x, const Point& y, const ElasticParams& params) {
  check_dim(dim);
  params.validate();
  const double r = separation(x, y);
  const double ks = params.ks();
  const double kp = params.kp();
  const double w2 = params.omega * params.omega;
  Complex phi_s;
  RadialHessian s, p;
  if (dim == 2) {
    const auto hs = specialfn::hankel1_012(ks * r);
    const auto hp = specialfn::hankel1_012(kp * r);
    phi_s = (kI / 4.0) * hs[0];
    s = {-(ks * kI / 4.0) * hs[1] / r, (ks * ks * kI / 4.0) * hs[2]};
    p = {-(kp * kI / 4.0) * hp[1] / r, (kp * kp * kI / 4.0) * hp[2]};
  } else {
    phi_s = std::exp(kI * (ks * r)) / (4.0 * kPi * r);
    s = radial_hessian(3, r, ks);
    p = radial_hessian(3, r, kp);
  }
  const RadialHessian g{phi_s / params.mu + (s.a - p.a) / w2, (s.b - p.b) / w2};
  return assemble(dim, x, y, r, g);
}

}  // namespace irsp
