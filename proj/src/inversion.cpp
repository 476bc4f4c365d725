#include "irsp/inversion.hpp"

#include <functional>

#include "quadrature.hpp"

namespace irsp {

namespace {

double distance_to_box(const Point& x, const Grid& g) {
  double s = 0.0;
  for (int a = 0; a < g.dim; ++a) {
    const auto i = static_cast<std::size_t>(a);
    const double lo = g.lower[i];
    const double hi = g.upper(a);
    const double d = x[i] < lo ? lo - x[i] : (x[i] > hi ? x[i] - hi : 0.0);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

KernelOperator assemble_kernel(const std::vector<Point>& points, const Grid& grid, double l,
                               double constant) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(distance_to_box(points[i], grid) > 0.0)) {
      throw Error(ErrorCode::Geometry,
                  "measurement point " + std::to_string(i) + " lies inside the grid box");
    }
  }
  KernelOperator op;
  op.points = points;
  op.grid = grid;
  op.exponent = l;
  op.constant = constant;
  const auto rows = static_cast<Eigen::Index>(points.size());
  const auto cols = static_cast<Eigen::Index>(grid.size());
  op.matrix.resize(rows, cols);
  const double h_d = grid.cell_volume();
  std::vector<Point> nodes(grid.size());
  for (std::size_t j = 0; j < nodes.size(); ++j) nodes[j] = grid.node(j);
  parallel_for(points.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      op.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          constant * std::pow(distance(points[i], nodes[j]), -l) * h_d;
    }
  });
  return op;
}

Eigen::VectorXd discretize(const StrengthFunction& strength, const Grid& grid) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t j = 0; j < grid.size(); ++j) v(static_cast<Eigen::Index>(j)) = strength(grid.node(j));
  return v;
}

double relative_error(const Eigen::VectorXd& phi, const Eigen::VectorXd& truth) {
  const double n = truth.norm();
  if (n == 0.0) return phi.norm();
  return (phi - truth).norm() / n;
}

Reconstruction tikhonov_solve(const KernelOperator& op, const Eigen::VectorXd& data,
                              double lambda, bool nonneg, int max_iterations) {
  const Eigen::MatrixXd& a = op.matrix;
  if (data.size() != a.rows()) throw Error(ErrorCode::Domain, "data length differs from rows");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::Domain, "regularization must be nonnegative");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  if (lambda == 0.0) {
    const double tol = smax * std::numeric_limits<double>::epsilon() *
                       static_cast<double>(std::max(a.rows(), a.cols()));
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) rank += s(i) > tol ? 1 : 0;
    if (rank < a.cols()) {
      throw Error(ErrorCode::Conditioning,
                  "lambda = 0 with rank " + std::to_string(rank) + " < " +
                      std::to_string(a.cols()) + " unknowns");
    }
  }
  Eigen::VectorXd filt(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double den = s(i) * s(i) + lambda * lambda;
    filt(i) = den > 0.0 ? s(i) / den : 0.0;
  }
  Reconstruction rec;
  rec.lambda = lambda;
  rec.nonneg = nonneg;
  rec.phi = svd.matrixV() * (filt.asDiagonal() * (svd.matrixU().transpose() * data));
  if (nonneg) {
    // FISTA on ||A x - T||^2 + lambda^2 ||x||^2 over x >= 0.
    const double lip = 2.0 * (smax * smax + lambda * lambda);
    const Eigen::VectorXd atb = a.transpose() * data;
    const double scale = std::max(2.0 * atb.norm(), std::numeric_limits<double>::min());
    Eigen::VectorXd x = rec.phi.cwiseMax(0.0);
    Eigen::VectorXd y = x;
    double t = 1.0;
    auto grad = [&](const Eigen::VectorXd& v) {
      return Eigen::VectorXd(2.0 * (a.transpose() * (a * v) - atb) + 2.0 * lambda * lambda * v);
    };
    int it = 0;
    double stat = 0.0;
    for (; it < max_iterations; ++it) {
      const Eigen::VectorXd gx = grad(x);
      stat = (x - (x - gx / lip).cwiseMax(0.0)).norm() * lip / scale;
      if (stat <= 1e-8 || lip == 0.0) break;
      const Eigen::VectorXd next = (y - grad(y) / lip).cwiseMax(0.0);
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = next + ((t - 1.0) / t_next) * (next - x);
      x = next;
      t = t_next;
    }
    rec.phi = x;
    rec.iterations = it;
    rec.stationarity = stat;
  }
  rec.residual = (a * rec.phi - data).norm();
  rec.solution_norm = rec.phi.norm();
  return rec;
}

std::vector<double> log_space(double lo, double hi, int count) {
  if (count < 2 || !(lo > 0.0) || !(hi > lo)) throw Error(ErrorCode::Domain, "bad log_space range");
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (count - 1)));
  }
  return out;
}

LCurve lcurve(const KernelOperator& op, const Eigen::VectorXd& data,
              const std::vector<double>& lambdas, bool nonneg, const Eigen::VectorXd& truth) {
  if (lambdas.empty()) throw Error(ErrorCode::Domain, "empty lambda grid");
  LCurve out;
  out.solutions.resize(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t i) {
    out.solutions[i] = tikhonov_solve(op, data, lambdas[i], nonneg);
    if (truth.size() > 0) out.solutions[i].truth_error = relative_error(out.solutions[i].phi, truth);
  });
  const std::size_t n = lambdas.size();
  double best_curv = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    auto lr = [&](std::size_t k) { return std::log(std::max(out.solutions[k].residual, 1e-300)); };
    auto ln = [&](std::size_t k) { return std::log(std::max(out.solutions[k].solution_norm, 1e-300)); };
    const double t0 = std::log(lambdas[i - 1]), t1 = std::log(lambdas[i]), t2 = std::log(lambdas[i + 1]);
    const double h1 = t1 - t0, h2 = t2 - t1;
    auto d1 = [&](double f0, double, double f2) { return (f2 - f0) / (h1 + h2); };
    auto d2 = [&](double f0, double f1, double f2) {
      return 2.0 * ((f2 - f1) / h2 - (f1 - f0) / h1) / (h1 + h2);
    };
    const double r1 = d1(lr(i - 1), lr(i), lr(i + 1)), r2 = d2(lr(i - 1), lr(i), lr(i + 1));
    const double e1 = d1(ln(i - 1), ln(i), ln(i + 1)), e2 = d2(ln(i - 1), ln(i), ln(i + 1));
    const double den = std::pow(r1 * r1 + e1 * e1, 1.5);
    if (den == 0.0) continue;
    const double curv = (r1 * e2 - r2 * e1) / den;
    if (curv > best_curv) {
      best_curv = curv;
      out.corner = i;
    }
  }
  if (truth.size() > 0) {
    for (std::size_t i = 1; i < n; ++i) {
      if (out.solutions[i].truth_error < out.solutions[out.best].truth_error) out.best = i;
    }
  }
  return out;
}

double iterated_laplacian_factor(int dim, double l, int n) {
  double f = 1.0;
  for (int j = 0; j < n; ++j) {
    const double k = l + 2.0 * j;
    f *= k * (k + 2.0 - dim);
  }
  return f;
}

double laplacian_consistency(const Grid& grid, const Eigen::VectorXd& phi, const Point& x,
                             double l, int n, double stencil_h) {
  if (n < 1) throw Error(ErrorCode::Domain, "Laplacian power must be at least 1");
  if (!(stencil_h > 0.0)) throw Error(ErrorCode::Domain, "stencil step must be positive");
  if (phi.size() != static_cast<Eigen::Index>(grid.size())) {
    throw Error(ErrorCode::Domain, "phi length differs from the grid");
  }
  if (distance_to_box(x, grid) <= n * stencil_h * std::sqrt(static_cast<double>(grid.dim))) {
    throw Error(ErrorCode::Geometry, "Laplacian stencil reaches the source grid");
  }
  if (phi.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  const int dim = grid.dim;
  const double h_d = grid.cell_volume();
  std::vector<Point> nodes;
  std::vector<double> weights;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double v = phi(static_cast<Eigen::Index>(j));
    if (v == 0.0) continue;
    nodes.push_back(grid.node(j));
    weights.push_back(v * h_d);
  }
  auto potential = [&](const Point& p, double exponent) {
    double s = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) s += weights[j] * std::pow(distance(p, nodes[j]), -exponent);
    return s;
  };
  std::function<double(const Point&, int)> lap = [&](const Point& p, int level) -> double {
    if (level == 0) return potential(p, l);
    double acc = -2.0 * dim * lap(p, level - 1);
    for (int a = 0; a < dim; ++a) {
      Point plus = p, minus = p;
      plus[static_cast<std::size_t>(a)] += stencil_h;
      minus[static_cast<std::size_t>(a)] -= stencil_h;
      acc += lap(plus, level - 1) + lap(minus, level - 1);
    }
    return acc / (stencil_h * stencil_h);
  };
  const double factor = iterated_laplacian_factor(dim, l, n);
  const double k = potential(x, l + 2.0 * n);
  return std::abs(lap(x, n) - factor * k) / (std::max(1.0, std::abs(factor)) * std::abs(k));
}

namespace {

// Each bump is radial about its centre c, so on the sphere |y - x| = r it
// depends only on the angle to the axis x -> c. The integral reduces to the
// polar angle over the cap where the sphere meets the ball.
double bump_sphere_rule(const SmoothBump& b, int dim, double c, double r, int nodes) {
  const double cos_max = std::clamp((c * c + r * r - b.radius * b.radius) / (2.0 * c * r), -1.0, 1.0);
  const auto at = [&](double cos_t) {
    const double d2 = std::max(0.0, c * c + r * r - 2.0 * c * r * cos_t);
    return b(b.center + Point{std::sqrt(d2), 0.0, 0.0});
  };
  const auto& rule = detail::gauss_legendre(nodes);
  double s = 0.0;
  if (dim == 2) {
    const double t_max = std::acos(cos_max);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double t = 0.5 * t_max * (rule.nodes[i] + 1.0);
      s += rule.weights[i] * at(std::cos(t));
    }
    return 2.0 * r * 0.5 * t_max * s;
  }
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double u = cos_max + 0.5 * (1.0 - cos_max) * (rule.nodes[i] + 1.0);
    s += rule.weights[i] * at(u);
  }
  return 2.0 * kPi * r * r * 0.5 * (1.0 - cos_max) * s;
}

}  // namespace

double spherical_mean(const StrengthFunction& strength, int dim, const Point& x, double r) {
  if (!(r > 0.0)) throw Error(ErrorCode::Domain, "radius must be positive");
  if (dim != 2 && dim != 3) throw Error(ErrorCode::Domain, "dimension must be 2 or 3");
  double total = 0.0;
  for (const auto& b : strength.bumps) {
    if (b.amplitude == 0.0) continue;
    const double c = distance(x, b.center);
    const double measure = dim == 2 ? 2.0 * kPi * r : 4.0 * kPi * r * r;
    if (c <= 1e-14 * r) {
      total += measure * b(b.center + Point{r, 0.0, 0.0});
      continue;
    }
    if (r <= c - b.radius || r >= c + b.radius) continue;
    int nodes = 32;
    double prev = bump_sphere_rule(b, dim, c, r, nodes);
    for (int level = 0; level < 6; ++level) {
      nodes *= 2;
      const double cur = bump_sphere_rule(b, dim, c, r, nodes);
      const bool done = std::abs(cur - prev) <= 1e-12 * std::abs(cur) || (cur == 0.0 && prev == 0.0);
      prev = cur;
      if (done) break;
    }
    total += prev;
  }
  return total;
}

double layered_potential(const StrengthFunction& strength, int dim, const Point& x, double l) {
  if (strength.is_zero()) return 0.0;
  double r_lo = std::numeric_limits<double>::infinity();
  double r_hi = 0.0;
  for (const auto& b : strength.bumps) {
    if (b.amplitude == 0.0) continue;
    const double c = distance(x, b.center);
    r_lo = std::min(r_lo, std::max(0.0, c - b.radius));
    r_hi = std::max(r_hi, c + b.radius);
  }
  if (r_lo <= 0.0) throw Error(ErrorCode::Geometry, "layered potential needs x outside the support");
  auto integrate = [&](int nr) {
    const auto& rule = detail::gauss_legendre(nr);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double r = r_lo + 0.5 * (r_hi - r_lo) * (rule.nodes[i] + 1.0);
      s += rule.weights[i] * std::pow(r, -l) * spherical_mean(strength, dim, x, r);
    }
    return 0.5 * (r_hi - r_lo) * s;
  };
  int nr = 32;
  double prev = integrate(nr);
  for (int level = 0; level < 4; ++level) {
    nr *= 2;
    const double cur = integrate(nr);
    if (std::abs(cur - prev) <= 1e-9 * std::abs(cur)) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace irsp
