#include "irsp/specialfn.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace irsp::specialfn {

namespace {

constexpr double kTwoOverPi = 2.0 / kPi;

struct BesselSet {
  std::array<double, 3> j{};
  std::array<double, 3> y{};
};

void check_order(int n) {
  if (n < 0 || n > 2) {
    throw Error(ErrorCode::UnsupportedOrder,
                "Bessel order " + std::to_string(n) + " outside 0..2");
  }
}

// Ascending power series. (t/2)^{n+2p} / (p! (n+p)!) is built incrementally.
BesselSet series(double t) {
  BesselSet out;
  const double half = 0.5 * t;
  const double q = -half * half;
  const double log_term = std::log(half) + kEulerGamma;
  for (int n = 0; n <= 2; ++n) {
    // p = 0 term: (t/2)^n / n!
    double term = 1.0;
    for (int k = 1; k <= n; ++k) term *= half / k;
    double jsum = 0.0;
    double psum = 0.0;
    double h_p = 0.0;       // harmonic number H_p
    double h_pn = 0.0;      // H_{p+n}
    for (int k = 1; k <= n; ++k) h_pn += 1.0 / k;
    for (int p = 0; p < 200; ++p) {
      if (p > 0) {
        term *= q / (static_cast<double>(p) * (p + n));
        h_p += 1.0 / p;
        h_pn += 1.0 / (p + n);
      }
      jsum += term;
      psum += term * (h_p + h_pn);
      if (std::abs(term) * (1.0 + h_p + h_pn) <
          std::numeric_limits<double>::epsilon() * 1e-3 * (std::abs(jsum) + 1e-300)) {
        break;
      }
    }
    out.j[n] = jsum;
    if (t > 0.0) {
      // finite sum over p < n of (n-1-p)!/p! (2/t)^{n-2p}
      double finite = 0.0;
      if (n == 1) finite = 2.0 / t;
      if (n == 2) finite = 4.0 / (t * t) + 1.0;
      out.y[n] = kTwoOverPi * log_term * jsum - finite / kPi - psum / kPi;
    } else {
      out.y[n] = -std::numeric_limits<double>::infinity();
    }
  }
  return out;
}

// Miller's backward recurrence normalised with J_0 + 2 sum J_{2k} = 1, and
// Neumann series for Y_0, Y_1. Y_2 follows from the forward recurrence,
// which is stable for Y.
BesselSet miller(double t) {
  const int start = 2 * static_cast<int>((t + 30.0 + 4.0 * std::sqrt(t)) / 2.0) + 2;
  std::vector<double> jv(static_cast<std::size_t>(start) + 2, 0.0);
  double next = 0.0;
  double cur = 1e-30;
  jv[static_cast<std::size_t>(start)] = cur;
  for (int k = start; k >= 1; --k) {
    const double prev = (2.0 * k / t) * cur - next;
    next = cur;
    cur = prev;
    jv[static_cast<std::size_t>(k - 1)] = cur;
    if (std::abs(cur) > 1e250) {
      for (int i = k - 1; i <= start; ++i) jv[static_cast<std::size_t>(i)] *= 1e-250;
      cur *= 1e-250;
      next *= 1e-250;
    }
  }
  double norm = jv[0];
  for (int k = 2; k <= start; k += 2) norm += 2.0 * jv[static_cast<std::size_t>(k)];
  for (auto& v : jv) v /= norm;

  BesselSet out;
  out.j = {jv[0], jv[1], jv[2]};
  const double log_term = std::log(0.5 * t) + kEulerGamma;
  double s0 = 0.0;
  double s1 = 0.0;
  for (int k = 1; 2 * k + 1 <= start; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    s0 += sign * jv[static_cast<std::size_t>(2 * k)] / k;
    s1 += sign * (jv[static_cast<std::size_t>(2 * k - 1)] - jv[static_cast<std::size_t>(2 * k + 1)]) / k;
  }
  out.y[0] = kTwoOverPi * (log_term * jv[0] - 2.0 * s0);
  out.y[1] = -kTwoOverPi * jv[0] / t + kTwoOverPi * (log_term * jv[1] + s1);
  out.y[2] = (2.0 / t) * out.y[1] - out.y[0];
  return out;
}

// Large-argument expansion H_n(t) ~ sqrt(2/(pi t)) e^{i(t - n pi/2 - pi/4)}
// sum_k i^k a_k(n) / t^k, truncated at the smallest term.
Complex asymptotic(int n, double t, double cos_t, double sin_t) {
  const double mu = 4.0 * n * n;
  Complex sum{1.0, 0.0};
  Complex term{1.0, 0.0};
  const Complex i_over_8t{0.0, 1.0 / (8.0 * t)};
  double last = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= i_over_8t * ((mu - odd * odd) / k);
    const double mag = std::abs(term);
    if (mag > last) break;
    sum += term;
    last = mag;
    if (mag < 1e-18) break;
  }
  // e^{-i(n/2 + 1/4) pi}
  static const std::array<Complex, 3> kPhase = {
      Complex{std::cos(0.25 * kPi), -std::sin(0.25 * kPi)},
      Complex{std::cos(0.75 * kPi), -std::sin(0.75 * kPi)},
      Complex{std::cos(1.25 * kPi), -std::sin(1.25 * kPi)},
  };
  const Complex carrier = Complex{cos_t, sin_t} * kPhase[static_cast<std::size_t>(n)];
  return std::sqrt(kTwoOverPi / t) * carrier * sum;
}

BesselSet evaluate(double t) {
  if (t <= kSeriesLimit) return series(t);
  if (t <= kAsymptoticStart) return miller(t);
  BesselSet out;
  const double c = std::cos(t);
  const double s = std::sin(t);
  for (int n = 0; n <= 2; ++n) {
    const Complex h = asymptotic(n, t, c, s);
    out.j[static_cast<std::size_t>(n)] = h.real();
    out.y[static_cast<std::size_t>(n)] = h.imag();
  }
  return out;
}

}  // namespace

double bessel(BesselKind kind, int n, double t) {
  check_order(n);
  if (std::isnan(t)) throw Error(ErrorCode::Domain, "NaN argument");
  if (kind == BesselKind::Y && !(t > 0.0)) {
    throw Error(ErrorCode::Domain, "Y_n requires a positive argument");
  }
  if (kind == BesselKind::J && t < 0.0) {
    throw Error(ErrorCode::Domain, "J_n is only provided for non-negative arguments");
  }
  if (kind == BesselKind::J && t == 0.0) return n == 0 ? 1.0 : 0.0;
  if (t > kAsymptoticStart) {
    const Complex h = asymptotic(n, t, std::cos(t), std::sin(t));
    return kind == BesselKind::J ? h.real() : h.imag();
  }
  const BesselSet set = evaluate(t);
  return kind == BesselKind::J ? set.j[static_cast<std::size_t>(n)]
                               : set.y[static_cast<std::size_t>(n)];
}

Complex hankel1(int n, double t) {
  check_order(n);
  if (!(t > 0.0)) throw Error(ErrorCode::Domain, "Hankel function requires t > 0");
  if (t > kAsymptoticStart) return asymptotic(n, t, std::cos(t), std::sin(t));
  const BesselSet set = evaluate(t);
  return {set.j[static_cast<std::size_t>(n)], set.y[static_cast<std::size_t>(n)]};
}

std::array<Complex, 3> hankel1_012(double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::Domain, "Hankel function requires t > 0");
  const BesselSet set = evaluate(t);
  return {Complex{set.j[0], set.y[0]}, Complex{set.j[1], set.y[1]},
          Complex{set.j[2], set.y[2]}};
}

double hankel_product_symbol(int n, int j) {
  double value = 1.0;
  const double mu = 4.0 * n * n;
  for (int k = 1; k <= j; ++k) {
    const double odd = 2.0 * k - 1.0;
    value *= (mu - odd * odd) / (4.0 * k);
  }
  return value;
}

HankelTruncation HankelTruncation::make(int order, int terms) {
  check_order(order);
  if (terms < 0) throw Error(ErrorCode::Domain, "truncation needs N >= 0");
  HankelTruncation out;
  out.order = order;
  out.terms = terms;
  out.coefficients.reserve(static_cast<std::size_t>(terms) + 1);
  const double root = std::sqrt(kTwoOverPi);
  Complex power{1.0, 0.0};
  for (int j = 0; j <= terms; ++j) {
    out.coefficients.push_back(power * root * hankel_product_symbol(order, j));
    power *= Complex{0.0, 0.5};
  }
  return out;
}

Complex hankel1_trunc(const HankelTruncation& trunc, double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::Domain, "truncated Hankel requires t > 0");
  Complex sum{0.0, 0.0};
  const double inv = 1.0 / t;
  double power = 1.0;
  for (const auto& a : trunc.coefficients) {
    sum += a * power;
    power *= inv;
  }
  const double phase = t - (0.5 * trunc.order + 0.25) * kPi;
  return std::sqrt(inv) * Complex{std::cos(phase), std::sin(phase)} * sum;
}

Complex hankel1_trunc(int n, int terms, double t) {
  check_order(n);
  if (terms < 0) throw Error(ErrorCode::Domain, "truncation needs N >= 0");
  if (!(t > 0.0)) throw Error(ErrorCode::Domain, "truncated Hankel requires t > 0");
  const double inv = 1.0 / t;
  const double mu = 4.0 * n * n;
  Complex sum{1.0, 0.0};
  Complex term{1.0, 0.0};
  for (int j = 1; j <= terms; ++j) {
    const double odd = 2.0 * j - 1.0;
    term *= Complex{0.0, 0.5} * ((mu - odd * odd) / (4.0 * j)) * inv;
    sum += term;
  }
  const double phase = t - (0.5 * n + 0.25) * kPi;
  return std::sqrt(kTwoOverPi * inv) * Complex{std::cos(phase), std::sin(phase)} * sum;
}

}  // namespace irsp::specialfn
