#pragma once

// Bessel and Hankel functions of integer order 0..2 for positive real
// arguments, plus the truncated large-argument Hankel expansion used by the
// asymptotic field approximations.

#include <array>
#include <vector>

#include "irsp/core.hpp"

namespace irsp::specialfn {

enum class BesselKind { J, Y };

/// J_n(t) or Y_n(t) for n in {0, 1, 2}. J accepts t = 0; Y requires t > 0.
double bessel(BesselKind kind, int n, double t);

/// H_n^{(1)}(t) = J_n(t) + i Y_n(t), t > 0.
Complex hankel1(int n, double t);

/// H_0^{(1)}, H_1^{(1)}, H_2^{(1)} at the same argument; cheaper than three
/// separate calls because the branches share their work.
std::array<Complex, 3> hankel1_012(double t);

/// Coefficients of the truncated expansion
///   H_{n,N}(t) = t^{-1/2} exp(i(t - (n/2 + 1/4) pi)) sum_{j=0}^{N} a_j t^{-j}
/// with a_j = (i/2)^j sqrt(2/pi) (n,j) and
///   (n,j) = prod_{k=1}^{j} (4n^2 - (2k-1)^2) / (4^j j!).
struct HankelTruncation {
  int order = 0;
  int terms = 0;  // N; the expansion keeps N + 1 coefficients
  std::vector<Complex> coefficients;

  static HankelTruncation make(int order, int terms);
};

/// The product symbol (n,j); (n,0) = 1.
double hankel_product_symbol(int n, int j);

Complex hankel1_trunc(const HankelTruncation& trunc, double t);

/// Same as hankel1_trunc(HankelTruncation::make(n, terms), t) without
/// allocating the coefficient list.
Complex hankel1_trunc(int n, int terms, double t);

// Branch boundaries of the evaluation strategy: ascending series up to
// kSeriesLimit, Miller backward recurrence with Neumann series for Y up to
// kAsymptoticStart, optimally truncated Hankel expansion beyond.
inline constexpr double kSeriesLimit = 8.0;
inline constexpr double kAsymptoticStart = 25.0;

}  // namespace irsp::specialfn
