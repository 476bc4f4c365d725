#pragma once

#include <vector>

namespace irsp::detail {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule by Newton iteration on P_n; cached per n.
const GaussRule& gauss_legendre(int n);

}  // namespace irsp::detail
