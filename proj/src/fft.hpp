#pragma once

// Thin wrapper over FFTW's complex transforms. Plans are cached per shape and
// direction; execution uses the new-array interface so one plan serves
// concurrent callers.

#include <vector>

#include "irsp/core.hpp"

namespace irsp::detail {

// Unnormalised forward transform (exponent sign -1), in place.
void fft_forward(std::vector<Complex>& data, int dim, int n);
// Unnormalised backward transform (exponent sign +1), in place.
void fft_backward(std::vector<Complex>& data, int dim, int n);

}  // namespace irsp::detail
