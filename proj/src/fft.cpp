#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace irsp::detail {

namespace {

std::mutex g_plan_mutex;
std::map<std::tuple<int, int, int>, fftw_plan> g_plans;

fftw_plan plan_for(int dim, int n, int sign) {
  std::lock_guard lock(g_plan_mutex);
  const auto key = std::make_tuple(dim, n, sign);
  auto it = g_plans.find(key);
  if (it != g_plans.end()) return it->second;
  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(n);
  auto* scratch = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
  const int dims[3] = {n, n, n};
  fftw_plan plan = fftw_plan_dft(dim, dims, scratch, scratch, sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(scratch);
  if (plan == nullptr) throw Error(ErrorCode::Unsupported, "FFTW could not plan transform");
  g_plans.emplace(key, plan);
  return plan;
}

void run(std::vector<Complex>& data, int dim, int n, int sign) {
  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(n);
  if (data.size() != total) throw Error(ErrorCode::Domain, "FFT size mismatch");
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan_for(dim, n, sign), ptr, ptr);
}

}  // namespace

void fft_forward(std::vector<Complex>& data, int dim, int n) { run(data, dim, n, FFTW_FORWARD); }

void fft_backward(std::vector<Complex>& data, int dim, int n) { run(data, dim, n, FFTW_BACKWARD); }

}  // namespace irsp::detail
