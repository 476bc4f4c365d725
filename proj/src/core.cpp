#include "irsp/core.hpp"

#include <atomic>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

namespace irsp {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Domain: return "domain error";
    case ErrorCode::UnsupportedOrder: return "unsupported order";
    case ErrorCode::Spec: return "invalid field spec";
    case ErrorCode::Geometry: return "geometry error";
    case ErrorCode::Sweep: return "invalid sweep";
    case ErrorCode::Statistics: return "statistics error";
    case ErrorCode::Conditioning: return "conditioning error";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::Config: return "configuration error";
    case ErrorCode::MissingInput: return "missing input";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Singularity: return "singularity";
  }
  return "unknown error";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

int dimension_of(WaveModel model) noexcept {
  return (model == WaveModel::Acoustic2 || model == WaveModel::Elastic2) ? 2 : 3;
}

bool is_elastic(WaveModel model) noexcept {
  return model == WaveModel::Elastic2 || model == WaveModel::Elastic3;
}

std::string_view to_string(WaveModel model) noexcept {
  switch (model) {
    case WaveModel::Acoustic2: return "acoustic2";
    case WaveModel::Acoustic3: return "acoustic3";
    case WaveModel::Elastic2: return "elastic2";
    case WaveModel::Elastic3: return "elastic3";
  }
  return "acoustic2";
}

WaveModel parse_wave_model(std::string_view name) {
  for (auto m : {WaveModel::Acoustic2, WaveModel::Acoustic3, WaveModel::Elastic2,
                 WaveModel::Elastic3}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorCode::Config, "unknown model '" + std::string(name) + "'");
}

namespace {

std::mutex g_warning_mutex;
WarningHandler g_warning_handler;
std::set<std::string> g_seen_warnings;
std::atomic<int> g_threads{1};

}  // namespace

void set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(g_warning_mutex);
  g_warning_handler = std::move(handler);
}

void warn(const std::string& message) {
  std::lock_guard lock(g_warning_mutex);
  if (g_warning_handler) {
    g_warning_handler(message);
    return;
  }
  if (g_seen_warnings.insert(message).second) {
    std::cerr << "warning: " << message << '\n';
  }
}

void set_thread_count(int threads) { g_threads = std::max(1, threads); }

int thread_count() noexcept { return g_threads.load(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const auto workers = static_cast<std::size_t>(thread_count());
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  const std::size_t spawn = std::min(workers, n) - 1;
  pool.reserve(spawn);
  for (std::size_t t = 0; t < spawn; ++t) pool.emplace_back(run);
  run();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::Statistics, "line fit needs at least two paired samples");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw Error(ErrorCode::Statistics, "degenerate abscissae in line fit");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw Error(ErrorCode::Statistics, "correlation needs at least two paired samples");
  }
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace irsp
