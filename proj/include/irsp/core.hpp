#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace irsp {

using Complex = std::complex<double>;

// Points always carry three coordinates; in two dimensions the third is zero,
// so Euclidean distances need no dimension argument.
using Point = std::array<double, 3>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kEulerGamma = 0.5772156649015329;

enum class ErrorCode {
  Domain,
  UnsupportedOrder,
  Spec,
  Geometry,
  Sweep,
  Statistics,
  Conditioning,
  Unsupported,
  Config,
  MissingInput,
  Io,
  Singularity,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

enum class WaveModel { Acoustic2, Acoustic3, Elastic2, Elastic3 };

int dimension_of(WaveModel model) noexcept;
bool is_elastic(WaveModel model) noexcept;
std::string_view to_string(WaveModel model) noexcept;
WaveModel parse_wave_model(std::string_view name);

inline double distance(const Point& a, const Point& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline Point operator+(const Point& a, const Point& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Point operator-(const Point& a, const Point& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Point operator*(double s, const Point& a) { return {s * a[0], s * a[1], s * a[2]}; }

// Warnings are non-fatal diagnostics (e.g. an under-resolved source grid).
// The default handler writes each distinct message once to stderr.
using WarningHandler = std::function<void(const std::string&)>;
void set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

// Worker count used by parallel_for. 1 means run inline.
void set_thread_count(int threads);
int thread_count() noexcept;

// Runs body(i) for i in [0, n). Each index is executed exactly once; callers
// write results into per-index slots and reduce afterwards so the outcome
// does not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Kahan-Babuska summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Ordinary least squares y = slope * x + intercept.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace irsp
