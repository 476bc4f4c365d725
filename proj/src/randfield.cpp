#include "irsp/randfield.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "fft.hpp"

namespace irsp {

using nlohmann::json;

double SmoothBump::operator()(const Point& x) const {
  const double rho2 = [&] {
    const Point d = x - center;
    return d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
  }();
  const double s = rho2 / (radius * radius);
  if (s >= 1.0 || amplitude == 0.0) return 0.0;
  return amplitude * std::exp(1.0 - 1.0 / (1.0 - s));
}

double StrengthFunction::operator()(const Point& x) const {
  double total = 0.0;
  for (const auto& b : bumps) total += b(x);
  return total;
}

bool StrengthFunction::contains(const Point& x) const {
  for (const auto& b : bumps) {
    if (b.amplitude > 0.0 && distance(x, b.center) <= b.radius) return true;
  }
  return false;
}

double StrengthFunction::distance_to_support(const Point& x) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& b : bumps) {
    if (b.amplitude <= 0.0) continue;
    best = std::min(best, distance(x, b.center) - b.radius);
  }
  return best;
}

std::array<std::array<double, 2>, 3> StrengthFunction::bounding_box(int dim) const {
  std::array<std::array<double, 2>, 3> box{};
  bool first = true;
  for (const auto& b : bumps) {
    if (b.amplitude <= 0.0) continue;
    for (int a = 0; a < dim; ++a) {
      const auto i = static_cast<std::size_t>(a);
      const double lo = b.center[i] - b.radius;
      const double hi = b.center[i] + b.radius;
      box[i][0] = first ? lo : std::min(box[i][0], lo);
      box[i][1] = first ? hi : std::max(box[i][1], hi);
    }
    first = false;
  }
  return box;
}

bool StrengthFunction::is_zero() const {
  for (const auto& b : bumps) {
    if (b.amplitude != 0.0) return false;
  }
  return true;
}

Grid Grid::centered(int dim, int n, double half_width) {
  Grid g;
  g.dim = dim;
  g.n = n;
  g.spacing = 2.0 * half_width / n;
  g.lower = {-half_width, -half_width, dim == 3 ? -half_width : 0.0};
  return g;
}

std::size_t Grid::size() const {
  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(n);
  return total;
}

double Grid::cell_volume() const { return std::pow(spacing, dim); }

std::array<int, 3> Grid::unflatten(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  const auto un = static_cast<std::size_t>(n);
  for (int a = dim - 1; a >= 0; --a) {
    idx[static_cast<std::size_t>(a)] = static_cast<int>(flat % un);
    flat /= un;
  }
  return idx;
}

std::size_t Grid::flatten(const std::array<int, 3>& idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim; ++a) {
    flat = flat * static_cast<std::size_t>(n) + static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
  }
  return flat;
}

Point Grid::node(std::size_t flat) const {
  const auto idx = unflatten(flat);
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) {
    const auto i = static_cast<std::size_t>(a);
    p[i] = lower[i] + (idx[i] + 0.5) * spacing;
  }
  return p;
}

void FieldSpec::validate() const {
  const double d = dimension;
  if (dimension != 2 && dimension != 3) throw Error(ErrorCode::Spec, "dimension must be 2 or 3");
  if (!(order >= d && order < d + 0.5)) {
    std::ostringstream os;
    os << "order m = " << order << " outside [" << d << ", " << d + 0.5 << ")";
    throw Error(ErrorCode::Spec, os.str());
  }
  if (components != 1 && components != dimension) {
    throw Error(ErrorCode::Spec, "components must be 1 or the dimension");
  }
  if (grid.dim != dimension) throw Error(ErrorCode::Spec, "grid dimension differs from field");
  if (grid.n < 4 || !(grid.spacing > 0.0)) throw Error(ErrorCode::Spec, "grid too coarse");
  for (const auto& b : strength.bumps) {
    if (!(b.radius > 0.0)) throw Error(ErrorCode::Spec, "bump radius must be positive");
    if (!(b.amplitude >= 0.0)) throw Error(ErrorCode::Spec, "bump amplitude must be nonnegative");
    if (dimension == 2 && b.center[2] != 0.0) {
      throw Error(ErrorCode::Spec, "2D bump centre must have zero third coordinate");
    }
  }
  if (strength.is_zero()) return;
  const auto box = strength.bounding_box(dimension);
  double support_extent = 0.0;
  double grid_extent = grid.n * grid.spacing;
  for (int a = 0; a < dimension; ++a) {
    const auto i = static_cast<std::size_t>(a);
    if (!(box[i][0] > grid.lower[i] && box[i][1] < grid.upper(a))) {
      throw Error(ErrorCode::Spec, "grid box does not strictly contain the support of phi");
    }
    support_extent = std::max(support_extent, box[i][1] - box[i][0]);
  }
  if (grid_extent < 2.0 * support_extent - 1e-12) {
    warn("grid box is smaller than twice the support diameter; periodic wrap-around may correlate the field");
  }
}

namespace {

std::vector<double> frequency_axis(const Grid& g) {
  std::vector<double> xi(static_cast<std::size_t>(g.n));
  const double base = 2.0 * kPi / (g.n * g.spacing);
  for (int k = 0; k < g.n; ++k) {
    const int signed_k = k <= g.n / 2 ? k : k - g.n;
    xi[static_cast<std::size_t>(k)] = base * signed_k;
  }
  return xi;
}

std::vector<double> sqrt_phi_on(const FieldSpec& spec) {
  std::vector<double> s(spec.grid.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sqrt(spec.strength(spec.grid.node(i)));
  return s;
}

std::mt19937_64 component_engine(std::uint64_t seed, int component) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(component)};
  return std::mt19937_64(seq);
}

}  // namespace

std::vector<double> spectral_weights(const FieldSpec& spec) {
  const Grid& g = spec.grid;
  const auto xi = frequency_axis(g);
  std::vector<double> w(g.size());
  for (std::size_t flat = 0; flat < w.size(); ++flat) {
    const auto idx = g.unflatten(flat);
    double r2 = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      const double v = xi[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
      r2 += v * v;
    }
    w[flat] = r2 == 0.0 ? 0.0 : std::pow(r2, -0.5 * spec.order);
  }
  return w;
}

std::vector<double> latent_field(const FieldSpec& spec, std::uint64_t seed, int component,
                                 Polarity polarity) {
  const Grid& g = spec.grid;
  const std::size_t total = g.size();
  auto engine = component_engine(seed, component);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Complex> buf(total);
  const double sign = polarity == Polarity::Negated ? -1.0 : 1.0;
  for (auto& v : buf) v = Complex(sign * normal(engine), 0.0);
  detail::fft_forward(buf, g.dim, g.n);
  const auto w = spectral_weights(spec);
  for (std::size_t k = 0; k < total; ++k) buf[k] *= std::sqrt(w[k]);
  detail::fft_backward(buf, g.dim, g.n);
  std::vector<double> out(total);
  const double inv_n = 1.0 / static_cast<double>(total);
  for (std::size_t k = 0; k < total; ++k) out[k] = buf[k].real() * inv_n;
  return out;
}

FieldSample sample_field(const FieldSpec& spec, std::uint64_t seed, Polarity polarity) {
  spec.validate();
  FieldSample sample;
  sample.spec = spec;
  sample.seed = seed;
  sample.polarity = polarity;
  sample.values.resize(static_cast<std::size_t>(spec.components));
  const auto sqrt_phi = sqrt_phi_on(spec);
  const double scale = std::pow(spec.grid.spacing, -0.5 * spec.dimension);
  for (int c = 0; c < spec.components; ++c) {
    auto& vals = sample.values[static_cast<std::size_t>(c)];
    if (spec.strength.is_zero()) {
      vals.assign(spec.grid.size(), 0.0);
      continue;
    }
    vals = latent_field(spec, seed, c, polarity);
    for (std::size_t i = 0; i < vals.size(); ++i) {
      vals[i] = sqrt_phi[i] == 0.0 ? 0.0 : sqrt_phi[i] * scale * vals[i];
    }
  }
  return sample;
}

FieldSample sample_vector_field(const FieldSpec& spec, std::uint64_t seed, Polarity polarity) {
  if (spec.components != spec.dimension) {
    throw Error(ErrorCode::Spec, "vector field requires components equal to the dimension");
  }
  return sample_field(spec, seed, polarity);
}

double discrete_covariance(const FieldSpec& spec, std::size_t y, std::size_t z) {
  const Grid& g = spec.grid;
  const double sy = std::sqrt(spec.strength(g.node(y)));
  const double sz = std::sqrt(spec.strength(g.node(z)));
  if (sy == 0.0 || sz == 0.0) return 0.0;
  const auto iy = g.unflatten(y);
  const auto iz = g.unflatten(z);
  // Separable phase: sum_k w_k cos(2 pi k . (iy - iz) / n).
  const auto w = spectral_weights(spec);
  CompensatedSum acc;
  for (std::size_t flat = 0; flat < w.size(); ++flat) {
    if (w[flat] == 0.0) continue;
    const auto k = g.unflatten(flat);
    double phase = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      const auto i = static_cast<std::size_t>(a);
      phase += static_cast<double>(k[i]) * (iy[i] - iz[i]);
    }
    acc.add(w[flat] * std::cos(2.0 * kPi * phase / g.n));
  }
  return sy * sz * std::pow(g.spacing, -g.dim) * acc.value() / static_cast<double>(w.size());
}

SpectralCovariance::SpectralCovariance(const FieldSpec& spec)
    : spec_(spec), weights_(spectral_weights(spec)), sqrt_phi_(sqrt_phi_on(spec)) {
  const Grid& g = spec.grid;
  negated_.resize(g.size());
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    auto idx = g.unflatten(flat);
    for (int a = 0; a < g.dim; ++a) {
      auto& v = idx[static_cast<std::size_t>(a)];
      v = (g.n - v) % g.n;
    }
    negated_[flat] = g.flatten(idx);
  }
  scale_ = g.cell_volume() / static_cast<double>(g.size());
}

std::vector<Complex> SpectralCovariance::transform(const std::vector<Complex>& kernel) const {
  if (kernel.size() != sqrt_phi_.size()) throw Error(ErrorCode::Domain, "kernel size mismatch");
  std::vector<Complex> buf(kernel.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = sqrt_phi_[i] * kernel[i];
  detail::fft_forward(buf, spec_.grid.dim, spec_.grid.n);
  return buf;
}

Complex SpectralCovariance::conjugated(const std::vector<Complex>& a_hat,
                                       const std::vector<Complex>& b_hat) const {
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const Complex v = weights_[k] * a_hat[k] * std::conj(b_hat[k]);
    re += v.real();
    im += v.imag();
  }
  return scale_ * Complex(re, im);
}

Complex SpectralCovariance::plain(const std::vector<Complex>& a_hat,
                                  const std::vector<Complex>& b_hat) const {
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const Complex v = weights_[k] * a_hat[k] * b_hat[negated_[k]];
    re += v.real();
    im += v.imag();
  }
  return scale_ * Complex(re, im);
}

double SpectralCovariance::variance(const std::vector<Complex>& a_hat) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) acc += weights_[k] * std::norm(a_hat[k]);
  return scale_ * acc;
}

SpectralSlope latent_spectral_slope(const FieldSpec& spec, std::uint64_t first_seed, int count) {
  if (count < 1) throw Error(ErrorCode::Statistics, "spectral slope needs at least one seed");
  const Grid& g = spec.grid;
  const double k_lo = 2.0;
  const double k_hi = g.n / 4.0;
  // Per-mode regression: every mode sees the same number of seeds, so the log
  // of the seed average is biased by a k-independent constant only.
  std::vector<std::size_t> modes;
  std::vector<double> radius;
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    const auto idx = g.unflatten(flat);
    double r2 = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      const int k = idx[static_cast<std::size_t>(a)];
      const int sk = k <= g.n / 2 ? k : k - g.n;
      r2 += static_cast<double>(sk) * sk;
    }
    const double r = std::sqrt(r2);
    if (r >= k_lo && r <= k_hi) {
      modes.push_back(flat);
      radius.push_back(r);
    }
  }
  std::vector<double> power(modes.size(), 0.0);
  for (int s = 0; s < count; ++s) {
    const auto latent = latent_field(spec, first_seed + static_cast<std::uint64_t>(s), 0);
    std::vector<Complex> buf(latent.begin(), latent.end());
    detail::fft_forward(buf, g.dim, g.n);
    for (std::size_t i = 0; i < modes.size(); ++i) power[i] += std::norm(buf[modes[i]]);
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    lx.push_back(std::log(radius[i]));
    ly.push_back(std::log(power[i] / count));
  }
  SpectralSlope out;
  out.slope = fit_line(lx, ly).slope;
  out.k_min = k_lo;
  out.k_max = k_hi;
  out.seeds = count;
  return out;
}

namespace {

json spec_json(const FieldSpec& spec) {
  json bumps = json::array();
  for (const auto& b : spec.strength.bumps) {
    bumps.push_back({{"center", b.center}, {"radius", b.radius}, {"amplitude", b.amplitude}});
  }
  return {{"dimension", spec.dimension},
          {"order", spec.order},
          {"components", spec.components},
          {"grid",
           {{"n", spec.grid.n}, {"spacing", spec.grid.spacing}, {"lower", spec.grid.lower}}},
          {"bumps", bumps}};
}

FieldSpec spec_of(const json& j) {
  FieldSpec spec;
  spec.dimension = j.at("dimension").get<int>();
  spec.order = j.at("order").get<double>();
  spec.components = j.at("components").get<int>();
  spec.grid.dim = spec.dimension;
  spec.grid.n = j.at("grid").at("n").get<int>();
  spec.grid.spacing = j.at("grid").at("spacing").get<double>();
  spec.grid.lower = j.at("grid").at("lower").get<Point>();
  for (const auto& b : j.at("bumps")) {
    SmoothBump bump;
    bump.center = b.at("center").get<Point>();
    bump.radius = b.at("radius").get<double>();
    bump.amplitude = b.at("amplitude").get<double>();
    spec.strength.bumps.push_back(bump);
  }
  return spec;
}

}  // namespace

std::string spec_to_json(const FieldSpec& spec) { return spec_json(spec).dump(2); }

FieldSpec spec_from_json(const std::string& text) {
  try {
    return spec_of(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed field spec: ") + e.what());
  }
}

void write_sample(const FieldSample& sample, const std::string& stem, SampleFormat format) {
  static_assert(std::endian::native == std::endian::little, "binary format is little endian");
  json header = {{"format", format == SampleFormat::Binary ? "f64le" : "csv"},
                 {"seed", sample.seed},
                 {"polarity", sample.polarity == Polarity::Negated ? "negated" : "positive"},
                 {"layout", "component-major, row-major nodes, last axis fastest"},
                 {"spec", spec_json(sample.spec)}};
  {
    std::ofstream out(stem + ".json", std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + stem + ".json");
    out << header.dump(2) << '\n';
  }
  if (format == SampleFormat::Binary) {
    std::ofstream out(stem + ".bin", std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + stem + ".bin");
    for (const auto& comp : sample.values) {
      out.write(reinterpret_cast<const char*>(comp.data()),
                static_cast<std::streamsize>(comp.size() * sizeof(double)));
    }
    return;
  }
  std::ofstream out(stem + ".csv", std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + stem + ".csv");
  const Grid& g = sample.spec.grid;
  out << "index";
  const char* axis[3] = {"x", "y", "z"};
  for (int a = 0; a < g.dim; ++a) out << ',' << axis[a];
  for (std::size_t c = 0; c < sample.values.size(); ++c) out << ",f" << c + 1;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point p = g.node(i);
    out << i;
    for (int a = 0; a < g.dim; ++a) out << ',' << p[static_cast<std::size_t>(a)];
    for (const auto& comp : sample.values) out << ',' << comp[i];
    out << '\n';
  }
}

FieldSample read_sample(const std::string& stem) {
  std::ifstream in(stem + ".json", std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingInput, "no sample header at " + stem + ".json");
  json header;
  try {
    in >> header;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed sample header: ") + e.what());
  }
  FieldSample sample;
  sample.spec = spec_of(header.at("spec"));
  sample.seed = header.at("seed").get<std::uint64_t>();
  sample.polarity = header.value("polarity", "positive") == "negated" ? Polarity::Negated
                                                                        : Polarity::Positive;
  const std::size_t total = sample.spec.grid.size();
  const auto comps = static_cast<std::size_t>(sample.spec.components);
  sample.values.assign(comps, std::vector<double>(total));
  if (header.at("format").get<std::string>() == "f64le") {
    std::ifstream bin(stem + ".bin", std::ios::binary);
    if (!bin) throw Error(ErrorCode::MissingInput, "no sample data at " + stem + ".bin");
    for (auto& comp : sample.values) {
      bin.read(reinterpret_cast<char*>(comp.data()),
               static_cast<std::streamsize>(total * sizeof(double)));
      if (!bin) throw Error(ErrorCode::Io, "truncated sample data");
    }
    return sample;
  }
  std::ifstream csv(stem + ".csv", std::ios::binary);
  if (!csv) throw Error(ErrorCode::MissingInput, "no sample data at " + stem + ".csv");
  std::string line;
  std::getline(csv, line);
  for (std::size_t i = 0; i < total; ++i) {
    if (!std::getline(csv, line)) throw Error(ErrorCode::Io, "truncated sample csv");
    std::stringstream row(line);
    std::string cell;
    for (int skip = 0; skip <= sample.spec.dimension; ++skip) std::getline(row, cell, ',');
    for (auto& comp : sample.values) {
      std::getline(row, cell, ',');
      comp[i] = std::stod(cell);
    }
  }
  return sample;
}

}  // namespace irsp
