#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <filesystem>
#include <random>

#include "irsp/randfield.hpp"

using namespace irsp;

namespace {

FieldSpec bump_spec(int dim, int n, double half_width, double radius, double m, int components = 1) {
  FieldSpec s;
  s.dimension = dim;
  s.order = m;
  s.components = components;
  s.grid = Grid::centered(dim, n, half_width);
  s.strength.bumps = {SmoothBump{{0.0, 0.0, 0.0}, radius, 1.0}};
  return s;
}

// Brute-force covariance of the synthesized field: a direct sum over all
// lattice frequencies instead of FFTs.
double brute_covariance(const FieldSpec& spec, std::size_t y, std::size_t z) {
  const Grid& g = spec.grid;
  const Point py = g.node(y);
  const Point pz = g.node(z);
  const double sy = std::sqrt(spec.strength(py));
  const double sz = std::sqrt(spec.strength(pz));
  const double L = g.n * g.spacing;
  double sum = 0.0;
  const int n = g.n;
  const int n3 = g.dim == 3 ? n : 1;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n3; ++c) {
        if (a == 0 && b == 0 && c == 0) continue;
        const auto wrap = [&](int k) { return 2.0 * kPi / L * (k <= n / 2 ? k : k - n); };
        const double kx = wrap(a), ky = wrap(b), kz = g.dim == 3 ? wrap(c) : 0.0;
        const double k2 = kx * kx + ky * ky + kz * kz;
        const double phase = kx * (py[0] - pz[0]) + ky * (py[1] - pz[1]) + kz * (py[2] - pz[2]);
        sum += std::pow(k2, -spec.order / 2.0) * std::cos(phase);
      }
    }
  }
  const double nodes = static_cast<double>(g.size());
  return sy * sz * std::pow(g.spacing, -g.dim) * sum / nodes;
}

std::size_t center_node(const Grid& g) {
  const int c = g.n / 2;
  return g.flatten({c, c, g.dim == 3 ? c : 0});
}

}  // namespace

TEST_CASE("zero amplitude gives an identically zero sample", "[randfield]") {
  FieldSpec s = bump_spec(2, 32, 2.0, 1.0, 2.0);
  s.strength.bumps[0].amplitude = 0.0;
  const FieldSample f = sample_field(s, 7);
  for (double v : f.values[0]) REQUIRE(v == 0.0);

  FieldSpec v = bump_spec(2, 32, 2.0, 1.0, 2.0, 2);
  v.strength.bumps[0].amplitude = 0.0;
  const FieldSample fv = sample_vector_field(v, 7);
  REQUIRE(fv.values.size() == 2);
  for (const auto& comp : fv.values) {
    for (double x : comp) REQUIRE(x == 0.0);
  }
}

TEST_CASE("sampling is deterministic in (spec, seed)", "[randfield]") {
  const FieldSpec s = bump_spec(2, 32, 2.0, 1.0, 2.2);
  const FieldSample a = sample_field(s, 42);
  const FieldSample b = sample_field(s, 42);
  const FieldSample c = sample_field(s, 43);
  REQUIRE(a.values == b.values);
  REQUIRE(a.values != c.values);
}

TEST_CASE("sample vanishes exactly outside the support", "[randfield]") {
  const FieldSpec s = bump_spec(2, 48, 2.0, 0.9, 2.0);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const FieldSample f = sample_field(s, seed);
    std::size_t inside = 0;
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
      if (s.strength(s.grid.node(i)) == 0.0) {
        REQUIRE(f.values[0][i] == 0.0);
      } else {
        ++inside;
      }
    }
    REQUIRE(inside > 0);
  }
}

TEST_CASE("negated polarity gives exactly the negated sample", "[randfield]") {
  const FieldSpec s = bump_spec(3, 16, 2.0, 1.0, 3.0);
  const FieldSample p = sample_field(s, 5, Polarity::Positive);
  const FieldSample q = sample_field(s, 5, Polarity::Negated);
  for (std::size_t i = 0; i < p.values[0].size(); ++i) REQUIRE(q.values[0][i] == -p.values[0][i]);
}

TEST_CASE("latent power spectrum has slope -m", "[randfield]") {
  for (double m : {2.0, 2.25, 2.45}) {
    const SpectralSlope s = latent_spectral_slope(bump_spec(2, 128, 2.0, 1.0, m), 1, 100);
    CHECK(s.slope == Catch::Approx(-m).margin(0.15));
  }
  const SpectralSlope s3 = latent_spectral_slope(bump_spec(3, 32, 2.0, 1.0, 3.2), 1, 30);
  CHECK(s3.slope == Catch::Approx(-3.2).margin(0.15));

  // Amplitude does not enter the latent field.
  FieldSpec big = bump_spec(2, 64, 2.0, 1.0, 2.0);
  big.strength.bumps[0].amplitude = 50.0;
  REQUIRE(latent_spectral_slope(big, 1, 20).slope ==
          latent_spectral_slope(bump_spec(2, 64, 2.0, 1.0, 2.0), 1, 20).slope);
}

TEST_CASE("discrete covariance matches the brute-force lattice sum", "[randfield]") {
  const FieldSpec s2 = bump_spec(2, 12, 2.0, 1.5, 2.3);
  for (std::size_t y : {center_node(s2.grid), std::size_t{40}, std::size_t{77}}) {
    for (std::size_t z : {center_node(s2.grid), std::size_t{53}, std::size_t{90}}) {
      const double want = brute_covariance(s2, y, z);
      CHECK(discrete_covariance(s2, y, z) == Catch::Approx(want).epsilon(1e-10).margin(1e-12));
      CHECK(discrete_covariance(s2, y, z) == discrete_covariance(s2, z, y));
    }
  }
  const FieldSpec s3 = bump_spec(3, 8, 2.0, 1.6, 3.1);
  const std::size_t c = center_node(s3.grid);
  CHECK(discrete_covariance(s3, c, c + 1) ==
        Catch::Approx(brute_covariance(s3, c, c + 1)).epsilon(1e-10));

  // Outside the support.
  CHECK(discrete_covariance(s2, 0, center_node(s2.grid)) == 0.0);
}

TEST_CASE("node variance agrees with Monte Carlo", "[randfield]") {
  const FieldSpec s = bump_spec(2, 32, 2.0, 1.0, 2.0);
  const std::size_t c = center_node(s.grid);
  const std::size_t d = c + 3;
  const int seeds = 500;
  double sum_cc = 0.0, sum2_cc = 0.0, sum_cd = 0.0, sum2_cd = 0.0;
  for (int k = 0; k < seeds; ++k) {
    const FieldSample f = sample_field(s, 100 + static_cast<std::uint64_t>(k));
    const double vc = f.values[0][c] * f.values[0][c];
    const double vd = f.values[0][c] * f.values[0][d];
    sum_cc += vc;
    sum2_cc += vc * vc;
    sum_cd += vd;
    sum2_cd += vd * vd;
  }
  const auto check = [&](double sum, double sum2, double want) {
    const double mean = sum / seeds;
    const double se = std::sqrt((sum2 / seeds - mean * mean) / (seeds - 1.0));
    CHECK(std::abs(mean - want) <= 3.0 * se);
  };
  check(sum_cc, sum2_cc, discrete_covariance(s, c, c));
  check(sum_cd, sum2_cd, discrete_covariance(s, c, d));
  REQUIRE(discrete_covariance(s, c, c) > 0.0);
}

TEST_CASE("spectral covariance reproduces the node-pair sum", "[randfield]") {
  const FieldSpec s = bump_spec(2, 10, 2.0, 1.7, 2.0);
  const SpectralCovariance cov(s);
  const std::size_t n = s.grid.size();
  std::vector<Complex> a(n), b(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Point p = s.grid.node(j);
    a[j] = Complex(std::cos(3.0 * p[0]), std::sin(2.0 * p[1]));
    b[j] = Complex(p[0] * p[1], 1.0 - p[0]);
  }
  // E L_a conj(L_b) = h^{2d} sum_{jk} a_j conj(b_k) C(j, k); E L_a L_b likewise without conj.
  Complex conj_sum = 0.0, plain_sum = 0.0;
  const double h2d = std::pow(s.grid.cell_volume(), 2);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      const double c = brute_covariance(s, j, k);
      conj_sum += a[j] * std::conj(b[k]) * c * h2d;
      plain_sum += a[j] * b[k] * c * h2d;
    }
  }
  const auto ah = cov.transform(a);
  const auto bh = cov.transform(b);
  const Complex got_c = cov.conjugated(ah, bh);
  const Complex got_p = cov.plain(ah, bh);
  CHECK(std::abs(got_c - conj_sum) <= 1e-10 * std::abs(conj_sum));
  CHECK(std::abs(got_p - plain_sum) <= 1e-10 * std::abs(plain_sum));
  CHECK(cov.variance(ah) == Catch::Approx(cov.conjugated(ah, ah).real()).epsilon(1e-13));
}

TEST_CASE("vector components are uncorrelated", "[randfield]") {
  const FieldSpec s = bump_spec(2, 32, 2.0, 1.0, 2.0, 2);
  const int seeds = 200;
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    if (s.strength(s.grid.node(i)) > 0.0) support.push_back(i);
  }
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> pick(0, support.size() - 1);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (int p = 0; p < 10; ++p) pairs.emplace_back(support[pick(rng)], support[pick(rng)]);
  std::vector<std::vector<double>> x(pairs.size()), y(pairs.size());
  for (int k = 0; k < seeds; ++k) {
    const FieldSample f = sample_vector_field(s, 900 + static_cast<std::uint64_t>(k));
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      x[p].push_back(f.values[0][pairs[p].first]);
      y[p].push_back(f.values[1][pairs[p].second]);
    }
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    CHECK(std::abs(pearson_correlation(x[p], y[p])) <= 3.0 / std::sqrt(seeds));
  }
}

TEST_CASE("node values are Gaussian by a moment test", "[randfield]") {
  const FieldSpec s = bump_spec(2, 32, 2.0, 1.0, 2.0);
  const std::size_t c = center_node(s.grid);
  const int seeds = 1000;
  std::vector<double> z;
  for (int k = 0; k < seeds; ++k) {
    z.push_back(sample_field(s, 5000 + static_cast<std::uint64_t>(k)).values[0][c]);
  }
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= seeds;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : z) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= seeds;
  m3 /= seeds;
  m4 /= seeds;
  // Sample skewness and excess kurtosis with large-sample errors sqrt(6/n),
  // sqrt(24/n); |z| < 2.576 is p > 0.01 for each.
  const double g1 = m3 / std::pow(m2, 1.5);
  const double g2 = m4 / (m2 * m2) - 3.0;
  CHECK(std::abs(g1) / std::sqrt(6.0 / seeds) < 2.576);
  CHECK(std::abs(g2) / std::sqrt(24.0 / seeds) < 2.576);
}

TEST_CASE("samples round-trip through both file formats", "[randfield]") {
  const auto dir = std::filesystem::temp_directory_path() / "irsp_rf_test";
  std::filesystem::create_directories(dir);
  FieldSpec s = bump_spec(3, 8, 2.0, 1.2, 3.0, 3);
  s.strength.bumps.push_back(SmoothBump{{0.3, -0.2, 0.1}, 0.5, 2.0});
  const FieldSample f = sample_vector_field(s, 11, Polarity::Negated);
  for (auto fmt : {SampleFormat::Binary, SampleFormat::Csv}) {
    const std::string stem = (dir / (fmt == SampleFormat::Binary ? "b" : "c")).string();
    write_sample(f, stem, fmt);
    const FieldSample g = read_sample(stem);
    REQUIRE(g.values == f.values);
    REQUIRE(g.seed == 11);
    REQUIRE(g.polarity == Polarity::Negated);
    REQUIRE(g.spec.grid == s.grid);
    REQUIRE(g.spec.order == s.order);
    REQUIRE(g.spec.components == 3);
    REQUIRE(g.spec.strength.bumps.size() == 2);
    REQUIRE(g.spec.strength.bumps[1].amplitude == 2.0);
  }
  REQUIRE(spec_from_json(spec_to_json(s)).grid == s.grid);
  std::filesystem::remove_all(dir);
}

TEST_CASE("invalid specs are rejected", "[randfield]") {
  auto expect_spec = [](FieldSpec s) {
    REQUIRE_THROWS_MATCHES(sample_field(s, 1), Error,
                           Catch::Matchers::Predicate<Error>(
                               [](const Error& e) { return e.code() == ErrorCode::Spec; }));
  };
  expect_spec(bump_spec(2, 32, 2.0, 1.0, 1.9));
  expect_spec(bump_spec(2, 32, 2.0, 1.0, 2.5));
  expect_spec(bump_spec(3, 16, 2.0, 1.0, 2.9));
  expect_spec(bump_spec(2, 32, 1.0, 1.0, 2.0));  // support touches the box
  expect_spec(bump_spec(2, 32, 2.0, 1.0, 2.0, 3));
  FieldSpec neg = bump_spec(2, 32, 2.0, 1.0, 2.0);
  neg.strength.bumps[0].amplitude = -1.0;
  expect_spec(neg);
  REQUIRE_THROWS_AS(sample_vector_field(bump_spec(2, 32, 2.0, 1.0, 2.0, 1), 1), Error);
  REQUIRE_THROWS_AS(read_sample("/nonexistent/irsp/sample"), Error);
}
