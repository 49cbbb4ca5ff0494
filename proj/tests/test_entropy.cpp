#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "voxcover/entropy.hpp"
#include "voxcover/errors.hpp"
#include "voxcover/rng.hpp"

using namespace voxcover;

namespace {

GaussianCovering covering1d(const std::vector<double>& means, double sigma) {
  GaussianCovering c;
  c.m = 1;
  c.sigma = sigma;
  for (double mu : means) c.points.push_back({mu});
  return c;
}

} // namespace

TEST_CASE("shannon: hand values") {
  CHECK(shannon_entropy(histogram_from_counts({100})) == 0.0);
  CHECK(shannon_entropy(histogram_from_counts({50, 50})) ==
        doctest::Approx(0.6931471805599453).epsilon(1e-12));
  CHECK(shannon_entropy(histogram_from_counts({75, 25})) ==
        doctest::Approx(0.5623351446188083).epsilon(1e-12));
  CHECK(shannon_entropy(histogram_from_counts({50, 0, 50})) ==
        doctest::Approx(0.6931471805599453).epsilon(1e-12)); // empty bin adds 0
}

TEST_CASE("shannon: bounded by ln(bins) and maximized by the uniform histogram") {
  Rng rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t bins = 2 + rng.index(30);
    std::vector<std::uint64_t> counts(bins);
    for (std::uint64_t& c : counts) c = 1 + rng.index(500);
    const double h = shannon_entropy(histogram_from_counts(counts));
    CHECK(h >= 0.0);
    CHECK(h <= std::log(static_cast<double>(bins)) + 1e-12);
  }
  const double uniform =
      shannon_entropy(histogram_from_counts({25, 25, 25, 25}));
  CHECK(uniform == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(shannon_entropy(histogram_from_counts({26, 24, 25, 25})) < uniform);
}

TEST_CASE("shannon: additive over independent product histograms") {
  const std::vector<std::uint64_t> a = {1, 2, 3, 4};
  const std::vector<std::uint64_t> b = {5, 2, 3};
  std::vector<std::uint64_t> joint;
  for (std::uint64_t ai : a)
    for (std::uint64_t bi : b) joint.push_back(ai * bi);
  const double ha = shannon_entropy(histogram_from_counts(a));
  const double hb = shannon_entropy(histogram_from_counts(b));
  const double hj = shannon_entropy(histogram_from_counts(joint));
  CHECK(hj == doctest::Approx(ha + hb).epsilon(1e-9));
}

TEST_CASE("histogram: binning rules") {
  const Histogram h = histogram_from_data({0.0, 0.5, 1.0, 2.0, 4.0}, 4, 0.0, 4.0);
  CHECK(h.bins() == 4);
  CHECK(h.counts == std::vector<std::uint64_t>{2, 1, 1, 1}); // hi lands in the last bin
  CHECK(h.n == 5);
  CHECK_THROWS_AS(histogram_from_data({-0.1}, 4, 0.0, 4.0), ValidationError);
  CHECK_THROWS_AS(histogram_from_data({5.0}, 4, 0.0, 4.0), ValidationError);

  // Auto-ranged constant data widens to a unit window around the value.
  const Histogram c = histogram_from_data({2.0, 2.0, 2.0}, 5);
  CHECK(c.n == 3);
  CHECK(shannon_entropy(c) == 0.0);
}

TEST_CASE("burg: hand values and positivity contract") {
  CHECK(burg_entropy({1.0, 1.0, 1.0}) == 0.0);
  CHECK(burg_entropy({std::exp(1.0), std::exp(1.0)}) ==
        doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(burg_entropy({2.0, 0.5}) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK_THROWS_AS(burg_entropy({1.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(burg_entropy({-1.0}), ValidationError);
}

TEST_CASE("frieden: hand values and positivity contract") {
  CHECK(frieden_entropy({1.0, 1.0}) == 0.0);
  CHECK(frieden_entropy({std::exp(1.0)}) ==
        doctest::Approx(-std::exp(1.0)).epsilon(1e-12));
  CHECK(frieden_entropy({0.5, 0.5}) ==
        doctest::Approx(0.6931471805599453).epsilon(1e-12));
  CHECK_THROWS_AS(frieden_entropy({0.0}), ValidationError);
}

TEST_CASE("gull-skilling: zero at g=M, negative elsewhere") {
  CHECK(gull_skilling_entropy({0.7, 1.3}, {0.7, 1.3}) == 0.0);
  CHECK(gull_skilling_entropy({2.0}, {1.0}) ==
        doctest::Approx(-0.3862943611198906).epsilon(1e-12));
  Rng rng(19);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> g(4), M(4);
    for (std::size_t i = 0; i < 4; ++i) {
      g[i] = rng.uniform(0.01, 5.0);
      M[i] = rng.uniform(0.01, 5.0);
    }
    CHECK(gull_skilling_entropy(g, M) <= 1e-12);
  }
  CHECK_THROWS_AS(gull_skilling_entropy({1.0}, {1.0, 2.0}), ValidationError);
  CHECK_THROWS_AS(gull_skilling_entropy({0.0}, {1.0}), ValidationError);
}

TEST_CASE("wavelet information: energy normalized by per-scale noise") {
  WaveletDecomposition d;
  d.scales.emplace_back(Dims{4, 4, 4}, ValueKind::WaveletCoefficient);
  d.scales.emplace_back(Dims{4, 4, 4}, ValueKind::WaveletCoefficient);
  d.continuum = Volume(Dims{4, 4, 4}, ValueKind::Continuum);
  for (float& x : d.continuum.data) x = 100.0f; // continuum must not count

  ScaleNoise noise;
  noise.sigma = {1.0, 2.0};
  CHECK(wavelet_information(d, noise) == 0.0);

  d.scales[0].data[7] = 2.0f;
  CHECK(wavelet_information(d, noise) == doctest::Approx(2.0).epsilon(1e-12));
  d.scales[1].data[3] = 2.0f; // contributes 4 / (2*4) = 0.5
  CHECK(wavelet_information(d, noise) == doctest::Approx(2.5).epsilon(1e-12));

  ScaleNoise bad;
  bad.sigma = {1.0, 0.0};
  CHECK_THROWS_AS(wavelet_information(d, bad), ValidationError);
  ScaleNoise short_list;
  short_list.sigma = {1.0};
  CHECK_THROWS_AS(wavelet_information(d, short_list), ValidationError);
}

TEST_CASE("cross-term: closed form equals quadrature") {
  CHECK(gauss_cross_term({0.0}, {0.0}, 1.0) ==
        doctest::Approx(0.28209479177387814).epsilon(1e-12));
  CHECK(gauss_cross_term({0.0, 0.0}, {0.0, 0.0}, 1.0) ==
        doctest::Approx(0.07957747154594767).epsilon(1e-12));

  Rng rng(2025);
  const double sigmas[3] = {0.5, 1.0, 2.0};
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t m = 1 + rng.index(3);
    std::vector<double> mu_i(m), mu_j(m);
    for (std::size_t a = 0; a < m; ++a) {
      mu_i[a] = rng.uniform(-5.0, 5.0);
      mu_j[a] = rng.uniform(-5.0, 5.0);
    }
    const double sigma = sigmas[rep % 3];
    const double closed = gauss_cross_term(mu_i, mu_j, sigma);
    const double quad = oracles::cross_term_quadrature(mu_i, mu_j, sigma);
    CHECK(std::abs(closed - quad) <= 1e-9 * std::abs(quad));
    CHECK(std::exp(log_gauss_cross_term(mu_i, mu_j, sigma)) ==
          doctest::Approx(closed).epsilon(1e-12));
    CHECK(gauss_cross_term(mu_j, mu_i, sigma) == closed);
  }
}

TEST_CASE("cross-term: genuine 2D grid quadrature cross-check") {
  const std::vector<double> mu_i = {0.3, -0.7};
  const std::vector<double> mu_j = {-1.1, 0.4};
  const double sigma = 0.8;
  const double quad = oracles::integrate2d_simpson(
      [&](double x, double y) {
        return oracles::normal_pdf(x, mu_i[0], sigma) *
               oracles::normal_pdf(y, mu_i[1], sigma) *
               oracles::normal_pdf(x, mu_j[0], sigma) *
               oracles::normal_pdf(y, mu_j[1], sigma);
      },
      -9.0, 9.0, 2049);
  CHECK(gauss_cross_term(mu_i, mu_j, sigma) ==
        doctest::Approx(quad).epsilon(1e-7));
}

TEST_CASE("cross-term: contract violations") {
  CHECK_THROWS_AS(gauss_cross_term({0.0}, {0.0}, 0.0), ValidationError);
  CHECK_THROWS_AS(gauss_cross_term({0.0}, {0.0, 1.0}, 1.0), ValidationError);
}

TEST_CASE("renyi covering: coincident pair hand value") {
  CHECK(renyi_quadratic_covering(covering1d({0.0, 0.0}, 1.0)) ==
        doctest::Approx(0.5723649429247001).epsilon(1e-12));
}

TEST_CASE("renyi covering: strictly increasing with separation") {
  double prev = -1e300;
  for (double delta : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double h = renyi_quadratic_covering(covering1d({0.0, delta}, 1.0));
    CHECK(h > prev);
    prev = h;
  }
  // Scaling all pairwise distances up increases the entropy.
  const double base =
      renyi_quadratic_covering(covering1d({0.0, 1.0, 3.0}, 1.0));
  const double spread =
      renyi_quadratic_covering(covering1d({0.0, 1.7, 5.1}, 1.0));
  CHECK(spread > base);
  // Coincident means minimize it.
  CHECK(renyi_quadratic_covering(covering1d({1.0, 1.0, 1.0}, 1.0)) < base);
}

TEST_CASE("renyi covering: survives hyper-separated points") {
  const double h = renyi_quadratic_covering(covering1d({0.0, 4000.0}, 1.0));
  CHECK(std::isfinite(h));
  // - ln sum with sum ~ 2 * exp(-4e6) * (4pi)^{-1/2}: the log form.
  CHECK(h == doctest::Approx(4000.0 * 4000.0 / 4.0 + 0.5723649429247001)
                 .epsilon(1e-9));
}

TEST_CASE("renyi covering: geometric invariances") {
  GaussianCovering c;
  c.m = 2;
  c.sigma = 0.9;
  c.points = {{0.0, 0.0}, {1.0, 2.0}, {-1.5, 0.5}};
  const double base = renyi_quadratic_covering(c);

  GaussianCovering permuted = c;
  std::swap(permuted.points[0], permuted.points[2]);
  CHECK(renyi_quadratic_covering(permuted) == doctest::Approx(base).epsilon(1e-12));

  GaussianCovering translated = c;
  for (std::vector<double>& p : translated.points) {
    p[0] += 13.25;
    p[1] -= 7.5;
  }
  CHECK(renyi_quadratic_covering(translated) ==
        doctest::Approx(base).epsilon(1e-12));

  GaussianCovering rotated = c;
  const double th = 0.7;
  for (std::vector<double>& p : rotated.points) {
    const double x = p[0] * std::cos(th) - p[1] * std::sin(th);
    const double y = p[0] * std::sin(th) + p[1] * std::cos(th);
    p = {x, y};
  }
  CHECK(renyi_quadratic_covering(rotated) ==
        doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("renyi covering: weights scale the pair terms") {
  GaussianCovering c = covering1d({0.0, 2.0}, 1.0);
  c.weights = {2.0, 3.0};
  // Both ordered pairs carry w0*w1 = 6.
  const double expected =
      -std::log(12.0 * gauss_cross_term({0.0}, {2.0}, 1.0));
  CHECK(renyi_quadratic_covering(c) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("renyi full form: matches quadrature of the squared mixture") {
  const std::vector<double> means = {0.0, 1.2, 3.5};
  const std::vector<double> weights = {0.2, 0.5, 0.3};
  GaussianCovering c = covering1d(means, 0.8);
  c.weights = weights;
  const double full = renyi_quadratic_full(c);

  const double integral = oracles::integrate(
      [&](double x) {
        double f = 0.0;
        for (std::size_t i = 0; i < 3; ++i)
          f += weights[i] * oracles::normal_pdf(x, means[i], 0.8);
        return f * f;
      },
      -12.0, 16.0);
  CHECK(full == doctest::Approx(-std::log(integral)).epsilon(1e-9));

  // Diagonal terms only add mass, so the full form sits below the pairwise one.
  GaussianCovering unit = covering1d(means, 0.8);
  CHECK(renyi_quadratic_full(unit) < renyi_quadratic_covering(unit));
}

TEST_CASE("renyi covering: contract violations") {
  CHECK_THROWS_AS(renyi_quadratic_covering(covering1d({0.0}, 1.0)),
                  ValidationError);
  CHECK_THROWS_AS(renyi_quadratic_covering(covering1d({0.0, 1.0}, 0.0)),
                  ValidationError);
  GaussianCovering ragged = covering1d({0.0, 1.0}, 1.0);
  ragged.points[1] = {0.0, 1.0};
  CHECK_THROWS_AS(renyi_quadratic_covering(ragged), ValidationError);
  GaussianCovering badw = covering1d({0.0, 1.0}, 1.0);
  badw.weights = {1.0};
  CHECK_THROWS_AS(renyi_quadratic_covering(badw), ValidationError);
}

TEST_CASE("renyi multiscale: additive across coverings") {
  const GaussianCovering a = covering1d({0.0, 1.0}, 1.0);
  const GaussianCovering b = covering1d({0.0, 5.0, 9.0}, 2.0);
  const double ha = renyi_quadratic_covering(a);
  const double hb = renyi_quadratic_covering(b);
  CHECK(renyi_quadratic_multiscale({a}) == doctest::Approx(ha).epsilon(1e-15));
  CHECK(renyi_quadratic_multiscale({a, a}) ==
        doctest::Approx(2.0 * ha).epsilon(1e-15));
  CHECK(renyi_quadratic_multiscale({a, b}) ==
        doctest::Approx(ha + hb).epsilon(1e-12));
  CHECK_THROWS_AS(renyi_quadratic_multiscale({}), ValidationError);
}

TEST_CASE("discrete distributions order renyi-2, shannon, renyi-half") {
  Rng rng(808);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + rng.index(31);
    std::vector<double> p(n);
    double sum = 0.0;
    for (double& v : p) {
      v = rng.uniform(1e-4, 1.0);
      sum += v;
    }
    for (double& v : p) v /= sum;
    const double h2 = oracles::discrete_renyi2(p);
    const double hs = oracles::discrete_shannon(p);
    const double hh = oracles::discrete_renyi_half(p);
    CHECK(h2 <= hs + 1e-12);
    CHECK(hs <= hh + 1e-12);
  }
}

TEST_CASE("entropy report: named values serialize and reject non-finite") {
  EntropyReport r;
  r.set("shannon", 0.25);
  r.set("renyi_quadratic", 1.5);
  r.params.emplace_back("sigma", "1");
  REQUIRE(r.find("shannon") != nullptr);
  CHECK(*r.find("shannon") == 0.25);
  CHECK(r.find("missing") == nullptr);
  CHECK_THROWS_AS(r.set("bad", std::numeric_limits<double>::infinity()),
                  ValidationError);

  const std::string text = r.to_text();
  CHECK(text.find("shannon=0.25") != std::string::npos);
  CHECK(text.find("param.sigma=1") != std::string::npos);
  CHECK(r.csv_header() == "shannon,renyi_quadratic,sigma");
  CHECK(r.csv_row() == "0.25,1.5,1");
}
