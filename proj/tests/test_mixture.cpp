#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "voxcover/errors.hpp"
#include "voxcover/mixture.hpp"
#include "voxcover/rng.hpp"
#include "voxcover/synth.hpp"

using namespace voxcover;

namespace {

MixtureModel two_component_model(double mu0, double mu1) {
  MixtureModel m;
  m.m = 1;
  m.components = {{0.5, {mu0}, 1.0}, {0.5, {mu1}, 1.0}};
  m.n = 2;
  m.sigma_floor = 1e-9;
  return m;
}

} // namespace

TEST_CASE("gaussian density: known peak values") {
  CHECK(gaussian_pdf({0.0}, {0.0}, 1.0) ==
        doctest::Approx(0.3989422804014327).epsilon(1e-12));
  CHECK(gaussian_pdf({1.0, 2.0}, {1.0, 2.0}, 1.0) ==
        doctest::Approx(0.15915494309189535).epsilon(1e-12));
  CHECK(gaussian_pdf({1.0}, {0.0}, 1.0) ==
        doctest::Approx(0.24197072451914337).epsilon(1e-12));
}

TEST_CASE("gaussian density: log form matches the direct form") {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const std::vector<double> x = {rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const std::vector<double> mu = {rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const double sigma = rng.uniform(0.2, 2.0);
    CHECK(std::log(gaussian_pdf(x, mu, sigma)) ==
          doctest::Approx(log_gaussian_pdf(x, mu, sigma)).epsilon(1e-10));
  }
}

TEST_CASE("gaussian density: contract violations") {
  CHECK_THROWS_AS(gaussian_pdf({0.0}, {0.0}, 0.0), ValidationError);
  CHECK_THROWS_AS(gaussian_pdf({0.0}, {0.0}, -1.0), ValidationError);
  CHECK_THROWS_AS(gaussian_pdf({0.0, 1.0}, {0.0}, 1.0), ValidationError);
}

TEST_CASE("em: constant data collapses to the floor sigma") {
  const std::vector<double> data(100, 4.25);
  const FitReport fit = fit_gmm_em(data, 1);
  CHECK(fit.model.components[0].mean[0] == doctest::Approx(4.25).epsilon(1e-12));
  CHECK(fit.model.components[0].weight == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.model.components[0].sigma == fit.model.sigma_floor);
  CHECK(fit.model.sigma_floor > 0.0);
}

TEST_CASE("em: k=1 reproduces the closed-form single-Gaussian MLE") {
  const std::vector<double> data = {1.0, 2.0, 2.5, 7.0, -3.0, 0.5};
  double mean = 0.0;
  for (double x : data) mean += x;
  mean /= static_cast<double>(data.size());
  double var = 0.0;
  for (double x : data) var += (x - mean) * (x - mean);
  var /= static_cast<double>(data.size());

  const FitReport fit = fit_gmm_em(data, 1);
  CHECK(fit.model.components[0].mean[0] == doctest::Approx(mean).epsilon(1e-9));
  CHECK(fit.model.components[0].sigma ==
        doctest::Approx(std::sqrt(var)).epsilon(1e-9));
  CHECK(fit.converged);
}

TEST_CASE("em: recovers a well-separated two-component mixture") {
  const std::vector<double> data = synth_mixture_samples(
      10000, {{0.5, 0.0, 1.0}, {0.5, 10.0, 1.0}}, 2024);
  FitOptions opts;
  opts.restarts = 3;
  const FitReport fit = fit_gmm_em(data, 2, opts);
  REQUIRE(fit.model.k() == 2);
  // Components come back sorted by ascending mean.
  CHECK(std::abs(fit.model.components[0].mean[0] - 0.0) < 0.1);
  CHECK(std::abs(fit.model.components[1].mean[0] - 10.0) < 0.1);
  CHECK(std::abs(fit.model.components[0].weight - 0.5) < 0.05);
  CHECK(std::abs(fit.model.components[1].weight - 0.5) < 0.05);
  CHECK(std::abs(fit.model.components[0].sigma - 1.0) < 0.1);
  CHECK(fit.converged);
  CHECK(fit.iterations <= FitOptions{}.max_iter);

  double wsum = 0.0;
  for (const GaussianComponent& c : fit.model.components) wsum += c.weight;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("em: log-likelihood trace is nondecreasing") {
  Rng rng(55);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<double> data(600);
    for (double& x : data)
      x = rng.normal(rng.uniform(0, 1) < 0.4 ? 0.0 : 6.0, 1.5);
    FitOptions opts;
    opts.seed = 100 + static_cast<std::uint64_t>(rep);
    opts.restarts = 2;
    const FitReport fit = fit_gmm_em(data, 3, opts);
    REQUIRE(fit.loglik_trace.size() >= 1);
    for (std::size_t i = 1; i < fit.loglik_trace.size(); ++i)
      CHECK(fit.loglik_trace[i] >= fit.loglik_trace[i - 1] - 1e-8);
    CHECK(fit.loglik_trace.back() == doctest::Approx(fit.model.loglik));
  }
}

TEST_CASE("em: final loglik matches an independent evaluation on the data") {
  const std::vector<double> data =
      synth_mixture_samples(2000, {{0.7, 0.0, 1.0}, {0.3, 8.0, 2.0}}, 5150);
  const FitReport fit = fit_gmm_em(data, 2);
  CHECK(log_likelihood(fit.model, data) ==
        doctest::Approx(fit.model.loglik).epsilon(1e-12));
}

TEST_CASE("em: determinism and sample-size contract") {
  const std::vector<double> data =
      synth_mixture_samples(200, {{1.0, 0.0, 1.0}}, 8);
  const FitReport a = fit_gmm_em(data, 2);
  const FitReport b = fit_gmm_em(data, 2);
  CHECK(a.model.loglik == b.model.loglik);
  CHECK(a.model.components[0].mean[0] == b.model.components[0].mean[0]);
  CHECK(a.iterations == b.iterations);

  const std::vector<double> six = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK_THROWS_AS(fit_gmm_em(six, 2), ValidationError); // needs n > 3k
  CHECK_THROWS_AS(fit_gmm_em(six, 0), ValidationError);
  CHECK_THROWS_AS(fit_gmm_em({}, 1), ValidationError);
}

TEST_CASE("em: degenerate clusters keep the model valid") {
  // Constant data with k=2: sigmas pin to the floor; the fit must still
  // return a valid model with weights summing to 1 and both means at c.
  const std::vector<double> data(50, 2.0);
  FitOptions opts;
  opts.restarts = 1;
  const FitReport fit = fit_gmm_em(data, 2, opts);
  double wsum = 0.0;
  for (const GaussianComponent& c : fit.model.components) {
    CHECK(c.mean[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(c.sigma >= fit.model.sigma_floor);
    wsum += c.weight;
  }
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("posterior responsibilities sum to one") {
  const MixtureModel m = two_component_model(0.0, 10.0);
  for (double x : {-5.0, 0.0, 5.0, 9.0, 30.0}) {
    const std::vector<double> r = posterior_responsibilities(m, x);
    REQUIRE(r.size() == 2);
    CHECK(r[0] + r[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r[0] >= 0.0);
    CHECK(r[1] >= 0.0);
  }
}

TEST_CASE("bic: formula, contract, and n-scaling") {
  CHECK(bic(-200.0, 5, 100) ==
        doctest::Approx(211.51292546497023).epsilon(1e-12));
  CHECK_THROWS_AS(bic(0.0, 0, 100), ValidationError);
  CHECK_THROWS_AS(bic(0.0, 1, 0), ValidationError);
  const double delta = bic(-50.0, 4, 2000) - bic(-50.0, 4, 1000);
  CHECK(delta == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(free_parameter_count(1) == 2);
  CHECK(free_parameter_count(6) == 17);
}

TEST_CASE("bic scan: selects the generating component count") {
  const std::vector<double> data = synth_mixture_samples(
      4000, {{0.3, 0.0, 1.0}, {0.4, 8.0, 1.0}, {0.3, 16.0, 1.0}}, 91);
  FitOptions opts;
  opts.restarts = 2;
  const BicScan scan = bic_scan(data, 1, 5, opts);
  CHECK(scan.selected_k == 3);
  REQUIRE(scan.entries.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(scan.entries[i].k == i + 1);

  // Selection is argmin of the bic column.
  double best = scan.entries[0].report.bic;
  std::size_t best_k = 1;
  for (const BicScanEntry& e : scan.entries)
    if (e.report.bic < best) {
      best = e.report.bic;
      best_k = e.k;
    }
  CHECK(best_k == scan.selected_k);
}

TEST_CASE("bic scan: single-Gaussian data selects k=1") {
  const std::vector<double> data =
      synth_mixture_samples(3000, {{1.0, 5.0, 2.0}}, 123);
  FitOptions opts;
  opts.restarts = 2;
  const BicScan scan = bic_scan(data, 1, 4, opts);
  CHECK(scan.selected_k == 1);
}

TEST_CASE("bic scan: range and propagation contracts") {
  const std::vector<double> data = {0.0, 1.0, 2.0, 3.0, 4.0};
  CHECK_THROWS_AS(bic_scan(data, 0, 2, {}), ValidationError);
  CHECK_THROWS_AS(bic_scan(data, 3, 2, {}), ValidationError);
  // k=2 needs n > 6; the failure is annotated with the offending k.
  CHECK_THROWS_WITH_AS(bic_scan(data, 1, 2, {}), doctest::Contains("k=2"),
                       ValidationError);
}

TEST_CASE("bic scan: csv table carries one row per k") {
  const std::vector<double> data =
      synth_mixture_samples(500, {{1.0, 0.0, 1.0}}, 6);
  FitOptions opts;
  opts.restarts = 1;
  const BicScan scan = bic_scan(data, 1, 3, opts);
  const std::string csv = bic_scan_csv(scan);

  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "k,loglik,bic,converged");
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    // One row per k, in scan order, ending in a convergence flag.
    CHECK(line.rfind(std::to_string(rows) + ",", 0) == 0);
    const bool flagged = line.size() > 5 &&
                         (line.compare(line.size() - 5, 5, ",true") == 0 ||
                          line.compare(line.size() - 6, 6, ",false") == 0);
    CHECK(flagged);
  }
  CHECK(rows == 3);
}

TEST_CASE("labeling: posterior argmax with ascending-mean ids") {
  // Component order in the model is deliberately descending by mean; label
  // ids must still follow ascending mean.
  MixtureModel m;
  m.m = 1;
  m.components = {{0.5, {10.0}, 1.0}, {0.5, {0.0}, 1.0}};
  m.n = 2;
  m.sigma_floor = 1e-9;

  Volume v(Dims{5, 1, 1}, ValueKind::Intensity);
  v.data = {2.0f, 8.0f, 5.0f, -100.0f, 1000.0f};
  const LabelVolume lv = label_by_posterior(v, m);
  CHECK(lv.k == 2);
  CHECK(lv.labels[0] == 0);  // closer to mean 0
  CHECK(lv.labels[1] == 1);  // closer to mean 10
  CHECK(lv.labels[2] == 0);  // exact crossover resolves to the lower mean
  CHECK(lv.labels[3] == 0);  // deep tail still labeled
  CHECK(lv.labels[4] == 1);

  // Summary means are per-cluster intensity means.
  CHECK(lv.summary[0].count == 3);
  CHECK(lv.summary[0].mean[0] ==
        doctest::Approx((2.0 + 5.0 - 100.0) / 3.0).epsilon(1e-12));
  CHECK(lv.summary[1].count == 2);
  CHECK(lv.summary[1].mean[0] == doctest::Approx(504.0).epsilon(1e-12));
}

TEST_CASE("labeling: empty cluster keeps its component mean in the summary") {
  const MixtureModel m = two_component_model(0.0, 50.0);
  Volume v(Dims{3, 1, 1}, ValueKind::Intensity);
  v.data = {0.1f, -0.2f, 0.3f};
  const LabelVolume lv = label_by_posterior(v, m);
  CHECK(lv.summary[0].count == 3);
  CHECK(lv.summary[1].count == 0);
  CHECK(lv.summary[1].mean[0] == doctest::Approx(50.0));
}

TEST_CASE("model evaluation is invariant under component permutation") {
  const std::vector<double> data =
      synth_mixture_samples(400, {{0.5, 0.0, 1.0}, {0.5, 6.0, 1.0}}, 44);
  MixtureModel m = two_component_model(0.0, 6.0);
  const double ll = log_likelihood(m, data);
  std::swap(m.components[0], m.components[1]);
  CHECK(log_likelihood(m, data) == doctest::Approx(ll).epsilon(1e-12));
}

TEST_CASE("labeling is invariant under affine intensity rescaling") {
  const std::vector<MixtureComponentSpec> comps = {{0.5, 0.0, 1.0},
                                                   {0.5, 10.0, 1.0}};
  Volume v(Dims{12, 12, 12}, ValueKind::Intensity);
  {
    const std::vector<double> draws =
        synth_mixture_samples(v.size(), comps, 333);
    for (std::size_t i = 0; i < v.size(); ++i)
      v.data[i] = static_cast<float>(draws[i]);
  }
  Volume scaled(v.dims, ValueKind::Intensity);
  for (std::size_t i = 0; i < v.size(); ++i)
    scaled.data[i] = 2.5f * v.data[i] + 7.0f;

  FitOptions opts;
  opts.restarts = 3;
  const std::vector<double> raw(v.data.begin(), v.data.end());
  const std::vector<double> mapped(scaled.data.begin(), scaled.data.end());
  const LabelVolume la = label_by_posterior(v, fit_gmm_em(raw, 2, opts).model);
  const LabelVolume lb =
      label_by_posterior(scaled, fit_gmm_em(mapped, 2, opts).model);
  CHECK(la.labels == lb.labels);
}

TEST_CASE("binned fit approximates the raw fit on large samples") {
  const std::vector<double> data = synth_mixture_samples(
      20000, {{0.5, 0.0, 1.0}, {0.5, 12.0, 1.0}}, 47);
  FitOptions opts;
  opts.restarts = 2;
  const FitReport fit = fit_gmm_em_binned(data, 2, opts);
  CHECK(fit.method == "binned(1024)");
  CHECK(std::abs(fit.model.components[0].mean[0] - 0.0) < 0.15);
  CHECK(std::abs(fit.model.components[1].mean[0] - 12.0) < 0.15);
  CHECK(std::abs(fit.model.components[0].weight - 0.5) < 0.05);
}

TEST_CASE("volume marginal fit dispatches on voxel count") {
  Volume v(Dims{8, 8, 8}, ValueKind::Intensity);
  const std::vector<double> draws =
      synth_mixture_samples(v.size(), {{1.0, 3.0, 1.0}}, 13);
  for (std::size_t i = 0; i < v.size(); ++i)
    v.data[i] = static_cast<float>(draws[i]);
  const FitReport fit = fit_volume_marginal(v, 1);
  CHECK(fit.method == "raw");
  CHECK(std::abs(fit.model.components[0].mean[0] - 3.0) < 0.2);
}
