#include "voxcover/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "voxcover/rng.hpp"

namespace voxcover {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

struct WeightedData {
  std::vector<double> x; // distinct observation values (bin centers for binned)
  std::vector<double> c; // positive weights; sum equals the raw sample count
  double total = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
};

WeightedData weighted_stats(std::vector<double> x, std::vector<double> c) {
  WeightedData d;
  d.x = std::move(x);
  d.c = std::move(c);
  double s0 = 0.0, s1 = 0.0;
  for (std::size_t i = 0; i < d.x.size(); ++i) {
    s0 += d.c[i];
    s1 += d.c[i] * d.x[i];
  }
  d.total = s0;
  d.mean = s1 / s0;
  double s2 = 0.0;
  for (std::size_t i = 0; i < d.x.size(); ++i) {
    const double dev = d.x[i] - d.mean;
    s2 += d.c[i] * dev * dev;
  }
  const double var = s2 / s0;
  d.stddev = var > 0.0 ? std::sqrt(var) : 0.0;
  return d;
}

double sigma_floor_for(const WeightedData& d) {
  if (d.stddev > 0.0) return 1e-6 * d.stddev;
  return 1e-6 * std::max(1.0, std::abs(d.mean));
}

// k-means++ seeding over the weighted observations.
std::vector<double> seed_centers(const WeightedData& d, std::size_t k,
                                 Rng& rng) {
  const std::size_t n = d.x.size();
  std::vector<double> centers;
  centers.reserve(k);

  // First center: weight-proportional draw.
  double r = rng.uniform() * d.total;
  std::size_t first = n - 1;
  for (std::size_t i = 0; i < n; ++i) {
    r -= d.c[i];
    if (r < 0.0) {
      first = i;
      break;
    }
  }
  centers.push_back(d.x[first]);

  std::vector<double> dist2(n);
  while (centers.size() < k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double ctr : centers) {
        const double dd = (d.x[i] - ctr) * (d.x[i] - ctr);
        if (dd < best) best = dd;
      }
      dist2[i] = d.c[i] * best;
      sum += dist2[i];
    }
    std::size_t pick;
    if (sum > 0.0) {
      double rr = rng.uniform() * sum;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        rr -= dist2[i];
        if (rr < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.index(n); // all mass on the chosen centers already
    }
    centers.push_back(d.x[pick]);
  }
  return centers;
}

struct Comp {
  double w, mu, sigma;
};

std::vector<Comp> initial_model(const WeightedData& d, std::size_t k, Rng& rng,
                                double floor) {
  const std::vector<double> centers = seed_centers(d, k, rng);
  const std::size_t n = d.x.size();
  std::vector<double> s0(k, 0.0), s1(k, 0.0), s2(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      const double dd = (d.x[i] - centers[j]) * (d.x[i] - centers[j]);
      if (dd < bd) {
        bd = dd;
        best = j;
      }
    }
    s0[best] += d.c[i];
    s1[best] += d.c[i] * d.x[i];
    s2[best] += d.c[i] * d.x[i] * d.x[i];
  }
  const double global_sigma = std::max(d.stddev, floor);
  std::vector<Comp> comps(k);
  double wsum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    // Add-one smoothing keeps empty seeds usable as components.
    comps[j].w = s0[j] + 1.0;
    wsum += comps[j].w;
    if (s0[j] > 0.0) {
      comps[j].mu = s1[j] / s0[j];
      const double var = s2[j] / s0[j] - comps[j].mu * comps[j].mu;
      comps[j].sigma = var > floor * floor ? std::sqrt(var) : global_sigma;
    } else {
      comps[j].mu = centers[j];
      comps[j].sigma = global_sigma;
    }
  }
  for (Comp& c : comps) c.w /= wsum;
  return comps;
}

struct EmRun {
  std::vector<Comp> comps;
  double loglik = -std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> trace;
  std::vector<std::string> events;
};

EmRun run_em(const WeightedData& d, std::size_t k, const FitOptions& opts,
             std::uint64_t stream_seed, double floor) {
  Rng rng(stream_seed);
  EmRun run;
  run.comps = initial_model(d, k, rng, floor);

  const std::size_t n = d.x.size();
  std::vector<double> lw(k), lnorm(k), inv2v(k), t(k);
  std::vector<double> s0(k), s1(k), s2(k);
  std::vector<int> floor_iters(k, 0);
  const double global_sigma = std::max(d.stddev, floor);
  double ll_prev = -std::numeric_limits<double>::infinity();

  for (std::size_t iter = 1; iter <= opts.max_iter; ++iter) {
    for (std::size_t j = 0; j < k; ++j) {
      lw[j] = std::log(run.comps[j].w);
      lnorm[j] = -std::log(run.comps[j].sigma) - 0.5 * kLog2Pi;
      inv2v[j] = 0.5 / (run.comps[j].sigma * run.comps[j].sigma);
    }
    std::fill(s0.begin(), s0.end(), 0.0);
    std::fill(s1.begin(), s1.end(), 0.0);
    std::fill(s2.begin(), s2.end(), 0.0);

    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = d.x[i];
      double tmax = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) {
        const double dev = x - run.comps[j].mu;
        t[j] = lw[j] + lnorm[j] - dev * dev * inv2v[j];
        if (t[j] > tmax) tmax = t[j];
      }
      double sum = 0.0;
      for (std::size_t j = 0; j < k; ++j) sum += std::exp(t[j] - tmax);
      const double lse = tmax + std::log(sum);
      ll += d.c[i] * lse;
      for (std::size_t j = 0; j < k; ++j) {
        const double r = d.c[i] * std::exp(t[j] - lse);
        s0[j] += r;
        s1[j] += r * x;
        s2[j] += r * x * x;
      }
    }
    run.trace.push_back(ll);
    run.iterations = iter;
    run.loglik = ll;

    if (iter > 1 && std::abs(ll - ll_prev) <= opts.tol * std::max(1.0, std::abs(ll))) {
      run.converged = true;
      break; // parameters that produced this ll are kept
    }
    ll_prev = ll;
    if (iter == opts.max_iter) break; // no M-step without a following E-step

    for (std::size_t j = 0; j < k; ++j) {
      if (s0[j] > 0.0) {
        run.comps[j].w = s0[j] / d.total;
        run.comps[j].mu = s1[j] / s0[j];
        const double var = s2[j] / s0[j] - run.comps[j].mu * run.comps[j].mu;
        run.comps[j].sigma = std::sqrt(std::max(var, floor * floor));
      } else {
        run.comps[j].w = 0.0; // forces the weight reinit below
      }
    }

    bool renormalize = false;
    for (std::size_t j = 0; j < k; ++j) {
      bool reinit = false;
      std::string why;
      if (run.comps[j].w < 1.0 / d.total) {
        reinit = true;
        why = "weight below 1/n";
      } else if (run.comps[j].sigma <= floor * (1.0 + 1e-12)) {
        if (++floor_iters[j] >= 5) {
          reinit = true;
          why = "sigma at floor for 5 iterations";
        }
      } else {
        floor_iters[j] = 0;
      }
      if (reinit) {
        run.comps[j].mu = d.x[rng.index(n)];
        run.comps[j].sigma = global_sigma;
        run.comps[j].w = 1.0 / static_cast<double>(k);
        floor_iters[j] = 0;
        renormalize = true;
        run.events.push_back("iter " + std::to_string(iter) + ": component " +
                             std::to_string(j) + " reinitialized (" + why +
                             ")");
      }
    }
    if (renormalize) {
      double wsum = 0.0;
      for (const Comp& c : run.comps) wsum += c.w;
      for (Comp& c : run.comps) c.w /= wsum;
    }
  }
  return run;
}

FitReport fit_weighted(const WeightedData& d, std::size_t raw_n, std::size_t k,
                       const FitOptions& opts, const std::string& method) {
  if (k < 1) throw ValidationError("component count k must be >= 1");
  if (raw_n <= 3 * k)
    throw ValidationError("need more than 3k samples to fit k=" +
                          std::to_string(k) + " components, got n=" +
                          std::to_string(raw_n));
  const double floor = sigma_floor_for(d);
  const std::size_t restarts = std::max<std::size_t>(1, opts.restarts);

  EmRun best;
  bool first = true;
  for (std::size_t r = 0; r < restarts; ++r) {
    EmRun run = run_em(d, k, opts, derive_seed(opts.seed, r), floor);
    if (first || run.loglik > best.loglik) {
      best = std::move(run);
      first = false;
    }
  }

  std::sort(best.comps.begin(), best.comps.end(),
            [](const Comp& a, const Comp& b) {
              if (a.mu != b.mu) return a.mu < b.mu;
              if (a.sigma != b.sigma) return a.sigma < b.sigma;
              return a.w < b.w;
            });

  FitReport report;
  report.model.m = 1;
  report.model.n = raw_n;
  report.model.sigma_floor = floor;
  report.model.loglik = best.loglik;
  for (const Comp& c : best.comps)
    report.model.components.push_back(GaussianComponent{c.w, {c.mu}, c.sigma});
  report.bic = bic(best.loglik, free_parameter_count(k), raw_n);
  report.iterations = best.iterations;
  report.converged = best.converged;
  report.loglik_trace = std::move(best.trace);
  report.events = std::move(best.events);
  report.method = method;
  return report;
}

void require_1d(const MixtureModel& model, const char* what) {
  if (model.m != 1)
    throw ValidationError(std::string(what) + " requires a 1D model, got m=" +
                          std::to_string(model.m));
  if (model.components.empty())
    throw ValidationError(std::string(what) + ": model has no components");
}

} // namespace

double log_gaussian_pdf(const std::vector<double>& x,
                        const std::vector<double>& mu, double sigma) {
  if (!(sigma > 0.0))
    throw ValidationError("gaussian_pdf requires sigma > 0, got " +
                          std::to_string(sigma));
  if (x.size() != mu.size() || x.empty())
    throw ValidationError("gaussian_pdf needs matching nonempty x and mu");
  const double m = static_cast<double>(x.size());
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    d2 += (x[i] - mu[i]) * (x[i] - mu[i]);
  return -0.5 * m * kLog2Pi - m * std::log(sigma) -
         d2 / (2.0 * sigma * sigma);
}

double gaussian_pdf(const std::vector<double>& x, const std::vector<double>& mu,
                    double sigma) {
  return std::exp(log_gaussian_pdf(x, mu, sigma));
}

FitReport fit_gmm_em(const std::vector<double>& data, std::size_t k,
                     const FitOptions& opts) {
  if (data.empty()) throw ValidationError("cannot fit an empty sample");
  WeightedData d = weighted_stats(data, std::vector<double>(data.size(), 1.0));
  return fit_weighted(d, data.size(), k, opts, "raw");
}

FitReport fit_gmm_em_binned(const std::vector<double>& data, std::size_t k,
                            const FitOptions& opts, std::size_t bins) {
  if (data.empty()) throw ValidationError("cannot fit an empty sample");
  if (bins < 2) throw ValidationError("binned fit needs at least 2 bins");
  const auto [lo_it, hi_it] = std::minmax_element(data.begin(), data.end());
  const double lo = *lo_it, hi = *hi_it;

  std::vector<double> centers, weights;
  if (lo == hi) {
    centers = {lo};
    weights = {static_cast<double>(data.size())};
  } else {
    const double width = (hi - lo) / static_cast<double>(bins);
    std::vector<double> counts(bins, 0.0);
    for (double x : data) {
      std::size_t b = static_cast<std::size_t>((x - lo) / width);
      if (b >= bins) b = bins - 1; // x == hi
      counts[b] += 1.0;
    }
    for (std::size_t b = 0; b < bins; ++b) {
      if (counts[b] == 0.0) continue;
      centers.push_back(lo + (static_cast<double>(b) + 0.5) * width);
      weights.push_back(counts[b]);
    }
  }
  WeightedData d = weighted_stats(std::move(centers), std::move(weights));
  return fit_weighted(d, data.size(), k, opts,
                      "binned(" + std::to_string(bins) + ")");
}

FitReport fit_volume_marginal(const Volume& v, std::size_t k,
                              const FitOptions& opts) {
  require_consistent(v, "fit_volume_marginal");
  std::vector<double> data(v.data.begin(), v.data.end());
  if (data.size() > kBinnedFitThreshold)
    return fit_gmm_em_binned(data, k, opts);
  return fit_gmm_em(data, k, opts);
}

std::size_t free_parameter_count(std::size_t k) { return 3 * k - 1; }

double bic(double loglik, std::size_t k_params, std::size_t n) {
  if (k_params < 1)
    throw ValidationError("bic requires at least one free parameter");
  if (n < 1) throw ValidationError("bic requires n >= 1");
  return -loglik +
         0.5 * static_cast<double>(k_params) * std::log(static_cast<double>(n));
}

double log_likelihood(const MixtureModel& model,
                      const std::vector<double>& data) {
  require_1d(model, "log_likelihood");
  const std::size_t k = model.k();
  std::vector<double> lw(k), lnorm(k), inv2v(k);
  for (std::size_t j = 0; j < k; ++j) {
    const GaussianComponent& c = model.components[j];
    lw[j] = std::log(c.weight);
    lnorm[j] = -std::log(c.sigma) - 0.5 * kLog2Pi;
    inv2v[j] = 0.5 / (c.sigma * c.sigma);
  }
  double ll = 0.0;
  std::vector<double> ts(k);
  for (double x : data) {
    double tmax = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      const double dev = x - model.components[j].mean[0];
      ts[j] = lw[j] + lnorm[j] - dev * dev * inv2v[j];
      if (ts[j] > tmax) tmax = ts[j];
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += std::exp(ts[j] - tmax);
    ll += tmax + std::log(sum);
  }
  return ll;
}

std::vector<double> posterior_responsibilities(const MixtureModel& model,
                                               double x) {
  require_1d(model, "posterior_responsibilities");
  const std::size_t k = model.k();
  std::vector<double> t(k);
  double tmax = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k; ++j) {
    const GaussianComponent& c = model.components[j];
    const double dev = x - c.mean[0];
    t[j] = std::log(c.weight) - std::log(c.sigma) - 0.5 * kLog2Pi -
           dev * dev / (2.0 * c.sigma * c.sigma);
    if (t[j] > tmax) tmax = t[j];
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    t[j] = std::exp(t[j] - tmax);
    sum += t[j];
  }
  for (double& r : t) r /= sum;
  return t;
}

BicScan bic_scan(const std::vector<double>& data, std::size_t k_lo,
                 std::size_t k_hi, const FitOptions& opts, bool binned) {
  if (k_lo < 1 || k_lo > k_hi)
    throw ValidationError("bic_scan needs a nonempty range with k_lo >= 1, "
                          "got " + std::to_string(k_lo) + ".." +
                          std::to_string(k_hi));
  BicScan scan;
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    try {
      FitReport r = binned ? fit_gmm_em_binned(data, k, opts)
                           : fit_gmm_em(data, k, opts);
      scan.entries.push_back(BicScanEntry{k, std::move(r)});
    } catch (const Error& e) {
      throw ValidationError("bic_scan at k=" + std::to_string(k) + ": " +
                            e.what());
    }
  }
  scan.selected_k = scan.entries.front().k;
  double best = scan.entries.front().report.bic;
  for (const BicScanEntry& e : scan.entries) {
    if (e.report.bic < best) {
      best = e.report.bic;
      scan.selected_k = e.k;
    }
  }
  return scan;
}

std::string bic_scan_csv(const BicScan& scan) {
  std::string out = "k,loglik,bic,converged\n";
  char buf[160];
  for (const BicScanEntry& e : scan.entries) {
    std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%s\n", e.k,
                  e.report.model.loglik, e.report.bic,
                  e.report.converged ? "true" : "false");
    out += buf;
  }
  return out;
}

LabelVolume label_by_posterior(const Volume& v, const MixtureModel& model) {
  require_consistent(v, "label_by_posterior");
  require_1d(model, "label_by_posterior");

  // Components ordered by ascending mean define the label ids; ties in the
  // weighted density resolve to the lower-mean component.
  std::vector<std::size_t> order(model.k());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ma = model.components[a].mean[0];
    const double mb = model.components[b].mean[0];
    if (ma != mb) return ma < mb;
    return a < b;
  });

  const std::size_t k = model.k();
  std::vector<double> lw(k), lnorm(k), inv2v(k), mu(k);
  for (std::size_t j = 0; j < k; ++j) {
    const GaussianComponent& c = model.components[order[j]];
    lw[j] = std::log(c.weight);
    lnorm[j] = -std::log(c.sigma) - 0.5 * kLog2Pi;
    inv2v[j] = 0.5 / (c.sigma * c.sigma);
    mu[j] = c.mean[0];
  }

  LabelVolume lv;
  lv.dims = v.dims;
  lv.k = k;
  lv.labels.resize(v.data.size());
  std::vector<double> sum(k, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < v.data.size(); ++i) {
    const double x = v.data[i];
    std::size_t best = 0;
    double tbest = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      const double dev = x - mu[j];
      const double t = lw[j] + lnorm[j] - dev * dev * inv2v[j];
      if (t > tbest) {
        tbest = t;
        best = j;
      }
    }
    lv.labels[i] = static_cast<std::int32_t>(best);
    sum[best] += x;
    ++count[best];
  }
  lv.summary.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    lv.summary[j].count = count[j];
    const double mean =
        count[j] > 0 ? sum[j] / static_cast<double>(count[j]) : mu[j];
    lv.summary[j].mean = {mean};
  }
  return lv;
}

} // namespace voxcover
