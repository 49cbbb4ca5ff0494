#include "voxcover/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "voxcover/rng.hpp"

namespace voxcover {

FeatureField build_features(const WaveletDecomposition& d,
                            bool include_continuum, bool standardize) {
  if (d.scales.empty())
    throw ValidationError("build_features needs at least one wavelet scale");
  require_consistent(d.continuum, "build_features");
  for (std::size_t s = 0; s < d.scales.size(); ++s) {
    require_consistent(d.scales[s], "build_features");
    if (d.scales[s].dims != d.continuum.dims)
      throw DimensionError("scale " + std::to_string(s + 1) +
                           " dims differ from continuum dims");
  }

  FeatureField f;
  f.dims = d.continuum.dims;
  const std::size_t S = d.scales.size();
  f.m = S + (include_continuum ? 1 : 0);
  const std::size_t n = f.dims.count();
  f.values.resize(n * f.m);
  for (std::size_t s = 0; s < S; ++s) {
    f.feature_names.push_back("scale" + std::to_string(s + 1));
    const std::vector<float>& src = d.scales[s].data;
    for (std::size_t i = 0; i < n; ++i) f.values[i * f.m + s] = src[i];
  }
  if (include_continuum) {
    f.feature_names.push_back("continuum");
    const std::vector<float>& src = d.continuum.data;
    for (std::size_t i = 0; i < n; ++i) f.values[i * f.m + S] = src[i];
  }

  f.standardization.assign(f.m, FeatureStandardization{});
  f.standardized = standardize;
  if (standardize) {
    for (std::size_t j = 0; j < f.m; ++j) {
      double s1 = 0.0;
      for (std::size_t i = 0; i < n; ++i) s1 += f.values[i * f.m + j];
      const double mean = s1 / static_cast<double>(n);
      double s2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double dev = f.values[i * f.m + j] - mean;
        s2 += dev * dev;
      }
      const double var = s2 / static_cast<double>(n);
      double scale = var > 0.0 ? std::sqrt(var) : 1.0;
      if (var <= 0.0)
        f.warnings.push_back("feature '" + f.feature_names[j] +
                             "' has zero variance; left unscaled");
      f.standardization[j] = FeatureStandardization{mean, scale};
      for (std::size_t i = 0; i < n; ++i)
        f.values[i * f.m + j] = (f.values[i * f.m + j] - mean) / scale;
    }
  }
  return f;
}

namespace {

inline double dist2(const double* a, const double* b, std::size_t m) {
  double s = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

struct LloydRun {
  std::vector<std::vector<double>> centroids;
  std::vector<std::int32_t> labels;
  std::vector<std::size_t> counts;
  double inertia = std::numeric_limits<double>::infinity();
  std::vector<double> trace;
  std::vector<std::string> events;
};

std::vector<std::vector<double>> seed_centroids(const FeatureField& f,
                                                std::size_t k, Rng& rng) {
  const std::size_t n = f.n(), m = f.m;
  std::vector<std::vector<double>> centers;
  centers.reserve(k);
  const std::size_t first = rng.index(n);
  centers.emplace_back(f.values.begin() + first * m,
                       f.values.begin() + (first + 1) * m);

  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    const std::vector<double>& latest = centers.back();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = dist2(f.values.data() + i * m, latest.data(), m);
      if (d < best[i]) best[i] = d;
      sum += best[i];
    }
    std::size_t pick;
    if (sum > 0.0) {
      double r = rng.uniform() * sum;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        r -= best[i];
        if (r < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.index(n);
    }
    centers.emplace_back(f.values.begin() + pick * m,
                         f.values.begin() + (pick + 1) * m);
  }
  return centers;
}

LloydRun run_lloyd(const FeatureField& f, std::size_t k,
                   const KMeansOptions& opts, std::uint64_t stream_seed) {
  const std::size_t n = f.n(), m = f.m;
  Rng rng(stream_seed);
  LloydRun run;
  run.centroids = seed_centroids(f, k, rng);
  run.labels.assign(n, -1);
  run.counts.assign(k, 0);
  std::vector<double> assigned_d2(n, 0.0);

  for (std::size_t iter = 1; iter <= opts.max_iter; ++iter) {
    // Assignment. A point whose current centroid ties the minimum keeps its
    // cluster, so reseeded points are not immediately reclaimed.
    bool changed = false;
    std::fill(run.counts.begin(), run.counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* x = f.values.data() + i * m;
      std::size_t bestj = 0;
      double bestd = dist2(x, run.centroids[0].data(), m);
      for (std::size_t j = 1; j < k; ++j) {
        const double d = dist2(x, run.centroids[j].data(), m);
        if (d < bestd) {
          bestd = d;
          bestj = j;
        }
      }
      const std::int32_t prev = run.labels[i];
      if (prev >= 0 && static_cast<std::size_t>(prev) != bestj &&
          dist2(x, run.centroids[static_cast<std::size_t>(prev)].data(), m) ==
              bestd)
        bestj = static_cast<std::size_t>(prev);
      if (static_cast<std::int32_t>(bestj) != prev) changed = true;
      run.labels[i] = static_cast<std::int32_t>(bestj);
      assigned_d2[i] = bestd;
      ++run.counts[bestj];
    }

    // Empty clusters are reseeded from the worst-fit point.
    bool reseeded = false;
    for (std::size_t j = 0; j < k; ++j) {
      if (run.counts[j] > 0) continue;
      std::size_t farthest = n;
      double worst = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t owner = static_cast<std::size_t>(run.labels[i]);
        if (run.counts[owner] <= 1) continue;
        if (assigned_d2[i] > worst) {
          worst = assigned_d2[i];
          farthest = i;
        }
      }
      if (farthest == n)
        throw ValidationError("cannot reseed empty cluster: no donor point");
      const std::size_t owner = static_cast<std::size_t>(run.labels[farthest]);
      --run.counts[owner];
      run.labels[farthest] = static_cast<std::int32_t>(j);
      run.counts[j] = 1;
      assigned_d2[farthest] = 0.0;
      reseeded = true;
      run.events.push_back("iter " + std::to_string(iter) + ": cluster " +
                           std::to_string(j) + " reseeded from point " +
                           std::to_string(farthest));
      changed = true;
    }

    // Update.
    for (std::size_t j = 0; j < k; ++j)
      std::fill(run.centroids[j].begin(), run.centroids[j].end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = static_cast<std::size_t>(run.labels[i]);
      const double* x = f.values.data() + i * m;
      for (std::size_t q = 0; q < m; ++q) run.centroids[j][q] += x[q];
    }
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t q = 0; q < m; ++q)
        run.centroids[j][q] /= static_cast<double>(run.counts[j]);

    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      inertia += dist2(f.values.data() + i * m,
                       run.centroids[static_cast<std::size_t>(run.labels[i])]
                           .data(),
                       m);
    run.trace.push_back(inertia);
    run.inertia = inertia;

    if (!changed && !reseeded) break;
  }
  return run;
}

} // namespace

KMeansFit kmeans_fit(const FeatureField& f, std::size_t k,
                     const KMeansOptions& opts) {
  const std::size_t n = f.n(), m = f.m;
  if (m < 1 || f.values.size() != n * m)
    throw ValidationError("feature field is inconsistent");
  if (k < 1) throw ValidationError("cluster count k must be >= 1");
  if (n < k)
    throw ValidationError("need at least k points: n=" + std::to_string(n) +
                          ", k=" + std::to_string(k));

  const std::size_t restarts = std::max<std::size_t>(1, opts.restarts);
  LloydRun best;
  bool first = true;
  for (std::size_t r = 0; r < restarts; ++r) {
    LloydRun run = run_lloyd(f, k, opts, derive_seed(opts.seed, r));
    if (first || run.inertia < best.inertia) {
      best = std::move(run);
      first = false;
    }
  }

  // Relabel by descending cluster count (ties keep the original order).
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (best.counts[a] != best.counts[b]) return best.counts[a] > best.counts[b];
    return a < b;
  });
  std::vector<std::int32_t> remap(k);
  for (std::size_t newid = 0; newid < k; ++newid)
    remap[order[newid]] = static_cast<std::int32_t>(newid);

  KMeansFit fit;
  fit.model.k = k;
  fit.model.m = m;
  fit.model.inertia = best.inertia;
  fit.model.inertia_trace = std::move(best.trace);
  fit.model.events = std::move(best.events);
  fit.model.centroids.resize(k);
  fit.model.counts.resize(k);
  for (std::size_t newid = 0; newid < k; ++newid) {
    fit.model.centroids[newid] = best.centroids[order[newid]];
    fit.model.counts[newid] = best.counts[order[newid]];
  }

  fit.labels.dims = f.dims;
  fit.labels.k = k;
  fit.labels.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    fit.labels.labels[i] = remap[static_cast<std::size_t>(best.labels[i])];
  fit.labels.summary.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    fit.labels.summary[j].count = fit.model.counts[j];
    fit.labels.summary[j].mean = fit.model.centroids[j];
  }
  return fit;
}

std::string kmeans_summary_csv(const KMeansModel& model,
                               const std::vector<std::string>& feature_names) {
  if (feature_names.size() != model.m)
    throw ValidationError("feature name count does not match model dimension");
  std::string out = "cluster,count";
  for (const std::string& name : feature_names) out += "," + name;
  out += "\n";
  char buf[64];
  for (std::size_t j = 0; j < model.k; ++j) {
    out += std::to_string(j) + "," + std::to_string(model.counts[j]);
    for (std::size_t q = 0; q < model.m; ++q) {
      std::snprintf(buf, sizeof(buf), ",%.12g", model.centroids[j][q]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

} // namespace voxcover
