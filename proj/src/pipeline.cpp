#include "voxcover/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "voxcover/fits.hpp"

namespace voxcover {

namespace {

std::string fmt_g(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

std::string fmt_vector(const std::vector<double>& v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += fmt_g(v[i]);
  }
  out += ")";
  return out;
}

} // namespace

std::string level_path(const std::string& prefix, std::size_t level) {
  return prefix + "_" + std::to_string(level) + ".fits";
}
std::string marginal_label_path(const std::string& prefix, std::size_t k) {
  return prefix + "_segm_marg" + std::to_string(k) + ".fits";
}
std::string marginal_summary_path(const std::string& prefix, std::size_t k) {
  return prefix + "_segm_marg" + std::to_string(k) + "_summary.csv";
}
std::string kmeans_label_path(const std::string& prefix, std::size_t k) {
  return prefix + "_segm_kmean" + std::to_string(k) + ".fits";
}
std::string kmeans_summary_path(const std::string& prefix, std::size_t k) {
  return prefix + "_segm_kmean" + std::to_string(k) + "_summary.csv";
}
std::string bic_scan_path(const std::string& prefix) {
  return prefix + "_bic_scan.csv";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("failed to write '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> save_decomposition(const WaveletDecomposition& d,
                                            const std::string& prefix) {
  std::vector<std::string> written;
  for (std::size_t s = 0; s < d.scales.size(); ++s) {
    const std::string path = level_path(prefix, s + 1);
    save_fits(d.scales[s], path);
    written.push_back(path);
  }
  const std::string path = level_path(prefix, d.scales.size() + 1);
  save_fits(d.continuum, path);
  written.push_back(path);
  return written;
}

MarginalResult run_marginal_family(const Volume& v, const MarginalOptions& opts,
                                   const std::string& out_prefix) {
  require_consistent(v, "run_marginal_family");
  std::vector<double> data(v.data.begin(), v.data.end());
  const bool binned = data.size() > kBinnedFitThreshold;

  MarginalResult result;
  result.scan = bic_scan(data, opts.k_lo, opts.k_hi, opts.fit, binned);
  result.selected_k = result.scan.selected_k;
  for (const BicScanEntry& e : result.scan.entries)
    if (e.k == result.selected_k) result.fit = e.report;
  result.labels = label_by_posterior(v, result.fit.model);

  if (!out_prefix.empty()) {
    const std::size_t k = result.selected_k;
    const std::string label_file = marginal_label_path(out_prefix, k);
    save_fits(result.labels, label_file);
    result.written.push_back(label_file);

    std::string csv = "cluster,count,mean\n";
    for (std::size_t j = 0; j < result.labels.summary.size(); ++j) {
      const ClusterSummary& s = result.labels.summary[j];
      csv += std::to_string(j) + "," + std::to_string(s.count) + "," +
             fmt_g(s.mean.empty() ? 0.0 : s.mean[0]) + "\n";
    }
    const std::string summary_file = marginal_summary_path(out_prefix, k);
    write_text_file(summary_file, csv);
    result.written.push_back(summary_file);

    if (result.scan.entries.size() > 1) {
      const std::string scan_file = bic_scan_path(out_prefix);
      write_text_file(scan_file, bic_scan_csv(result.scan));
      result.written.push_back(scan_file);
    }
  }
  return result;
}

WaveletFamilyResult run_wavelet_family(const Volume& v,
                                       const WaveletFamilyOptions& opts,
                                       const std::string& out_prefix) {
  require_consistent(v, "run_wavelet_family");
  const WaveletDecomposition d = starlet_forward(v, opts.scales);
  WaveletFamilyResult result;
  result.features = build_features(d, opts.include_continuum, opts.standardize);
  KMeansFit fit = kmeans_fit(result.features, opts.k, opts.kmeans);
  result.model = std::move(fit.model);
  result.labels = std::move(fit.labels);

  if (!out_prefix.empty()) {
    const std::string label_file = kmeans_label_path(out_prefix, opts.k);
    save_fits(result.labels, label_file);
    result.written.push_back(label_file);
    const std::string summary_file = kmeans_summary_path(out_prefix, opts.k);
    write_text_file(summary_file, kmeans_summary_csv(
                                      result.model, result.features.feature_names));
    result.written.push_back(summary_file);
  }
  return result;
}

std::string verdict_for(double marginal_entropy, double kmeans_entropy) {
  if (marginal_entropy < kmeans_entropy) return "marginal";
  if (kmeans_entropy < marginal_entropy) return "kmeans";
  return "tie";
}

GaussianCovering marginal_covering(const MixtureModel& model,
                                   const VolumeStats& stats) {
  if (model.m != 1)
    throw ValidationError("marginal covering needs a 1D model");
  if (!(stats.stddev > 0.0))
    throw ValidationError("volume intensity distribution has zero variance; "
                          "cannot z-score the covering");
  std::vector<double> means;
  for (const GaussianComponent& c : model.components) means.push_back(c.mean[0]);
  std::sort(means.begin(), means.end());
  GaussianCovering cov;
  cov.m = 1;
  for (double mu : means)
    cov.points.push_back({(mu - stats.mean) / stats.stddev});
  return cov;
}

GaussianCovering marginal_covering_from_labels(const LabelVolume& labels,
                                               const Volume& v,
                                               const VolumeStats& stats) {
  require_consistent(labels, "marginal_covering_from_labels");
  require_consistent(v, "marginal_covering_from_labels");
  if (labels.dims != v.dims)
    throw DimensionError("label volume dims " + labels.dims.str() +
                         " do not match volume dims " + v.dims.str());
  if (!(stats.stddev > 0.0))
    throw ValidationError("volume intensity distribution has zero variance; "
                          "cannot z-score the covering");
  std::vector<double> sum(labels.k, 0.0);
  std::vector<std::size_t> count(labels.k, 0);
  for (std::size_t i = 0; i < v.data.size(); ++i) {
    const std::size_t j = static_cast<std::size_t>(labels.labels[i]);
    sum[j] += v.data[i];
    ++count[j];
  }
  GaussianCovering cov;
  cov.m = 1;
  for (std::size_t j = 0; j < labels.k; ++j) {
    if (count[j] == 0) continue;
    const double mean = sum[j] / static_cast<double>(count[j]);
    cov.points.push_back({(mean - stats.mean) / stats.stddev});
  }
  return cov;
}

namespace {

std::vector<FeatureStandardization> field_standardizer(const FeatureField& f) {
  std::vector<FeatureStandardization> out(f.m);
  if (f.standardized) return out; // identity: values are already z-scored
  const std::size_t n = f.n();
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
    out[j] = FeatureStandardization{mean, var > 0.0 ? std::sqrt(var) : 1.0};
  }
  return out;
}

} // namespace

GaussianCovering kmeans_covering(const KMeansModel& model,
                                 const FeatureField& f) {
  if (model.m != f.m)
    throw DimensionError("model dimension " + std::to_string(model.m) +
                         " does not match feature dimension " +
                         std::to_string(f.m));
  const std::vector<FeatureStandardization> z = field_standardizer(f);
  GaussianCovering cov;
  cov.m = model.m;
  for (const std::vector<double>& c : model.centroids) {
    std::vector<double> p(model.m);
    for (std::size_t q = 0; q < model.m; ++q)
      p[q] = (c[q] - z[q].offset) / z[q].scale;
    cov.points.push_back(std::move(p));
  }
  return cov;
}

GaussianCovering kmeans_covering_from_labels(const LabelVolume& labels,
                                             const FeatureField& f) {
  require_consistent(labels, "kmeans_covering_from_labels");
  if (labels.dims != f.dims)
    throw DimensionError("label volume dims " + labels.dims.str() +
                         " do not match feature field dims " + f.dims.str());
  const std::size_t n = f.n();
  std::vector<std::vector<double>> sum(labels.k, std::vector<double>(f.m, 0.0));
  std::vector<std::size_t> count(labels.k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = static_cast<std::size_t>(labels.labels[i]);
    for (std::size_t q = 0; q < f.m; ++q) sum[j][q] += f.values[i * f.m + q];
    ++count[j];
  }
  const std::vector<FeatureStandardization> z = field_standardizer(f);
  GaussianCovering cov;
  cov.m = f.m;
  for (std::size_t j = 0; j < labels.k; ++j) {
    if (count[j] == 0) continue;
    std::vector<double> p(f.m);
    for (std::size_t q = 0; q < f.m; ++q)
      p[q] = (sum[j][q] / static_cast<double>(count[j]) - z[q].offset) /
             z[q].scale;
    cov.points.push_back(std::move(p));
  }
  return cov;
}

std::size_t wavelet_dims(const FeatureField& f) {
  std::size_t count = 0;
  for (const std::string& name : f.feature_names)
    if (name.rfind("scale", 0) == 0) ++count;
  return count;
}

void attach_intensity_means(LabelVolume& labels, const Volume& v) {
  require_consistent(labels, "attach_intensity_means");
  require_consistent(v, "attach_intensity_means");
  if (labels.dims != v.dims)
    throw DimensionError("label volume dims " + labels.dims.str() +
                         " do not match volume dims " + v.dims.str());
  std::vector<double> sum(labels.k, 0.0);
  std::vector<std::size_t> count(labels.k, 0);
  for (std::size_t i = 0; i < v.data.size(); ++i) {
    const std::size_t j = static_cast<std::size_t>(labels.labels[i]);
    sum[j] += v.data[i];
    ++count[j];
  }
  for (std::size_t j = 0; j < labels.k; ++j) {
    labels.summary[j].count = count[j];
    labels.summary[j].mean.clear();
    if (count[j] > 0)
      labels.summary[j].mean = {sum[j] / static_cast<double>(count[j])};
  }
}

void attach_feature_means(LabelVolume& labels, const FeatureField& f) {
  require_consistent(labels, "attach_feature_means");
  if (labels.dims != f.dims)
    throw DimensionError("label volume dims " + labels.dims.str() +
                         " do not match feature field dims " + f.dims.str());
  std::vector<std::vector<double>> sum(labels.k,
                                       std::vector<double>(f.m, 0.0));
  std::vector<std::size_t> count(labels.k, 0);
  for (std::size_t i = 0; i < f.n(); ++i) {
    const std::size_t j = static_cast<std::size_t>(labels.labels[i]);
    for (std::size_t q = 0; q < f.m; ++q) sum[j][q] += f.values[i * f.m + q];
    ++count[j];
  }
  for (std::size_t j = 0; j < labels.k; ++j) {
    labels.summary[j].count = count[j];
    labels.summary[j].mean.clear();
    if (count[j] > 0) {
      labels.summary[j].mean.resize(f.m);
      for (std::size_t q = 0; q < f.m; ++q)
        labels.summary[j].mean[q] = sum[j][q] / static_cast<double>(count[j]);
    }
  }
}

namespace {

double family_entropy_at(const FamilyInput& fam, double sigma,
                         bool multiscale) {
  GaussianCovering c = fam.covering;
  c.sigma = sigma;
  if (multiscale && fam.multiscale_dims > 0) {
    std::vector<GaussianCovering> per;
    per.reserve(fam.multiscale_dims);
    for (std::size_t q = 0; q < fam.multiscale_dims; ++q) {
      GaussianCovering one;
      one.m = 1;
      one.sigma = sigma;
      one.weights = fam.covering.weights;
      for (const std::vector<double>& p : fam.covering.points)
        one.points.push_back({p[q]});
      per.push_back(std::move(one));
    }
    return renyi_quadratic_multiscale(per);
  }
  return renyi_quadratic_covering(c);
}

FamilyBlock make_block(const FamilyInput& fam, double sigma, bool multiscale) {
  FamilyBlock block;
  block.family = fam.family;
  block.k = fam.k;
  block.has_bic = fam.has_bic;
  block.bic = fam.bic;
  block.summary = fam.summary;
  block.renyi_quadratic = family_entropy_at(fam, sigma, multiscale);
  block.entropy.set("renyi_quadratic", block.renyi_quadratic);
  block.entropy.params.emplace_back("sigma", fmt_g(sigma));
  block.entropy.params.emplace_back("space", fam.space);
  block.entropy.params.emplace_back("standardization", fam.standardization);
  block.entropy.params.emplace_back(
      "multiscale",
      (multiscale && fam.multiscale_dims > 0) ? "true" : "false");
  block.entropy.params.emplace_back("source", fam.source);
  return block;
}

} // namespace

ComparisonReport compare_family_inputs(const FamilyInput& marginal,
                                       const FamilyInput& kmeans,
                                       const CompareOptions& opts) {
  if (!(opts.sigma > 0.0))
    throw ValidationError("comparison sigma must be positive");
  if (opts.sigma_grid.empty())
    throw ValidationError("sigma grid must be nonempty");
  for (double s : opts.sigma_grid)
    if (!(s > 0.0))
      throw ValidationError("sigma grid entries must be positive");

  ComparisonReport report;
  report.sigma = opts.sigma;
  report.marginal = make_block(marginal, opts.sigma, false);
  report.kmeans = make_block(kmeans, opts.sigma, opts.multiscale);
  report.verdict =
      verdict_for(report.marginal.renyi_quadratic, report.kmeans.renyi_quadratic);
  for (double s : opts.sigma_grid) {
    SensitivityRow row;
    row.sigma = s;
    row.marginal = family_entropy_at(marginal, s, false);
    row.kmeans = family_entropy_at(kmeans, s, opts.multiscale);
    row.verdict = verdict_for(row.marginal, row.kmeans);
    report.sensitivity.push_back(std::move(row));
  }
  return report;
}

ComparisonReport compare_families(const MixtureModel& marginal_model,
                                  const FitReport* marginal_fit,
                                  const LabelVolume& marginal_labels,
                                  const KMeansModel& kmeans_model,
                                  const FeatureField& features,
                                  const LabelVolume& kmeans_labels,
                                  const VolumeStats& stats,
                                  const CompareOptions& opts) {
  require_consistent(marginal_labels, "compare_families");
  require_consistent(kmeans_labels, "compare_families");
  if (marginal_labels.dims != kmeans_labels.dims)
    throw DimensionError(
        "the two segmentations cover different volumes: " +
        marginal_labels.dims.str() + " vs " + kmeans_labels.dims.str());

  FamilyInput marg;
  marg.family = "marginal";
  marg.k = marginal_model.k();
  marg.covering = marginal_covering(marginal_model, stats);
  marg.has_bic = marginal_fit != nullptr;
  marg.bic = marginal_fit ? marginal_fit->bic : 0.0;
  marg.summary = marginal_labels.summary;
  marg.space = "intensity-z";
  marg.standardization = "volume-zscore";

  FamilyInput km;
  km.family = "kmeans";
  km.k = kmeans_model.k;
  km.covering = kmeans_covering(kmeans_model, features);
  km.multiscale_dims = wavelet_dims(features);
  km.summary = kmeans_labels.summary;
  km.space = "feature-z";
  km.standardization =
      features.standardized ? "per-dimension-zscore" : "centroid-zscore";

  return compare_family_inputs(marg, km, opts);
}

namespace {

void render_block(std::string& out, const FamilyBlock& b) {
  out += "family " + b.family + ": k=" + std::to_string(b.k);
  if (b.has_bic) out += " bic=" + fmt_g(b.bic);
  out += " renyi_quadratic=" + fmt_g(b.renyi_quadratic) + "\n";
  out += "  params:";
  for (const auto& kv : b.entropy.params) out += " " + kv.first + "=" + kv.second;
  out += "\n";
  for (std::size_t j = 0; j < b.summary.size(); ++j) {
    out += "  cluster " + std::to_string(j) +
           ": count=" + std::to_string(b.summary[j].count) +
           " mean=" + fmt_vector(b.summary[j].mean) + "\n";
  }
}

} // namespace

std::string ComparisonReport::to_text() const {
  std::string out = "comparison report\n";
  if (!config.empty()) {
    out += "config:\n";
    for (const auto& kv : config) out += "  " + kv.first + "=" + kv.second + "\n";
  }
  render_block(out, marginal);
  render_block(out, kmeans);
  out += "verdict: " + verdict + " (sigma=" + fmt_g(sigma) + ")\n";
  out += "sensitivity:\n";
  out += sensitivity_csv();
  return out;
}

std::string ComparisonReport::sensitivity_csv() const {
  std::string out = "sigma,renyi_marginal,renyi_kmeans,verdict\n";
  for (const SensitivityRow& row : sensitivity)
    out += fmt_g(row.sigma) + "," + fmt_g(row.marginal) + "," +
           fmt_g(row.kmeans) + "," + row.verdict + "\n";
  return out;
}

std::string ComparisonReport::to_json_lines() const {
  using nlohmann::json;
  std::string out;

  json cfg;
  cfg["record"] = "config";
  json obj = json::object();
  for (const auto& kv : config) obj[kv.first] = kv.second;
  cfg["config"] = obj;
  out += cfg.dump() + "\n";

  for (const FamilyBlock* b : {&marginal, &kmeans}) {
    json fam;
    fam["record"] = "family";
    fam["family"] = b->family;
    fam["k"] = b->k;
    if (b->has_bic) fam["bic"] = b->bic;
    fam["renyi_quadratic"] = b->renyi_quadratic;
    json params = json::object();
    for (const auto& kv : b->entropy.params) params[kv.first] = kv.second;
    fam["params"] = params;
    json clusters = json::array();
    for (std::size_t j = 0; j < b->summary.size(); ++j) {
      json c;
      c["id"] = j;
      c["count"] = b->summary[j].count;
      c["mean"] = b->summary[j].mean;
      clusters.push_back(c);
    }
    fam["clusters"] = clusters;
    out += fam.dump() + "\n";
  }

  for (const SensitivityRow& row : sensitivity) {
    json r;
    r["record"] = "sensitivity";
    r["sigma"] = row.sigma;
    r["renyi_marginal"] = row.marginal;
    r["renyi_kmeans"] = row.kmeans;
    r["verdict"] = row.verdict;
    out += r.dump() + "\n";
  }

  json v;
  v["record"] = "verdict";
  v["verdict"] = verdict;
  v["sigma"] = sigma;
  out += v.dump() + "\n";
  return out;
}

} // namespace voxcover
