// voxcover: Gaussian-covering segmentation of 3D volumes and cross-family
// comparison by Renyi quadratic entropy.

#include <cstdint>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "voxcover/fits.hpp"
#include "voxcover/pipeline.hpp"

namespace {

namespace vc = voxcover;

std::string default_prefix(const std::string& in) {
  const std::string ext = ".fits";
  if (in.size() > ext.size() &&
      in.compare(in.size() - ext.size(), ext.size(), ext) == 0)
    return in.substr(0, in.size() - ext.size());
  return in;
}

std::pair<std::size_t, std::size_t> parse_k_range(const std::string& s) {
  const std::size_t sep = s.find("..");
  std::size_t lo = 0, hi = 0;
  bool ok = sep != std::string::npos && sep > 0 && sep + 2 < s.size();
  if (ok) {
    try {
      std::size_t pos = 0;
      lo = std::stoul(s.substr(0, sep), &pos);
      ok = pos == sep;
      const std::string rest = s.substr(sep + 2);
      hi = std::stoul(rest, &pos);
      ok = ok && pos == rest.size();
    } catch (const std::exception&) {
      ok = false;
    }
  }
  if (!ok || lo < 1 || lo > hi)
    throw CLI::ValidationError("--k-range",
                               "expected A..B with 1 <= A <= B, got '" + s +
                                   "'");
  return {lo, hi};
}

std::vector<double> parse_sigma_grid(const std::string& s) {
  std::vector<double> grid;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string tok =
        s.substr(start, comma == std::string::npos ? comma : comma - start);
    std::size_t pos = 0;
    double value = 0.0;
    bool ok = !tok.empty();
    if (ok) {
      try {
        value = std::stod(tok, &pos);
        ok = pos == tok.size();
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok || !(value > 0.0))
      throw CLI::ValidationError("--sigma-grid",
                                 "expected comma-separated positive reals, "
                                 "got '" + s + "'");
    grid.push_back(value);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return grid;
}

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

void echo_config(const ConfigEcho& config) {
  std::string line = "config:";
  for (const auto& kv : config) line += " " + kv.first + "=" + kv.second;
  std::cout << line << "\n";
}

void report_written(const std::vector<std::string>& paths) {
  for (const std::string& p : paths) std::cout << "wrote " << p << "\n";
}

struct WaveletArgs {
  std::string in, prefix;
  std::size_t scales = 3;
};

int cmd_wavelet(const WaveletArgs& a) {
  const std::string prefix = a.prefix.empty() ? default_prefix(a.in) : a.prefix;
  echo_config({{"command", "wavelet"},
               {"in", a.in},
               {"out_prefix", prefix},
               {"scales", std::to_string(a.scales)}});
  const vc::Volume v = vc::load_fits(a.in);
  const vc::WaveletDecomposition d = vc::starlet_forward(v, a.scales);
  report_written(vc::save_decomposition(d, prefix));
  return 0;
}

struct BicScanArgs {
  std::string in, prefix, k_range = "1..8";
  std::uint64_t seed = 1729;
  std::size_t restarts = 5;
};

int cmd_bic_scan(const BicScanArgs& a) {
  const auto [k_lo, k_hi] = parse_k_range(a.k_range);
  const std::string prefix = a.prefix.empty() ? default_prefix(a.in) : a.prefix;
  echo_config({{"command", "bic-scan"},
               {"in", a.in},
               {"out_prefix", prefix},
               {"k_range", a.k_range},
               {"seed", std::to_string(a.seed)},
               {"restarts", std::to_string(a.restarts)}});
  const vc::Volume v = vc::load_fits(a.in);
  std::vector<double> data(v.data.begin(), v.data.end());
  vc::FitOptions fit;
  fit.seed = a.seed;
  fit.restarts = a.restarts;
  const vc::BicScan scan = vc::bic_scan(data, k_lo, k_hi, fit,
                                        data.size() > vc::kBinnedFitThreshold);
  const std::string path = vc::bic_scan_path(prefix);
  vc::write_text_file(path, vc::bic_scan_csv(scan));
  std::cout << "selected k=" << scan.selected_k << "\n";
  report_written({path});
  return 0;
}

struct SegmentMarginalArgs {
  std::string in, prefix, k_range;
  std::size_t k = 0;
  std::uint64_t seed = 1729;
  std::size_t restarts = 5;
};

int cmd_segment_marginal(const SegmentMarginalArgs& a) {
  vc::MarginalOptions opts;
  if (!a.k_range.empty()) {
    std::tie(opts.k_lo, opts.k_hi) = parse_k_range(a.k_range);
  } else {
    opts.k_lo = opts.k_hi = a.k;
  }
  opts.fit.seed = a.seed;
  opts.fit.restarts = a.restarts;
  const std::string prefix = a.prefix.empty() ? default_prefix(a.in) : a.prefix;
  echo_config({{"command", "segment marginal"},
               {"in", a.in},
               {"out_prefix", prefix},
               {"k", a.k_range.empty() ? std::to_string(a.k) : a.k_range},
               {"seed", std::to_string(a.seed)},
               {"restarts", std::to_string(a.restarts)}});
  const vc::Volume v = vc::load_fits(a.in);
  const vc::MarginalResult res = vc::run_marginal_family(v, opts, prefix);
  std::cout << "selected k=" << res.selected_k << "\n";
  report_written(res.written);
  return 0;
}

struct SegmentKmeansArgs {
  std::string in, prefix;
  std::size_t k = 0;
  std::size_t scales = 3;
  std::uint64_t seed = 1729;
  std::size_t restarts = 5;
  bool no_standardize = false;
  bool no_continuum = false;
};

int cmd_segment_kmeans(const SegmentKmeansArgs& a) {
  vc::WaveletFamilyOptions opts;
  opts.scales = a.scales;
  opts.k = a.k;
  opts.standardize = !a.no_standardize;
  opts.include_continuum = !a.no_continuum;
  opts.kmeans.seed = a.seed;
  opts.kmeans.restarts = a.restarts;
  const std::string prefix = a.prefix.empty() ? default_prefix(a.in) : a.prefix;
  echo_config({{"command", "segment kmeans"},
               {"in", a.in},
               {"out_prefix", prefix},
               {"k", std::to_string(a.k)},
               {"scales", std::to_string(a.scales)},
               {"seed", std::to_string(a.seed)},
               {"restarts", std::to_string(a.restarts)},
               {"standardize", opts.standardize ? "true" : "false"},
               {"continuum", opts.include_continuum ? "true" : "false"}});
  const vc::Volume v = vc::load_fits(a.in);
  const vc::WaveletFamilyResult res = vc::run_wavelet_family(v, opts, prefix);
  for (const std::string& w : res.features.warnings)
    std::cout << "warning: " << w << "\n";
  report_written(res.written);
  return 0;
}

struct CompareArgs {
  std::string in, prefix, k_range, sigma_grid = "0.25,0.5,1,2,4";
  std::size_t k = 0;
  std::size_t scales = 3;
  std::uint64_t seed = 1729;
  std::size_t restarts = 5;
  bool no_standardize = false;
  bool no_continuum = false;
  bool multiscale = false;
  bool reuse = false;
};

int cmd_compare(const CompareArgs& a) {
  vc::CompareOptions copts;
  copts.sigma = 1.0;
  copts.sigma_grid = parse_sigma_grid(a.sigma_grid);
  copts.multiscale = a.multiscale;
  const bool standardize = !a.no_standardize;
  const bool continuum = !a.no_continuum;
  const std::string prefix = a.prefix.empty() ? default_prefix(a.in) : a.prefix;

  ConfigEcho config = {
      {"command", "compare"},
      {"in", a.in},
      {"out_prefix", prefix},
      {"k", std::to_string(a.k)},
      {"k_range", a.k_range.empty() ? "none" : a.k_range},
      {"scales", std::to_string(a.scales)},
      {"seed", std::to_string(a.seed)},
      {"restarts", std::to_string(a.restarts)},
      {"sigma", "1"},
      {"sigma_grid", a.sigma_grid},
      {"standardize", standardize ? "true" : "false"},
      {"continuum", continuum ? "true" : "false"},
      {"multiscale_renyi", a.multiscale ? "true" : "false"},
      {"reuse", a.reuse ? "true" : "false"},
  };
  echo_config(config);

  const vc::Volume v = vc::load_fits(a.in);
  const vc::VolumeStats stats = vc::volume_stats(v);
  std::vector<std::string> written;
  vc::ComparisonReport report;

  if (a.reuse) {
    vc::LabelVolume marg_labels =
        vc::load_label_fits(vc::marginal_label_path(prefix, a.k));
    vc::LabelVolume km_labels =
        vc::load_label_fits(vc::kmeans_label_path(prefix, a.k));
    const vc::WaveletDecomposition d = vc::starlet_forward(v, a.scales);
    const vc::FeatureField f = vc::build_features(d, continuum, standardize);
    vc::attach_intensity_means(marg_labels, v);
    vc::attach_feature_means(km_labels, f);

    vc::FamilyInput marg;
    marg.family = "marginal";
    marg.k = marg_labels.k;
    marg.covering = vc::marginal_covering_from_labels(marg_labels, v, stats);
    marg.summary = marg_labels.summary;
    marg.space = "intensity-z";
    marg.standardization = "volume-zscore";
    marg.source = "cluster-means";

    vc::FamilyInput km;
    km.family = "kmeans";
    km.k = km_labels.k;
    km.covering = vc::kmeans_covering_from_labels(km_labels, f);
    km.multiscale_dims = vc::wavelet_dims(f);
    km.summary = km_labels.summary;
    km.space = "feature-z";
    km.standardization =
        f.standardized ? "per-dimension-zscore" : "centroid-zscore";
    km.source = "cluster-means";

    report = vc::compare_family_inputs(marg, km, copts);
  } else {
    vc::MarginalOptions mopts;
    if (!a.k_range.empty()) {
      std::tie(mopts.k_lo, mopts.k_hi) = parse_k_range(a.k_range);
    } else {
      mopts.k_lo = mopts.k_hi = a.k;
    }
    mopts.fit.seed = a.seed;
    mopts.fit.restarts = a.restarts;
    const vc::MarginalResult marg = vc::run_marginal_family(v, mopts, prefix);
    written.insert(written.end(), marg.written.begin(), marg.written.end());

    vc::WaveletFamilyOptions wopts;
    wopts.scales = a.scales;
    wopts.k = a.k;
    wopts.standardize = standardize;
    wopts.include_continuum = continuum;
    wopts.kmeans.seed = a.seed;
    wopts.kmeans.restarts = a.restarts;
    const vc::WaveletFamilyResult km = vc::run_wavelet_family(v, wopts, prefix);
    written.insert(written.end(), km.written.begin(), km.written.end());
    for (const std::string& w : km.features.warnings)
      std::cout << "warning: " << w << "\n";

    report = vc::compare_families(marg.fit.model, &marg.fit, marg.labels,
                                  km.model, km.features, km.labels, stats,
                                  copts);
  }
  report.config = config;

  const std::string text_path = prefix + "_compare.txt";
  const std::string csv_path = prefix + "_compare_sensitivity.csv";
  const std::string json_path = prefix + "_compare.jsonl";
  vc::write_text_file(text_path, report.to_text());
  vc::write_text_file(csv_path, report.sensitivity_csv());
  vc::write_text_file(json_path, report.to_json_lines());
  written.push_back(text_path);
  written.push_back(csv_path);
  written.push_back(json_path);

  std::cout << "renyi_quadratic marginal=" << report.marginal.renyi_quadratic
            << " kmeans=" << report.kmeans.renyi_quadratic << "\n";
  std::cout << "verdict: " << report.verdict << "\n";
  report_written(written);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-covering segmentation of 3D FITS volumes: starlet "
               "wavelet transform, marginal GMM with BIC selection, k-means "
               "on multiscale features, and cross-family comparison by Renyi "
               "quadratic entropy."};
  app.require_subcommand(1);
  int rc = 0;

  WaveletArgs wa;
  CLI::App* wavelet = app.add_subcommand(
      "wavelet", "Starlet transform; writes <prefix>_1.fits.._<S+1>.fits "
                 "(last file is the continuum)");
  wavelet->add_option("--in", wa.in, "Input FITS volume")->required();
  wavelet->add_option("--out-prefix", wa.prefix,
                      "Output prefix (default: input path without .fits)");
  wavelet->add_option("--scales", wa.scales, "Wavelet scale count S")
      ->default_val(3)
      ->check(CLI::Range(std::size_t{1}, std::size_t{20}));
  wavelet->callback([&] { rc = cmd_wavelet(wa); });

  BicScanArgs ba;
  CLI::App* bic = app.add_subcommand(
      "bic-scan", "Model-order scan of the voxel marginal; writes "
                  "<prefix>_bic_scan.csv with columns k,loglik,bic,converged");
  bic->add_option("--in", ba.in, "Input FITS volume")->required();
  bic->add_option("--out-prefix", ba.prefix,
                  "Output prefix (default: input path without .fits)");
  bic->add_option("--k-range", ba.k_range, "Inclusive range A..B")
      ->default_val("1..8");
  bic->add_option("--seed", ba.seed, "RNG seed")->default_val(1729);
  bic->add_option("--restarts", ba.restarts, "EM restarts per k")
      ->default_val(5)
      ->check(CLI::Range(std::size_t{1}, std::size_t{1000}));
  bic->callback([&] { rc = cmd_bic_scan(ba); });

  CLI::App* segment =
      app.add_subcommand("segment", "Segment a volume with one model family");
  segment->require_subcommand(1);

  SegmentMarginalArgs ma;
  CLI::App* marginal = segment->add_subcommand(
      "marginal", "Marginal-density GMM segmentation; writes "
                  "<prefix>_segm_marg<k>.fits and a summary CSV with columns "
                  "cluster,count,mean");
  marginal->add_option("--in", ma.in, "Input FITS volume")->required();
  marginal->add_option("--out-prefix", ma.prefix,
                       "Output prefix (default: input path without .fits)");
  CLI::Option* m_k =
      marginal->add_option("--k", ma.k, "Component count")
          ->check(CLI::Range(std::size_t{1}, std::size_t{32767}));
  CLI::Option* m_range = marginal->add_option(
      "--k-range", ma.k_range, "Scan A..B and fit the BIC-selected k");
  m_k->excludes(m_range);
  m_range->excludes(m_k);
  marginal->add_option("--seed", ma.seed, "RNG seed")->default_val(1729);
  marginal->add_option("--restarts", ma.restarts, "EM restarts")
      ->default_val(5)
      ->check(CLI::Range(std::size_t{1}, std::size_t{1000}));
  marginal->callback([&] {
    if (ma.k == 0 && ma.k_range.empty())
      throw CLI::RequiredError("--k or --k-range");
    rc = cmd_segment_marginal(ma);
  });

  SegmentKmeansArgs ka;
  CLI::App* kmeans = segment->add_subcommand(
      "kmeans", "K-means on multiscale wavelet features; writes "
                "<prefix>_segm_kmean<k>.fits and a summary CSV with columns "
                "cluster,count,<feature names>");
  kmeans->add_option("--in", ka.in, "Input FITS volume")->required();
  kmeans->add_option("--out-prefix", ka.prefix,
                     "Output prefix (default: input path without .fits)");
  kmeans->add_option("--k", ka.k, "Cluster count")
      ->required()
      ->check(CLI::Range(std::size_t{1}, std::size_t{32767}));
  kmeans->add_option("--scales", ka.scales, "Wavelet scale count S")
      ->default_val(3)
      ->check(CLI::Range(std::size_t{1}, std::size_t{20}));
  kmeans->add_option("--seed", ka.seed, "RNG seed")->default_val(1729);
  kmeans->add_option("--restarts", ka.restarts, "Lloyd restarts")
      ->default_val(5)
      ->check(CLI::Range(std::size_t{1}, std::size_t{1000}));
  kmeans->add_flag("--no-standardize", ka.no_standardize,
                   "Cluster raw feature values (no per-dimension z-score)");
  kmeans->add_flag("--no-continuum", ka.no_continuum,
                   "Exclude the continuum from the feature vector");
  kmeans->callback([&] { rc = cmd_segment_kmeans(ka); });

  CompareArgs ca;
  CLI::App* compare = app.add_subcommand(
      "compare", "Run both families and compare them by Renyi quadratic "
                 "entropy; writes <prefix>_compare.txt, _compare.jsonl, and "
                 "_compare_sensitivity.csv with columns "
                 "sigma,renyi_marginal,renyi_kmeans,verdict");
  compare->add_option("--in", ca.in, "Input FITS volume")->required();
  compare->add_option("--out-prefix", ca.prefix,
                      "Output prefix (default: input path without .fits)");
  compare->add_option("--k", ca.k, "Cluster count for both families")
      ->required()
      ->check(CLI::Range(std::size_t{2}, std::size_t{32767}));
  CLI::Option* c_range = compare->add_option(
      "--k-range", ca.k_range,
      "BIC scan A..B for the marginal family (overrides --k there)");
  compare->add_option("--scales", ca.scales, "Wavelet scale count S")
      ->default_val(3)
      ->check(CLI::Range(std::size_t{1}, std::size_t{20}));
  compare->add_option("--seed", ca.seed, "RNG seed")->default_val(1729);
  compare->add_option("--restarts", ca.restarts, "Restarts per fit")
      ->default_val(5)
      ->check(CLI::Range(std::size_t{1}, std::size_t{1000}));
  compare->add_option("--sigma-grid", ca.sigma_grid,
                      "Comma-separated sigmas for the sensitivity table")
      ->default_val("0.25,0.5,1,2,4");
  compare->add_flag("--no-standardize", ca.no_standardize,
                    "Cluster raw feature values (no per-dimension z-score)");
  compare->add_flag("--no-continuum", ca.no_continuum,
                    "Exclude the continuum from the feature vector");
  compare->add_flag("--multiscale-renyi", ca.multiscale,
                    "Sum per-wavelet-scale entropies for the k-means family "
                    "instead of one full-feature-space covering");
  CLI::Option* c_reuse = compare->add_flag(
      "--reuse", ca.reuse,
      "Rebuild coverings from existing <prefix>_segm_*<k>.fits labels "
      "instead of refitting");
  c_reuse->excludes(c_range);
  compare->callback([&] { rc = cmd_compare(ca); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const voxcover::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
