#ifndef VOXCOVER_PIPELINE_HPP
#define VOXCOVER_PIPELINE_HPP

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "voxcover/entropy.hpp"
#include "voxcover/kmeans.hpp"
#include "voxcover/mixture.hpp"

namespace voxcover {

// Artifact naming shared by the pipeline and the CLI.
std::string level_path(const std::string& prefix, std::size_t level);
std::string marginal_label_path(const std::string& prefix, std::size_t k);
std::string marginal_summary_path(const std::string& prefix, std::size_t k);
std::string kmeans_label_path(const std::string& prefix, std::size_t k);
std::string kmeans_summary_path(const std::string& prefix, std::size_t k);
std::string bic_scan_path(const std::string& prefix);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Writes one FITS file per level: <prefix>_1.fits .. <prefix>_<S+1>.fits,
// the last being the continuum. Returns the written paths.
std::vector<std::string> save_decomposition(const WaveletDecomposition& d,
                                            const std::string& prefix);

struct MarginalOptions {
  std::size_t k_lo = 1;
  std::size_t k_hi = 8;
  FitOptions fit;
};

struct MarginalResult {
  BicScan scan;
  std::size_t selected_k = 0;
  FitReport fit; // the scan entry at selected_k
  LabelVolume labels;
  std::vector<std::string> written;
};

// BIC scan over [k_lo, k_hi] on the voxel marginal (a single-k range fits
// that k directly), then posterior labeling at the selected k. With a
// nonempty out_prefix, persists the label volume, its cluster summary CSV,
// and (for a real scan) the scan CSV.
MarginalResult run_marginal_family(const Volume& v, const MarginalOptions& opts,
                                   const std::string& out_prefix = "");

struct WaveletFamilyOptions {
  std::size_t scales = 3;
  std::size_t k = 6;
  bool standardize = true;
  bool include_continuum = true;
  KMeansOptions kmeans;
};

struct WaveletFamilyResult {
  KMeansModel model;
  FeatureField features;
  LabelVolume labels;
  std::vector<std::string> written;
};

// Wavelet transform, feature stacking, k-means. With a nonempty out_prefix,
// persists the label volume and the centroid summary CSV.
WaveletFamilyResult run_wavelet_family(const Volume& v,
                                       const WaveletFamilyOptions& opts,
                                       const std::string& out_prefix = "");

struct CompareOptions {
  double sigma = 1.0; // the verdict is taken at this sigma
  std::vector<double> sigma_grid = {0.25, 0.5, 1.0, 2.0, 4.0};
  bool multiscale = false; // sum per-wavelet-scale entropies for the k-means family
};

struct FamilyBlock {
  std::string family;
  std::size_t k = 0;
  bool has_bic = false;
  double bic = 0.0;
  double renyi_quadratic = 0.0;
  EntropyReport entropy;
  std::vector<ClusterSummary> summary;
};

struct SensitivityRow {
  double sigma = 0.0;
  double marginal = 0.0;
  double kmeans = 0.0;
  std::string verdict;
};

struct ComparisonReport {
  std::vector<std::pair<std::string, std::string>> config; // echoed as the header
  FamilyBlock marginal;
  FamilyBlock kmeans;
  double sigma = 1.0;
  std::string verdict; // "marginal", "kmeans", or "tie"
  std::vector<SensitivityRow> sensitivity;

  std::string to_text() const;
  std::string sensitivity_csv() const;
  std::string to_json_lines() const;
};

// "marginal" when m < k, "kmeans" when k < m, else "tie".
std::string verdict_for(double marginal_entropy, double kmeans_entropy);

// Component means z-scored against the volume's intensity distribution.
GaussianCovering marginal_covering(const MixtureModel& model,
                                   const VolumeStats& stats);

// Per-cluster intensity means (empty clusters dropped), z-scored the same way.
GaussianCovering marginal_covering_from_labels(const LabelVolume& labels,
                                               const Volume& v,
                                               const VolumeStats& stats);

// Centroids in the standardized feature space. When the field was built
// without standardization the centroids are z-scored by the field's own
// per-dimension statistics (zero-variance dimensions pass through).
GaussianCovering kmeans_covering(const KMeansModel& model,
                                 const FeatureField& f);

// Per-cluster means of the (standardized) features, empty clusters dropped.
GaussianCovering kmeans_covering_from_labels(const LabelVolume& labels,
                                             const FeatureField& f);

// Number of leading feature dimensions that are wavelet scales (the
// continuum, when present, is always the trailing dimension).
std::size_t wavelet_dims(const FeatureField& f);

// Fill a label volume's summary means from companion data: per-cluster
// intensity means, or per-cluster feature means. Empty clusters keep an
// empty mean vector. Used when labels are reloaded from disk.
void attach_intensity_means(LabelVolume& labels, const Volume& v);
void attach_feature_means(LabelVolume& labels, const FeatureField& f);

// One family's covering plus report metadata.
struct FamilyInput {
  std::string family;
  std::size_t k = 0;
  GaussianCovering covering;
  // When multiscale_dims > 0 and CompareOptions.multiscale is set, the
  // family's entropy is the sum over the first multiscale_dims coordinates,
  // one 1D covering per wavelet scale.
  std::size_t multiscale_dims = 0;
  bool has_bic = false;
  double bic = 0.0;
  std::vector<ClusterSummary> summary;
  std::string space;           // e.g. "intensity-z", "feature-z"
  std::string standardization; // e.g. "volume-zscore", "per-dimension-zscore"
  std::string source = "model-means"; // "cluster-means" when rebuilt from labels
};

// Evaluates both families at the verdict sigma and across the sigma grid.
ComparisonReport compare_family_inputs(const FamilyInput& marginal,
                                       const FamilyInput& kmeans,
                                       const CompareOptions& opts);

// The full-protocol comparison: builds each family's covering from its
// fitted model (marginal means z-scored by the volume stats; centroids in
// standardized feature space) and assembles the report.
ComparisonReport compare_families(const MixtureModel& marginal_model,
                                  const FitReport* marginal_fit, // bic source, may be null
                                  const LabelVolume& marginal_labels,
                                  const KMeansModel& kmeans_model,
                                  const FeatureField& features,
                                  const LabelVolume& kmeans_labels,
                                  const VolumeStats& stats,
                                  const CompareOptions& opts = {});

} // namespace voxcover

#endif
