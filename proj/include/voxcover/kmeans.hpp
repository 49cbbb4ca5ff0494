#ifndef VOXCOVER_KMEANS_HPP
#define VOXCOVER_KMEANS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "voxcover/starlet.hpp"
#include "voxcover/volume.hpp"

namespace voxcover {

// Per-dimension affine map actually applied to a feature: z = (x - offset) / scale.
struct FeatureStandardization {
  double offset = 0.0;
  double scale = 1.0;
};

// Voxel-aligned feature vectors: values[i*m + j] is feature j of voxel i,
// voxels in the source volume's storage order.
struct FeatureField {
  Dims dims;
  std::size_t m = 0;
  std::vector<double> values;
  std::vector<std::string> feature_names;
  bool standardized = false;
  std::vector<FeatureStandardization> standardization; // one per dimension
  std::vector<std::string> warnings;

  std::size_t n() const { return dims.count(); }
  double at(std::size_t voxel, std::size_t feature) const {
    return values[voxel * m + feature];
  }
};

// Stacks the decomposition's levels into per-voxel feature vectors:
// m = S wavelet scales, plus the continuum when include_continuum. With
// standardize, each dimension is z-scored to mean 0, variance 1; a
// zero-variance dimension keeps scale 1 and records a warning.
FeatureField build_features(const WaveletDecomposition& d,
                            bool include_continuum = true,
                            bool standardize = true);

struct KMeansOptions {
  std::uint64_t seed = 1729;
  std::size_t max_iter = 100;
  std::size_t restarts = 5; // best (lowest) inertia wins
};

struct KMeansModel {
  std::size_t k = 0;
  std::size_t m = 0;
  std::vector<std::vector<double>> centroids; // k vectors of length m
  std::vector<std::size_t> counts;            // sum to n; none zero
  double inertia = 0.0;
  // Inertia after each Lloyd update of the winning restart. Nonincreasing
  // except across an empty-cluster reseed.
  std::vector<double> inertia_trace;
  std::vector<std::string> events; // one entry per empty-cluster reseed
};

struct KMeansFit {
  KMeansModel model;
  LabelVolume labels;
};

// Lloyd's algorithm with k-means++ seeding and squared Euclidean distance
// (the identity-covariance mixture restriction). Deterministic for a fixed
// seed. An empty cluster is reseeded from the point farthest from its
// assigned centroid (logged). Cluster ids are ordered by descending voxel
// count; the label summary carries counts and centroids. Requires n >= k.
KMeansFit kmeans_fit(const FeatureField& f, std::size_t k,
                     const KMeansOptions& opts = {});

// CSV table "cluster,count,<feature names...>" of the fitted centroids.
std::string kmeans_summary_csv(const KMeansModel& model,
                               const std::vector<std::string>& feature_names);

} // namespace voxcover

#endif
