#ifndef VOXCOVER_ENTROPY_HPP
#define VOXCOVER_ENTROPY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "voxcover/starlet.hpp"

namespace voxcover {

// Counts over strictly increasing bin edges; edges.size() == counts.size()+1.
struct Histogram {
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;
  std::uint64_t n = 0;

  std::size_t bins() const { return counts.size(); }
};

// Histogram with unit-width integer edges 0..counts.size().
Histogram histogram_from_counts(const std::vector<std::uint64_t>& counts);

// Equal-width histogram over [lo, hi]; values equal to hi land in the last
// bin. Values outside [lo, hi] are a ValidationError.
Histogram histogram_from_data(const std::vector<double>& data,
                              std::size_t n_bins, double lo, double hi);

// Equal-width histogram spanning the data range.
Histogram histogram_from_data(const std::vector<double>& data,
                              std::size_t n_bins);

// -sum p_k ln p_k over nonempty bins (natural log; empty bins contribute 0).
double shannon_entropy(const Histogram& h);

// -sum ln g_k. Entries must be positive.
double burg_entropy(const std::vector<double>& g);

// -sum g_k ln g_k. Entries must be positive.
double frieden_entropy(const std::vector<double>& g);

// sum (g_k - M_k - g_k ln(g_k/M_k)) against a model M. Always <= 0 with
// equality iff g == M. Lengths must match; entries must be positive.
double gull_skilling_entropy(const std::vector<double>& g,
                             const std::vector<double>& M);

// Total coefficient information sum_j sum_k w_{j,k}^2 / (2 sigma_j^2) over
// the wavelet scales (continuum excluded). One positive sigma per scale.
double wavelet_information(const WaveletDecomposition& d,
                           const ScaleNoise& noise);

// Integral of the product of two isotropic Gaussians with equal scale:
// (4 pi sigma^2)^(-m/2) * exp(-|mu_i - mu_j|^2 / (4 sigma^2)).
double gauss_cross_term(const std::vector<double>& mu_i,
                        const std::vector<double>& mu_j, double sigma);

// Its log, same contract.
double log_gauss_cross_term(const std::vector<double>& mu_i,
                            const std::vector<double>& mu_j, double sigma);

// A set of component means with one shared isotropic scale. Weights default
// to 1 for every point (the equiweighted comparison statistic); pairwise
// entropy needs k >= 2.
struct GaussianCovering {
  std::size_t m = 0;
  std::vector<std::vector<double>> points;
  double sigma = 1.0;
  std::vector<double> weights; // empty means all 1
};

// -ln sum over ordered pairs i != j of w_i w_j gauss_cross_term(mu_i, mu_j, sigma),
// evaluated in the log domain so hyper-separated coverings stay finite.
double renyi_quadratic_covering(const GaussianCovering& c);

// Same sum including the diagonal i == j terms: -ln integral of f^2 for the
// mixture with the covering's weights. Used to cross-check against direct
// quadrature of the squared density.
double renyi_quadratic_full(const GaussianCovering& c);

// Sum of per-covering pairwise entropies (additivity across scales).
double renyi_quadratic_multiscale(const std::vector<GaussianCovering>& coverings);

// Named entropy values with the parameters that produced them. Values must
// be finite; serializes as key=value lines and as one CSV row.
struct EntropyReport {
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::pair<std::string, std::string>> params;

  void set(const std::string& name, double value);
  const double* find(const std::string& name) const;
  std::string to_text() const;
  std::string csv_header() const;
  std::string csv_row() const;
};

} // namespace voxcover

#endif
