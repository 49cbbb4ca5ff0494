#ifndef VOXCOVER_MIXTURE_HPP
#define VOXCOVER_MIXTURE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "voxcover/volume.hpp"

namespace voxcover {

// One isotropic Gaussian component: covariance sigma^2 * I in m dimensions.
struct GaussianComponent {
  double weight = 1.0;
  std::vector<double> mean;
  double sigma = 1.0;
};

// Weighted isotropic Gaussian mixture. Invariants: weights positive and sum
// to 1 within 1e-9; every sigma >= sigma_floor > 0; loglik finite.
struct MixtureModel {
  std::size_t m = 1;
  std::vector<GaussianComponent> components;
  double loglik = 0.0;
  std::size_t n = 0;
  double sigma_floor = 0.0;

  std::size_t k() const { return components.size(); }
};

struct FitOptions {
  std::uint64_t seed = 1729;
  std::size_t max_iter = 500;
  double tol = 1e-7;        // relative log-likelihood change
  std::size_t restarts = 5; // best final loglik wins
};

struct FitReport {
  MixtureModel model;
  double bic = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  // Per-iteration log-likelihood of the winning restart. EM guarantees a
  // nondecreasing trace except across a component reinitialization.
  std::vector<double> loglik_trace;
  // One entry per degeneracy handled (component reinitialized), with the
  // iteration at which it happened.
  std::vector<std::string> events;
  // "raw" or "binned(N)" when fit through the histogram fast path.
  std::string method = "raw";
};

// Isotropic m-dimensional Gaussian density. Throws ValidationError when
// sigma <= 0 or the vectors differ in length.
double gaussian_pdf(const std::vector<double>& x, const std::vector<double>& mu,
                    double sigma);

// Its log, same contract.
double log_gaussian_pdf(const std::vector<double>& x,
                        const std::vector<double>& mu, double sigma);

// EM fit of a k-component 1D mixture to raw samples. Deterministic for a
// fixed seed; initialization is k-means++ seeding plus one hard assignment
// pass, repeated for opts.restarts independent starts. Components of the
// returned model are sorted by ascending mean. Requires n > 3k.
FitReport fit_gmm_em(const std::vector<double>& data, std::size_t k,
                     const FitOptions& opts = {});

// Same fit on a 1D histogram of the samples (weighted EM over bin centers).
// An approximation that trades accuracy for speed on very large inputs.
FitReport fit_gmm_em_binned(const std::vector<double>& data, std::size_t k,
                            const FitOptions& opts = {},
                            std::size_t bins = 1024);

// Volumes above this voxel count are fit through the binned path.
constexpr std::size_t kBinnedFitThreshold = 1000000;

// Fits the voxel marginal of a volume, dispatching raw vs binned on size.
FitReport fit_volume_marginal(const Volume& v, std::size_t k,
                              const FitOptions& opts = {});

// Number of free parameters of a k-component 1D isotropic GMM:
// k means + k sigmas + (k-1) free weights.
std::size_t free_parameter_count(std::size_t k);

// -loglik + (k_params/2) * ln(n). Smaller is better. Throws ValidationError
// when k_params < 1 or n < 1.
double bic(double loglik, std::size_t k_params, std::size_t n);

// Log-likelihood of raw samples under a model (m must be 1).
double log_likelihood(const MixtureModel& model, const std::vector<double>& data);

// Posterior responsibilities of one observation; sums to 1.
std::vector<double> posterior_responsibilities(const MixtureModel& model,
                                               double x);

struct BicScanEntry {
  std::size_t k = 0;
  FitReport report;
};

struct BicScan {
  std::vector<BicScanEntry> entries;
  std::size_t selected_k = 0; // argmin bic, ties toward smaller k
};

// One fit per k in [k_lo, k_hi]; selection by minimum BIC. Fit errors are
// rethrown annotated with the offending k.
BicScan bic_scan(const std::vector<double>& data, std::size_t k_lo,
                 std::size_t k_hi, const FitOptions& opts = {},
                 bool binned = false);

// CSV table "k,loglik,bic,converged" for plotting.
std::string bic_scan_csv(const BicScan& scan);

// Labels every voxel with argmax_i weight_i * f_i(x). Label ids follow
// ascending component mean; posterior ties resolve to the lower-mean
// component. Summary means are per-cluster intensity means; a cluster with no
// voxels keeps its component mean.
LabelVolume label_by_posterior(const Volume& v, const MixtureModel& model);

} // namespace voxcover

#endif
