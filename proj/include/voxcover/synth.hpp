#ifndef VOXCOVER_SYNTH_HPP
#define VOXCOVER_SYNTH_HPP

#include <cstdint>
#include <vector>

#include "voxcover/volume.hpp"

namespace voxcover {

// Generalized Gaussian parameters: beta=2 is Gaussian, beta=1 Laplace,
// beta<2 heavy-tailed.
struct GGDParams {
  double alpha = 1.0;
  double beta = 2.0;
};

// Density beta/(2*alpha*Gamma(1/beta)) * exp(-(|x|/alpha)^beta).
// Throws ValidationError unless alpha > 0 and beta > 0.
double ggd_density(double x, const GGDParams& p);

// One component of a 1D Gaussian mixture. sigma == 0 is allowed here (and
// only here): the component degenerates to a point mass at mean.
struct MixtureComponentSpec {
  double weight = 1.0;
  double mean = 0.0;
  double sigma = 1.0;
};

// Fills a volume with i.i.d. draws from the 1D mixture, voxels in storage
// order. Deterministic for a fixed seed. Weights must be positive and sum to
// 1 within 1e-9; sigmas must be nonnegative.
Volume synth_mixture_volume(const Dims& dims,
                            const std::vector<MixtureComponentSpec>& components,
                            std::uint64_t seed);

// The same draw as a flat sample vector, for fitting tests on 1D data.
std::vector<double> synth_mixture_samples(
    std::size_t n, const std::vector<MixtureComponentSpec>& components,
    std::uint64_t seed);

} // namespace voxcover

#endif
