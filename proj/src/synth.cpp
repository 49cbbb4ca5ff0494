#include "voxcover/synth.hpp"

#include <cmath>
#include <string>

#include "voxcover/rng.hpp"

namespace voxcover {

double ggd_density(double x, const GGDParams& p) {
  if (!(p.alpha > 0.0) || !(p.beta > 0.0))
    throw ValidationError("ggd_density requires alpha > 0 and beta > 0, got "
                          "alpha=" + std::to_string(p.alpha) +
                          " beta=" + std::to_string(p.beta));
  // log form keeps Gamma(1/beta) from overflowing for small beta.
  const double log_norm = std::log(p.beta) - std::log(2.0 * p.alpha) -
                          std::lgamma(1.0 / p.beta);
  const double t = std::pow(std::abs(x) / p.alpha, p.beta);
  return std::exp(log_norm - t);
}

namespace {

void validate_components(const std::vector<MixtureComponentSpec>& components) {
  if (components.empty())
    throw ValidationError("mixture must have at least one component");
  double wsum = 0.0;
  for (const MixtureComponentSpec& c : components) {
    if (!(c.weight > 0.0))
      throw ValidationError("mixture weights must be positive, got " +
                            std::to_string(c.weight));
    if (c.sigma < 0.0)
      throw ValidationError("mixture sigmas must be nonnegative, got " +
                            std::to_string(c.sigma));
    wsum += c.weight;
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw ValidationError("mixture weights must sum to 1, got " +
                          std::to_string(wsum));
}

double draw_one(Rng& rng, const std::vector<MixtureComponentSpec>& components) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t pick = components.size() - 1;
  for (std::size_t i = 0; i < components.size(); ++i) {
    acc += components[i].weight;
    if (u < acc) {
      pick = i;
      break;
    }
  }
  const MixtureComponentSpec& c = components[pick];
  if (c.sigma == 0.0) return c.mean;
  return rng.normal(c.mean, c.sigma);
}

} // namespace

Volume synth_mixture_volume(const Dims& dims,
                            const std::vector<MixtureComponentSpec>& components,
                            std::uint64_t seed) {
  validate_components(components);
  Volume v(dims, ValueKind::Intensity);
  Rng rng(seed);
  for (std::size_t i = 0; i < v.data.size(); ++i)
    v.data[i] = static_cast<float>(draw_one(rng, components));
  return v;
}

std::vector<double> synth_mixture_samples(
    std::size_t n, const std::vector<MixtureComponentSpec>& components,
    std::uint64_t seed) {
  validate_components(components);
  if (n == 0) throw ValidationError("sample count must be positive");
  std::vector<double> out(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) out[i] = draw_one(rng, components);
  return out;
}

} // namespace voxcover
