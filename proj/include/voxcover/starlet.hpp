#ifndef VOXCOVER_STARLET_HPP
#define VOXCOVER_STARLET_HPP

#include <cstddef>
#include <vector>

#include "voxcover/volume.hpp"

namespace voxcover {

// Redundant (undecimated) B3-spline wavelet decomposition. scales[s-1] holds
// the wavelet coefficients w_s (s=1 finest); continuum is the final smooth
// approximation. Every member has the input's dims, and
//   input = sum of scales + continuum
// holds to within 1e-6 relative (exactly, up to float rounding).
struct WaveletDecomposition {
  std::vector<Volume> scales;
  Volume continuum;

  std::size_t levels() const { return scales.size(); }
};

// Per-scale noise estimates, one entry per wavelet scale (not the continuum).
struct ScaleNoise {
  std::vector<double> sigma;
};

// Largest scale count S allowed for these dims: 2^(S-1)*4 < min extent.
std::size_t max_scales(const Dims& dims);

// Forward transform with S wavelet scales. The 1D smoothing kernel is
// (1/16)[1,4,6,4,1] applied separably along x, y, z with hole spacing 2^(s-1)
// at step s; boundaries mirror without repeating the edge sample;
// w_s = c_{s-1} - c_s with c_0 = input, continuum = c_S.
// Throws ValidationError when S < 1 or 2^(S-1)*4 >= min(nx,ny,nz).
WaveletDecomposition starlet_forward(const Volume& v, std::size_t S);

// Elementwise sum of all scales and the continuum.
// Throws DimensionError on member dim mismatch.
Volume starlet_reconstruct(const WaveletDecomposition& d);

// Robust per-scale noise: median(|w - median(w)|) / 0.6744897501960817.
// A scale of all zeros yields sigma 0; consumers that need positive noise
// must reject that themselves.
ScaleNoise estimate_scale_noise(const WaveletDecomposition& d);

} // namespace voxcover

#endif
