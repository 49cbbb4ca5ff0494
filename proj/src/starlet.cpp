#include "voxcover/starlet.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace voxcover {

namespace {

// Mirror without repeating the edge sample: ..., x2, x1, [x0, x1, ..., xn-1],
// xn-2, xn-3, ...
inline std::ptrdiff_t reflect(std::ptrdiff_t i, std::ptrdiff_t n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

// One B3 smoothing pass along a line of `n` samples with stride `st` and
// hole spacing `step`. Written in centered form,
//   out = c + ((x[-2h]-c) + (x[+2h]-c) + 4((x[-h]-c) + (x[+h]-c))) / 16,
// algebraically (x[-2h] + 4x[-h] + 6c + 4x[+h] + x[+2h]) / 16; the centered
// form smooths a constant line to itself exactly in floating point.
inline void smooth_line(const double* in, double* out, std::ptrdiff_t n,
                        std::ptrdiff_t st, std::ptrdiff_t step) {
  const std::ptrdiff_t h = step, h2 = 2 * step;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double c = in[i * st];
    double xm2, xm1, xp1, xp2;
    if (i - h2 >= 0 && i + h2 < n) {
      xm2 = in[(i - h2) * st];
      xm1 = in[(i - h) * st];
      xp1 = in[(i + h) * st];
      xp2 = in[(i + h2) * st];
    } else {
      xm2 = in[reflect(i - h2, n) * st];
      xm1 = in[reflect(i - h, n) * st];
      xp1 = in[reflect(i + h, n) * st];
      xp2 = in[reflect(i + h2, n) * st];
    }
    const double a = (xm2 - c) + (xp2 - c);
    const double b = (xm1 - c) + (xp1 - c);
    out[i * st] = c + (a + 4.0 * b) / 16.0;
  }
}

void smooth_pass(const std::vector<double>& in, std::vector<double>& out,
                 const Dims& d, int axis, std::size_t step) {
  const std::ptrdiff_t nx = static_cast<std::ptrdiff_t>(d.nx);
  const std::ptrdiff_t ny = static_cast<std::ptrdiff_t>(d.ny);
  const std::ptrdiff_t nz = static_cast<std::ptrdiff_t>(d.nz);
  const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(step);
  if (axis == 0) {
    for (std::ptrdiff_t z = 0; z < nz; ++z)
      for (std::ptrdiff_t y = 0; y < ny; ++y) {
        const std::ptrdiff_t base = (y + ny * z) * nx;
        smooth_line(in.data() + base, out.data() + base, nx, 1, h);
      }
  } else if (axis == 1) {
    for (std::ptrdiff_t z = 0; z < nz; ++z)
      for (std::ptrdiff_t x = 0; x < nx; ++x) {
        const std::ptrdiff_t base = x + nx * ny * z;
        smooth_line(in.data() + base, out.data() + base, ny, nx, h);
      }
  } else {
    for (std::ptrdiff_t y = 0; y < ny; ++y)
      for (std::ptrdiff_t x = 0; x < nx; ++x) {
        const std::ptrdiff_t base = x + nx * y;
        smooth_line(in.data() + base, out.data() + base, nz, nx * ny, h);
      }
  }
}

void smooth3d(const std::vector<double>& in, std::vector<double>& out,
              std::vector<double>& tmp, const Dims& d, std::size_t step) {
  smooth_pass(in, out, d, 0, step);
  smooth_pass(out, tmp, d, 1, step);
  smooth_pass(tmp, out, d, 2, step);
}

double median_inplace(std::vector<double>& v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (n % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
    m = 0.5 * (m + v[mid - 1]);
  }
  return m;
}

} // namespace

std::size_t max_scales(const Dims& dims) {
  const std::size_t m = dims.min_extent();
  std::size_t s = 0;
  while (s < 60 && (std::size_t{4} << s) < m) ++s;
  return s;
}

WaveletDecomposition starlet_forward(const Volume& v, std::size_t S) {
  require_consistent(v, "starlet_forward");
  if (S < 1) throw ValidationError("scale count S must be >= 1");
  if (S > 60 || (std::size_t{4} << (S - 1)) >= v.dims.min_extent()) {
    const std::string need =
        S > 60 ? "2^(S-1)*4" : std::to_string(std::size_t{4} << (S - 1));
    throw ValidationError(
        "S=" + std::to_string(S) + " needs " + need + " = 2^(S-1)*4 < " +
        std::to_string(v.dims.min_extent()) + " (the smallest extent of " +
        v.dims.str() + "); at most S=" + std::to_string(max_scales(v.dims)) +
        " fits");
  }

  const std::size_t n = v.data.size();
  std::vector<double> c_prev(v.data.begin(), v.data.end());
  std::vector<double> c_next(n), tmp(n);

  WaveletDecomposition d;
  d.scales.reserve(S);
  for (std::size_t s = 1; s <= S; ++s) {
    smooth3d(c_prev, c_next, tmp, v.dims, std::size_t{1} << (s - 1));
    Volume w(v.dims, ValueKind::WaveletCoefficient);
    for (std::size_t i = 0; i < n; ++i)
      w.data[i] = static_cast<float>(c_prev[i] - c_next[i]);
    d.scales.push_back(std::move(w));
    c_prev.swap(c_next);
  }
  d.continuum = Volume(v.dims, ValueKind::Continuum);
  for (std::size_t i = 0; i < n; ++i)
    d.continuum.data[i] = static_cast<float>(c_prev[i]);
  return d;
}

Volume starlet_reconstruct(const WaveletDecomposition& d) {
  require_consistent(d.continuum, "starlet_reconstruct");
  for (std::size_t s = 0; s < d.scales.size(); ++s) {
    require_consistent(d.scales[s], "starlet_reconstruct");
    if (d.scales[s].dims != d.continuum.dims)
      throw DimensionError("scale " + std::to_string(s + 1) + " has dims " +
                           d.scales[s].dims.str() + " but continuum has " +
                           d.continuum.dims.str());
  }
  const std::size_t n = d.continuum.data.size();
  std::vector<double> acc(d.continuum.data.begin(), d.continuum.data.end());
  for (const Volume& w : d.scales)
    for (std::size_t i = 0; i < n; ++i) acc[i] += w.data[i];
  Volume out(d.continuum.dims, ValueKind::Intensity);
  for (std::size_t i = 0; i < n; ++i)
    out.data[i] = static_cast<float>(acc[i]);
  return out;
}

ScaleNoise estimate_scale_noise(const WaveletDecomposition& d) {
  if (d.scales.empty())
    throw ValidationError("noise estimation needs at least one wavelet scale");
  // MAD-to-sigma factor: 1 / (Phi^-1(3/4)).
  constexpr double kMadToSigma = 1.0 / 0.6744897501960817;
  ScaleNoise out;
  out.sigma.reserve(d.scales.size());
  std::vector<double> buf;
  for (const Volume& w : d.scales) {
    require_consistent(w, "estimate_scale_noise");
    buf.assign(w.data.begin(), w.data.end());
    const double med = median_inplace(buf);
    for (double& x : buf) x = std::abs(x - med);
    out.sigma.push_back(median_inplace(buf) * kMadToSigma);
  }
  return out;
}

} // namespace voxcover
