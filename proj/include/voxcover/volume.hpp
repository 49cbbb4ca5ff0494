#ifndef VOXCOVER_VOLUME_HPP
#define VOXCOVER_VOLUME_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "voxcover/errors.hpp"

namespace voxcover {

// What the samples of a volume mean. Wavelet products carry their role so
// downstream code can refuse, e.g., noise estimation on a continuum band.
enum class ValueKind {
  Intensity,
  WaveletCoefficient,
  Continuum,
};

struct Dims {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t nz = 0;

  std::size_t count() const { return nx * ny * nz; }
  std::size_t min_extent() const {
    std::size_t m = nx < ny ? nx : ny;
    return m < nz ? m : nz;
  }
  bool operator==(const Dims& o) const {
    return nx == o.nx && ny == o.ny && nz == o.nz;
  }
  bool operator!=(const Dims& o) const { return !(*this == o); }
  std::string str() const {
    return std::to_string(nx) + "x" + std::to_string(ny) + "x" +
           std::to_string(nz);
  }
};

// Dense 3D scalar field. Samples are float32, stored x-fastest:
// data[x + nx*(y + ny*z)].
struct Volume {
  Dims dims;
  ValueKind kind = ValueKind::Intensity;
  std::vector<float> data;

  Volume() = default;
  Volume(Dims d, ValueKind k, float fill = 0.0f)
      : dims(d), kind(k), data(d.count(), fill) {
    if (d.nx == 0 || d.ny == 0 || d.nz == 0)
      throw ValidationError("volume dimensions must be positive, got " +
                            d.str());
  }

  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const {
    return x + dims.nx * (y + dims.ny * z);
  }
  float at(std::size_t x, std::size_t y, std::size_t z) const {
    return data[index(x, y, z)];
  }
  float& at(std::size_t x, std::size_t y, std::size_t z) {
    return data[index(x, y, z)];
  }
  std::size_t size() const { return data.size(); }

  // True when the stored sample count matches the declared dimensions.
  bool consistent() const {
    return dims.count() == data.size() && dims.count() > 0;
  }
};

inline void require_consistent(const Volume& v, const char* what) {
  if (!v.consistent())
    throw ValidationError(std::string(what) + ": volume of dims " +
                          v.dims.str() + " holds " +
                          std::to_string(v.data.size()) + " samples");
}

// Mean and population standard deviation of a volume's samples, as doubles.
struct VolumeStats {
  double mean = 0.0;
  double stddev = 0.0;
};

inline VolumeStats volume_stats(const Volume& v) {
  require_consistent(v, "volume_stats");
  const double n = static_cast<double>(v.data.size());
  double s1 = 0.0;
  for (float x : v.data) s1 += x;
  const double mean = s1 / n;
  double s2 = 0.0;
  for (float x : v.data) {
    const double d = x - mean;
    s2 += d * d;
  }
  double var = s2 / n;
  if (var < 0.0) var = 0.0;
  return {mean, std::sqrt(var)};
}

// Per-cluster segmentation summary. `mean` has one entry per feature; for
// intensity-space segmentations it holds a single value. A cluster that
// received no voxels keeps its model-side mean and count 0.
struct ClusterSummary {
  std::size_t count = 0;
  std::vector<double> mean;
};

// Voxel labels over a volume grid. Labels are cluster ids in [0, k) stored
// x-fastest, same layout as Volume::data. summary.size() == k always.
struct LabelVolume {
  Dims dims;
  std::size_t k = 0;
  std::vector<std::int32_t> labels;
  std::vector<ClusterSummary> summary;

  std::size_t size() const { return labels.size(); }

  bool consistent() const {
    if (dims.count() == 0 || dims.count() != labels.size()) return false;
    if (k == 0 || summary.size() != k) return false;
    for (std::int32_t l : labels)
      if (l < 0 || static_cast<std::size_t>(l) >= k) return false;
    return true;
  }
};

inline void require_consistent(const LabelVolume& lv, const char* what) {
  if (!lv.consistent())
    throw ValidationError(std::string(what) +
                          ": label volume is inconsistent (dims " +
                          lv.dims.str() + ", k=" + std::to_string(lv.k) + ")");
}

} // namespace voxcover

#endif
