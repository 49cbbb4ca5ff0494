#include "voxcover/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace voxcover {

namespace {

void validate_histogram(const Histogram& h, const char* what) {
  if (h.counts.empty() || h.edges.size() != h.counts.size() + 1)
    throw ValidationError(std::string(what) + ": malformed histogram");
  for (std::size_t i = 1; i < h.edges.size(); ++i)
    if (!(h.edges[i] > h.edges[i - 1]))
      throw ValidationError(std::string(what) +
                            ": bin edges must be strictly increasing");
  std::uint64_t total = 0;
  for (std::uint64_t c : h.counts) total += c;
  if (total != h.n || h.n == 0)
    throw ValidationError(std::string(what) +
                          ": histogram counts must be positive and sum to n");
}

void validate_positive(const std::vector<double>& g, const char* what) {
  if (g.empty())
    throw ValidationError(std::string(what) + ": input must be nonempty");
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(g[i] > 0.0))
      throw ValidationError(std::string(what) + ": entry " +
                            std::to_string(i) + " is not positive");
}

void validate_covering(const GaussianCovering& c, const char* what) {
  if (c.points.size() < 2)
    throw ValidationError(std::string(what) +
                          " needs at least 2 points, got " +
                          std::to_string(c.points.size()));
  if (!(c.sigma > 0.0))
    throw ValidationError(std::string(what) + " requires sigma > 0, got " +
                          std::to_string(c.sigma));
  if (c.m == 0) throw ValidationError(std::string(what) + ": dimension is 0");
  for (const std::vector<double>& p : c.points) {
    if (p.size() != c.m)
      throw ValidationError(std::string(what) +
                            ": point dimension mismatch");
    for (double v : p)
      if (!std::isfinite(v))
        throw ValidationError(std::string(what) + ": non-finite mean");
  }
  if (!c.weights.empty()) {
    if (c.weights.size() != c.points.size())
      throw ValidationError(std::string(what) +
                            ": weight count must match point count");
    for (double w : c.weights)
      if (!(w > 0.0))
        throw ValidationError(std::string(what) +
                              ": weights must be positive");
  }
}

// -ln sum over pairs of exp(ln w_i + ln w_j + log cross term), with the
// diagonal optionally included, via a two-pass log-sum-exp.
double renyi_pair_sum(const GaussianCovering& c, bool include_diagonal,
                      const char* what) {
  validate_covering(c, what);
  const std::size_t k = c.points.size();
  std::vector<double> logw(k, 0.0);
  if (!c.weights.empty())
    for (std::size_t i = 0; i < k; ++i) logw[i] = std::log(c.weights[i]);

  const double lognorm =
      -0.5 * static_cast<double>(c.m) *
      std::log(4.0 * 3.141592653589793238462643383279502884 * c.sigma * c.sigma);
  const double inv4v = 1.0 / (4.0 * c.sigma * c.sigma);

  std::vector<double> terms;
  terms.reserve(k * k);
  double tmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j && !include_diagonal) continue;
      double d2 = 0.0;
      for (std::size_t q = 0; q < c.m; ++q) {
        const double d = c.points[i][q] - c.points[j][q];
        d2 += d * d;
      }
      const double t = logw[i] + logw[j] + lognorm - d2 * inv4v;
      terms.push_back(t);
      if (t > tmax) tmax = t;
    }
  }
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - tmax);
  return -(tmax + std::log(sum));
}

} // namespace

Histogram histogram_from_counts(const std::vector<std::uint64_t>& counts) {
  Histogram h;
  h.counts = counts;
  h.edges.resize(counts.size() + 1);
  for (std::size_t i = 0; i < h.edges.size(); ++i)
    h.edges[i] = static_cast<double>(i);
  for (std::uint64_t c : counts) h.n += c;
  validate_histogram(h, "histogram_from_counts");
  return h;
}

Histogram histogram_from_data(const std::vector<double>& data,
                              std::size_t n_bins, double lo, double hi) {
  if (data.empty()) throw ValidationError("histogram needs data");
  if (n_bins == 0) throw ValidationError("histogram needs at least one bin");
  if (!(hi > lo)) throw ValidationError("histogram range must be nonempty");
  Histogram h;
  h.counts.assign(n_bins, 0);
  h.edges.resize(n_bins + 1);
  const double width = (hi - lo) / static_cast<double>(n_bins);
  for (std::size_t i = 0; i <= n_bins; ++i)
    h.edges[i] = lo + static_cast<double>(i) * width;
  h.edges[n_bins] = hi;
  for (double x : data) {
    if (x < lo || x > hi)
      throw ValidationError("value " + std::to_string(x) +
                            " outside histogram range");
    std::size_t b = static_cast<std::size_t>((x - lo) / width);
    if (b >= n_bins) b = n_bins - 1;
    ++h.counts[b];
  }
  h.n = data.size();
  return h;
}

Histogram histogram_from_data(const std::vector<double>& data,
                              std::size_t n_bins) {
  if (data.empty()) throw ValidationError("histogram needs data");
  const auto [lo_it, hi_it] = std::minmax_element(data.begin(), data.end());
  double lo = *lo_it, hi = *hi_it;
  if (lo == hi) { // degenerate data: one unit-width bin holds everything
    lo -= 0.5;
    hi += 0.5;
  }
  return histogram_from_data(data, n_bins, lo, hi);
}

double shannon_entropy(const Histogram& h) {
  validate_histogram(h, "shannon_entropy");
  const double n = static_cast<double>(h.n);
  double s = 0.0;
  for (std::uint64_t c : h.counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    s -= p * std::log(p);
  }
  return s;
}

double burg_entropy(const std::vector<double>& g) {
  validate_positive(g, "burg_entropy");
  double s = 0.0;
  for (double x : g) s -= std::log(x);
  return s;
}

double frieden_entropy(const std::vector<double>& g) {
  validate_positive(g, "frieden_entropy");
  double s = 0.0;
  for (double x : g) s -= x * std::log(x);
  return s;
}

double gull_skilling_entropy(const std::vector<double>& g,
                             const std::vector<double>& M) {
  validate_positive(g, "gull_skilling_entropy");
  validate_positive(M, "gull_skilling_entropy");
  if (g.size() != M.size())
    throw ValidationError("gull_skilling_entropy: g and M differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    s += g[i] - M[i] - g[i] * std::log(g[i] / M[i]);
  return s;
}

double wavelet_information(const WaveletDecomposition& d,
                           const ScaleNoise& noise) {
  if (d.scales.empty())
    throw ValidationError("wavelet_information needs at least one scale");
  if (noise.sigma.size() != d.scales.size())
    throw ValidationError("wavelet_information: need one sigma per scale, got " +
                          std::to_string(noise.sigma.size()) + " for " +
                          std::to_string(d.scales.size()) + " scales");
  for (std::size_t j = 0; j < noise.sigma.size(); ++j)
    if (!(noise.sigma[j] > 0.0))
      throw ValidationError("wavelet_information: sigma of scale " +
                            std::to_string(j + 1) + " must be positive, got " +
                            std::to_string(noise.sigma[j]));
  double total = 0.0;
  for (std::size_t j = 0; j < d.scales.size(); ++j) {
    require_consistent(d.scales[j], "wavelet_information");
    const double inv2v = 1.0 / (2.0 * noise.sigma[j] * noise.sigma[j]);
    double energy = 0.0;
    for (float w : d.scales[j].data)
      energy += static_cast<double>(w) * static_cast<double>(w);
    total += energy * inv2v;
  }
  return total;
}

double log_gauss_cross_term(const std::vector<double>& mu_i,
                            const std::vector<double>& mu_j, double sigma) {
  if (!(sigma > 0.0))
    throw ValidationError("gauss_cross_term requires sigma > 0, got " +
                          std::to_string(sigma));
  if (mu_i.size() != mu_j.size() || mu_i.empty())
    throw ValidationError("gauss_cross_term needs matching nonempty means");
  const double m = static_cast<double>(mu_i.size());
  double d2 = 0.0;
  for (std::size_t q = 0; q < mu_i.size(); ++q)
    d2 += (mu_i[q] - mu_j[q]) * (mu_i[q] - mu_j[q]);
  return -0.5 * m *
             std::log(4.0 * 3.141592653589793238462643383279502884 * sigma *
                      sigma) -
         d2 / (4.0 * sigma * sigma);
}

double gauss_cross_term(const std::vector<double>& mu_i,
                        const std::vector<double>& mu_j, double sigma) {
  return std::exp(log_gauss_cross_term(mu_i, mu_j, sigma));
}

double renyi_quadratic_covering(const GaussianCovering& c) {
  return renyi_pair_sum(c, false, "renyi_quadratic_covering");
}

double renyi_quadratic_full(const GaussianCovering& c) {
  return renyi_pair_sum(c, true, "renyi_quadratic_full");
}

double renyi_quadratic_multiscale(
    const std::vector<GaussianCovering>& coverings) {
  if (coverings.empty())
    throw ValidationError("renyi_quadratic_multiscale needs at least one "
                          "covering");
  double total = 0.0;
  for (const GaussianCovering& c : coverings)
    total += renyi_quadratic_covering(c);
  return total;
}

void EntropyReport::set(const std::string& name, double value) {
  if (!std::isfinite(value))
    throw ValidationError("entropy value '" + name + "' is not finite");
  for (auto& kv : values) {
    if (kv.first == name) {
      kv.second = value;
      return;
    }
  }
  values.emplace_back(name, value);
}

const double* EntropyReport::find(const std::string& name) const {
  for (const auto& kv : values)
    if (kv.first == name) return &kv.second;
  return nullptr;
}

std::string EntropyReport::to_text() const {
  std::string out;
  char buf[64];
  for (const auto& kv : values) {
    std::snprintf(buf, sizeof(buf), "%.12g", kv.second);
    out += kv.first + "=" + buf + "\n";
  }
  for (const auto& kv : params) out += "param." + kv.first + "=" + kv.second + "\n";
  return out;
}

std::string EntropyReport::csv_header() const {
  std::string out;
  for (const auto& kv : values) {
    if (!out.empty()) out += ",";
    out += kv.first;
  }
  for (const auto& kv : params) {
    if (!out.empty()) out += ",";
    out += kv.first;
  }
  return out;
}

std::string EntropyReport::csv_row() const {
  std::string out;
  char buf[64];
  for (const auto& kv : values) {
    if (!out.empty()) out += ",";
    std::snprintf(buf, sizeof(buf), "%.12g", kv.second);
    out += buf;
  }
  for (const auto& kv : params) {
    if (!out.empty()) out += ",";
    out += kv.second;
  }
  return out;
}

} // namespace voxcover
