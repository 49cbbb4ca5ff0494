// Python bindings. Arrays are numpy shape (nz, ny, nx) in C order, which
// matches the core's x-fastest storage byte for byte.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/numpy.h>
#include <pybind11/stl.h>

#include "voxcover/entropy.hpp"
#include "voxcover/fits.hpp"
#include "voxcover/kmeans.hpp"
#include "voxcover/mixture.hpp"
#include "voxcover/pipeline.hpp"
#include "voxcover/starlet.hpp"
#include "voxcover/synth.hpp"
#include "voxcover/volume.hpp"

namespace py = pybind11;
using namespace voxcover;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<std::int32_t, py::array::c_style | py::array::forcecast>;

Dims dims_from_shape(const py::array& a) {
  if (a.ndim() != 3)
    throw ValidationError("expected a 3D array (nz, ny, nx), got ndim=" +
                          std::to_string(a.ndim()));
  return Dims{static_cast<std::size_t>(a.shape(2)),
              static_cast<std::size_t>(a.shape(1)),
              static_cast<std::size_t>(a.shape(0))};
}

Volume volume_from_array(const FloatArray& a,
                         ValueKind kind = ValueKind::Intensity) {
  Volume v(dims_from_shape(a), kind);
  const float* src = a.data();
  std::copy(src, src + v.size(), v.data.begin());
  return v;
}

py::array_t<float> array_from_volume(const Volume& v) {
  py::array_t<float> a({static_cast<py::ssize_t>(v.dims.nz),
                        static_cast<py::ssize_t>(v.dims.ny),
                        static_cast<py::ssize_t>(v.dims.nx)});
  std::copy(v.data.begin(), v.data.end(), a.mutable_data());
  return a;
}

py::array_t<std::int32_t> array_from_labels(const LabelVolume& lv) {
  py::array_t<std::int32_t> a({static_cast<py::ssize_t>(lv.dims.nz),
                               static_cast<py::ssize_t>(lv.dims.ny),
                               static_cast<py::ssize_t>(lv.dims.nx)});
  std::copy(lv.labels.begin(), lv.labels.end(), a.mutable_data());
  return a;
}

std::vector<MixtureComponentSpec> specs_from_list(
    const std::vector<std::tuple<double, double, double>>& components) {
  std::vector<MixtureComponentSpec> specs;
  specs.reserve(components.size());
  for (const auto& [w, mu, sigma] : components)
    specs.push_back({w, mu, sigma});
  return specs;
}

py::dict dict_from_model(const MixtureModel& model) {
  std::vector<double> weights, means, sigmas;
  for (const GaussianComponent& c : model.components) {
    weights.push_back(c.weight);
    means.push_back(c.mean[0]);
    sigmas.push_back(c.sigma);
  }
  py::dict d;
  d["weights"] = weights;
  d["means"] = means;
  d["sigmas"] = sigmas;
  d["loglik"] = model.loglik;
  d["n"] = model.n;
  d["sigma_floor"] = model.sigma_floor;
  return d;
}

py::dict dict_from_fit(const FitReport& fit) {
  py::dict d = dict_from_model(fit.model);
  d["bic"] = fit.bic;
  d["iterations"] = fit.iterations;
  d["converged"] = fit.converged;
  d["method"] = fit.method;
  d["events"] = fit.events;
  return d;
}

py::dict dict_from_report(const ComparisonReport& report) {
  py::dict d;
  d["verdict"] = report.verdict;
  d["sigma"] = report.sigma;
  d["renyi_marginal"] = report.marginal.renyi_quadratic;
  d["renyi_kmeans"] = report.kmeans.renyi_quadratic;
  py::list rows;
  for (const SensitivityRow& r : report.sensitivity) {
    py::dict row;
    row["sigma"] = r.sigma;
    row["renyi_marginal"] = r.marginal;
    row["renyi_kmeans"] = r.kmeans;
    row["verdict"] = r.verdict;
    rows.append(row);
  }
  d["sensitivity"] = rows;
  d["text"] = report.to_text();
  return d;
}

GaussianCovering covering_from_args(const DoubleArray& points, double sigma,
                                    const std::vector<double>& weights) {
  if (points.ndim() != 2)
    throw ValidationError("points must be a 2D array (k, m)");
  GaussianCovering c;
  c.m = static_cast<std::size_t>(points.shape(1));
  c.sigma = sigma;
  c.weights = weights;
  const double* src = points.data();
  for (py::ssize_t i = 0; i < points.shape(0); ++i)
    c.points.emplace_back(src + i * points.shape(1),
                          src + (i + 1) * points.shape(1));
  return c;
}

} // namespace

PYBIND11_MODULE(_voxcover, mod) {
  mod.doc() = "Gaussian-covering segmentation of 3D volumes";

  py::register_exception<Error>(mod, "VoxcoverError", PyExc_RuntimeError);

  mod.def("load_fits", [](const std::string& path) {
    return array_from_volume(load_fits(path));
  }, py::arg("path"), "Read a 3D FITS volume as a float32 array (nz, ny, nx).");

  mod.def("save_fits", [](const std::string& path, const FloatArray& a) {
    save_fits(volume_from_array(a), path);
  }, py::arg("path"), py::arg("volume"),
     "Write a float32 BITPIX=-32 FITS volume.");

  mod.def("load_labels", [](const std::string& path) {
    const LabelVolume lv = load_label_fits(path);
    return py::make_tuple(array_from_labels(lv), lv.k);
  }, py::arg("path"), "Read an int16 label FITS file as (labels, k).");

  mod.def("save_labels", [](const std::string& path, const IntArray& a) {
    LabelVolume lv;
    lv.dims = dims_from_shape(a);
    const std::int32_t* src = a.data();
    lv.labels.assign(src, src + lv.dims.count());
    std::int32_t max_label = 0;
    for (std::int32_t label : lv.labels) {
      if (label < 0) throw ValidationError("labels must be nonnegative");
      if (label > max_label) max_label = label;
    }
    lv.k = static_cast<std::size_t>(max_label) + 1;
    lv.summary.resize(lv.k);
    for (std::int32_t label : lv.labels) ++lv.summary[label].count;
    save_fits(lv, path);
  }, py::arg("path"), py::arg("labels"),
     "Write labels as an int16 BITPIX=16 FITS volume.");

  mod.def("max_scales", [](std::size_t nz, std::size_t ny, std::size_t nx) {
    return max_scales(Dims{nx, ny, nz});
  }, py::arg("nz"), py::arg("ny"), py::arg("nx"),
     "Largest wavelet scale count the extents admit.");

  mod.def("starlet_forward", [](const FloatArray& a, std::size_t scales) {
    const WaveletDecomposition d =
        starlet_forward(volume_from_array(a), scales);
    py::list levels;
    for (const Volume& w : d.scales) levels.append(array_from_volume(w));
    py::dict out;
    out["scales"] = levels;
    out["continuum"] = array_from_volume(d.continuum);
    return out;
  }, py::arg("volume"), py::arg("scales"),
     "B3-spline starlet transform: dict with 'scales' (list of arrays) and "
     "'continuum'.");

  mod.def("starlet_reconstruct",
          [](const std::vector<FloatArray>& scales, const FloatArray& continuum) {
    WaveletDecomposition d;
    for (const FloatArray& a : scales)
      d.scales.push_back(volume_from_array(a, ValueKind::WaveletCoefficient));
    d.continuum = volume_from_array(continuum, ValueKind::Continuum);
    return array_from_volume(starlet_reconstruct(d));
  }, py::arg("scales"), py::arg("continuum"),
     "Sum of wavelet scales and continuum.");

  mod.def("scale_noise", [](const FloatArray& a, std::size_t scales) {
    return estimate_scale_noise(starlet_forward(volume_from_array(a), scales))
        .sigma;
  }, py::arg("volume"), py::arg("scales"),
     "Per-scale robust (median absolute deviation) noise sigmas.");

  mod.def("ggd_density", [](double x, double alpha, double beta) {
    return ggd_density(x, GGDParams{alpha, beta});
  }, py::arg("x"), py::arg("alpha"), py::arg("beta"),
     "Generalized Gaussian density at x.");

  mod.def("synth_volume",
          [](std::size_t nz, std::size_t ny, std::size_t nx,
             const std::vector<std::tuple<double, double, double>>& components,
             std::uint64_t seed) {
    return array_from_volume(synth_mixture_volume(
        Dims{nx, ny, nz}, specs_from_list(components), seed));
  }, py::arg("nz"), py::arg("ny"), py::arg("nx"), py::arg("components"),
     py::arg("seed") = 1729,
     "I.i.d. draws from a 1D Gaussian mixture; components are "
     "(weight, mean, sigma) tuples.");

  mod.def("fit_gmm", [](const DoubleArray& data, std::size_t k,
                        std::uint64_t seed, std::size_t restarts,
                        std::size_t max_iter, double tol) {
    if (data.ndim() != 1) throw ValidationError("data must be 1D");
    std::vector<double> samples(data.data(), data.data() + data.size());
    FitOptions opts;
    opts.seed = seed;
    opts.restarts = restarts;
    opts.max_iter = max_iter;
    opts.tol = tol;
    return dict_from_fit(fit_gmm_em(samples, k, opts));
  }, py::arg("data"), py::arg("k"), py::arg("seed") = 1729,
     py::arg("restarts") = 5, py::arg("max_iter") = 500, py::arg("tol") = 1e-7,
     "EM fit of a k-component 1D Gaussian mixture.");

  mod.def("bic_scan", [](const DoubleArray& data, std::size_t k_lo,
                         std::size_t k_hi, std::uint64_t seed,
                         std::size_t restarts) {
    if (data.ndim() != 1) throw ValidationError("data must be 1D");
    std::vector<double> samples(data.data(), data.data() + data.size());
    FitOptions opts;
    opts.seed = seed;
    opts.restarts = restarts;
    const BicScan scan = bic_scan(samples, k_lo, k_hi, opts,
                                  samples.size() > kBinnedFitThreshold);
    py::list entries;
    for (const BicScanEntry& e : scan.entries) {
      py::dict row;
      row["k"] = e.k;
      row["loglik"] = e.report.model.loglik;
      row["bic"] = e.report.bic;
      row["converged"] = e.report.converged;
      entries.append(row);
    }
    py::dict out;
    out["entries"] = entries;
    out["selected_k"] = scan.selected_k;
    return out;
  }, py::arg("data"), py::arg("k_lo"), py::arg("k_hi"), py::arg("seed") = 1729,
     py::arg("restarts") = 5, "Model-order scan by BIC (argmin, ties low).");

  mod.def("segment_marginal", [](const FloatArray& a, std::size_t k_lo,
                                 std::size_t k_hi, std::uint64_t seed,
                                 std::size_t restarts) {
    const Volume v = volume_from_array(a);
    MarginalOptions opts;
    opts.k_lo = k_lo;
    opts.k_hi = k_hi == 0 ? k_lo : k_hi;
    opts.fit.seed = seed;
    opts.fit.restarts = restarts;
    const MarginalResult res = run_marginal_family(v, opts);
    py::dict out = dict_from_fit(res.fit);
    out["labels"] = array_from_labels(res.labels);
    out["selected_k"] = res.selected_k;
    std::vector<std::size_t> counts;
    for (const ClusterSummary& s : res.labels.summary)
      counts.push_back(s.count);
    out["counts"] = counts;
    return out;
  }, py::arg("volume"), py::arg("k"), py::arg("k_hi") = 0,
     py::arg("seed") = 1729, py::arg("restarts") = 5,
     "Marginal-density GMM segmentation; pass k_hi for a BIC scan.");

  mod.def("segment_kmeans", [](const FloatArray& a, std::size_t k,
                               std::size_t scales, std::uint64_t seed,
                               std::size_t restarts, bool standardize,
                               bool continuum) {
    const Volume v = volume_from_array(a);
    WaveletFamilyOptions opts;
    opts.scales = scales;
    opts.k = k;
    opts.standardize = standardize;
    opts.include_continuum = continuum;
    opts.kmeans.seed = seed;
    opts.kmeans.restarts = restarts;
    const WaveletFamilyResult res = run_wavelet_family(v, opts);
    py::dict out;
    out["labels"] = array_from_labels(res.labels);
    out["centroids"] = res.model.centroids;
    out["counts"] = res.model.counts;
    out["inertia"] = res.model.inertia;
    out["feature_names"] = res.features.feature_names;
    out["warnings"] = res.features.warnings;
    return out;
  }, py::arg("volume"), py::arg("k"), py::arg("scales") = 3,
     py::arg("seed") = 1729, py::arg("restarts") = 5,
     py::arg("standardize") = true, py::arg("continuum") = true,
     "K-means on standardized multiscale wavelet features.");

  mod.def("renyi_quadratic", [](const DoubleArray& points, double sigma,
                                const std::vector<double>& weights) {
    return renyi_quadratic_covering(covering_from_args(points, sigma, weights));
  }, py::arg("points"), py::arg("sigma") = 1.0,
     py::arg("weights") = std::vector<double>{},
     "Pairwise (i != j) Renyi quadratic entropy of a Gaussian covering.");

  mod.def("wavelet_information", [](const FloatArray& a, std::size_t scales) {
    const WaveletDecomposition d =
        starlet_forward(volume_from_array(a), scales);
    return wavelet_information(d, estimate_scale_noise(d));
  }, py::arg("volume"), py::arg("scales"),
     "Sum of w^2 / (2 sigma_j^2) over wavelet coefficients, noise from MAD.");

  mod.def("compare", [](const FloatArray& a, std::size_t k, std::size_t scales,
                        std::uint64_t seed, std::size_t restarts,
                        bool standardize, bool continuum, bool multiscale,
                        double sigma, const std::vector<double>& sigma_grid) {
    const Volume v = volume_from_array(a);
    const VolumeStats stats = volume_stats(v);
    MarginalOptions mopts;
    mopts.k_lo = mopts.k_hi = k;
    mopts.fit.seed = seed;
    mopts.fit.restarts = restarts;
    const MarginalResult marg = run_marginal_family(v, mopts);
    WaveletFamilyOptions wopts;
    wopts.scales = scales;
    wopts.k = k;
    wopts.standardize = standardize;
    wopts.include_continuum = continuum;
    wopts.kmeans.seed = seed;
    wopts.kmeans.restarts = restarts;
    const WaveletFamilyResult km = run_wavelet_family(v, wopts);
    CompareOptions copts;
    copts.sigma = sigma;
    if (!sigma_grid.empty()) copts.sigma_grid = sigma_grid;
    copts.multiscale = multiscale;
    return dict_from_report(compare_families(marg.fit.model, &marg.fit,
                                             marg.labels, km.model,
                                             km.features, km.labels, stats,
                                             copts));
  }, py::arg("volume"), py::arg("k"), py::arg("scales") = 3,
     py::arg("seed") = 1729, py::arg("restarts") = 5,
     py::arg("standardize") = true, py::arg("continuum") = true,
     py::arg("multiscale") = false, py::arg("sigma") = 1.0,
     py::arg("sigma_grid") = std::vector<double>{},
     "Fit both families and compare by Renyi quadratic entropy.");
}
