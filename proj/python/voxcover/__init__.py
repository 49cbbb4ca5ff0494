"""Gaussian-covering segmentation of 3D volumes.

Thin re-export of the compiled module. Arrays are numpy float32 with shape
(nz, ny, nx); labels are int32 in the same shape.
"""

from ._voxcover import (
    VoxcoverError,
    bic_scan,
    compare,
    fit_gmm,
    ggd_density,
    load_fits,
    load_labels,
    max_scales,
    renyi_quadratic,
    save_fits,
    save_labels,
    scale_noise,
    segment_kmeans,
    segment_marginal,
    starlet_forward,
    starlet_reconstruct,
    synth_volume,
    wavelet_information,
)

__all__ = [
    "VoxcoverError",
    "bic_scan",
    "compare",
    "fit_gmm",
    "ggd_density",
    "load_fits",
    "load_labels",
    "max_scales",
    "renyi_quadratic",
    "save_fits",
    "save_labels",
    "scale_noise",
    "segment_kmeans",
    "segment_marginal",
    "starlet_forward",
    "starlet_reconstruct",
    "synth_volume",
    "wavelet_information",
]

__version__ = "0.1.0"
