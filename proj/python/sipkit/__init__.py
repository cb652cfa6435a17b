"""Statistical image properties and layer probes."""

from ._core import (
    SIP_NAMES,
    Error,
    __version__,
    compute_sips,
    fit_pca,
    forward_select,
    image_seed,
    load_filter_bank,
    load_image,
    pca_components_for,
    project,
    random_filter_bank,
    read_activations,
    save_png,
    spearman,
)

__all__ = [
    "SIP_NAMES",
    "Error",
    "__version__",
    "compute_sips",
    "fit_pca",
    "forward_select",
    "image_seed",
    "load_filter_bank",
    "load_image",
    "pca_components_for",
    "project",
    "random_filter_bank",
    "read_activations",
    "save_png",
    "spearman",
]
