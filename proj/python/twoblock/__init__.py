"""Dense, sparse and robust two-block dimension reduction."""

from ._core import (
    ModelHyperparams,
    RtbFit,
    TwoblockError,
    TwoblockModel,
    __version__,
    chi_square_quantile,
    contaminate,
    cross_validate,
    f1_selection,
    fit_rtb,
    fit_twoblock,
    generate_latent_data,
    hampel_psi,
    l1_median,
    model_from_json,
    model_to_json,
    mse_coefficients,
    predict,
    soft_threshold,
    tau2_scale,
    transform,
)

__all__ = [
    "ModelHyperparams",
    "RtbFit",
    "TwoblockError",
    "TwoblockModel",
    "__version__",
    "chi_square_quantile",
    "contaminate",
    "cross_validate",
    "f1_selection",
    "fit_rtb",
    "fit_twoblock",
    "generate_latent_data",
    "hampel_psi",
    "l1_median",
    "model_from_json",
    "model_to_json",
    "mse_coefficients",
    "predict",
    "soft_threshold",
    "tau2_scale",
    "transform",
]
