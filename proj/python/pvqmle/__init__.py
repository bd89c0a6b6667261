"""Pseudo-variance quasi-maximum likelihood estimation (C++ core)."""

from ._pvqmle import (
    PvqmleError,
    chi2_sf,
    evaluate,
    fit,
    fit_clse,
    fit_mle_inar1,
    simulate,
    variance_ratio_grid,
    wald_test,
)

__all__ = [
    "PvqmleError",
    "chi2_sf",
    "evaluate",
    "fit",
    "fit_clse",
    "fit_mle_inar1",
    "simulate",
    "variance_ratio_grid",
    "wald_test",
]
