"""Harmonic measure at infinity: disk approximations, walkers and estimators."""
from .approximation import DiskApproximation
from .estimate import (
    FactorizedEstimate,
    FactorizedEstimator,
    MeasureEstimate,
    WalkerConfig,
    asi_report_harmonic,
    estimate_direct,
    estimate_factorized,
    interior_measure,
    lower_bound_checks,
    reentry_chi2,
)
from .kernel import available_backends, get_backend, set_backend

__all__ = [
    "DiskApproximation", "FactorizedEstimate", "FactorizedEstimator", "MeasureEstimate", "WalkerConfig",
    "asi_report_harmonic", "estimate_direct", "estimate_factorized", "interior_measure",
    "lower_bound_checks", "reentry_chi2", "available_backends", "get_backend", "set_backend",
]
