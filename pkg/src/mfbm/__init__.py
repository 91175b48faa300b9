"""Simulation of multiparameter fractional Brownian motion on the unit
ball through a rate-optimal Bessel/spherical-harmonic series expansion."""

from ._backend import BACKEND
from .expansion import (
    FieldSample,
    ModelParams,
    Truncation,
    TruncationSpec,
    covariance_closed,
    covariance_partial,
    resolve_truncation,
    sample_field,
)
from .special_functions import ZeroStore, ZeroTable, bessel_j, bessel_zeros, g_m
from .spherical_harmonics import MultiIndex, enumerate_basis, harmonic_count

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "FieldSample",
    "ModelParams",
    "Truncation",
    "TruncationSpec",
    "covariance_closed",
    "covariance_partial",
    "resolve_truncation",
    "sample_field",
    "ZeroStore",
    "ZeroTable",
    "bessel_j",
    "bessel_zeros",
    "g_m",
    "MultiIndex",
    "enumerate_basis",
    "harmonic_count",
    "__version__",
]
