"""Common result container for decay-ratio computations."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParams

#: Allowed values of RateResult.method.
METHODS = ("closed_form", "quadrature", "series", "limit")


@dataclass(frozen=True)
class RateResult:
    """A dimensionless decay ratio (rate over the free-space rate).

    Attributes
    ----------
    ratio : float
        Decay rate divided by the free-space rate.
    method : str
        One of METHODS; records which route produced the number so that
        downstream consumers never mix provenance silently.
    err_estimate : float
        Conservative estimate of the numerical error in ``ratio``
        (truncation bound for series, refinement delta for quadrature,
        roundoff scale for closed forms).
    """

    ratio: float
    method: str
    err_estimate: float

    def __post_init__(self):
        if not math.isfinite(self.ratio):
            raise InvalidParams(f"non-finite ratio {self.ratio!r}")
        if self.method not in METHODS:
            raise InvalidParams(f"unknown method {self.method!r}")
        if not (self.err_estimate >= 0.0):
            raise InvalidParams(f"negative err_estimate {self.err_estimate!r}")
