"""Decay ratio of an emitter facing a single partially transparent mirror.

Two independent routes to Gamma_mir / Gamma_free for a dipole lying in
the mirror plane at distance d (entering only as k0*d):

* a closed form, 1 + (3 Re r / 2) * f(2 k0 d) with the shared kernel f;
* an angular quadrature of the interference integrand
  exp(-2i k0 d cos theta) over the full solid angle.

The quadrature route exists to referee the closed form, not to replace
it; both are exposed and sweeps can emit their difference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry, kernels
from .errors import InvalidParams
from .geometry import DipoleOrientation
from .results import RateResult

__all__ = ["MirrorSpec", "gamma_mirror_closed", "gamma_mirror_quadrature"]

# Roundoff floor of assembling the ratio itself.
_RATIO_ERR_FLOOR = 4e-16


def _closed_form_err(re_r: float, x: float) -> float:
    """Roundoff bound on 1 + 1.5 * re_r * f(x).

    The direct branch of f sums terms of size up to 1/x^2 and 1/x^3 that
    nearly cancel, so its absolute error scales with the envelope of the
    term magnitudes, not with |f|.
    """
    if abs(x) < kernels.F_TAYLOR_CROSSOVER:
        f_err = 4e-16
    else:
        f_err = 2.5e-16 * float(kernels.f_envelope(x))
    return 1.5 * abs(re_r) * f_err + _RATIO_ERR_FLOOR


@dataclass(frozen=True)
class MirrorSpec:
    """A lossless, partially transparent mirror.

    The complex reflection amplitude ``r`` is accepted in full, but only its
    real part enters the decay ratio; the transmission amplitude is derived
    from unitarity, t = sqrt(1 - |r|^2) >= 0.
    """

    r: complex
    t: float = field(init=False)

    def __post_init__(self):
        r = complex(self.r)
        if abs(r) > 1.0 + 1e-12:
            raise InvalidParams(f"|r| must be <= 1, got {abs(r)!r}")
        t = math.sqrt(max(0.0, 1.0 - abs(r) ** 2))
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "t", t)


def _check_mirror_args(re_r: float, k0d: float):
    if not -1.0 <= re_r <= 1.0:
        raise InvalidParams(f"re_r must lie in [-1, 1], got {re_r!r}")
    if not k0d >= 0.0:
        raise InvalidParams(f"k0d must be >= 0, got {k0d!r}")


def gamma_mirror_closed(re_r: float, k0d: float) -> RateResult:
    """Closed-form decay ratio 1 + (3 re_r / 2) * f(2 k0d).

    At k0d = 0 the kernel limit f(0) = 2/3 gives exactly 1 + re_r: a
    perfectly reflecting phase-flipping mirror (re_r = -1) suppresses the
    decay to zero at contact, a phase-preserving one (re_r = +1) doubles
    it. For k0d -> infinity the ratio returns to 1.
    """
    _check_mirror_args(re_r, k0d)
    ratio = 1.0 + 1.5 * re_r * kernels.f_kernel(2.0 * k0d)
    return RateResult(ratio=float(ratio), method="closed_form",
                      err_estimate=_closed_form_err(re_r, 2.0 * k0d))


def gamma_mirror_quadrature(re_r: float, k0d: float, tol: float = 1e-9,
                            dhat: DipoleOrientation | None = None,
                            max_evals: int = 40_000_000) -> RateResult:
    """Decay ratio by direct solid-angle quadrature of the interference term.

    ratio = 1 + (3 re_r / 8 pi) * Re int dOmega e^{-2 i k0d cos theta}
    * (transverse dipole weight). Used as the independent referee of
    gamma_mirror_closed; the two agree to quadrature accuracy.

    Raises
    ------
    NonConvergence
        Propagated from the quadrature engine.
    """
    _check_mirror_args(re_r, k0d)
    if dhat is None:
        dhat = DipoleOrientation()

    def integrand(theta, phi):
        weight = geometry.transverse_weight_sum(dhat, theta, phi)
        return np.exp(-2j * k0d * np.cos(theta)) * weight

    resolution = geometry.oscillation_nodes(2.0 * k0d)
    integral, err_int = geometry.solid_angle_integrate(
        integrand, resolution=resolution, tol=tol, max_evals=max_evals)
    coeff = 3.0 * re_r / (8.0 * math.pi)
    ratio = 1.0 + coeff * integral.real
    err = abs(coeff) * err_int + _RATIO_ERR_FLOOR
    return RateResult(ratio=float(ratio), method="quadrature", err_estimate=err)
