"""Decay ratio of an emitter centered between two identical planar mirrors.

Three independent routes to Gamma_cav / Gamma_free:

* quadrature: solid-angle integral of the transverse dipole weight times
  the closed multiple-reflection kernel (resummed geometric series);
* series: the truncated double reflection sum over bounce orders, kept
  as a genuinely different evaluation path (no kernel resummation);
* limits: the subwavelength closed forms (zeroth and second order in
  k0d), which also serve the |r_mir| = 1 endpoints the other routes
  must reject.

The routes referee each other; sweeps can emit all three side by side.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import geometry, kernels
from .errors import DegenerateMirror, InvalidParams, TailTooLarge
from .geometry import DipoleOrientation
from .kernels import F_TAYLOR_CROSSOVER, f_envelope, f_kernel, interference_kernel
from .results import RateResult

__all__ = [
    "CavitySpec",
    "SeriesControl",
    "f_kernel",
    "interference_kernel",
    "gamma_cavity_quadrature",
    "gamma_cavity_series",
    "gamma_subwavelength_limit",
    "gamma_subwavelength_2nd",
    "default_n_max",
]

#: Largest |m| * k0d kept in the series; beyond it the kernel envelope
#: 1/y + 1/y^2 + 1/y^3 is below ~1e-3 and the dropped mass is accounted
#: for in the error estimate.
M_PHASE_CLAMP = 1000.0

#: Soft validity edge of the second-order subwavelength expansion.
SUBWAVELENGTH_SOFT_MAX = 0.3

_N_MAX_FLOOR = 8
_N_MAX_CAP = 100_000


@dataclass(frozen=True)
class CavitySpec:
    """Symmetric lossless cavity: real mirror rate and scaled separation.

    Parameters
    ----------
    r_mir : float
        Real reflection amplitude, strictly inside (-1, 1); the +-1 endpoints
        are served by the analytic limit operations only.
    k0d : float
        Mirror separation times the transition wavenumber, > 0.
    """

    r_mir: float
    k0d: float

    def __post_init__(self):
        if abs(self.r_mir) >= 1.0:
            raise DegenerateMirror(
                f"|r_mir| must be < 1 for quadrature/series routes, got {self.r_mir!r}")
        if not self.k0d > 0.0:
            raise InvalidParams(f"k0d must be positive, got {self.k0d!r}")

    @property
    def t_mir_sq(self) -> float:
        """Transmission rate squared, 1 - r_mir^2."""
        return 1.0 - self.r_mir ** 2


@dataclass(frozen=True)
class SeriesControl:
    """Truncation control for the bounce series.

    n_max = None lets the library pick the smallest order whose tail
    bound meets tail_tol (see default_n_max).
    """

    n_max: int | None = None
    tail_tol: float = 1e-8

    def __post_init__(self):
        if self.n_max is not None and self.n_max < 0:
            raise InvalidParams(f"n_max must be >= 0, got {self.n_max!r}")
        if not self.tail_tol > 0.0:
            raise InvalidParams(f"tail_tol must be positive, got {self.tail_tol!r}")


def _series_tail_bound(r: float, n_max: int) -> float:
    """Upper bound on the mass dropped by truncating at bounce order n_max.

    The slowest dropped direction decays like r^(2n) (single-sided bounce
    ladders), so the bound carries |r|^(2(n_max+1)); the two dropped index
    families contribute the bracketed geometric factors.
    """
    ar = abs(r)
    if ar == 0.0:
        return 0.0
    return ((1.0 + ar) ** 2 * ar ** (2 * (n_max + 1))
            * (1.0 / (1.0 - ar ** 2) + 1.0 / (1.0 - ar ** 4)))


def default_n_max(r_mir: float, tail_tol: float) -> int:
    """Smallest truncation order meeting tail_tol, clamped to [8, 1e5]."""
    ar = abs(r_mir)
    if ar == 0.0:
        return _N_MAX_FLOOR
    # quartic-tail heuristic kept as a floor
    n_quartic = math.ceil(math.log(tail_tol) / (4.0 * math.log(ar)))
    bracket = (1.0 + ar) ** 2 * (1.0 / (1.0 - ar ** 2) + 1.0 / (1.0 - ar ** 4))
    n_honest = math.ceil(math.log(tail_tol / bracket) / (2.0 * math.log(ar))) - 1
    n = max(n_quartic, n_honest, _N_MAX_FLOOR)
    return min(n, _N_MAX_CAP)


def gamma_cavity_quadrature(spec: CavitySpec, tol: float = 1e-9,
                            dhat: DipoleOrientation | None = None,
                            max_evals: int = 40_000_000) -> RateResult:
    """Decay ratio by solid-angle quadrature of the resummed kernel.

    ratio = (3 / 8 pi) * int dOmega (transverse dipole weight)
    * interference_kernel(r_mir, k0d cos theta). Near |r_mir| -> 1 the
    kernel develops sharp resonance peaks in cos theta; their locations
    and graded neighborhoods are passed to the quadrature engine as
    panel breakpoints so refinement cannot silently straddle a peak.

    Raises
    ------
    NonConvergence
        If the node budget runs out (expected for very high finesse
        together with large k0d); reported, never masked.
    """
    r, k0d = spec.r_mir, spec.k0d
    if dhat is None:
        dhat = DipoleOrientation()

    def integrand(theta, phi):
        weight = geometry.transverse_weight_sum(dhat, theta, phi)
        return weight * interference_kernel(r, k0d * np.cos(theta))

    breakpoints: list[float] = []
    if r != 0.0:
        # kernel peaks sit at xi = j*pi/k0d, j even for r > 0, odd for r < 0
        halfwidth = (1.0 - r * r) / (2.0 * abs(r) * k0d)
        j = 0 if r > 0.0 else 1
        while j * math.pi / k0d < 1.0 + 16.0 * halfwidth:
            center = j * math.pi / k0d
            for offset in (0.0, halfwidth, 4.0 * halfwidth, 16.0 * halfwidth):
                for signed in ((center + offset, center - offset)
                               if offset else (center,)):
                    breakpoints.extend((signed, -signed))
            j += 2
    sharpness = 2 if abs(r) > 0.9 else 1
    resolution = sharpness * geometry.oscillation_nodes(k0d)
    integral, err_int = geometry.solid_angle_integrate(
        integrand, resolution=resolution, tol=tol,
        xi_breakpoints=breakpoints or None, max_evals=max_evals)
    coeff = 3.0 / (8.0 * math.pi)
    return RateResult(ratio=coeff * integral.real, method="quadrature",
                      err_estimate=coeff * err_int)


def gamma_cavity_series(spec: CavitySpec,
                        control: SeriesControl | None = None) -> RateResult:
    """Decay ratio from the truncated double reflection sum.

    Sums bounce orders n = 0..n_max and relative orders m = -n_max..n:

        (3/2) t^2 * sum_{n,m} r^(4n-2m) [ (1+r^2) f(2m k0d)
                                          + r f((2m-1) k0d)
                                          + r f((2m+1) k0d) ]

    evaluated by collapsing the n sum in closed form per m (an exact
    regrouping of the same truncated sum, O(n_max) instead of
    O(n_max^2)). The reported err_estimate adds the truncation tail
    bound and the envelope mass of any m dropped by the phase clamp
    |m| * k0d <= M_PHASE_CLAMP.

    Raises
    ------
    TailTooLarge
        If the tail bound at the chosen n_max exceeds control.tail_tol.
    """
    if control is None:
        control = SeriesControl()
    r, k0d = spec.r_mir, spec.k0d
    t2 = spec.t_mir_sq
    n_max = (control.n_max if control.n_max is not None
             else default_n_max(r, control.tail_tol))
    tail = _series_tail_bound(r, n_max)
    if tail > control.tail_tol:
        raise TailTooLarge(
            f"series tail bound {tail:.3g} exceeds tail_tol "
            f"{control.tail_tol:.3g} at n_max={n_max}", bound=tail,
            tol=control.tail_tol)

    m_cap = int(min(n_max, math.floor(M_PHASE_CLAMP / k0d)))
    m_cap = max(m_cap, 0)
    m = np.arange(-m_cap, m_cap + 1)
    am = np.abs(m)

    # f on the shared grid j*k0d, j = 0..2*m_cap+1 (f is even)
    f_grid = kernels.f_kernel(k0d * np.arange(2 * m_cap + 2))
    f_terms = ((1.0 + r * r) * f_grid[2 * am]
               + r * f_grid[np.abs(2 * m - 1)]
               + r * f_grid[np.abs(2 * m + 1)])

    # closed n sum at fixed m: sum_{n=max(m,0)}^{n_max} r^(4n-2m)
    r2 = r * r
    r4 = r2 * r2
    if r == 0.0:
        weights = (m == 0).astype(float)
    else:
        top = np.where(m > 0, n_max - m + 1, n_max + 1)
        weights = r2 ** am * (1.0 - r4 ** top) / (1.0 - r4)

    ratio = 1.5 * t2 * float(np.dot(weights, f_terms))

    err = tail + 1e-14
    if m_cap < n_max:
        # envelope mass of the clamped-away |m| > m_cap terms
        y0 = (2 * m_cap + 1) * k0d
        ar = abs(r)
        dropped = (3.0 * t2 * (1.0 + ar) ** 2 * f_envelope(y0)
                   * ar ** (2 * (m_cap + 1)) / ((1.0 - r4) * (1.0 - r2)))
        err += dropped
    return RateResult(ratio=ratio, method="series", err_estimate=err)


def _check_limit_r(r_mir: float):
    if r_mir == -1.0:
        return
    if abs(r_mir) >= 1.0:
        raise DegenerateMirror(
            f"subwavelength limits require -1 <= r_mir < 1, got {r_mir!r}")


def gamma_subwavelength_limit(r_mir: float) -> RateResult:
    """Leading subwavelength decay ratio (1 + r_mir) / (1 - r_mir).

    Valid for k0d -> 0. Accepts the r_mir = -1 endpoint (perfectly
    reflecting phase-flipping mirrors), where the ratio is exactly 0;
    r_mir = +1 diverges and raises DegenerateMirror.
    """
    _check_limit_r(r_mir)
    ratio = (1.0 + r_mir) / (1.0 - r_mir)
    return RateResult(ratio=ratio, method="limit", err_estimate=0.0)


def gamma_subwavelength_2nd(r_mir: float, k0d: float) -> RateResult:
    """Subwavelength decay ratio through second order in k0d.

    ratio = (1+r)/(1-r) * [1 - (2/5) r k0d^2 / (1-r)^2]. The expansion
    parameter is r k0d^2/(1-r)^2, so highly reflective plasmonic mirrors
    (r near +1) exhaust its validity well before k0d ~ 0.3; a soft
    warning marks k0d beyond that edge. err_estimate is the magnitude of
    the next omitted order, |limit| * ((2/5) r k0d^2/(1-r)^2)^2 -- a
    scale, not a bound.
    """
    _check_limit_r(r_mir)
    if not k0d >= 0.0:
        raise InvalidParams(f"k0d must be >= 0, got {k0d!r}")
    if k0d > SUBWAVELENGTH_SOFT_MAX:
        warnings.warn(
            f"second-order subwavelength form evaluated at k0d={k0d:g} > "
            f"{SUBWAVELENGTH_SOFT_MAX}; truncation error is uncontrolled",
            stacklevel=2)
    limit = (1.0 + r_mir) / (1.0 - r_mir)
    correction = 0.4 * r_mir * k0d ** 2 / (1.0 - r_mir) ** 2
    ratio = limit * (1.0 - correction)
    return RateResult(ratio=ratio, method="limit",
                      err_estimate=abs(limit) * correction ** 2)
