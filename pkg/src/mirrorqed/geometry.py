"""Propagation directions, polarization frames, and solid-angle quadrature.

Geometry conventions
--------------------
The mirror surfaces used elsewhere in this package are planes of constant
x, so the polar axis of the spherical frame is the x axis. A propagation
direction with polar angle ``theta`` (measured from +x) and azimuth
``phi`` (measured around x, from +y toward +z) is the unit vector

    s   = (cos theta,  cos phi sin theta,  sin phi sin theta)

and the two transverse polarization unit vectors completing the frame are

    e_H = (0,          sin phi,           -cos phi)
    e_V = (sin theta, -cos phi cos theta, -sin phi cos theta)

The triple (s, e_H, e_V) is orthonormal for every direction; e_H lies in
the mirror plane, e_V completes the right-handed-up-to-sign frame. A
dipole orientation d picks out the transverse weights |d . e_H|^2 and
|d . e_V|^2 whose solid-angle integrals drive every decay rate in this
package.

The quadrature engine integrates smooth (possibly oscillatory) functions
over the full solid angle with a product rule: composite 16-point
Gauss-Legendre panels in xi = cos theta (the substitution absorbs the
sin theta Jacobian) crossed with a uniform trapezoid in phi, which is
spectrally accurate for the periodic integrands that occur here. Panels
are doubled until two levels agree, and callers integrating sharply
peaked kernels can pass breakpoints so panel edges land on the peaks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParams, NonConvergence

__all__ = [
    "Direction",
    "PolarizationBasis",
    "DipoleOrientation",
    "basis_vectors",
    "dipole_weight",
    "transverse_weight_sum",
    "oscillation_nodes",
    "solid_angle_integrate",
]

_TWO_PI = 2.0 * math.pi


def _normalize_angles(theta: float, phi: float) -> tuple[float, float]:
    """Fold arbitrary angles into theta in [0, pi], phi in [0, 2*pi)."""
    theta = float(theta) % _TWO_PI
    if theta > math.pi:
        theta = _TWO_PI - theta
        phi = phi + math.pi
    return theta, float(phi) % _TWO_PI


@dataclass(frozen=True)
class Direction:
    """A propagation direction on the unit sphere.

    Angles outside the canonical ranges are folded by periodicity on
    construction, so every instance satisfies ``0 <= theta <= pi`` and
    ``0 <= phi < 2*pi``.

    Parameters
    ----------
    theta : float
        Polar angle from the +x axis, radians.
    phi : float
        Azimuth around x, radians.
    """

    theta: float
    phi: float

    def __post_init__(self):
        th, ph = _normalize_angles(self.theta, self.phi)
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "phi", ph)

    @property
    def unit_vector(self) -> np.ndarray:
        """The Cartesian unit vector s for this direction."""
        st = math.sin(self.theta)
        return np.array([
            math.cos(self.theta),
            math.cos(self.phi) * st,
            math.sin(self.phi) * st,
        ])


@dataclass(frozen=True, eq=False)
class PolarizationBasis:
    """Orthonormal triple (s, e_H, e_V) attached to a direction."""

    s: np.ndarray
    e_h: np.ndarray
    e_v: np.ndarray


@dataclass(frozen=True, eq=False)
class DipoleOrientation:
    """A real unit vector giving the dipole direction.

    The default (0, 0, 1) lies in the mirror plane, which is the
    configuration every closed-form rate in this package assumes.
    """

    vec: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    def __post_init__(self):
        v = np.asarray(self.vec, dtype=float)
        if v.shape != (3,):
            raise InvalidParams(f"dipole orientation must be a 3-vector, got {v.shape}")
        n = float(np.linalg.norm(v))
        if not n > 0.0:
            raise InvalidParams("dipole orientation must be nonzero")
        object.__setattr__(self, "vec", v / n)


def basis_vectors(direction: Direction) -> PolarizationBasis:
    """Build the polarization frame for one direction.

    Parameters
    ----------
    direction : Direction

    Returns
    -------
    PolarizationBasis
        Triple (s, e_H, e_V); pairwise orthonormal to machine precision.

    Examples
    --------
    >>> b = basis_vectors(Direction(0.0, 0.0))
    >>> b.s
    array([1., 0., 0.])
    >>> b.e_h
    array([ 0.,  0., -1.])
    >>> b.e_v
    array([ 0., -1.,  0.])
    """
    th, ph = direction.theta, direction.phi
    st, ct = math.sin(th), math.cos(th)
    sp, cp = math.sin(ph), math.cos(ph)
    s = np.array([ct, cp * st, sp * st])
    e_h = np.array([0.0, sp, -cp])
    e_v = np.array([st, -cp * ct, -sp * ct])
    return PolarizationBasis(s=s, e_h=e_h, e_v=e_v)


def dipole_weight(dhat: DipoleOrientation, direction: Direction) -> tuple[float, float]:
    """Squared dipole projections onto the two transverse polarizations.

    Returns
    -------
    (w_h, w_v) : tuple of float
        ``w_h = (d . e_H)**2`` and ``w_v = (d . e_V)**2``. Together with
        the longitudinal projection they resolve the identity
        ``w_h + w_v + (d . s)**2 == 1``.
    """
    basis = basis_vectors(direction)
    d = dhat.vec
    w_h = float(np.dot(d, basis.e_h)) ** 2
    w_v = float(np.dot(d, basis.e_v)) ** 2
    return w_h, w_v


def transverse_weight_sum(dhat: DipoleOrientation, theta, phi):
    """Vectorized ``w_h + w_v`` over broadcastable angle arrays.

    This is the angular weight under every rate integral. For the default
    dipole (0, 0, 1) it reduces to ``cos(phi)**2 + sin(phi)**2 *
    cos(theta)**2``.

    Parameters
    ----------
    dhat : DipoleOrientation
    theta, phi : array_like
        Angle arrays; broadcast against each other.

    Returns
    -------
    numpy.ndarray
    """
    dx, dy, dz = dhat.vec
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    proj_h = dy * sp - dz * cp
    proj_v = dx * st - dy * cp * ct - dz * sp * ct
    return proj_h ** 2 + proj_v ** 2


def oscillation_nodes(rate: float) -> int:
    """Node-count hint for integrands with phase rate ``rate`` per unit xi.

    max(64, 8 * ceil(rate)) resolves phase factors exp(i * rate * xi)
    with generous margin; callers pass the hint to solid_angle_integrate.
    """
    return max(64, 8 * int(math.ceil(max(rate, 0.0))))


# 16-point Gauss-Legendre panel rule, cached once.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)

_MAX_LEVELS = 16
_PHI_CAP = 256
#: Roundoff floor on the reported error estimate, relative to max(1, |I|).
_ERR_FLOOR = 4e-16


def _panel_points(edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on each panel [edges[i], edges[i+1]]."""
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    xi = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return xi, w


def solid_angle_integrate(integrand, resolution: int = 64, tol: float = 1e-9,
                          xi_breakpoints=None, max_evals: int = 40_000_000):
    """Integrate a function over the unit sphere, sin(theta) weight included.

    Evaluates ``int_0^pi dtheta sin(theta) int_0^{2 pi} dphi
    integrand(theta, phi)`` by composite Gauss-Legendre panels in
    xi = cos(theta) crossed with a periodic trapezoid in phi, doubling
    the panel count (and the phi nodes, up to a cap) until two successive
    levels agree to ``tol`` relative to max(1, |I|).

    Parameters
    ----------
    integrand : callable
        Vectorized function of broadcast arrays (theta, phi) returning
        float or complex values; must be finite on the open domain.
    resolution : int
        Node-count hint for the xi axis at the first level; raise it for
        oscillatory integrands (see oscillation_nodes). Must be >= 8.
    tol : float
        Relative tolerance of the two-level agreement test.
    xi_breakpoints : sequence of float, optional
        Points in (-1, 1) that panel edges should land on, e.g. locations
        and graded neighborhoods of sharp kernel peaks.
    max_evals : int
        Budget of integrand evaluations across all levels.

    Returns
    -------
    (value, err_estimate) : (complex, float)
        The integral and a conservative error estimate (twice the last
        two-level difference, floored at the roundoff scale).

    Raises
    ------
    InvalidParams
        If resolution < 8 or tol <= 0.
    NonConvergence
        If the budget is exhausted before two levels agree; the exception
        carries the best value and its estimated error.
    """
    if resolution < 8:
        raise InvalidParams(f"resolution must be >= 8, got {resolution}")
    if not tol > 0.0:
        raise InvalidParams(f"tol must be positive, got {tol}")

    n_panels = max(4, int(math.ceil(resolution / 16)))
    edges = np.linspace(-1.0, 1.0, n_panels + 1)
    if xi_breakpoints is not None:
        pts = np.asarray(list(xi_breakpoints), dtype=float)
        pts = pts[(pts > -1.0) & (pts < 1.0)]
        if pts.size:
            edges = np.unique(np.concatenate([edges, pts]))
            # drop edges closer than resolvable spacing
            keep = np.concatenate([[True], np.diff(edges) > 1e-12])
            edges = edges[keep]

    n_phi = 16
    prev = None
    value = None
    err = math.inf
    evals = 0
    for _ in range(_MAX_LEVELS):
        xi, w = _panel_points(edges)
        theta = np.arccos(np.clip(xi, -1.0, 1.0))
        phi = (_TWO_PI / n_phi) * np.arange(n_phi)
        vals = np.asarray(integrand(theta[:, None], phi[None, :]))
        evals += vals.size
        value = complex((_TWO_PI / n_phi) * np.dot(w, vals.sum(axis=1)))
        if prev is not None:
            diff = abs(value - prev)
            err = max(2.0 * diff, _ERR_FLOOR * max(1.0, abs(value)))
            if err <= tol * max(1.0, abs(value)):
                return value, err
        prev = value
        if evals >= max_evals:
            raise NonConvergence(
                f"solid-angle quadrature: {evals} evaluations without "
                f"two-level agreement at tol={tol:g} (err~{err:.3g})",
                value=value, err_estimate=err, n_evals=evals)
        edges = np.sort(np.concatenate([edges, 0.5 * (edges[1:] + edges[:-1])]))
        n_phi = min(2 * n_phi, _PHI_CAP)
    raise NonConvergence(
        f"solid-angle quadrature: no convergence after {_MAX_LEVELS} levels "
        f"({evals} evaluations, err~{err:.3g})",
        value=value, err_estimate=err, n_evals=evals)
