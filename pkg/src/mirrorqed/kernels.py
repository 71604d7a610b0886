"""Scalar interference kernels shared by the mirror and cavity rates."""

from __future__ import annotations

import numpy as np

from .errors import DegenerateMirror

__all__ = ["f_kernel", "f_envelope", "interference_kernel", "F_TAYLOR_CROSSOVER"]

# Even Taylor coefficients of sin x/x + cos x/x^2 - sin x/x^3 about 0,
# powers x^0, x^2, x^4, x^6, x^8. Next term is -x^10/43243200.
_F_C0 = 2.0 / 3.0
_F_C2 = -2.0 / 15.0
_F_C4 = 1.0 / 140.0
_F_C6 = -1.0 / 5670.0
_F_C8 = 1.0 / 399168.0

# Crossover sized so the Taylor remainder (~x^10/4.3e7) and the direct
# branch's cancellation noise (~eps/x^2) are both far below 1e-12.
F_TAYLOR_CROSSOVER = 0.1


def _f_taylor(x):
    x2 = x * x
    return _F_C0 + x2 * (_F_C2 + x2 * (_F_C4 + x2 * (_F_C6 + x2 * _F_C8)))


def _f_direct(x):
    s, c = np.sin(x), np.cos(x)
    return s / x + c / (x * x) - s / (x * x * x)


def f_kernel(x):
    """sin x/x + cos x/x^2 - sin x/x^3, stable through x = 0.

    Even in x, maximum f(0) = 2/3, decays like sin(x)/x for large |x|.
    Below |x| = F_TAYLOR_CROSSOVER the three-term form loses digits to
    cancellation and an even Taylor polynomial (through x^8) is used
    instead. Accepts scalars or arrays.
    """
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.empty_like(arr)
    small = np.abs(arr) < F_TAYLOR_CROSSOVER
    if small.any():
        out[small] = _f_taylor(arr[small])
    if (~small).any():
        out[~small] = _f_direct(arr[~small])
    return float(out[0]) if scalar else out


def f_envelope(y):
    """Upper bound 1/|y| + 1/y^2 + 1/|y|^3 on |f| for y != 0."""
    ay = np.abs(y)
    return 1.0 / ay + 1.0 / ay ** 2 + 1.0 / ay ** 3


def interference_kernel(r_mir: float, x):
    """Two-mirror intensity kernel t^2 |1 + r e^{-ix}|^2 / |1 - r^2 e^{-2ix}|^2.

    Closed resummation of the multiple-reflection amplitude series at
    phase x per pass. Nonnegative for all x; peaks where the round-trip
    phase 2x is a multiple of 2*pi, with height (1+r)/(1-r) at the even
    resonances for r > 0 (odd ones for r < 0). Accepts scalar or array x.

    Raises DegenerateMirror for |r_mir| >= 1 (t = 0 makes the ratio 0/0).
    """
    r = float(r_mir)
    if abs(r) >= 1.0:
        raise DegenerateMirror(f"|r_mir| must be < 1, got {r_mir!r}")
    x = np.asarray(x, dtype=float)
    t2 = 1.0 - r * r
    # cancellation-free forms of |1 + r e^{-ix}|^2 and |1 - r^2 e^{-2ix}|^2
    num = (1.0 + r) ** 2 - 4.0 * r * np.sin(0.5 * x) ** 2
    den = t2 * t2 + 4.0 * (r * np.sin(x)) ** 2
    out = t2 * num / den
    return float(out) if out.ndim == 0 else out
