"""Closed-form distortion of the cubic representation maps.

For a chart point with face coordinates ``c`` (length n) write
``r^2 = 1 + |c|^2``. The lift ``e / r`` has Jacobian

    row of the fixed axis:  -s c^T / r^3
    remaining rows:         (r^2 I - c c^T) / r^3

and pulls the round metric back to ``G = (r^2 I - c c^T) / r^4``. The
stretch factor of a unit tangent ``v`` is ``sqrt(r^2 - (c.v)^2) / r^2``,
which ranges over exactly [1/(n+1), 1]: the minimum sits at a cube corner
with ``v`` along the diagonal, the maximum at the face center.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

import numpy as np

from .cubic import ChartPoint
from .errors import InvalidArgument


@dataclass(frozen=True)
class DistortionRange:
    """Closed interval ``[lo, hi]`` of distance ratios.

    Endpoints may be :class:`fractions.Fraction` to keep exact arithmetic
    through :func:`compose`; ``float(...)`` them at the boundary.
    """

    lo: Real
    hi: Real

    def __post_init__(self):
        if not (0 < self.lo <= self.hi):
            raise InvalidArgument(f"need 0 < lo <= hi, got [{self.lo}, {self.hi}]")

    def constant(self) -> Real:
        """Largest expansion or contraction factor, ``max(hi, 1/lo)``."""
        inv = Fraction(1) / self.lo if isinstance(self.lo, Fraction) else 1.0 / self.lo
        return max(self.hi, inv)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return float(self.lo) - tol <= x <= float(self.hi) + tol

    def scaled(self, c: Real) -> "DistortionRange":
        return compose(self, DistortionRange(c, c))

    def as_floats(self) -> tuple[float, float]:
        return float(self.lo), float(self.hi)


def compose(first: DistortionRange, then: DistortionRange) -> DistortionRange:
    """Range containing that of ``g o f`` when ``f`` has ``first`` and ``g`` has ``then``.

    Exact (not merely containing) when ``then`` is a single value.
    """
    return DistortionRange(then.lo * first.lo, then.hi * first.hi)


def _coords(p) -> np.ndarray:
    if isinstance(p, ChartPoint):
        return np.asarray(p.coords)
    return np.asarray(p, dtype=float)


def jacobian_mu(p) -> np.ndarray:
    """Jacobian of the lift at ``p``, shape ``(n+1, n)``.

    A bare coordinate array is read in the +first-axis chart (``w = 1``
    for S3). Other charts reuse the same block with the fixed row moved to
    the chart's axis and scaled by its sign.
    """
    c = _coords(p)
    n = c.size
    r2 = 1.0 + c @ c
    r3 = r2 * math.sqrt(r2)
    body = (r2 * np.eye(n) - np.outer(c, c)) / r3
    top = -c / r3
    if isinstance(p, ChartPoint):
        axis, sign = p.chart.axis, p.chart.embed_sign
    else:
        axis, sign = 0, 1
    return np.insert(body, axis, sign * top, axis=0)


def jacobian_mu3(p) -> np.ndarray:
    """4x3 Jacobian of the S3 lift; see :func:`jacobian_mu`."""
    J = jacobian_mu(p)
    if J.shape != (4, 3):
        raise InvalidArgument("jacobian_mu3 needs a point of an S3 or SO(3) chart")
    return J


def pullback_form(p) -> np.ndarray:
    """Pulled-back round metric ``(r^2 I - c c^T) / r^4`` in face coordinates."""
    c = _coords(p)
    r2 = 1.0 + c @ c
    return (r2 * np.eye(c.size) - np.outer(c, c)) / (r2 * r2)


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n == 0.0):
        raise InvalidArgument("tangent vector must be nonzero")
    return v / n


def _cross_sq(c, v) -> np.ndarray:
    """``sum_{i<j} (c_i v_j - c_j v_i)^2`` over the last axis."""
    n = c.shape[-1]
    out = np.zeros(c.shape[:-1])
    for i in range(n):
        for j in range(i + 1, n):
            t = c[..., i] * v[..., j] - c[..., j] * v[..., i]
            out += t * t
    return out


def metric_distortion_batch(c, v) -> np.ndarray:
    """Stretch factor for rows of coordinates ``c`` and tangents ``v`` (normalized here).

    Evaluated as ``sqrt(1 + sum_{i<j} (c_i v_j - c_j v_i)^2) / r^2``: every term
    is non-negative, so there is no cancellation near the corners (the
    equivalent ``r^2 - (c.v)^2`` loses digits there).
    """
    c = np.asarray(c, dtype=float)
    v = _unit(v)
    r2 = 1.0 + np.sum(c * c, axis=-1)
    return np.sqrt(1.0 + _cross_sq(c, v)) / r2


def metric_distortion(p, v) -> float:
    """Ratio ``|v|_pullback / |v|`` at ``p``; lies in [1/(n+1), 1]."""
    return float(metric_distortion_batch(_coords(p), v))


def energy_forms(p, v) -> tuple[float, float]:
    """The squared-stretch numerator in its two rewritings, for unit ``v``.

    Returns ``(1 + sum_{i<j} (c_i v_j - c_j v_i)^2, r^2 - (c.v)^2)``. They agree
    by Lagrange's identity; the first exposes the lower bound, the second
    the upper.
    """
    c = _coords(p)
    v = _unit(v)
    return float(1.0 + _cross_sq(c, v)), float(1.0 + c @ c - (c @ v) ** 2)


def energy_expanded(p, v) -> float:
    """Same numerator written term by term: ``sum (r^2 - c_i^2) v_i^2 - 2 sum_{i<j} c_i c_j v_i v_j``."""
    c = _coords(p)
    v = _unit(v)
    r2 = 1.0 + c @ c
    n = c.size
    diag = sum((r2 - c[i] ** 2) * v[i] ** 2 for i in range(n))
    off = sum(c[i] * c[j] * v[i] * v[j] for i in range(n) for j in range(i + 1, n))
    return diag - 2.0 * off


def _check_n(n: int) -> int:
    if n not in (2, 3):
        raise InvalidArgument(f"only the cubic models of S2 and S3 are supported, got n={n}")
    return n


def distortion_range_mu(n: int) -> DistortionRange:
    """Exact range ``[1/(n+1), 1]`` of the lift from d[-1,1]^(n+1) to S^n."""
    _check_n(n)
    return DistortionRange(Fraction(1, n + 1), Fraction(1))


def scaled_model_range(n: int, scale) -> DistortionRange:
    """Range of the lift from d[-K,K]^(n+1): the unit range followed by scaling 1/K.

    Integer or Fraction ``scale`` keeps the endpoints exact.
    """
    base = distortion_range_mu(n)
    if not scale > 0:
        raise InvalidArgument(f"scale K must be positive, got {scale}")
    if isinstance(scale, (int, Fraction)):
        inv = 1 / Fraction(scale)
    else:
        inv = 1.0 / scale
        base = DistortionRange(*base.as_floats())
    return compose(base, DistortionRange(inv, inv))


def optimal_scale(n: int, dyadic_only: bool = False) -> tuple[float, float]:
    """Scale ``K`` minimizing ``max(1/K, (n+1) K)`` and the resulting constant.

    The unrestricted optimum is ``K = 1/sqrt(n+1)``. With ``dyadic_only``
    the search is over powers of two (ties go to the larger K).
    """
    _check_n(n)
    if not dyadic_only:
        return 1.0 / math.sqrt(n + 1), math.sqrt(n + 1)
    best = None
    for e in range(-16, 17):
        K = math.ldexp(1.0, e)
        C0 = max(1.0 / K, (n + 1) * K)
        if best is None or C0 <= best[1]:
            best = (K, C0)
    return best


def so3_range(n: int = 3, scale: float = 1.0) -> DistortionRange:
    """Range of the cubic SO(3) model with the rotation-angle distance: twice the S3 range."""
    return scaled_model_range(n, scale).scaled(2)
