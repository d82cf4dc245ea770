"""Gaussian-measure primitives and weighted quadrature rules.

All integrals here carry the Gaussian weight ``exp(-|x|^2/2)``.  Measures are
normalized (probability measures); raw weighted integrals are not.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr

from .errors import DegenerateElementError, InvalidIntervalError, UnsupportedOrderError

SQRT2PI = math.sqrt(2.0 * math.pi)
TRUNCATION = 12.0
MAX_RULE_ORDER = 64


class DegenerateDomainWarning(UserWarning):
    pass


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights of a quadrature rule.

    For interval rules ``nodes`` are abscissae; for the triangle rule they are
    barycentric triples and the weights sum to one (the reference measure).
    """

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def __post_init__(self):
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be strictly positive")

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def gauss_cdf_interval(a: float, b: float) -> float:
    """Standard normal measure of the interval (a, b); ``a``/``b`` may be +-inf.

    Differences are taken on the side of the tail they live in, so both
    endpoints far out in one tail keep full relative accuracy.
    """
    a = float(a)
    b = float(b)
    if math.isnan(a) or math.isnan(b):
        raise InvalidIntervalError("interval endpoints must not be NaN")
    if a > b:
        raise InvalidIntervalError(f"invalid interval ({a}, {b}): a > b")
    return float(gauss_interval(np.float64(a), np.float64(b)))


def gauss_interval(lo, hi) -> np.ndarray:
    """Vectorized standard normal measure of (lo, hi); entries with hi <= lo give 0."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    lo, hi = np.broadcast_arrays(lo, hi)
    right = lo >= 0.0
    left = hi <= 0.0
    out = ndtr(hi) - ndtr(lo)
    out = np.where(right, ndtr(-lo) - ndtr(-hi), out)
    out = np.where(left & ~right, ndtr(hi) - ndtr(lo), out)
    return np.where(hi > lo, out, 0.0)


def gaussian_density(x):
    return np.exp(-0.5 * np.square(x)) / SQRT2PI


@lru_cache(maxsize=None)
def _legendre(m: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(m)
    return x, w


def composite_rule(breaks: Sequence[float], m: int = 24, max_panel: float = 0.5,
                   smooth_ends: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights over consecutive ``breaks``.

    With ``smooth_ends`` each panel is pulled through the smoothstep map
    ``t -> 3t^2 - 2t^3`` so square-root behaviour at panel ends (vertical
    tangents of a profile) is integrated at spectral rate.
    """
    g, gw = _legendre(m)
    t = 0.5 * (g + 1.0)
    tw = 0.5 * gw
    if smooth_ends:
        s = t * t * (3.0 - 2.0 * t)
        sw = tw * 6.0 * t * (1.0 - t)
    else:
        s, sw = t, tw
    xs, ws = [], []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        if hi <= lo:
            continue
        k = max(1, int(math.ceil((hi - lo) / max_panel)))
        edges = np.linspace(lo, hi, k + 1)
        for u, v in zip(edges[:-1], edges[1:]):
            xs.append(u + (v - u) * s)
            ws.append((v - u) * sw)
    if not xs:
        return np.empty(0), np.empty(0)
    return np.concatenate(xs), np.concatenate(ws)


def weighted_interval_rule(a: float, b: float, order: int) -> QuadratureRule:
    """Composite Gauss-Legendre rule for integrals of ``f(x) exp(-x^2/2)`` on (a, b).

    The Gaussian weight is folded into the returned weights, so
    ``rule.integrate(f)`` approximates the weighted integral.  Monomials up to
    degree ``order`` are integrated to about 1e-12 relative accuracy.
    """
    if not (np.isfinite(a) and np.isfinite(b)) or a >= b:
        raise InvalidIntervalError(f"need finite a < b, got ({a}, {b})")
    if order < 1:
        raise UnsupportedOrderError("order must be >= 1")
    if order > MAX_RULE_ORDER:
        raise UnsupportedOrderError(f"order {order} exceeds cap {MAX_RULE_ORDER}")
    m = order // 2 + 16
    x, w = composite_rule([a, b], m=m, max_panel=1.0, smooth_ends=False)
    return QuadratureRule(nodes=x, weights=w * np.exp(-0.5 * x * x), order=order)


def _perm3(a: float, b: float):
    return [(a, b, b), (b, a, b), (b, b, a)]


def _perm6(a: float, b: float, c: float):
    return [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]


# 12-point symmetric rule of degree 6 (Dunavant); weights normalized to area 1.
_TRI_BARY = np.array(
    _perm3(0.501426509658179, 0.249286745170910)
    + _perm3(0.873821971016996, 0.063089014491502)
    + _perm6(0.053145049844817, 0.310352451033784, 0.636502499121399)
)
_TRI_W = np.array([0.116786275726379] * 3 + [0.050844906370207] * 3 + [0.082851075618374] * 6)
_TRI_W = _TRI_W / _TRI_W.sum()

TRIANGLE_RULE = QuadratureRule(nodes=_TRI_BARY, weights=_TRI_W, order=6)

DEGENERATE_AREA = 1e-14


def triangle_weighted_integral(vertices, f: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> float:
    """Integral of ``f(x, y) exp(-(x^2+y^2)/2)`` over a triangle (degree-6 rule)."""
    v = np.asarray(vertices, dtype=float).reshape(3, 2)
    d1 = v[1] - v[0]
    d2 = v[2] - v[0]
    area = 0.5 * abs(d1[0] * d2[1] - d1[1] * d2[0])
    if area < DEGENERATE_AREA:
        raise DegenerateElementError(f"triangle area {area:.3e} below {DEGENERATE_AREA}")
    q = TRIANGLE_RULE.nodes @ v
    vals = np.asarray(f(q[:, 0], q[:, 1]), dtype=float) * np.exp(-0.5 * (q * q).sum(axis=1))
    return float(area * np.dot(TRIANGLE_RULE.weights, vals))


def section_measure(top, bottom, breaks: Sequence[float], m: int = 24) -> float:
    """Gaussian measure of {x in breaks-range, bottom(x) < y < top(x)}."""
    x, w = composite_rule(breaks, m=m)
    if x.size == 0:
        return 0.0
    inner = gauss_interval(bottom(x), top(x))
    return float(np.dot(w, inner * gaussian_density(x)))


def gaussian_measure_2d(domain) -> float:
    """Standard Gaussian measure of a planar domain.

    Closed forms are used for the built-in shapes; anything else is integrated
    column by column over its vertical sections with panels split at the
    domain's breakpoints.
    """
    kind = getattr(domain, "kind", None)
    if kind == "plane":
        return 1.0
    if kind == "disk":
        return float(-math.expm1(-0.5 * domain.R ** 2))
    if kind == "rectangle":
        return gauss_cdf_interval(-domain.a, domain.a) * gauss_cdf_interval(-domain.b, domain.b)
    if kind == "strip":
        return gauss_cdf_interval(-domain.a, domain.a)
    if kind == "half_strip":
        return gauss_cdf_interval(-domain.a, domain.a) * gauss_cdf_interval(-math.inf, domain.top_level)
    breaks = list(domain.x_breaks())
    value = section_measure(domain.top, domain.bottom, breaks)
    if value <= 0.0:
        warnings.warn(f"domain {getattr(domain, 'name', kind)!r} has zero Gaussian measure",
                      DegenerateDomainWarning, stacklevel=2)
        return 0.0
    return value


def second_moment_x(domain) -> float:
    """Integral of x^2 against the standard Gaussian measure over the domain."""
    kind = getattr(domain, "kind", None)
    if kind == "plane":
        return 1.0
    breaks = list(domain.x_breaks())
    x, w = composite_rule(breaks)
    inner = gauss_interval(domain.bottom(x), domain.top(x))
    return float(np.dot(w, x * x * inner * gaussian_density(x)))
