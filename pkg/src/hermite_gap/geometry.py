"""Symmetric planar domains and the geometric constructions built on them.

Every domain is vertically convex and described by two chains of graph
segments: the top chain ``y = top(x)`` and the bottom chain
``y = bottom(x)`` over ``x_lo <= x <= x_max``.  Half domains reuse the same
chains with ``x_lo = 0`` and carry a segment on the symmetry axis.

Besides validation this module provides

* :func:`slice_equal_gaussian` -- horizontal strips of equal Gaussian measure,
* :func:`invading_sequence` -- bounded truncations with rounded bottom corners,
* :func:`reflection_jacobian` -- the normal reflection through the nearest wall.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq, minimize_scalar
from scipy.spatial import ConvexHull
from scipy.spatial.distance import pdist

from .errors import (DomainValidationError, GeometryError, NotInCollarError, ParameterError,
                     PrecisionError, UnsupportedDomainError)
from .gaussian import composite_rule, gauss_interval, gaussian_density, gaussian_measure_2d

EPS_X = 1e-12


class Tag(str, enum.Enum):
    AXIS = "axis"
    OUTER = "outer"


class Wall(str, enum.Enum):
    TOP = "TopProfile"
    BOTTOM = "BottomProfile"


# ---------------------------------------------------------------------------
# one-dimensional profile functions


class Profile1D:
    """Scalar function of x with first and second derivatives."""

    breaks: tuple = ()

    def __call__(self, x):
        raise NotImplementedError

    def d1(self, x):
        raise NotImplementedError

    def d2(self, x):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


class ConstProfile(Profile1D):
    def __init__(self, c: float):
        self.c = float(c)

    def __call__(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.c)

    def d1(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    d2 = d1

    def to_dict(self):
        return {"poly": [self.c]}


class PolyProfile(Profile1D):
    """Polynomial with coefficients in increasing powers."""

    def __init__(self, coeffs: Sequence[float]):
        self.coeffs = [float(c) for c in coeffs]
        self._p = np.polynomial.Polynomial(self.coeffs)
        self._dp = self._p.deriv(1)
        self._ddp = self._p.deriv(2)

    def __call__(self, x):
        return self._p(np.asarray(x, dtype=float))

    def d1(self, x):
        return self._dp(np.asarray(x, dtype=float))

    def d2(self, x):
        return self._ddp(np.asarray(x, dtype=float))

    def to_dict(self):
        return {"poly": list(self.coeffs)}


class SampledProfile(Profile1D):
    """Monotone-cubic (PCHIP) interpolant of user samples."""

    def __init__(self, xs: Sequence[float], ys: Sequence[float]):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        order = np.argsort(xs)
        self.xs, self.ys = xs[order], ys[order]
        if self.xs.size < 3 or np.any(np.diff(self.xs) <= 0):
            raise DomainValidationError("profile samples need >= 3 distinct abscissae")
        self._f = PchipInterpolator(self.xs, self.ys, extrapolate=True)
        self._df = self._f.derivative(1)
        self._ddf = self._f.derivative(2)
        self.breaks = tuple(float(t) for t in self.xs[1:-1])

    def __call__(self, x):
        return self._f(np.asarray(x, dtype=float))

    def d1(self, x):
        return self._df(np.asarray(x, dtype=float))

    def d2(self, x):
        return self._ddf(np.asarray(x, dtype=float))

    def to_dict(self):
        return {"x": self.xs.tolist(), "y": self.ys.tolist()}


def profile_from_dict(spec) -> Profile1D:
    if isinstance(spec, (int, float)):
        return ConstProfile(spec)
    if "poly" in spec:
        return PolyProfile(spec["poly"])
    if "x" in spec and "y" in spec:
        return SampledProfile(spec["x"], spec["y"])
    raise DomainValidationError("profile-format", detail=f"unrecognised profile description {spec!r}")


# ---------------------------------------------------------------------------
# boundary pieces


@dataclass(frozen=True)
class LinePiece:
    p0: tuple
    p1: tuple
    tag: Tag = Tag.OUTER
    role: Wall = Wall.TOP
    vertical: bool = False

    def point(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        return (1 - t) * np.asarray(self.p0) + t * np.asarray(self.p1)

    def foot(self, P) -> tuple[np.ndarray, float]:
        a, b = np.asarray(self.p0, float), np.asarray(self.p1, float)
        d = b - a
        t = np.clip(np.dot(np.asarray(P) - a, d) / np.dot(d, d), 0.0, 1.0)
        F = a + t * d
        return F, float(np.hypot(*(np.asarray(P) - F)))


@dataclass(frozen=True)
class ArcPiece:
    center: tuple
    radius: float
    theta0: float
    theta1: float
    tag: Tag = Tag.OUTER
    role: Wall = Wall.TOP

    def point(self, t):
        th = self.theta0 + (self.theta1 - self.theta0) * np.asarray(t, dtype=float)
        return np.stack([self.center[0] + self.radius * np.cos(th),
                         self.center[1] + self.radius * np.sin(th)], axis=-1)

    def foot(self, P):
        P = np.asarray(P, dtype=float)
        C = np.asarray(self.center, dtype=float)
        v = P - C
        lo, hi = sorted((self.theta0, self.theta1))
        th = math.atan2(v[1], v[0])
        # bring the angle into the arc's window if a 2*pi shift does so
        for shift in (0.0, 2 * math.pi, -2 * math.pi):
            if lo - 1e-14 <= th + shift <= hi + 1e-14:
                F = C + self.radius * np.array([math.cos(th), math.sin(th)])
                return F, float(abs(self.radius - np.hypot(*v)))
        ends = self.point(np.array([0.0, 1.0]))
        d = np.hypot(*(ends - P).T)
        j = int(np.argmin(d))
        return ends[j], float(d[j])


@dataclass(frozen=True)
class GraphPiece:
    f: Profile1D
    x0: float
    x1: float
    tag: Tag = Tag.OUTER
    role: Wall = Wall.TOP

    def point(self, t):
        t = np.asarray(t, dtype=float)
        x = self.x0 + (self.x1 - self.x0) * 0.5 * (1 - np.cos(np.pi * t))
        return np.stack([x, self.f(x)], axis=-1)

    def foot(self, P):
        P = np.asarray(P, dtype=float)
        lo, hi = sorted((self.x0, self.x1))
        xs = np.linspace(lo, hi, 129)
        d2 = (xs - P[0]) ** 2 + (self.f(xs) - P[1]) ** 2
        j = int(np.argmin(d2))
        a, b = xs[max(j - 1, 0)], xs[min(j + 1, xs.size - 1)]
        g = lambda s: (s - P[0]) ** 2 + (float(self.f(np.array([s]))[0]) - P[1]) ** 2
        if b > a:
            res = minimize_scalar(g, bounds=(a, b), method="bounded", options={"xatol": 1e-14})
            s = res.x if res.fun <= d2[j] else xs[j]
        else:
            s = xs[j]
        F = np.array([s, float(self.f(np.array([s]))[0])])
        return F, float(np.hypot(*(P - F)))


# ---------------------------------------------------------------------------
# graph segments: pieces of a chain


class Segment:
    """A smooth graph ``y = g(x)`` used on one x-interval of a chain."""

    breaks: tuple = ()

    def value(self, x):
        raise NotImplementedError

    def d1(self, x):
        raise NotImplementedError

    def d2(self, x):
        raise NotImplementedError

    def piece(self, xa, xb, forward, tag, role):
        raise NotImplementedError


class GraphSeg(Segment):
    def __init__(self, f: Profile1D):
        self.f = f
        self.breaks = tuple(getattr(f, "breaks", ()))

    def value(self, x):
        return self.f(x)

    def d1(self, x):
        return self.f.d1(x)

    def d2(self, x):
        return self.f.d2(x)

    def piece(self, xa, xb, forward, tag, role):
        x0, x1 = (xa, xb) if forward else (xb, xa)
        if isinstance(self.f, ConstProfile):
            return LinePiece((x0, self.f.c), (x1, self.f.c), tag, role)
        return GraphPiece(self.f, x0, x1, tag, role)


class LinearSeg(Segment):
    def __init__(self, slope: float, intercept: float):
        self.slope, self.intercept = float(slope), float(intercept)

    def value(self, x):
        return self.slope * np.asarray(x, dtype=float) + self.intercept

    def d1(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.slope)

    def d2(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def piece(self, xa, xb, forward, tag, role):
        x0, x1 = (xa, xb) if forward else (xb, xa)
        return LinePiece((x0, float(self.value(x0))), (x1, float(self.value(x1))), tag, role)


class ArcSeg(Segment):
    """Upper or lower half of the circle with centre ``(cx, cy)`` and radius ``r``."""

    def __init__(self, cx: float, cy: float, r: float, upper: bool):
        self.cx, self.cy, self.r, self.upper = float(cx), float(cy), float(r), bool(upper)
        self.s = 1.0 if upper else -1.0

    def _root(self, x):
        u = np.asarray(x, dtype=float) - self.cx
        return u, np.sqrt(np.maximum(self.r ** 2 - u * u, 0.0))

    def value(self, x):
        _, w = self._root(x)
        return self.cy + self.s * w

    def d1(self, x):
        u, w = self._root(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return -self.s * u / w

    def d2(self, x):
        _, w = self._root(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return -self.s * self.r ** 2 / w ** 3

    def angle(self, x):
        c = float(np.clip((x - self.cx) / self.r, -1.0, 1.0))
        return math.acos(c) if self.upper else -math.acos(c)

    def piece(self, xa, xb, forward, tag, role):
        ta, tb = self.angle(xa), self.angle(xb)
        t0, t1 = (ta, tb) if forward else (tb, ta)
        return ArcPiece((self.cx, self.cy), self.r, t0, t1, tag, role)


Chain = list  # of (x0, x1, Segment)


def _eval_chain(chain: Chain, x, what: str, outside: float = np.nan):
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, outside, dtype=float)
    for x0, x1, seg in chain:
        m = (x >= x0 - EPS_X) & (x <= x1 + EPS_X)
        if m.any():
            out[m] = getattr(seg, what)(x[m])
    return out


def _chain_breaks(chain: Chain) -> list[float]:
    bs = []
    for x0, x1, seg in chain:
        bs += [x0, x1] + [t for t in seg.breaks if x0 < t < x1]
    return bs


# ---------------------------------------------------------------------------
# domains


class Domain:
    """Vertically convex domain symmetric about the y-axis.

    Subclasses define ``kind``, ``a`` (half-width), the chains and
    ``to_dict``.  ``half`` domains keep only ``x > 0``.
    """

    kind: str = "domain"
    bounded: bool = True
    convex: bool = True
    half: bool = False
    name: str = ""

    @property
    def a(self) -> float:
        raise NotImplementedError

    @property
    def base_kind(self) -> str:
        return self.kind

    @property
    def x_lo(self) -> float:
        return 0.0 if self.half else -self.a

    @property
    def x_max(self) -> float:
        return self.a

    def top_chain(self) -> Chain:
        raise NotImplementedError

    def bottom_chain(self) -> Chain:
        raise NotImplementedError

    @cached_property
    def _top(self) -> Chain:
        return self.top_chain()

    @cached_property
    def _bottom(self) -> Chain:
        return self.bottom_chain()

    def top(self, x):
        return _eval_chain(self._top, x, "value")

    def bottom(self, x):
        return _eval_chain(self._bottom, x, "value")

    def top_d1(self, x):
        return _eval_chain(self._top, x, "d1")

    def top_d2(self, x):
        return _eval_chain(self._top, x, "d2")

    def bottom_d1(self, x):
        return _eval_chain(self._bottom, x, "d1")

    def bottom_d2(self, x):
        return _eval_chain(self._bottom, x, "d2")

    def x_breaks(self) -> list[float]:
        lo, hi = self.x_lo, self.x_max
        inner = [t for t in _chain_breaks(self._top) + _chain_breaks(self._bottom)
                 if lo + EPS_X < t < hi - EPS_X]
        return sorted(set([lo, hi] + inner))

    def contains(self, pts) -> np.ndarray:
        P = np.atleast_2d(np.asarray(pts, dtype=float))
        x, y = P[:, 0], P[:, 1]
        inside = (x > self.x_lo) & (x < self.x_max)
        out = np.zeros(x.shape, dtype=bool)
        if inside.any():
            xi = x[inside]
            out[inside] = (y[inside] > self.bottom(xi)) & (y[inside] < self.top(xi))
        return out

    def gaussian_measure(self) -> float:
        return gaussian_measure_2d(self)

    def axis_segment(self) -> Optional[tuple[float, float]]:
        """``(y_lo, y_hi)`` of the domain's trace on ``x = 0`` (infinite ends allowed)."""
        if not self.x_lo - EPS_X <= 0.0 <= self.x_max:
            return None
        lo, hi = float(self.bottom(0.0)), float(self.top(0.0))
        return (lo, hi) if hi > lo else None

    def boundary_pieces(self) -> list:
        """Closed counter-clockwise boundary as line/arc/graph pieces."""
        if not self.bounded:
            raise UnsupportedDomainError(f"{self.kind} domain is unbounded; truncate it first")
        lo, hi = self.x_lo, self.x_max
        pieces = []

        def add_chain(chain, forward, role):
            segs = [(max(x0, lo), min(x1, hi), s) for x0, x1, s in chain if min(x1, hi) - max(x0, lo) > EPS_X]
            if not forward:
                segs = segs[::-1]
            prev_end = None
            for xa, xb, s in segs:
                p = s.piece(xa, xb, forward, Tag.OUTER, role)
                start = np.asarray(p.point(0.0))
                if prev_end is not None and np.hypot(*(start - prev_end)) > 1e-12:
                    pieces.append(LinePiece(tuple(prev_end), tuple(start), Tag.OUTER, role, vertical=True))
                pieces.append(p)
                prev_end = np.asarray(p.point(1.0))

        add_chain(self._bottom, True, Wall.BOTTOM)
        yb, yt = float(self.bottom(hi)), float(self.top(hi))
        if yt - yb > 1e-12:
            pieces.append(LinePiece((hi, yb), (hi, yt), Tag.OUTER, Wall.TOP, vertical=True))
        add_chain(self._top, False, Wall.TOP)
        yb, yt = float(self.bottom(lo)), float(self.top(lo))
        if yt - yb > 1e-12:
            tag = Tag.AXIS if self.half else Tag.OUTER
            pieces.append(LinePiece((lo, yt), (lo, yb), tag, Wall.TOP, vertical=True))
        return pieces

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def __repr__(self):
        return f"{type(self).__name__}({self.to_dict()})"


@dataclass(frozen=True, repr=False, eq=False)
class Rectangle(Domain):
    half_width: float
    half_height: float
    name: str = ""
    kind = "rectangle"

    @property
    def a(self):
        return self.half_width

    @property
    def b(self):
        return self.half_height

    def top_chain(self):
        return [(-self.a, self.a, GraphSeg(ConstProfile(self.b)))]

    def bottom_chain(self):
        return [(-self.a, self.a, GraphSeg(ConstProfile(-self.b)))]

    def to_dict(self):
        return {"kind": "rectangle", "a": self.a, "b": self.b}


@dataclass(frozen=True, repr=False, eq=False)
class Strip(Domain):
    half_width: float
    name: str = ""
    kind = "strip"
    bounded = False

    @property
    def a(self):
        return self.half_width

    def top_chain(self):
        return [(-self.a, self.a, GraphSeg(ConstProfile(math.inf)))]

    def bottom_chain(self):
        return [(-self.a, self.a, GraphSeg(ConstProfile(-math.inf)))]

    def to_dict(self):
        return {"kind": "strip", "a": self.a}


@dataclass(frozen=True, repr=False, eq=False)
class HalfStrip(Domain):
    """The set ``(-a, a) x (-inf, top)``."""

    half_width: float
    top_level: float = 0.0
    name: str = ""
    kind = "half_strip"
    bounded = False

    @property
    def a(self):
        return self.half_width

    @property
    def top_value(self):
        return self.top_level

    def top_chain(self):
        return [(-self.a, self.a, GraphSeg(ConstProfile(self.top_level)))]

    def bottom_chain(self):
        return [(-self.a, self.a, GraphSeg(ConstProfile(-math.inf)))]

    def p(self) -> Profile1D:
        return ConstProfile(self.top_level)

    def to_dict(self):
        return {"kind": "half_strip", "a": self.a, "top": self.top_level}


@dataclass(frozen=True, repr=False, eq=False)
class Disk(Domain):
    radius: float
    name: str = ""
    kind = "disk"

    @property
    def a(self):
        return self.radius

    @property
    def R(self):
        return self.radius

    def top_chain(self):
        return [(-self.R, self.R, ArcSeg(0.0, 0.0, self.R, True))]

    def bottom_chain(self):
        return [(-self.R, self.R, ArcSeg(0.0, 0.0, self.R, False))]

    def to_dict(self):
        return {"kind": "disk", "R": self.R}


def _polygon_section(V: np.ndarray, x: float) -> tuple[float, float]:
    ys = []
    n = len(V)
    for i in range(n):
        (x0, y0), (x1, y1) = V[i], V[(i + 1) % n]
        if abs(x1 - x0) < 1e-14:
            if abs(x - x0) < 1e-12:
                ys += [y0, y1]
            continue
        t = (x - x0) / (x1 - x0)
        if -1e-12 <= t <= 1 + 1e-12:
            ys.append(y0 + t * (y1 - y0))
    return min(ys), max(ys)


@dataclass(frozen=True, repr=False, eq=False)
class ConvexPolygon(Domain):
    vertices: tuple
    name: str = ""
    kind = "polygon"

    @cached_property
    def V(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    @property
    def a(self):
        return float(np.max(self.V[:, 0]))

    @cached_property
    def _sections(self):
        xs = np.unique(np.round(self.V[:, 0], 13))
        secs = np.array([_polygon_section(self.V, x) for x in xs])
        return xs, secs[:, 0], secs[:, 1]

    def _chain(self, ys):
        xs = self._sections[0]
        out = []
        for i in range(len(xs) - 1):
            s = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
            out.append((float(xs[i]), float(xs[i + 1]), LinearSeg(s, ys[i] - s * xs[i])))
        return out

    def top_chain(self):
        return self._chain(self._sections[2])

    def bottom_chain(self):
        return self._chain(self._sections[1])

    def to_dict(self):
        return {"kind": "polygon", "vertices": [list(map(float, v)) for v in self.V]}


@dataclass(frozen=True, repr=False, eq=False)
class ProfileDomain(Domain):
    """``{|x| < a, q(x) < y < p(x)}``; ``q = None`` means unbounded below."""

    half_width: float
    p: Profile1D
    q: Optional[Profile1D] = None
    name: str = ""
    kind = "profile"

    @property
    def a(self):
        return self.half_width

    @property
    def bounded(self):
        return self.q is not None

    def top_chain(self):
        return [(-self.a, self.a, GraphSeg(self.p))]

    def bottom_chain(self):
        if self.q is None:
            return [(-self.a, self.a, GraphSeg(ConstProfile(-math.inf)))]
        return [(-self.a, self.a, GraphSeg(self.q))]

    def to_dict(self):
        return {"kind": "profile", "a": self.a, "p": self.p.to_dict(),
                "q": "unbounded" if self.q is None else self.q.to_dict()}


@dataclass(frozen=True, repr=False, eq=False)
class Dumbbell(Domain):
    """Two squares of side ``side`` joined by a corridor of width ``eps`` and length ``corridor``.

    The squares are centred at ``(+-(corridor/2 + side/2), 0)``.
    """

    eps: float
    side: float = 1.0
    corridor: float = 1.0
    name: str = ""
    kind = "dumbbell"
    convex = False

    @property
    def a(self):
        return 0.5 * self.corridor + self.side

    def _chain(self, s):
        c, h, e = 0.5 * self.corridor, 0.5 * self.side, 0.5 * self.eps
        return [(-self.a, -c, GraphSeg(ConstProfile(s * h))),
                (-c, c, GraphSeg(ConstProfile(s * e))),
                (c, self.a, GraphSeg(ConstProfile(s * h)))]

    def top_chain(self):
        return self._chain(1.0)

    def bottom_chain(self):
        return self._chain(-1.0)

    def top(self, x):
        x = np.asarray(x, dtype=float)
        c = 0.5 * self.corridor
        return np.where(np.abs(x) < c, 0.5 * self.eps, 0.5 * self.side)

    def bottom(self, x):
        return -self.top(x)

    def x_breaks(self):
        c = 0.5 * self.corridor
        bs = [self.x_lo, c, self.a] if self.half else [-self.a, -c, c, self.a]
        return sorted(set(bs))

    def to_dict(self):
        return {"kind": "dumbbell", "eps": self.eps, "side": self.side, "corridor": self.corridor}


@dataclass(frozen=True, repr=False, eq=False)
class HalfDomain(Domain):
    """``parent`` intersected with ``{x > 0}``; the axis trace is tagged AXIS."""

    parent: Domain
    half = True

    @property
    def kind(self):
        return "half"

    @property
    def base_kind(self):
        return self.parent.base_kind

    @property
    def name(self):
        return f"{self.parent.name}+" if self.parent.name else ""

    @property
    def a(self):
        return self.parent.a

    @property
    def bounded(self):
        return self.parent.bounded

    @property
    def convex(self):
        return self.parent.convex

    def top_chain(self):
        return self.parent._top

    def bottom_chain(self):
        return self.parent._bottom

    def top(self, x):
        return self.parent.top(x)

    def bottom(self, x):
        return self.parent.bottom(x)

    def x_breaks(self):
        inner = [t for t in self.parent.x_breaks() if EPS_X < t < self.a - EPS_X]
        return sorted(set([0.0, self.a] + inner))

    def axis_length(self) -> float:
        lo, hi = self.axis_segment()
        return hi - lo

    def to_dict(self):
        return {"kind": "half", "parent": self.parent.to_dict()}


def half_domain(domain: Domain) -> HalfDomain:
    """The right half ``domain ∩ {x > 0}`` with its axis segment tagged."""
    if isinstance(domain, HalfDomain):
        return domain
    return HalfDomain(domain)


# ---------------------------------------------------------------------------
# horizontal bands (used for the upper part and for slices)


def _crossing(f: Callable, c: float, lo: float, hi: float, decreasing: bool = True) -> float:
    """Largest ``x`` in [lo, hi] with ``f(x) >= c`` for decreasing ``f`` (smallest for increasing)."""
    g = lambda x: float(f(np.array([x]))[0]) - c
    glo, ghi = g(lo), g(hi)
    if decreasing:
        if glo < 0:
            return lo
        if ghi >= 0:
            return hi
    else:
        if glo >= 0:
            return lo
        if ghi < 0:
            return hi
    return brentq(g, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)


@dataclass(frozen=True, repr=False, eq=False)
class Band(Domain):
    """``parent ∩ {lo < y < hi}`` for a convex even parent."""

    parent: Domain
    lo: float
    hi: float = math.inf
    kind = "band"

    @property
    def name(self):
        return f"{self.parent.name}[{self.lo:.6g},{self.hi:.6g}]"

    @cached_property
    def a(self):
        f = lambda x: np.minimum(self.parent.top(x), self.hi) - np.maximum(self.parent.bottom(x), self.lo)
        return _crossing(f, 0.0, 0.0, self.parent.a)

    @cached_property
    def flat_half_width(self) -> float:
        """Half-width of ``{p >= hi}`` (0 when the top never reaches ``hi`` on an interval)."""
        if not math.isfinite(self.hi):
            return 0.0
        return _crossing(self.parent.top, self.hi, 0.0, self.a)

    def _clip(self, chain, level, upper):
        out = []
        lim = self.a
        for x0, x1, seg in chain:
            x0, x1 = max(x0, -lim), min(x1, lim)
            if x1 - x0 <= EPS_X:
                continue
            cuts = [x0, x1]
            if math.isfinite(level):
                xs = np.linspace(x0, x1, 65)
                g = seg.value(xs) - level
                for i in range(64):
                    if g[i] * g[i + 1] < 0:
                        cuts.append(brentq(lambda t: float(seg.value(np.array([t]))[0]) - level,
                                           xs[i], xs[i + 1], xtol=1e-15))
            cuts = sorted(set(cuts))
            for u, v in zip(cuts[:-1], cuts[1:]):
                if v - u <= EPS_X:
                    continue
                mid = float(seg.value(np.array([0.5 * (u + v)]))[0])
                beyond = mid > level if upper else mid < level
                out.append((u, v, GraphSeg(ConstProfile(level)) if beyond else seg))
        return out

    def top_chain(self):
        return self._clip(self.parent._top, self.hi, True)

    def bottom_chain(self):
        return self._clip(self.parent._bottom, self.lo, False)

    def to_dict(self):
        return {"kind": "band", "parent": self.parent.to_dict(), "lo": self.lo, "hi": self.hi}


class SectionWeight:
    """``phi(x) = gamma_1(bottom(x), top(x))`` for a vertically convex domain, with derivatives."""

    def __init__(self, domain: Domain):
        self.domain = domain
        lo, hi = domain.x_lo, domain.x_max
        self.breaks = tuple(t for t in domain.x_breaks() if lo < t < hi)

    def __call__(self, x):
        return gauss_interval(self.domain.bottom(x), self.domain.top(x))

    def _parts(self, x):
        d = self.domain
        t, b = d.top(x), d.bottom(x)
        t1, b1 = d.top_d1(x), np.where(np.isfinite(b), d.bottom_d1(x), 0.0)
        return t, b, t1, b1

    def d1(self, x):
        t, b, t1, b1 = self._parts(x)
        return gaussian_density(t) * t1 - gaussian_density(b) * b1

    def d2(self, x):
        d = self.domain
        t, b, t1, b1 = self._parts(x)
        t2 = d.top_d2(x)
        b2 = np.where(np.isfinite(b), d.bottom_d2(x), 0.0)
        bb = np.where(np.isfinite(b), b, 0.0)
        return gaussian_density(t) * (t2 - t * t1 ** 2) - gaussian_density(b) * (b2 - bb * b1 ** 2)


# ---------------------------------------------------------------------------
# validation and construction


def regular_hexagon(a: float = 1.0) -> ConvexPolygon:
    """Regular hexagon of half-width ``a`` with two vertices on the y-axis."""
    R = 2.0 * a / math.sqrt(3.0)
    ang = np.pi / 2 + np.arange(6) * np.pi / 3
    V = np.column_stack([R * np.cos(ang), R * np.sin(ang)])
    V[np.abs(V) < 1e-15] = 0.0
    V[[1, 2], 0] = -a
    V[[4, 5], 0] = a
    return ConvexPolygon(tuple(map(tuple, V)), name=f"hexagon(a={a:g})")


def _check_polygon(V: np.ndarray) -> np.ndarray:
    n = len(V)
    if n < 3:
        raise DomainValidationError("polygon needs at least 3 vertices")
    e = np.roll(V, -1, axis=0) - V
    cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    scale = max(1.0, float(np.max(np.abs(V)))) ** 2
    if np.any(np.abs(cross) <= 1e-12 * scale) or not (np.all(cross > 0) or np.all(cross < 0)):
        bad = int(np.argmin(np.abs(cross))) if np.any(np.abs(cross) <= 1e-12 * scale) else \
            int(np.nonzero(np.sign(cross) != np.sign(np.sum(cross)))[0][0])
        raise DomainValidationError("convex-position", tuple(V[(bad + 1) % n]),
                                    "vertices must be listed in strictly convex boundary order")
    if cross[0] < 0:
        V = V[::-1].copy()
    area = 0.5 * np.sum(V[:, 0] * np.roll(V[:, 1], -1) - np.roll(V[:, 0], -1) * V[:, 1])
    mirror = V * np.array([-1.0, 1.0])
    for v in mirror:
        if np.min(np.hypot(*(V - v).T)) > 1e-9 * max(1.0, math.sqrt(area)):
            raise DomainValidationError("mirror-symmetry", (-float(v[0]), float(v[1])),
                                        "vertex set is not invariant under x -> -x")
    return V


def _check_profile(a: float, p: Profile1D, q: Optional[Profile1D], samples: int = 2001):
    if not (a > 0 and math.isfinite(a)):
        raise DomainValidationError("positive-half-width", detail=f"a = {a}")
    x = np.linspace(-a, a, samples)
    h = x[1] - x[0]

    def second_diff(f):
        return f(x[:-2]) - 2 * f(x[1:-1]) + f(x[2:])

    P = p(x)
    scale = max(1.0, float(np.max(np.abs(P))))
    tol = 1e-9 * scale
    dd = second_diff(p)
    if np.any(dd > tol + 1e-9 * h * h * scale):
        j = int(np.argmax(dd))
        raise DomainValidationError("p-concave", (float(x[j + 1]),), "p is convex-not-concave there")
    mir = np.abs(p(-x) - P)
    if np.any(mir > 1e-9 * scale):
        j = int(np.argmax(mir))
        raise DomainValidationError("p-even", (float(x[j]),), f"|p(x) - p(-x)| = {mir[j]:.3e}")
    if q is None:
        return
    Q = q(x)
    dd = second_diff(q)
    if np.any(dd < -tol):
        j = int(np.argmin(dd))
        raise DomainValidationError("q-convex", (float(x[j + 1]),), "q is concave-not-convex there")
    mir = np.abs(q(-x) - Q)
    if np.any(mir > 1e-9 * scale):
        j = int(np.argmax(mir))
        raise DomainValidationError("q-even", (float(x[j]),), f"|q(x) - q(-x)| = {mir[j]:.3e}")
    gap = (P - Q)[1:-1]
    if np.any(gap <= 0):
        j = int(np.argmin(gap))
        raise DomainValidationError("p-above-q", (float(x[j + 1]),), f"p - q = {gap[j]:.3e}")


def _positive(name, v):
    v = float(v)
    if not (v > 0 and math.isfinite(v)):
        raise DomainValidationError(f"positive-{name}", detail=f"{name} = {v}")
    return v


def build_domain(spec) -> Domain:
    """Validate a raw description (dict, JSON string, path or Domain) and return a Domain.

    Accepted kinds: ``rectangle`` (a, b), ``square`` (l), ``strip`` (a),
    ``half_strip`` (a, top), ``disk`` (R), ``hexagon`` (a), ``polygon``
    (vertices), ``profile`` (a, p, q), ``dumbbell`` (eps, side, corridor).
    Parameters may sit at the top level or under ``"parameters"``.
    """
    if isinstance(spec, Domain):
        return spec
    try:
        if isinstance(spec, Path) or (isinstance(spec, str) and not spec.lstrip().startswith("{")):
            spec = json.loads(Path(spec).read_text())
        elif isinstance(spec, str):
            spec = json.loads(spec)
    except json.JSONDecodeError as exc:
        raise DomainValidationError("json-syntax", detail=str(exc)) from exc
    try:
        return _build(dict(spec))
    except KeyError as exc:
        raise DomainValidationError("required-parameter", detail=f"missing {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DomainValidationError):
            raise
        raise DomainValidationError("parameter-type", detail=str(exc)) from exc


def _build(spec: dict) -> Domain:
    params = dict(spec.pop("parameters", {}))
    params.update(spec)
    kind = str(params.pop("kind", "")).lower()
    name = str(params.pop("name", ""))
    bounded_flag = params.pop("bounded", None)

    if kind == "rectangle":
        dom = Rectangle(_positive("a", params["a"]), _positive("b", params["b"]), name)
    elif kind == "square":
        l = _positive("l", params.get("l", params.get("a")))
        dom = Rectangle(l, l, name)
    elif kind == "strip":
        dom = Strip(_positive("a", params["a"]), name)
    elif kind in ("half_strip", "halfstrip"):
        dom = HalfStrip(_positive("a", params["a"]), float(params.get("top", 0.0)), name)
    elif kind == "disk":
        dom = Disk(_positive("R", params["R"]), name)
    elif kind == "hexagon":
        h = regular_hexagon(_positive("a", params.get("a", 1.0)))
        dom = ConvexPolygon(h.vertices, name)
    elif kind == "polygon":
        V = _check_polygon(np.asarray(params["vertices"], dtype=float))
        dom = ConvexPolygon(tuple(map(tuple, V)), name)
    elif kind == "profile":
        a = float(params["a"])
        p = profile_from_dict(params["p"])
        qs = params.get("q", "unbounded")
        q = None if qs in (None, "unbounded") else profile_from_dict(qs)
        _check_profile(a, p, q)
        dom = ProfileDomain(a, p, q, name)
    elif kind == "dumbbell":
        side = _positive("side", params.get("side", 1.0))
        eps = _positive("eps", params["eps"])
        if eps > side:
            raise DomainValidationError("corridor-width", detail=f"eps = {eps} exceeds side = {side}")
        dom = Dumbbell(eps, side, _positive("corridor", params.get("corridor", 1.0)), name)
    else:
        raise DomainValidationError("known-kind", detail=f"unknown domain kind {kind!r}")
    if bounded_flag is not None and bool(bounded_flag) != dom.bounded:
        raise DomainValidationError("bounded-flag", detail=f"kind {kind} has bounded = {dom.bounded}")
    if not name:
        object.__setattr__(dom, "name", default_name(dom))
    return dom


def default_name(dom: Domain) -> str:
    d = dom.to_dict()
    k = d.pop("kind")
    if k in ("polygon", "profile"):
        return k
    return k + "(" + ",".join(f"{key}={d[key]:g}" for key in sorted(d)) + ")"


def load_domain(path) -> Domain:
    return build_domain(Path(path))


# ---------------------------------------------------------------------------
# diameter


def boundary_samples(domain: Domain, n: int = 4000) -> np.ndarray:
    pieces = domain.boundary_pieces()
    per = max(8, n // max(1, len(pieces)))
    t = np.linspace(0.0, 1.0, per)
    return np.vstack([np.asarray(p.point(t)) for p in pieces])


def diameter(domain: Domain) -> float:
    """Euclidean diameter of a bounded domain."""
    if not domain.bounded:
        raise UnsupportedDomainError("diameter of an unbounded domain")
    if isinstance(domain, Rectangle):
        return 2.0 * math.hypot(domain.a, domain.b)
    if isinstance(domain, Disk):
        return 2.0 * domain.R
    if isinstance(domain, ConvexPolygon):
        return float(pdist(domain.V).max())
    pts = boundary_samples(domain, 20000)
    hull = pts[ConvexHull(pts).vertices]
    return float(pdist(hull).max())


# ---------------------------------------------------------------------------
# equal-measure slicing


@dataclass(frozen=True)
class SliceStrip:
    """One strip ``{d < y < p_k(x)}`` with ``p_k = min(p, c)``."""

    index: int
    a: float
    d: float
    c: float
    a_flat: float
    measure: float
    domain: Band
    phi: SectionWeight
    phi_min_second_difference: float

    def p(self, x):
        return self.domain.top(x)

    @property
    def height(self) -> float:
        return self.c - self.d


@dataclass(frozen=True)
class SliceSet:
    parent: Band
    floor: float
    n: int
    strips: tuple
    total_measure: float
    cuts: tuple
    notes: tuple = ()

    @property
    def max_height(self) -> float:
        return max(s.height for s in self.strips)


def _band_measure(parent: Domain, lo: float, hi: float) -> float:
    """Gaussian measure of ``parent ∩ {lo < y < hi}`` (parent convex, even)."""
    X = _crossing(lambda x: np.minimum(parent.top(x), hi) - np.maximum(parent.bottom(x), lo), 0.0, 0.0, parent.a)
    if X <= 0:
        return 0.0
    Xh = _crossing(parent.top, hi, 0.0, X) if math.isfinite(hi) else 0.0
    bs = [t for t in parent.x_breaks() if 0 < t < X] + ([Xh] if 0 < Xh < X else [])
    x, w = composite_rule(sorted(set([0.0, X] + bs)))
    inner = gauss_interval(np.maximum(parent.bottom(x), lo), np.minimum(parent.top(x), hi))
    return float(2.0 * np.dot(w, inner * gaussian_density(x)))


def _second_difference_min(phi, a: float, n: int = 801) -> float:
    if a <= 0:
        return 0.0
    x = np.linspace(-a, a, n)[1:-1]
    f = phi(x)
    return float(np.min(f[:-2] - 2 * f[1:-1] + f[2:])) if f.size >= 3 else 0.0


def upper_part(domain: Domain, floor: Optional[float] = None) -> Band:
    """``domain ∩ {y > floor}``; ``floor`` defaults to ``p(a)``, the height of the top profile at the ends."""
    if not domain.bounded and floor is None:
        raise GeometryError("upper part of an unbounded domain needs an explicit floor")
    if floor is None:
        floor = float(domain.top(domain.a))
    return Band(domain, float(floor), math.inf)


def slice_equal_gaussian(domain_plus: Domain, n: int, floor: Optional[float] = None,
                         tol: float = 1e-12, max_iter: int = 200) -> SliceSet:
    """Split the upper part into ``2**n`` horizontal strips of equal Gaussian measure.

    ``domain_plus`` may be a :class:`Band` (used as is) or a full domain, in
    which case its part above ``floor`` is taken (default ``p(a)``).  Cut
    ordinates are found by bisection on the measure of the lower sub-strip.
    """
    if n < 0:
        raise ParameterError("n must be >= 0")
    plus = domain_plus if isinstance(domain_plus, Band) else upper_part(domain_plus, floor)
    parent, lo0 = plus.parent, plus.lo
    ceiling = float(np.max(parent.top(np.array(parent.x_breaks() + [0.0]))))
    ceiling = min(ceiling, plus.hi)
    total = _band_measure(parent, lo0, ceiling)
    if not total > 1e-280:
        raise GeometryError(f"upper part above y = {lo0:g} has no Gaussian measure; pass a lower floor")
    notes = []

    def split(lo, hi, m):
        target = 0.5 * m
        a, b = lo, hi
        f = math.inf
        c = 0.5 * (a + b)
        for _ in range(max_iter):
            c = 0.5 * (a + b)
            f = _band_measure(parent, lo, c) - target
            if abs(f) <= tol * target or not a < c < b:
                break
            if f < 0:
                a = c
            else:
                b = c
        if abs(f) > 1e-10 * target:
            raise PrecisionError(f"bisection for the cut in ({lo:g}, {hi:g}) stalled at defect {f:.3e}")
        return c, target + f

    cuts = [(lo0, ceiling, total)]
    for _ in range(n):
        nxt = []
        for lo, hi, m in cuts:
            c, m1 = split(lo, hi, m)
            nxt += [(lo, c, m1), (c, hi, m - m1)]
        cuts = nxt
    strips = []
    for k, (lo, hi, m) in enumerate(cuts):
        top = k == len(cuts) - 1
        band = Band(parent, lo, math.inf if top else hi)
        a_flat = 0.0 if top else band.flat_half_width
        if top:
            xs = np.linspace(0, band.a, 1001)
            flat = xs[parent.top(xs) >= ceiling - 1e-12 * max(1.0, abs(ceiling))]
            a_flat = float(flat.max()) if flat.size else 0.0
            if a_flat == 0.0:
                notes.append(f"strip {k}: top profile has no flat part; flat half-width recorded as 0")
        phi = SectionWeight(band)
        strips.append(SliceStrip(index=k, a=band.a, d=lo, c=hi, a_flat=a_flat, measure=m, domain=band,
                                 phi=phi, phi_min_second_difference=_second_difference_min(phi, band.a)))
    return SliceSet(parent=plus, floor=lo0, n=n, strips=tuple(strips), total_measure=total,
                    cuts=tuple(s.d for s in strips) + (ceiling,), notes=tuple(notes))


# ---------------------------------------------------------------------------
# invading sequence


def min_curvature_radius(domain: Domain, samples: int = 4001) -> float:
    """Smallest curvature radius of the top profile (inf for straight walls)."""
    x = np.linspace(0.0, domain.a, samples)
    d1, d2 = domain.top_d1(x), domain.top_d2(x)
    kappa = np.abs(d2) / (1 + d1 * d1) ** 1.5
    kmax = float(np.nanmax(kappa)) if kappa.size else 0.0
    return math.inf if kmax < 1e-12 else 1.0 / kmax


def default_fillet_radius(domain: Domain) -> Optional[float]:
    """Half the smallest curvature radius of the wall, or None for straight walls."""
    r = min_curvature_radius(domain)
    return None if math.isinf(r) else 0.5 * r


def min_truncation_depth(domain: Domain) -> int:
    """``floor(-p(0)) + 1``: the first depth at which the truncation is non-empty."""
    return int(math.floor(-float(domain.top(0.0)))) + 1


@dataclass(frozen=True, repr=False, eq=False)
class InvadingDomain(Domain):
    """``parent ∩ {y > -n}`` with both bottom corners rounded by circles of radius ``r``.

    ``xp`` is where the rounded top leaves the parent wall, ``xn`` the end of
    the flat bottom (also the abscissa of the right fillet centre).  Case
    ``"a"`` has the fillet tangent to the curved profile, case ``"b"`` to a
    vertical side wall.
    """

    parent: Domain
    n: int
    r: float
    xp: float
    xn: float
    case: str
    kind = "truncated"

    @property
    def name(self):
        return f"{self.parent.name}|n={self.n}"

    @property
    def a(self):
        return self.xn + self.r if self.case == "a" else self.parent.a

    @property
    def base_kind(self):
        return "truncated"

    @property
    def cy(self):
        return -self.n + self.r

    @property
    def collar_depth(self) -> float:
        return 0.5 * self.r

    def top_chain(self):
        mid = [(max(x0, -self.xp), min(x1, self.xp), s) for x0, x1, s in self.parent._top
               if min(x1, self.xp) - max(x0, -self.xp) > EPS_X]
        if self.case == "b":
            return mid
        return ([(-self.a, -self.xp, ArcSeg(-self.xn, self.cy, self.r, True))] + mid
                + [(self.xp, self.a, ArcSeg(self.xn, self.cy, self.r, True))])

    def bottom_chain(self):
        return [(-self.a, -self.xn, ArcSeg(-self.xn, self.cy, self.r, False)),
                (-self.xn, self.xn, GraphSeg(ConstProfile(-float(self.n)))),
                (self.xn, self.a, ArcSeg(self.xn, self.cy, self.r, False))]

    def to_dict(self):
        return {"kind": "truncated", "parent": self.parent.to_dict(), "n": self.n, "r": self.r}


def invading_sequence(domain: Domain, n: int, r: float) -> InvadingDomain:
    """The bounded truncation ``Omega_n`` of a domain that is unbounded below."""
    if domain.bounded:
        raise UnsupportedDomainError("invading sequence needs a domain unbounded below")
    if domain.axis_segment() is None or not math.isfinite(domain.axis_segment()[1]):
        raise UnsupportedDomainError("the top profile must be finite")
    n = int(n)
    r = float(r)
    if not r > 0:
        raise ParameterError("fillet radius must be positive")
    n_min = min_truncation_depth(domain)
    if n < n_min:
        raise GeometryError(f"empty-interior: n = {n} is below the first admissible depth {n_min}")
    rmax = 0.5 * min_curvature_radius(domain)
    if r > rmax * (1 + 1e-9):
        raise GeometryError(f"fillet radius {r} exceeds half the smallest curvature radius ({rmax:.6g})")
    a = domain.a
    cy = -n + r

    def g(s):
        s = np.array([s])
        return float(domain.top(s)[0] - r / np.sqrt(1 + domain.top_d1(s)[0] ** 2) - cy)

    if g(0.0) <= 0:
        raise GeometryError(f"fillet radius {r} does not fit at depth n = {n}")
    if g(a) >= 0:
        if float(domain.top(a)) < cy or r > a:
            raise GeometryError(f"fillet radius {r} does not fit at depth n = {n}")
        return InvadingDomain(domain, n, r, xp=a, xn=a - r, case="b")
    s = brentq(g, 0.0, a, xtol=1e-15, rtol=1e-15)
    d1 = float(domain.top_d1(s))
    cx = s + r * d1 / math.sqrt(1 + d1 * d1)
    if cx < 0 or cx + r > a:
        raise GeometryError(f"fillet radius {r} does not fit at depth n = {n}")
    return InvadingDomain(domain, n, r, xp=s, xn=cx, case="a")


# ---------------------------------------------------------------------------
# reflection through the nearest wall


@dataclass(frozen=True)
class ReflectionSample:
    source: tuple
    image: tuple
    midpoint_abscissa: float
    jacobian_abs: float
    wall: Wall
    distance: float
    weight_ratio: float
    tie: bool = False
    jacobian_curvature: float = float("nan")


def _wall_jacobian(dom: InvadingDomain, piece, P: np.ndarray, F: np.ndarray, dist: float) -> tuple[float, float]:
    """|J| from the graph formula at the foot abscissa and from the curvature form."""
    if isinstance(piece, LinePiece):
        return 1.0, 1.0
    if isinstance(piece, ArcPiece):
        kr = dist / piece.radius
        curv = (1 + kr) / (1 - kr)
    else:
        xm = np.array([F[0]])
        d1 = float(piece.f.d1(xm)[0])
        d2 = float(piece.f.d2(xm)[0])
        kr = abs(d2) / (1 + d1 * d1) ** 1.5 * dist
        curv = (1 + kr) / (1 - kr)
    xm = np.array([F[0]])
    if piece.role is Wall.TOP:
        f, f1, f2 = dom.top(xm)[0], dom.top_d1(xm)[0], dom.top_d2(xm)[0]
    else:
        f, f1, f2 = dom.bottom(xm)[0], dom.bottom_d1(xm)[0], dom.bottom_d2(xm)[0]
    if not (np.isfinite(f1) and np.isfinite(f2)) or abs(f1) > 1e4:
        return curv, curv
    A = f2 * (P[1] - f)
    num = 1 + f1 * f1 + A
    den = -1 - f1 * f1 + A
    return abs(num / den), curv


def reflection_jacobian(domain_n: InvadingDomain, point, tie_tol: float = 1e-12) -> ReflectionSample:
    """Reflect ``point`` across the nearest wall of ``domain_n`` along the normal.

    The point must lie in the collar of depth ``r/2`` (half the fillet
    radius, so that every wall has curvature radius at least twice the
    depth).  Ties between a top and a bottom wall go to the top wall and are
    flagged.
    """
    P = np.asarray(point, dtype=float)
    if not domain_n.contains(P[None, :])[0]:
        raise NotInCollarError(f"point {tuple(P)} is not inside the truncated domain")
    found = []
    for pc in domain_n.boundary_pieces():
        F, d = pc.foot(P)
        found.append((d, pc, F))
    found.sort(key=lambda t: t[0])
    d, pc, F = found[0]
    if d >= domain_n.collar_depth:
        raise NotInCollarError(f"point {tuple(P)} is at depth {d:.6g} >= collar depth {domain_n.collar_depth:.6g}")
    tie = False
    for d2, pc2, F2 in found[1:]:
        if d2 - d > tie_tol:
            break
        if pc2.role is not pc.role and np.hypot(*(F2 - F)) > tie_tol:
            tie = True
            if pc2.role is Wall.TOP:
                d, pc, F = d2, pc2, F2
            break
    image = 2.0 * F - P
    jac, jac_curv = _wall_jacobian(domain_n, pc, P, F, d)
    ratio = math.exp(-0.5 * float(image @ image) + 0.5 * float(P @ P))
    return ReflectionSample(source=tuple(P), image=tuple(image), midpoint_abscissa=float(0.5 * (P[0] + image[0])),
                            jacobian_abs=float(jac), wall=pc.role, distance=float(d), weight_ratio=ratio,
                            tie=tie, jacobian_curvature=float(jac_curv))


def sample_collar(domain_n: InvadingDomain, count: int, seed: int, depth: Optional[float] = None) -> np.ndarray:
    """``count`` seeded points in the collar, drawn uniformly by rejection from the bounding box."""
    depth = domain_n.collar_depth if depth is None else depth
    rng = np.random.default_rng(seed)
    pieces = domain_n.boundary_pieces()
    x0, x1 = -domain_n.a, domain_n.a
    y0, y1 = -float(domain_n.n), float(np.max(domain_n.top(np.linspace(x0, x1, 401))))
    out = []
    rounds = 0
    while len(out) < count:
        rounds += 1
        if rounds > 50 and not out:
            raise ParameterError(f"collar of depth {depth:g} is empty at n = {domain_n.n}")
        Q = np.column_stack([rng.uniform(x0, x1, 4 * count), rng.uniform(y0, y1, 4 * count)])
        Q = Q[domain_n.contains(Q)]
        for q in Q:
            dmin = min(pc.foot(q)[1] for pc in pieces)
            if dmin < depth * (1 - 1e-9):
                out.append(q)
                if len(out) == count:
                    break
    return np.asarray(out)
