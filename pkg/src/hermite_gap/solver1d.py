"""One-dimensional Hermite eigenproblems.

The operator ``-(rho v')' = lam rho v`` with ``rho = phi(x) exp(-x^2/2)`` is
discretized in flux form on a piecewise-uniform grid (nodes at every kink of
``phi``) with face-evaluated weights and a lumped mass, which is the same as
P1 finite elements with midpoint quadrature.  The discrete pencil is reduced
to a symmetric tridiagonal matrix and handed to the certified bisection
solver; eigenvalues are polished by their difference-form Rayleigh quotient
and Richardson-extrapolated over two nested grids.
"""

from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .eigen import SymTriMatrix, eigs_sym_tridiagonal
from .errors import BracketError, ParameterError, ResolutionError, WeightError
from .gaussian import TRUNCATION

DEFAULT_GRID_N = 1024
MIN_GRID_N = 16
ORDER_WINDOW = (1.8, 2.2)
ZERO_MODE_TOL = 1e-9


class BC(str, enum.Enum):
    NEUMANN = "neumann"
    DIRICHLET = "dirichlet"


class ExtrapolationWarning(UserWarning):
    pass


class ConstantWeight:
    """The weight ``phi(x) = c``."""

    def __init__(self, c: float = 1.0):
        if not c > 0:
            raise WeightError(f"constant weight must be positive, got {c}")
        self.c = float(c)
        self.breaks: tuple = ()

    def __call__(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.c)

    def d1(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def d2(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))


class _FiniteDifferenceWeight:
    """Wraps a bare callable; derivatives by central differences."""

    def __init__(self, f: Callable, step: float = 1e-4):
        self.f = f
        self.step = step
        self.breaks: tuple = ()

    def __call__(self, x):
        return np.asarray(self.f(np.asarray(x, dtype=float)), dtype=float)

    def d1(self, x):
        s = self.step
        return (self(x + s) - self(x - s)) / (2 * s)

    def d2(self, x):
        s = self.step
        return (self(x + s) - 2 * self(x) + self(x - s)) / (s * s)


def as_weight(phi) -> object:
    if phi is None:
        return ConstantWeight(1.0)
    if hasattr(phi, "d1") and hasattr(phi, "d2"):
        return phi
    return _FiniteDifferenceWeight(phi)


@dataclass(frozen=True)
class SLProblem:
    """A 1-D Hermite eigenproblem on ``(a, b)``.

    Infinite endpoints are replaced by ``+-12`` (Gaussian tail below 1e-32)
    with a natural closure; ``truncated`` records which ends were cut.
    """

    a: float
    b: float
    bc: BC = BC.NEUMANN
    weight_profile: object = None
    grid_n: int = DEFAULT_GRID_N
    truncated: tuple = field(default=(False, False), init=False)

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if math.isnan(a) or math.isnan(b) or not a < b:
            raise ParameterError(f"need a < b, got ({a}, {b})")
        ta, tb = a < -TRUNCATION, b > TRUNCATION
        a, b = max(a, -TRUNCATION), min(b, TRUNCATION)
        if not b > a:
            raise ResolutionError(f"interval ({self.a}, {self.b}) is empty after truncation at |x| = {TRUNCATION}")
        if int(self.grid_n) < MIN_GRID_N + 1:
            raise ResolutionError(f"grid_n = {self.grid_n} leaves fewer than {MIN_GRID_N} interior points")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "bc", BC(self.bc))
        object.__setattr__(self, "weight_profile", as_weight(self.weight_profile))
        object.__setattr__(self, "grid_n", int(self.grid_n))
        object.__setattr__(self, "truncated", (ta, tb))

    @property
    def breakpoints(self) -> list[float]:
        inner = [float(t) for t in getattr(self.weight_profile, "breaks", ())
                 if self.a + 1e-12 < t < self.b - 1e-12]
        return sorted(set([self.a, self.b] + inner))


@dataclass
class Eigenpair1D:
    """One eigenpair on the finest grid plus its extrapolated eigenvalue.

    ``function`` is normalized in the discrete weighted ``L^2`` norm.
    ``face_derivative`` is ``v'`` at cell midpoints recovered from the
    cumulative discrete flux, which is free of differencing noise.
    """

    value: float
    raw: float
    order: float
    trusted: bool
    x: np.ndarray
    function: np.ndarray
    derivative: np.ndarray
    faces: np.ndarray
    face_derivative: np.ndarray
    zero_mean_defect: float
    problem: SLProblem
    index: int
    levels: tuple = ()
    residual: float = 0.0
    lowest: float = 0.0
    lowest_is_constant: bool = False

    @property
    def extrapolated(self) -> bool:
        return self.trusted and len(self.levels) == 3


def segment_counts(breaks: Sequence[float], n: int) -> list[int]:
    """Interval counts per segment summing to about ``n`` (at least 2 each)."""
    L = breaks[-1] - breaks[0]
    return [max(2, int(round(n * (v - u) / L))) for u, v in zip(breaks[:-1], breaks[1:])]


def build_grid(breaks: Sequence[float], counts: Sequence[int]) -> np.ndarray:
    parts = [np.linspace(u, v, c + 1)[:-1] for u, v, c in zip(breaks[:-1], breaks[1:], counts)]
    parts.append(np.array([breaks[-1]]))
    return np.concatenate(parts)


@dataclass
class _Discretization:
    x: np.ndarray
    h: np.ndarray
    faces: np.ndarray
    rho_face: np.ndarray
    mass: np.ndarray
    potential: np.ndarray
    free: np.ndarray

    def pencil(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        c = self.rho_face / self.h
        d = np.zeros(self.x.size)
        d[:-1] += c
        d[1:] += c
        d += self.potential
        off = -c
        idx = self.free
        d, m = d[idx], self.mass[idx]
        off = off[idx[:-1]] if idx.size > 1 else np.empty(0)
        return d, off, m

    def rayleigh(self, v_full: np.ndarray) -> float:
        c = self.rho_face / self.h
        num = np.dot(c, np.diff(v_full) ** 2) + np.dot(self.potential, v_full ** 2)
        return float(num / np.dot(self.mass, v_full ** 2))


def _discretize(x: np.ndarray, rho: Callable, bc: BC, potential: Optional[Callable] = None,
                fix_left: bool = False) -> _Discretization:
    h = np.diff(x)
    faces = 0.5 * (x[:-1] + x[1:])
    rf = rho(faces)
    mass = np.zeros(x.size)
    mass[:-1] += 0.5 * h * rf
    mass[1:] += 0.5 * h * rf
    pot = np.zeros(x.size)
    if potential is not None:
        cell = np.zeros(x.size)
        cell[:-1] += 0.5 * h
        cell[1:] += 0.5 * h
        inner = x > 0
        pot[inner] = potential(x[inner]) * cell[inner]
    free = np.arange(x.size)
    if bc is BC.DIRICHLET:
        free = free[1:-1]
    elif fix_left:
        free = free[1:]
    return _Discretization(x, h, faces, rf, mass, pot, free)


def _solve_level(disc: _Discretization, k: int):
    d, off, m = disc.pencil()
    if np.any(m <= 0):
        raise WeightError("lumped mass has a non-positive entry; the weight vanishes on a whole cell")
    s = 1.0 / np.sqrt(m)
    T = SymTriMatrix(d * s * s, off * s[:-1] * s[1:])
    res = eigs_sym_tridiagonal(T, k)
    V = np.zeros((disc.x.size, k))
    V[disc.free] = res.vectors * s[:, None]
    vals = np.array([disc.rayleigh(V[:, j]) for j in range(k)])
    for j in range(k):
        V[:, j] /= math.sqrt(np.dot(disc.mass, V[:, j] ** 2))
    return vals, V, res


def richardson(coarse: float, mid: float, fine: float) -> tuple[float, float, bool]:
    """Order-2 extrapolation from ``mid``/``fine`` with the order measured from all three.

    Returns ``(value, order, trusted)``.  Differences at round-off level count
    as converged and the fine value is returned as trusted.
    """
    d1, d2 = mid - coarse, fine - mid
    scale = max(1.0, abs(fine))
    if abs(d2) <= 1e-13 * scale:
        return fine, float("nan"), True
    ratio = d1 / d2
    order = math.log2(ratio) if ratio > 0 else float("nan")
    if ORDER_WINDOW[0] < order < ORDER_WINDOW[1]:
        return (4.0 * fine - mid) / 3.0, order, True
    return fine, order, False


def _eigen_1d(prob: SLProblem, index: int, rho: Callable, potential=None,
              fix_left: bool = False, breaks=None) -> Eigenpair1D:
    breaks = breaks if breaks is not None else prob.breakpoints
    base = segment_counts(breaks, max(2, prob.grid_n // 2))
    vals = []
    for level in range(3):
        x = build_grid(breaks, [c * 2 ** level for c in base])
        disc = _discretize(x, rho, prob.bc, potential, fix_left)
        w, V, res = _solve_level(disc, index + 1)
        vals.append(w)
    value, order, trusted = richardson(vals[0][index], vals[1][index], vals[2][index])
    if not trusted:
        warnings.warn(f"measured order {order:.3f} outside {ORDER_WINDOW}; returning the raw fine-grid value",
                      ExtrapolationWarning, stacklevel=3)
    v = V[:, index]
    if index > 0 and prob.bc is BC.NEUMANN and potential is None:
        defect = abs(float(np.dot(disc.mass, v))) / math.sqrt(float(disc.mass.sum()))
    else:
        defect = 0.0
    lam = vals[2][index]
    flux = _face_flux(disc, v, lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        fd = np.where(disc.rho_face > 0, flux / disc.rho_face, np.diff(v) / disc.h)
    nodal = np.empty_like(v)
    nodal[1:-1] = 0.5 * (fd[:-1] + fd[1:])
    nodal[0], nodal[-1] = fd[0], fd[-1]
    # fix the sign so that the eigenfunction increases at the left end
    sgn = 1.0 if (fd[0] if abs(fd[0]) > 0 else v[-1] - v[0]) >= 0 else -1.0
    v0 = V[:, 0]
    constant = bool(np.ptp(v0) <= 1e-6 * np.max(np.abs(v0)))
    return Eigenpair1D(value=float(value), raw=float(lam), order=order, trusted=trusted,
                       x=disc.x, function=sgn * v, derivative=sgn * nodal, faces=disc.faces,
                       face_derivative=sgn * fd, zero_mean_defect=defect, problem=prob, index=index,
                       levels=tuple(float(w[index]) for w in vals),
                       residual=float(res.residuals[index]), lowest=float(vals[2][0]),
                       lowest_is_constant=constant)


def _face_flux(disc: _Discretization, v: np.ndarray, lam: float) -> np.ndarray:
    """Face fluxes ``rho v'`` from the discrete balance ``-(F_r - F_l) = lam m v - q v``."""
    src = (lam * disc.mass - disc.potential) * v
    first = disc.rho_face[0] * (v[1] - v[0]) / disc.h[0]
    if disc.free[0] == 0:
        first = -src[0]
    return first - np.concatenate(([0.0], np.cumsum(src[1:-1])))


def _gauss_rho(weight) -> Callable:
    return lambda t: weight(t) * np.exp(-0.5 * t * t)


def solve_sl(prob: SLProblem, index: int) -> Eigenpair1D:
    """Eigenpair number ``index`` (0-based, ascending) of ``prob``."""
    if index < 0:
        raise ParameterError("index must be >= 0")
    return _eigen_1d(prob, index, _gauss_rho(prob.weight_profile))


def _neumann_first(prob: SLProblem) -> Eigenpair1D:
    pair = solve_sl(prob, 1)
    if abs(pair.lowest) > ZERO_MODE_TOL or not pair.lowest_is_constant:
        raise ResolutionError(f"trivial Neumann eigenvalue computed as {pair.lowest:.3e}, expected 0 "
                              "with a constant eigenvector")
    return pair


def mu1_interval(a: float, b: float, grid_n: int = DEFAULT_GRID_N) -> float:
    """First nontrivial Neumann eigenvalue of the Hermite operator on ``(a, b)``."""
    return _neumann_first(SLProblem(a, b, BC.NEUMANN, None, grid_n)).value


def lambda1_interval(a: float, b: float, grid_n: int = DEFAULT_GRID_N) -> float:
    """First Dirichlet eigenvalue of the Hermite operator on ``(a, b)``."""
    return solve_sl(SLProblem(a, b, BC.DIRICHLET, None, grid_n), 0).value


def _check_weight(prob: SLProblem):
    x = build_grid(prob.breakpoints, segment_counts(prob.breakpoints, prob.grid_n))
    vals = prob.weight_profile(x)
    if not np.all(np.isfinite(vals)):
        raise WeightError("weight is not finite on the grid")
    bad = np.nonzero(vals[1:-1] <= 0)[0]
    if bad.size or vals[0] < 0 or vals[-1] < 0:
        where = x[1 + bad[0]] if bad.size else (x[0] if vals[0] < 0 else x[-1])
        raise WeightError(f"weight is not positive at x = {where:.6g}")


def weighted_eigenpair(a: float, b: float, phi, grid_n: int = DEFAULT_GRID_N) -> Eigenpair1D:
    prob = SLProblem(a, b, BC.NEUMANN, phi, grid_n)
    _check_weight(prob)
    return _neumann_first(prob)


def weighted_mu1(a: float, b: float, phi, grid_n: int = DEFAULT_GRID_N) -> float:
    """First nontrivial eigenvalue of ``-(phi g v')' = lam phi g v`` with natural ends, ``g = exp(-x^2/2)``."""
    return weighted_eigenpair(a, b, phi, grid_n).value


@dataclass
class TransformCheck:
    residual: float
    boundary_defect: float
    points: int
    w_norm: float


def transform_check(eigpair: Eigenpair1D, phi=None, margin: float = 0.05) -> TransformCheck:
    """Residual of the equation satisfied by ``w = v' phi^(1/2)``.

    ``-w'' + x w' + w B - (lam - 1) w`` with
    ``B = -phi''/(2 phi) + 3/4 (phi'/phi)^2 - x phi'/(2 phi)`` is evaluated by
    central differences at cell midpoints that sit at least ``margin`` times
    the interval length away from the ends and from every kink of ``phi``.
    The max residual is returned relative to ``max |w|``.
    """
    prob = eigpair.problem
    phi = as_weight(phi if phi is not None else prob.weight_profile)
    xf = eigpair.faces
    vals = phi(xf)
    if np.any(vals[1:-1] <= 0):
        raise WeightError("weight vanishes at an interior grid point")
    w = eigpair.face_derivative * np.sqrt(np.maximum(vals, 0.0))
    lam = eigpair.raw
    wnorm = float(np.max(np.abs(w)))
    delta = margin * (prob.b - prob.a)
    worst = 0.0
    count = 0
    bps = prob.breakpoints
    for u, v in zip(bps[:-1], bps[1:]):
        idx = np.nonzero((xf > u) & (xf < v))[0]
        if idx.size < 3:
            continue
        hh = xf[idx[1]] - xf[idx[0]]
        wi = w[idx]
        xi = xf[idx][1:-1]
        wp = (wi[2:] - wi[:-2]) / (2 * hh)
        wpp = (wi[2:] - 2 * wi[1:-1] + wi[:-2]) / (hh * hh)
        f = phi(xi)
        r1 = phi.d1(xi) / f
        B = -0.5 * phi.d2(xi) / f + 0.75 * r1 * r1 - 0.5 * xi * r1
        r = -wpp + xi * wp + wi[1:-1] * B - (lam - 1.0) * wi[1:-1]
        keep = np.ones(xi.size, dtype=bool)
        for t in bps:
            keep &= np.abs(xi - t) >= delta
        if keep.any():
            worst = max(worst, float(np.max(np.abs(r[keep]))))
            count += int(keep.sum())
    ends = np.abs(w[[0, -1]]) / wnorm
    return TransformCheck(residual=worst / wnorm, boundary_defect=float(ends.max()),
                          points=count, w_norm=wnorm)


def _shoot(a: float, b: float, bc: BC, mu: float, phi, breaks, dense: bool = False):
    """Integrate ``v' = F/rho, F' = -mu rho v`` from ``a`` to ``b``; restart at kinks."""
    rho = _gauss_rho(phi)
    y = np.array([1.0, 0.0]) if bc is BC.NEUMANN else np.array([0.0, 1.0])
    pieces = []

    def rhs(t, s):
        r = float(rho(np.array([t]))[0])
        return [s[1] / r, -mu * r * s[0]]

    for u, v in zip(breaks[:-1], breaks[1:]):
        sol = solve_ivp(rhs, (u, v), y, method="DOP853", rtol=1e-13, atol=1e-15, dense_output=dense)
        if not sol.success:
            raise BracketError(f"integration failed on ({u}, {v}): {sol.message}")
        y = sol.y[:, -1]
        if dense:
            pieces.append((u, v, sol.sol))
    defect = y[1] if bc is BC.NEUMANN else y[0]
    return defect, pieces


def shooting_eigenvalue(a: float, b: float, bc, bracket: tuple[float, float], phi=None,
                        tol: float = 1e-11) -> float:
    """Eigenvalue inside ``bracket`` by shooting and bisection on the end defect.

    Neumann starts from ``v(a) = 1, (rho v')(a) = 0`` and roots ``(rho v')(b)``;
    Dirichlet starts from ``v(a) = 0, (rho v')(a) = 1`` and roots ``v(b)``.
    """
    bc = BC(bc)
    phi = as_weight(phi)
    if not (np.isfinite(a) and np.isfinite(b) and a < b):
        raise ParameterError(f"need finite a < b, got ({a}, {b})")
    if phi(np.array([a]))[0] <= 0 or phi(np.array([b]))[0] <= 0:
        raise WeightError("shooting needs a weight that is positive at both ends")
    breaks = SLProblem(a, b, bc, phi, 64).breakpoints
    lo, hi = map(float, bracket)
    flo = _shoot(a, b, bc, lo, phi, breaks)[0]
    fhi = _shoot(a, b, bc, hi, phi, breaks)[0]
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise BracketError(f"no sign change of the boundary defect on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = _shoot(a, b, bc, mid, phi, breaks)[0]
        if fm == 0.0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def shooting_solution(a: float, b: float, bc, mu: float, phi=None) -> Callable:
    """Dense-output shooting solution at ``mu``, as a callable ``x -> v(x)``."""
    bc = BC(bc)
    phi = as_weight(phi)
    breaks = SLProblem(a, b, bc, phi, 64).breakpoints
    _, pieces = _shoot(a, b, bc, mu, phi, breaks, dense=True)

    def v(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        for i, t in enumerate(x):
            for u, w, s in pieces:
                if u <= t <= w:
                    out[i] = s(t)[0]
                    break
            else:
                raise ValueError(f"x = {t} outside ({a}, {b})")
        return out

    return v


def disk_radial_eigenvalue(R: float, m: int, grid_n: int = DEFAULT_GRID_N, index: int = 0) -> float:
    """Radial eigenvalue of the Hermite operator on the disk of radius ``R``.

    Solves ``-(r g g')' + m^2 g g / r = mu r g g`` (``g = exp(-r^2/2)``) on
    ``(0, R)`` with ``g'(R) = 0``; ``m >= 1`` imposes ``g(0) = 0``.  ``index``
    counts eigenvalues from the lowest, skipping the constant mode when
    ``m = 0``.
    """
    return disk_radial_pair(R, m, grid_n, index).value


def disk_radial_pair(R: float, m: int, grid_n: int = DEFAULT_GRID_N, index: int = 0) -> Eigenpair1D:
    if int(m) != m or m < 0:
        raise ParameterError(f"angular index must be a nonnegative integer, got {m}")
    if not R > 0:
        raise ParameterError(f"radius must be positive, got {R}")
    m = int(m)
    prob = SLProblem(0.0, float(R), BC.NEUMANN, None, grid_n)
    rho = lambda r: r * np.exp(-0.5 * r * r)
    pot = (lambda r: m * m * np.exp(-0.5 * r * r) / r) if m > 0 else None
    j = index + (1 if m == 0 else 0)
    return _eigen_1d(prob, j, rho, potential=pot, fix_left=m > 0, breaks=[0.0, prob.b])


def disk_mu1(R: float, grid_n: int = DEFAULT_GRID_N) -> float:
    """First nontrivial Neumann eigenvalue of the origin-centred disk of radius ``R``."""
    return min(disk_radial_eigenvalue(R, 1, grid_n), disk_radial_eigenvalue(R, 0, grid_n))


CSV_FIELDS = ("a", "b", "bc", "grid_n", "value", "extrapolated", "order", "residual")


def csv_row(pair: Eigenpair1D) -> dict:
    p = pair.problem
    return {"a": p.a, "b": p.b, "bc": p.bc.value, "grid_n": p.grid_n, "value": pair.value,
            "extrapolated": pair.extrapolated, "order": pair.order, "residual": pair.residual}


def export_csv(pairs: Sequence[Eigenpair1D], path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        wr.writeheader()
        for p in pairs:
            wr.writerow({k: (f"{v:.12g}" if isinstance(v, float) else v) for k, v in csv_row(p).items()})
