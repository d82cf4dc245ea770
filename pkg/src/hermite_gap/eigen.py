"""Dense symmetric eigensolvers with residual certification.

Two entry points:

* :func:`eigs_sym_tridiagonal` -- Sturm-count bisection for the eigenvalues
  (certified brackets) followed by inverse iteration for the vectors.
* :func:`eigs_generalized_sym` -- Cholesky reduction of ``K v = lam M v`` to a
  standard symmetric problem, partial symmetric eigensolve, back-transform.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit
from scipy import linalg
from scipy.linalg import lapack

from .errors import NotPositiveDefiniteError, PrecisionError, SizeCapError

DENSE_CAP = 4000
BRACKET_REL = 1e-12
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class SymTriMatrix:
    """Symmetric tridiagonal matrix stored by its two diagonals."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.ascontiguousarray(self.diag, dtype=float)
        e = np.ascontiguousarray(self.offdiag, dtype=float)
        if d.ndim != 1 or d.size < 1:
            raise ValueError("diag must be a non-empty vector")
        if e.shape != (d.size - 1,):
            raise ValueError(f"offdiag must have length {d.size - 1}, got {e.shape}")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise ValueError("entries must be finite")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def n(self) -> int:
        return self.diag.size

    def norm(self) -> float:
        """Infinity norm (max absolute row sum)."""
        r = np.abs(self.diag).copy()
        r[:-1] += np.abs(self.offdiag)
        r[1:] += np.abs(self.offdiag)
        return float(r.max())

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diag[:, None] * v if v.ndim == 2 else self.diag * v
        if self.n > 1:
            e = self.offdiag[:, None] if v.ndim == 2 else self.offdiag
            out[:-1] += e * v[1:]
            out[1:] += e * v[:-1]
        return out

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


@dataclass(frozen=True)
class DenseSymPair:
    """Stiffness/mass pencil ``(K, M)`` with ``K`` symmetric and ``M`` SPD."""

    K: np.ndarray
    M: np.ndarray

    def __post_init__(self):
        K = np.asarray(self.K, dtype=float)
        M = np.asarray(self.M, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape != M.shape:
            raise ValueError(f"K and M must be square and equal-shaped, got {K.shape}, {M.shape}")
        for name, A in (("K", K), ("M", M)):
            scale = max(1e-300, float(np.max(np.abs(A))))
            if np.max(np.abs(A - A.T)) > 1e-12 * scale:
                raise ValueError(f"{name} is not symmetric to 1e-12 relative")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "M", M)

    @property
    def n(self) -> int:
        return self.K.shape[0]


@dataclass
class EigenResult:
    values: np.ndarray
    vectors: Optional[np.ndarray]
    residuals: np.ndarray
    brackets: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)


@njit(cache=True)
def _sturm_count(d, e2, x, pivmin):
    """Number of eigenvalues strictly below ``x`` (negative LDL^T pivots)."""
    n = d.size
    count = 0
    q = d[0] - x
    if abs(q) < pivmin:
        q = -pivmin
    if q < 0.0:
        count += 1
    for i in range(1, n):
        q = d[i] - x - e2[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


@njit(cache=True)
def _bisect_smallest(d, e2, k, lo0, hi0, pivmin, abstol):
    """Brackets ``[lo, hi]`` for the ``k`` smallest eigenvalues by bisection."""
    los = np.empty(k)
    his = np.empty(k)
    lo_start = lo0
    for j in range(k):
        lo = lo_start
        hi = hi0
        for _ in range(400):
            if hi - lo <= abstol:
                break
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if _sturm_count(d, e2, mid, pivmin) > j:
                hi = mid
            else:
                lo = mid
        los[j] = lo
        his[j] = hi
        lo_start = lo
    return los, his


def sturm_count(T: SymTriMatrix, x: float) -> int:
    """Number of eigenvalues of ``T`` strictly below ``x``."""
    e2 = T.offdiag ** 2
    pivmin = np.finfo(float).tiny * max(1.0, float(e2.max(initial=0.0)))
    return int(_sturm_count(T.diag, e2, float(x), pivmin))


def _inverse_iteration(T: SymTriMatrix, values: np.ndarray, scale: float) -> np.ndarray:
    n = T.n
    k = values.size
    V = np.empty((n, k))
    rng = np.random.default_rng(12345)
    e = T.offdiag
    cluster_gap = 1e-8 * scale
    start = 0
    for j in range(k):
        lam = values[j]
        if j > 0 and lam - values[j - 1] > cluster_gap:
            start = j
        shift = lam + 2.0 * np.finfo(float).eps * scale * (1 + j - start)
        v = rng.standard_normal(n)
        v /= np.linalg.norm(v)
        for _ in range(4):
            if n == 1:
                y = np.array([1.0])
            else:
                *_, y, info = lapack.dgtsv(e, T.diag - shift, e, v[:, None])
                if info != 0:
                    shift += 8.0 * np.finfo(float).eps * scale
                    continue
                y = y[:, 0]
            for i in range(start, j):
                y -= np.dot(V[:, i], y) * V[:, i]
            nrm = np.linalg.norm(y)
            if not np.isfinite(nrm) or nrm == 0.0:
                break
            v = y / nrm
        V[:, j] = v
    return V


def eigs_sym_tridiagonal(T: SymTriMatrix, k: int, vectors: bool = True) -> EigenResult:
    """The ``k`` smallest eigenvalues of ``T`` with certified bisection brackets.

    Every bracket has width at most ``1e-12 * max(1, ||T||)``.  Vectors come
    from inverse iteration; residuals are ``||T v - lam v|| / ||v||``.
    """
    n = T.n
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= n={n}, got {k}")
    scale = max(1.0, T.norm())
    d = T.diag
    e2 = T.offdiag ** 2
    pivmin = np.finfo(float).tiny * max(1.0, float(e2.max(initial=0.0)))
    radius = np.zeros(n)
    radius[:-1] += np.abs(T.offdiag)
    radius[1:] += np.abs(T.offdiag)
    lo0 = float(np.min(d - radius)) - 4 * np.finfo(float).eps * scale
    hi0 = float(np.max(d + radius)) + 4 * np.finfo(float).eps * scale
    abstol = BRACKET_REL * scale
    los, his = _bisect_smallest(d, e2, k, lo0, hi0, pivmin, 0.0)
    widths = his - los
    if np.any(widths > abstol):
        raise PrecisionError(f"bisection bracket width {widths.max():.3e} exceeds {abstol:.3e}")
    values = 0.5 * (los + his)
    V = None
    if vectors:
        V = _inverse_iteration(T, values, scale)
        R = T.matvec(V) - V * values
        residuals = np.linalg.norm(R, axis=0)
    else:
        residuals = np.zeros(k)
    return EigenResult(values=values, vectors=V, residuals=residuals,
                       brackets=np.column_stack([los, his]), meta={"norm": scale})


def eigs_generalized_sym(pair: DenseSymPair, k: int, cap: int = DENSE_CAP,
                         tol: float = RESIDUAL_TOL) -> EigenResult:
    """The ``k`` smallest eigenpairs of ``K v = lam M v``.

    ``M = L L^T`` by Cholesky, ``C = L^{-1} K L^{-T}`` is solved for its lowest
    ``k`` eigenpairs and vectors are mapped back by ``v = L^{-T} y``.  Each
    residual ``||K v - lam M v|| / ||M v||`` must be at most
    ``tol * max(1, |lam|)``.
    """
    n = pair.n
    if n > cap:
        raise SizeCapError(f"system size {n} exceeds the dense cap {cap}; use a coarser mesh (larger h)")
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= n={n}, got {k}")
    L, info = lapack.dpotrf(pair.M, lower=1, clean=1)
    if info > 0:
        raise NotPositiveDefiniteError(int(info))
    if info < 0:
        raise ValueError(f"dpotrf argument error {info}")
    C, info = lapack.dsygst(pair.K, L, itype=1, lower=1)
    if info != 0:
        raise ValueError(f"dsygst failed with info={info}")
    C = np.tril(C)
    C = C + np.tril(C, -1).T
    w, Y = linalg.eigh(C, subset_by_index=[0, k - 1], driver="evr", overwrite_a=True,
                       check_finite=False)
    V = linalg.solve_triangular(L, Y, lower=True, trans="T", check_finite=False)
    MV = pair.M @ V
    R = pair.K @ V - MV * w
    residuals = np.linalg.norm(R, axis=0) / np.linalg.norm(MV, axis=0)
    bound = tol * np.maximum(1.0, np.abs(w))
    if np.any(residuals > bound):
        j = int(np.argmax(residuals / bound))
        raise PrecisionError(f"eigenpair {j} residual {residuals[j]:.3e} exceeds {bound[j]:.3e}")
    return EigenResult(values=w, vectors=V, residuals=residuals)
