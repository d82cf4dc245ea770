"""Gaussian-weighted P1 Galerkin eigensolver on triangulations.

The weak form of ``-div(e^{-|x|^2/2} grad u) = mu e^{-|x|^2/2} u`` with natural
(Neumann) boundary conditions is discretized by piecewise-linear elements and
a degree-6 triangle rule for the weight.  Odd eigenvalues are computed on the
half domain ``x > 0`` with the axis nodes eliminated (homogeneous Dirichlet).
Unbounded domains are handled by truncation along an invading sequence.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .eigen import DENSE_CAP, DenseSymPair, eigs_generalized_sym
from .errors import DegenerateDomainError, GeometryError, UnsupportedDomainError
from .gaussian import TRIANGLE_RULE, gaussian_measure_2d, second_moment_x
from .geometry import (Domain, HalfDomain, default_fillet_radius, half_domain, invading_sequence,
                       min_truncation_depth)
from .mesh import Mesh, nested_meshes, write_mesh

GRADE_RADIUS = 3.0
LEVELS = 3
N_MAX = 14
N_STEP = 2
DEFAULT_FILLET = 0.25
REL_TRUNC_TOL = 1e-3
TRUST_WINDOW = (1.5, 2.5)


@dataclass(frozen=True, eq=False)
class AssembledSystem:
    """Stiffness/mass pencil on the free degrees of freedom of a mesh."""

    pair: DenseSymPair
    mesh: Mesh
    constrained_dofs: np.ndarray
    free_dofs: np.ndarray
    weight: str = "gaussian"

    def expand(self, v: np.ndarray) -> np.ndarray:
        """Nodal vector(s) on the whole mesh, zero at constrained nodes."""
        v = np.asarray(v)
        out = np.zeros((self.mesh.n_vertices,) + v.shape[1:])
        out[self.free_dofs] = v
        return out


def local_matrices(mesh: Mesh) -> tuple[np.ndarray, np.ndarray]:
    """Per-triangle weighted stiffness and mass blocks, shape ``(m, 3, 3)``."""
    X = mesh.vertices[mesh.triangles]
    d1, d2 = X[:, 1] - X[:, 0], X[:, 2] - X[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    area = 0.5 * det
    # gradients of the barycentric coordinates
    G = np.empty((len(X), 3, 2))
    G[:, 1] = np.column_stack([d2[:, 1], -d2[:, 0]]) / det[:, None]
    G[:, 2] = np.column_stack([-d1[:, 1], d1[:, 0]]) / det[:, None]
    G[:, 0] = -G[:, 1] - G[:, 2]
    B = TRIANGLE_RULE.nodes
    q = np.einsum("qk,mkd->mqd", B, X)
    rho = np.exp(-0.5 * (q * q).sum(-1)) * TRIANGLE_RULE.weights
    mass_w = rho.sum(axis=1) * area
    K = np.einsum("mid,mjd->mij", G, G) * mass_w[:, None, None]
    M = np.einsum("mq,qi,qj->mij", rho, B, B) * area[:, None, None]
    return K, M


def assemble(mesh: Mesh, constrain_axis: bool = False) -> AssembledSystem:
    """Dense weighted stiffness and mass matrices of the P1 space on ``mesh``.

    With ``constrain_axis`` the rows and columns of axis-tagged nodes are
    removed, which imposes ``u = 0`` on the symmetry axis.
    """
    mesh.validate()
    n = mesh.n_vertices
    Kl, Ml = local_matrices(mesh)
    T = mesh.triangles
    rows = np.repeat(T, 3, axis=1).ravel()
    cols = np.tile(T, (1, 3)).ravel()
    flat = rows * n + cols
    K = np.bincount(flat, weights=Kl.ravel(), minlength=n * n).reshape(n, n)
    M = np.bincount(flat, weights=Ml.ravel(), minlength=n * n).reshape(n, n)
    K = 0.5 * (K + K.T)
    M = 0.5 * (M + M.T)
    constrained = np.empty(0, dtype=int)
    if constrain_axis:
        constrained = mesh.axis_nodes()
        if constrained.size == 0:
            raise GeometryError("mesh has no axis-tagged boundary; the domain does not meet x = 0")
    free = np.setdiff1d(np.arange(n), constrained)
    if constrained.size:
        K = K[np.ix_(free, free)]
        M = M[np.ix_(free, free)]
    return AssembledSystem(DenseSymPair(K, M), mesh, constrained, free)


@dataclass
class ConvergenceRecord:
    """Samples of one quantity under a refinement parameter (``h`` or ``n``)."""

    parameter: str
    samples: list
    extrapolated: float
    order: float
    converged: bool
    tolerance: float
    monotone: str = ""
    label: str = ""

    def __post_init__(self):
        p = [s[0] for s in self.samples]
        d = np.diff(p)
        if len(p) > 1 and not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError(f"samples must be strictly monotone in {self.parameter}")
        if not self.monotone:
            v = np.diff([s[1] for s in self.samples])
            if v.size == 0:
                self.monotone = "n/a"
            elif np.all(v >= 0):
                self.monotone = "non-decreasing"
            elif np.all(v <= 0):
                self.monotone = "non-increasing"
            else:
                self.monotone = "non-monotone"

    @property
    def last(self) -> float:
        return self.samples[-1][1]

    def to_dict(self) -> dict:
        return {"label": self.label, "parameter": self.parameter,
                "samples": [[float(a), float(b)] for a, b in self.samples],
                "extrapolated": float(self.extrapolated), "order": float(self.order),
                "converged": bool(self.converged), "tolerance": float(self.tolerance),
                "monotone": self.monotone}


@dataclass
class Spectrum2D:
    """Low spectrum of one pencil family on nested meshes.

    ``values`` are the finest-level eigenvalues; ``extrapolated`` applies
    order-2 Richardson extrapolation index by index and ``order`` is the
    order measured from the three levels.
    """

    values: np.ndarray
    mesh_h: float
    kind: str
    levels: list
    extrapolated: np.ndarray
    order: np.ndarray
    truncation_n: Optional[int] = None
    bound_direction: str = "upper"
    domain_name: str = ""
    n_dofs: int = 0
    mesh: Optional[Mesh] = field(default=None, repr=False)
    vectors: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def target_index(self) -> int:
        return 1 if self.kind == "neumann" else 0

    @property
    def value(self) -> float:
        """The extrapolated target eigenvalue (mu_1 or mu_1^odd)."""
        return float(self.extrapolated[self.target_index])

    def record(self, tol: float = math.inf, index: Optional[int] = None) -> ConvergenceRecord:
        j = self.target_index if index is None else index
        samples = [(h, float(v[j])) for h, v in self.levels]
        fine = samples[-1][1]
        ext = float(self.extrapolated[j])
        return ConvergenceRecord("h", samples, ext, float(self.order[j]), abs(ext - fine) < tol, tol,
                                 label=f"{self.kind}[{j}] {self.domain_name}".strip())

    def to_dict(self) -> dict:
        return {"domain": self.domain_name, "kind": self.kind, "mesh_h": self.mesh_h,
                "values": [float(v) for v in self.values],
                "extrapolated": [float(v) for v in self.extrapolated],
                "order": [float(v) for v in self.order],
                "levels": [{"h": h, "values": [float(x) for x in v]} for h, v in self.levels],
                "truncation_n": self.truncation_n, "bound_direction": self.bound_direction,
                "n_dofs": self.n_dofs}


def extrapolate_levels(vals: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Order-2 extrapolation of the last two levels, order measured from the last three.

    Extrapolation is applied only where the measured order lies in
    ``TRUST_WINDOW`` (singular eigenfunctions, e.g. at re-entrant corners,
    converge more slowly); elsewhere the finest value, an upper bound, is kept.
    """
    V = np.asarray(vals, dtype=float)
    fine = V[-1]
    order = np.full(fine.shape, np.nan)
    if len(V) < 2:
        return fine.copy(), order
    mid = V[-2]
    if len(V) >= 3:
        d1, d2 = V[-2] - V[-3], V[-1] - V[-2]
        with np.errstate(divide="ignore", invalid="ignore"):
            r = d1 / d2
            order = np.where(r > 0, np.log2(np.where(r > 0, r, 1.0)), np.nan)
        trusted = (order > TRUST_WINDOW[0]) & (order < TRUST_WINDOW[1])
    else:
        trusted = np.ones(fine.shape, dtype=bool)
    ext = np.where(trusted, fine + (fine - mid) / 3.0, fine)
    small = np.abs(fine - mid) <= 1e-12 * np.maximum(1.0, np.abs(fine))
    ext = np.where(small, fine, ext)
    return ext, order


def _extent(domain: Domain) -> float:
    pts = np.vstack([np.asarray(p.point(np.linspace(0, 1, 65))) for p in domain.boundary_pieces()])
    return float(np.max(np.hypot(pts[:, 0], pts[:, 1])))


def auto_grade_radius(domain: Domain) -> Optional[float]:
    """Grade meshes beyond ``GRADE_RADIUS`` for domains reaching well past it."""
    return GRADE_RADIUS if _extent(domain) > GRADE_RADIUS + 1.0 else None


def _solve_levels(domain: Domain, h: float, k: int, constrain: bool, levels: int,
                  grade_radius, cap: int) -> tuple[list, Mesh, np.ndarray, int]:
    if not domain.bounded:
        raise UnsupportedDomainError(f"{domain.name!r} is unbounded; use solve_unbounded")
    if grade_radius == "auto":
        grade_radius = auto_grade_radius(domain)
    meshes = nested_meshes(domain, h, levels, grade_radius)
    out = []
    system = res = None
    for mesh in meshes:
        system = assemble(mesh, constrain_axis=constrain)
        res = eigs_generalized_sym(system.pair, min(k, system.pair.n), cap=cap)
        out.append((mesh.h, res.values.copy()))
    return out, meshes[-1], system.expand(res.vectors), system.pair.n


def _spectrum(domain: Domain, kind: str, raw: list, mesh: Mesh, vecs, ndof) -> Spectrum2D:
    ext, order = extrapolate_levels([v for _, v in raw])
    if kind == "neumann":
        ext[0] = raw[-1][1][0]
    return Spectrum2D(values=raw[-1][1], mesh_h=mesh.h, kind=kind, levels=raw, extrapolated=ext,
                      order=order, domain_name=domain.name, n_dofs=ndof, mesh=mesh, vectors=vecs)


def neumann_spectrum(domain: Domain, h: float, k: int = 6, levels: int = LEVELS,
                     grade_radius="auto", cap: int = DENSE_CAP) -> Spectrum2D:
    """Lowest ``k`` weighted Neumann eigenvalues on nested meshes (finest size ``h``)."""
    if k < 2:
        raise ValueError("k must be at least 2")
    if isinstance(domain, HalfDomain):
        raise UnsupportedDomainError("Neumann spectra are computed on the full domain")
    raw, mesh, vecs, ndof = _solve_levels(domain, h, k, False, levels, grade_radius, cap)
    return _spectrum(domain, "neumann", raw, mesh, vecs, ndof)


def mu1_odd(domain: Domain, h: float, levels: int = LEVELS, grade_radius="auto",
            cap: int = DENSE_CAP, k: int = 1) -> Spectrum2D:
    """Lowest eigenvalue with an eigenfunction odd in ``x``.

    Solved on the half domain with ``u = 0`` on the axis.  Each level is a
    conforming Rayleigh-Ritz value, hence an upper bound for the polygonal
    domain actually meshed.
    """
    half = domain if isinstance(domain, HalfDomain) else half_domain(domain)
    raw, mesh, vecs, ndof = _solve_levels(half, h, k, True, levels, grade_radius, cap)
    return _spectrum(domain, "odd", raw, mesh, vecs, ndof)


@dataclass
class UnboundedResult:
    """Outcome of the truncation loop on an unbounded domain."""

    odd: Spectrum2D
    neumann: Optional[Spectrum2D]
    records: dict
    converged: bool
    depths: list
    fillet_radius: float

    @property
    def mu1_odd(self) -> float:
        return self.odd.value

    @property
    def mu1(self) -> Optional[float]:
        return None if self.neumann is None else self.neumann.value


def solve_unbounded(domain: Domain, tol: Optional[float] = None, h: float = 0.1,
                    r: Optional[float] = None, neumann: bool = False, k: int = 4,
                    n_max: int = N_MAX, step: int = N_STEP, cap: int = DENSE_CAP) -> UnboundedResult:
    """Odd (and optionally Neumann) eigenvalue of an unbounded domain by truncation.

    Solves on ``invading_sequence(domain, n, r)`` for ``n = n0 + 2, n0 + 4, ...``
    (``n0`` the smallest admissible depth) until successive values differ by
    less than ``tol`` (default ``1e-3`` times the value) or ``n`` passes
    ``n_max``.  Non-convergence is reported through ``converged = False``.
    """
    if domain.bounded:
        raise UnsupportedDomainError(f"{domain.name!r} is bounded; use mu1_odd / neumann_spectrum")
    if tol is not None and not tol > 0:
        raise ValueError("tol must be positive")
    r = r if r is not None else (default_fillet_radius(domain) or DEFAULT_FILLET)
    n0 = min_truncation_depth(domain)
    depths, odd_s, neu_s = [], [], []
    odd = neu = None
    converged = False
    n = n0 + step
    while n <= n_max:
        dn = invading_sequence(domain, n, r)
        odd = mu1_odd(dn, h, cap=cap)
        odd.truncation_n = n
        odd_s.append((n, odd.value))
        if neumann:
            neu = neumann_spectrum(dn, h, k, cap=cap)
            neu.truncation_n = n
            neu_s.append((n, neu.value))
        depths.append(n)
        if len(depths) >= 2:
            ok = _close(odd_s, tol)
            if neumann:
                ok = ok and _close(neu_s, tol)
            if ok:
                converged = True
                break
        n += step
    if odd is None:
        raise GeometryError(f"no admissible truncation depth up to n = {n_max}")
    records = {"odd": _trunc_record(odd_s, tol, converged, "mu1_odd")}
    if neumann:
        records["neumann"] = _trunc_record(neu_s, tol, converged, "mu1")
    return UnboundedResult(odd, neu, records, converged, depths, r)


def _close(samples, tol) -> bool:
    a, b = samples[-2][1], samples[-1][1]
    t = tol if tol is not None else REL_TRUNC_TOL * abs(b)
    return abs(b - a) < t


def _trunc_record(samples, tol, converged, label) -> ConvergenceRecord:
    t = tol if tol is not None else REL_TRUNC_TOL * abs(samples[-1][1])
    return ConvergenceRecord("n", samples, samples[-1][1], float("nan"), converged, t, label=label)


def rayleigh_upper_bound(domain: Domain) -> float:
    """Rayleigh quotient of the odd trial function ``u = x``.

    Equals ``gamma_2(domain) / int x^2 d gamma_2`` and bounds the odd
    eigenvalue from above.  Unbounded domains are integrated directly.
    """
    num = gaussian_measure_2d(domain)
    den = second_moment_x(domain)
    if not den > 1e-300:
        raise DegenerateDomainError(f"{domain.name!r} has zero second moment in x")
    return num / den


SPECTRUM_CSV_FIELDS = ("domain", "kind", "index", "h", "value", "extrapolated", "order", "truncation_n")


def spectrum_rows(spec: Spectrum2D) -> list[dict]:
    rows = []
    for h, vals in spec.levels:
        for j, v in enumerate(vals):
            rows.append({"domain": spec.domain_name, "kind": spec.kind, "index": j, "h": f"{h:.12g}",
                         "value": f"{v:.12g}", "extrapolated": f"{spec.extrapolated[j]:.12g}",
                         "order": f"{spec.order[j]:.12g}",
                         "truncation_n": "" if spec.truncation_n is None else spec.truncation_n})
    return rows


def export_spectrum_csv(spectra: Sequence[Spectrum2D], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SPECTRUM_CSV_FIELDS)
        w.writeheader()
        for s in spectra:
            w.writerows(spectrum_rows(s))


def export_record_csv(records: Sequence[ConvergenceRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "parameter", "sample", "value", "extrapolated", "order", "converged"])
        for r in records:
            for p, v in r.samples:
                w.writerow([r.label, r.parameter, f"{p:.12g}", f"{v:.12g}", f"{r.extrapolated:.12g}",
                            f"{r.order:.12g}", int(r.converged)])


def export_mode(spec: Spectrum2D, path) -> None:
    """Finest mesh plus eigenvectors as nodal values (ASCII mesh format)."""
    if spec.mesh is None or spec.vectors is None:
        raise ValueError("spectrum carries no mesh/eigenvectors")
    write_mesh(path, spec.mesh, spec.vectors)
