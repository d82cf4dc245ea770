"""Verification checks: each inequality or identity is computed from both sides.

Every :class:`CheckReport` stores ``lhs``, ``rhs``, ``tolerance`` and an
``orientation`` from which its pass/fail status can be recomputed:

* ``ge``: pass iff ``lhs - rhs >= -tolerance``
* ``eq``: pass iff ``|lhs - rhs| <= tolerance``
* ``gt``: pass iff ``lhs - rhs > tolerance``

Statuses other than pass/fail (``hypothesis-not-met``, ``inconclusive``,
``unsupported``, ``error``) never count as failures of the inequality.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import HermiteGapError, ParameterError, UnsupportedDomainError
from .gaussian import gaussian_measure_2d
from .geometry import (Disk, Domain, Dumbbell, HalfStrip, Rectangle, default_fillet_radius, diameter,
                       invading_sequence, reflection_jacobian, sample_collar)
from .solver1d import disk_mu1, disk_radial_eigenvalue, lambda1_interval, mu1_interval
from .solver2d import DEFAULT_FILLET, mu1_odd, neumann_spectrum, solve_unbounded

TOL_2D = 5e-3
TOL_1D = 1e-8
DEFAULT_H = 0.05
UNBOUNDED_H = 0.1
GAP_HYPOTHESIS_TOL = 1e-3
JACOBIAN_SLACK = 1e-12
PLANE_LEVELS = (1.0, 1.0, 2.0, 2.0, 2.0)


class CheckId(str, enum.Enum):
    THM1 = "Thm1"
    THM2 = "Thm2"
    SW = "SW"
    ANDREWS_NI = "AndrewsNi"
    GAP = "Gap"
    DUMBBELL = "Dumbbell"
    JACOBIAN = "Jacobian"
    PLANE = "PlaneSpectrum"
    RECTANGLE = "RectangleEquality"
    T_EXAMPLE = "TExample"


class Status(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    HYPOTHESIS_NOT_MET = "hypothesis-not-met"
    INCONCLUSIVE = "inconclusive"
    UNSUPPORTED = "unsupported"
    ERROR = "error"


def verdict(lhs: float, rhs: float, tolerance: float, orientation: str) -> bool:
    m = lhs - rhs
    if orientation == "ge":
        return m >= -tolerance
    if orientation == "eq":
        return abs(m) <= tolerance
    if orientation == "gt":
        return m > tolerance
    raise ValueError(f"unknown orientation {orientation!r}")


@dataclass
class CheckReport:
    check_id: CheckId
    domain_id: str
    lhs: float
    rhs: float
    tolerance: float
    status: Status
    orientation: str = "ge"
    evidence: list = field(default_factory=list)
    settings: dict = field(default_factory=dict)
    detail: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def passed(self) -> bool:
        return self.status is Status.PASS

    @property
    def counts_as_failure(self) -> bool:
        return self.status in (Status.FAIL, Status.ERROR)

    def recompute(self) -> bool:
        """The pass flag implied by the stored numbers."""
        return verdict(self.lhs, self.rhs, self.tolerance, self.orientation)

    def to_dict(self) -> dict:
        return {"check_id": self.check_id.value, "domain_id": self.domain_id, "lhs": self.lhs,
                "rhs": self.rhs, "margin": self.margin, "tolerance": self.tolerance,
                "orientation": self.orientation, "status": self.status.value,
                "evidence": [e.to_dict() if hasattr(e, "to_dict") else e for e in self.evidence],
                "settings": dict(self.settings), "detail": self.detail, "extra": dict(self.extra)}


def _decide(check_id, domain_id, lhs, rhs, tol, orientation="ge", **kw) -> CheckReport:
    ok = verdict(lhs, rhs, tol, orientation)
    return CheckReport(check_id, domain_id, float(lhs), float(rhs), float(tol),
                       Status.PASS if ok else Status.FAIL, orientation, **kw)


def guarded(check_id: CheckId, domain_id: str, tol: float, fn: Callable[[], CheckReport],
            settings: Optional[dict] = None) -> CheckReport:
    """Run ``fn``; package errors become ``error``/``unsupported`` reports instead of aborting."""
    try:
        return fn()
    except UnsupportedDomainError as exc:
        status, msg = Status.UNSUPPORTED, str(exc)
    except HermiteGapError as exc:
        status, msg = Status.ERROR, f"{type(exc).__name__}: {exc}"
    return CheckReport(check_id, domain_id, math.nan, math.nan, tol, status,
                       settings=dict(settings or {}), detail=msg)


def _name(domain: Domain) -> str:
    return domain.name or domain.kind


def _mu1(domain: Domain, h: float) -> tuple[float, list]:
    """First nontrivial Neumann eigenvalue with its evidence (radial solver on disks)."""
    if isinstance(domain, Disk):
        return disk_mu1(domain.R), []
    s = neumann_spectrum(domain, h, k=4)
    return s.value, [s.record()]


def _mu1_odd(domain: Domain, h: float) -> tuple[float, list]:
    if isinstance(domain, Disk):
        return disk_radial_eigenvalue(domain.R, 1), []
    s = mu1_odd(domain, h)
    return s.value, [s.record()]


def _require_bounded(domain: Domain):
    if not domain.bounded:
        raise UnsupportedDomainError(f"{_name(domain)} is unbounded")


def check_thm1(domain: Domain, h: float = DEFAULT_H, tol: float = TOL_2D) -> CheckReport:
    """Odd eigenvalue of a bounded convex symmetric domain versus ``mu_1(-a, a)``."""
    settings = {"h": h}

    def run():
        _require_bounded(domain)
        s = mu1_odd(domain, h)
        rhs = mu1_interval(-domain.a, domain.a)
        return _decide(CheckId.THM1, _name(domain), s.value, rhs, tol, evidence=[s.record()],
                       settings=settings, extra={"a": domain.a, "mesh_h": s.mesh_h, "dofs": s.n_dofs})

    return guarded(CheckId.THM1, _name(domain), tol, run, settings)


def check_thm2(domain: Domain, tol: float = TOL_2D, h: float = UNBOUNDED_H,
               trunc_tol: Optional[float] = None, r: Optional[float] = None) -> CheckReport:
    """Odd eigenvalue of an unbounded domain (truncation loop) versus ``mu_1(-a, a)``."""
    settings = {"h": h, "trunc_tol": trunc_tol, "r": r}

    def run():
        if domain.bounded:
            raise UnsupportedDomainError(f"{_name(domain)} is bounded; use check_thm1")
        res = solve_unbounded(domain, tol=trunc_tol, h=h, r=r)
        rhs = mu1_interval(-domain.a, domain.a)
        rep = _decide(CheckId.THM2, _name(domain), res.mu1_odd, rhs, tol,
                      evidence=[res.records["odd"], res.odd.record()], settings=settings,
                      extra={"a": domain.a, "depths": res.depths, "fillet_radius": res.fillet_radius})
        if not res.converged:
            rep.status = Status.INCONCLUSIVE
            rep.detail = "truncation loop did not converge"
        return rep

    return guarded(CheckId.THM2, _name(domain), tol, run, settings)


def origin_symmetric(domain: Domain, samples: int = 257) -> bool:
    if not domain.bounded:
        return False
    x = np.linspace(-domain.a, domain.a, samples)[1:-1]
    return bool(np.allclose(domain.top(x), -domain.bottom(-x), atol=1e-12, rtol=0))


def symmetrized_radius(domain: Domain) -> float:
    """Radius of the origin-centred disk with the same Gaussian measure."""
    g = gaussian_measure_2d(domain)
    if g >= 1.0 - 1e-12:
        raise UnsupportedDomainError("Gaussian measure is 1; the symmetrized disk is undefined")
    return math.sqrt(-2.0 * math.log1p(-g))


def check_sw(domain: Domain, tol: float = TOL_2D, h: float = DEFAULT_H) -> CheckReport:
    """``mu_1(domain) <= mu_1(disk of equal Gaussian measure)``."""
    settings = {"h": h}

    def run():
        _require_bounded(domain)
        if not origin_symmetric(domain):
            raise UnsupportedDomainError(f"{_name(domain)} is not symmetric about the origin")
        R = symmetrized_radius(domain)
        lhs = disk_mu1(R)
        rhs, ev = _mu1(domain, h)
        return _decide(CheckId.SW, _name(domain), lhs, rhs, tol, evidence=ev, settings=settings,
                       extra={"R_sharp": R, "gaussian_measure": gaussian_measure_2d(domain)})

    return guarded(CheckId.SW, _name(domain), tol, run, settings)


def check_an(domain: Domain, tol: float = TOL_2D, h: float = DEFAULT_H) -> CheckReport:
    """``mu_1(domain) >= mu_1(-d/2, d/2)`` with ``d`` the diameter."""
    settings = {"h": h}

    def run():
        _require_bounded(domain)
        if not domain.convex:
            raise UnsupportedDomainError(f"{_name(domain)} is not convex")
        d = diameter(domain)
        lhs, ev = _mu1(domain, h)
        rhs = mu1_interval(-0.5 * d, 0.5 * d)
        return _decide(CheckId.ANDREWS_NI, _name(domain), lhs, rhs, tol, evidence=ev,
                       settings=settings, extra={"diameter": d})

    return guarded(CheckId.ANDREWS_NI, _name(domain), tol, run, settings)


def check_gap(domain: Domain, tol: float = TOL_2D, h: float = DEFAULT_H,
              trunc_tol: Optional[float] = None, r: Optional[float] = None) -> CheckReport:
    """``mu_1(domain) - 1 >= lambda_1(-a, a)``, conditional on ``mu_1 = mu_1^odd``."""
    settings = {"h": h, "trunc_tol": trunc_tol}

    def run():
        if domain.bounded:
            mu, ev1 = _mu1(domain, h)
            odd, ev2 = _mu1_odd(domain, h)
            ev = ev1 + ev2
        else:
            res = solve_unbounded(domain, tol=trunc_tol, h=max(h, UNBOUNDED_H), r=r, neumann=True)
            mu, odd = res.mu1, res.mu1_odd
            ev = [res.records["neumann"], res.records["odd"]]
        lam = lambda1_interval(-domain.a, domain.a)
        strip_identity = mu1_interval(-domain.a, domain.a) - (1.0 + lam)
        extra = {"mu1": mu, "mu1_odd": odd, "a": domain.a, "strip_identity_defect": strip_identity}
        rep = _decide(CheckId.GAP, _name(domain), mu - 1.0, lam, tol, evidence=ev, settings=settings,
                      extra=extra)
        if abs(mu - odd) > GAP_HYPOTHESIS_TOL:
            rep.status = Status.HYPOTHESIS_NOT_MET
            rep.detail = f"mu1 = {mu:.6g} differs from mu1_odd = {odd:.6g}"
        return rep

    return guarded(CheckId.GAP, _name(domain), tol, run, settings)


def dumbbell_sweep(eps_list: Sequence[float] = (0.4, 0.2, 0.1, 0.05), h: float = DEFAULT_H,
                   side: float = 1.0, corridor: float = 1.0) -> CheckReport:
    """Odd eigenvalue of dumbbells with shrinking corridor width.

    Passes iff the values decrease strictly and the last is below half the
    first; ``lhs`` is the smaller of the two slacks (``gt`` against zero).
    """
    eps = [float(e) for e in eps_list]
    settings = {"h": h, "side": side, "corridor": corridor, "eps": eps}
    domain_id = f"dumbbell(side={side:g},corridor={corridor:g})"
    if len(eps) < 2 or np.any(np.diff(eps) >= 0) or min(eps) <= 0 or max(eps) >= 0.5 * side:
        raise ParameterError("eps_list must be strictly decreasing within (0, side/2)")
    values, evidence = [], []
    for e in eps:
        try:
            s = mu1_odd(Dumbbell(e, side, corridor), h)
        except HermiteGapError as exc:
            return CheckReport(CheckId.DUMBBELL, domain_id, math.nan, 0.0, 0.0, Status.ERROR, "gt",
                               evidence, settings, f"partial sweep; eps = {e:g} failed: {exc}",
                               {"values": values})
        values.append(s.value)
        evidence.append(s.record())
    drops = -np.diff(values)
    lhs = min(float(drops.min()), 0.5 * values[0] - values[-1])
    return _decide(CheckId.DUMBBELL, domain_id, lhs, 0.0, 0.0, "gt", evidence=evidence,
                   settings=settings, extra={"values": values})


def jacobian_audit(domain: Domain, n: int = 6, samples: int = 1000, seed: int = 0,
                   r: Optional[float] = None) -> CheckReport:
    """Reflection Jacobian and weight-ratio bounds on seeded collar samples.

    ``lhs`` is the smallest slack among ``|J| - 1``, ``3 - |J|`` and
    ``bound - ratio`` over all samples, tested ``ge`` zero within 1e-12.
    """
    r = r if r is not None else (default_fillet_radius(domain) or DEFAULT_FILLET)
    settings = {"n": n, "samples": samples, "seed": seed, "r": r}

    def run():
        dn = invading_sequence(domain, n, r)
        pts = sample_collar(dn, samples, seed)
        p0 = float(domain.top(np.array([0.0]))[0])
        bound = max(1.0, math.exp(-2.0 * r * p0))
        J = np.empty(len(pts))
        W = np.empty(len(pts))
        ties = 0
        for i, P in enumerate(pts):
            s = reflection_jacobian(dn, P)
            J[i], W[i] = s.jacobian_abs, s.weight_ratio
            ties += bool(s.tie)
        slack = min(float(J.min() - 1.0), float(3.0 - J.max()), float(bound - W.max()))
        return _decide(CheckId.JACOBIAN, _name(domain), slack, 0.0, JACOBIAN_SLACK, settings=settings,
                       extra={"n": n, "jacobian_min": float(J.min()), "jacobian_max": float(J.max()),
                              "weight_ratio_max": float(W.max()), "weight_bound": bound,
                              "samples": int(len(pts)), "ties": ties})

    return guarded(CheckId.JACOBIAN, _name(domain), JACOBIAN_SLACK, run, settings)


def check_plane_spectrum(R: float = 12.0, h: float = 0.25, tol: float = 2e-2) -> CheckReport:
    """Truncated-plane Neumann spectrum against the Hermite levels (1, 1, 2, 2, 2)."""
    settings = {"h": h, "R": R}
    dom = Disk(R, f"disk(R={R:g})")

    def run():
        s = neumann_spectrum(dom, h, k=6)
        vals = s.extrapolated[1:6]
        dev = float(np.max(np.abs(vals - np.array(PLANE_LEVELS))))
        return _decide(CheckId.PLANE, dom.name, -dev, 0.0, tol, evidence=[s.record(index=j) for j in range(1, 6)],
                       settings=settings, extra={"values": [float(v) for v in vals]})

    return guarded(CheckId.PLANE, dom.name, tol, run, settings)


def check_rectangle_equality(a: float, b: float, h: float = DEFAULT_H, rel_tol: float = 1e-3) -> CheckReport:
    """Odd eigenvalue of ``(-a, a) x (-b, b)`` equals ``mu_1(-a, a)`` (relative tolerance)."""
    dom = Rectangle(a, b, f"rectangle(a={a:g},b={b:g})")
    settings = {"h": h, "rel_tol": rel_tol}

    def run():
        s = mu1_odd(dom, h)
        rhs = mu1_interval(-a, a)
        return _decide(CheckId.RECTANGLE, dom.name, s.value, rhs, rel_tol * rhs, "eq",
                       evidence=[s.record()], settings=settings)

    return guarded(CheckId.RECTANGLE, dom.name, rel_tol, run, settings)


def check_t_example(h: float = UNBOUNDED_H, rel_tol: float = 1e-2, trunc_tol: Optional[float] = None) -> CheckReport:
    """Half-strip ``(-1, 1) x (-inf, 0)``: ``mu_1 = 2`` and ``mu_1^odd = 3``.

    ``lhs`` is minus the larger relative deviation of the two values.
    """
    dom = HalfStrip(1.0, 0.0, "T")
    settings = {"h": h, "rel_tol": rel_tol, "trunc_tol": trunc_tol}

    def run():
        res = solve_unbounded(dom, tol=trunc_tol, h=h, neumann=True)
        dev = max(abs(res.mu1 - 2.0) / 2.0, abs(res.mu1_odd - 3.0) / 3.0)
        rep = _decide(CheckId.T_EXAMPLE, dom.name, -dev, 0.0, rel_tol,
                      evidence=[res.records["neumann"], res.records["odd"]], settings=settings,
                      extra={"mu1": res.mu1, "mu1_odd": res.mu1_odd, "depths": res.depths})
        if not res.converged:
            rep.status = Status.INCONCLUSIVE
            rep.detail = "truncation loop did not converge"
        return rep

    return guarded(CheckId.T_EXAMPLE, dom.name, rel_tol, run, settings)
