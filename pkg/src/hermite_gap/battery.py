"""Built-in domain battery and the full verification run."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from functools import partial
from importlib import resources
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull

from . import checks
from .checks import CheckReport
from .errors import DomainValidationError
from .geometry import Domain, build_domain
from .report import sort_reports

THREADS_ENV = "HERMITE_GAP_THREADS"
N_RANDOM_POLYGONS = 11


def builtin_names() -> list[str]:
    files = resources.files("hermite_gap") / "domains"
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


def load_builtin(name: str) -> Domain:
    """Domain from the packaged ``domains/<name>.json``."""
    path = resources.files("hermite_gap") / "domains" / f"{name}.json"
    if not path.is_file():
        raise FileNotFoundError(f"no built-in domain {name!r}; available: {', '.join(builtin_names())}")
    return build_domain(path.read_text())


def resolve_domain(ref: str) -> Domain:
    """A built-in name, a JSON file path or an inline JSON object."""
    if ref.lstrip().startswith("{") or os.path.exists(ref):
        return build_domain(ref)
    return load_builtin(ref)


def random_symmetric_polygon(rng: np.random.Generator, name: str) -> Domain:
    """Convex hull of random points in ``x > 0`` and their mirror images."""
    while True:
        k = int(rng.integers(2, 7))
        P = np.column_stack([rng.uniform(0.2, 1.6, k), rng.uniform(-1.4, 1.4, k)])
        P = np.vstack([P, P * np.array([-1.0, 1.0])])
        try:
            V = P[ConvexHull(P).vertices]
            return build_domain({"kind": "polygon", "vertices": V.tolist(), "name": name})
        except (DomainValidationError, ValueError):
            continue


def random_polygons(seed: int, count: int = N_RANDOM_POLYGONS) -> list[Domain]:
    rng = np.random.default_rng(seed)
    return [random_symmetric_polygon(rng, f"polygon-s{seed}-{i:02d}") for i in range(count)]


THM1_FIXED = ("rectangle-1-1", "rectangle-1-0.5", "rectangle-1-2", "rectangle-0.5-1", "rectangle-1.5-0.5",
              "rectangle-thin", "disk", "hexagon", "lens")


def thm1_domains(seed: int) -> list[Domain]:
    """The 20-domain battery for the bounded odd-eigenvalue inequality."""
    return [load_builtin(n) for n in THM1_FIXED] + random_polygons(seed)


def battery_tasks(seed: int = 7, h: Optional[float] = None, tol: float = checks.TOL_2D,
                  trunc_tol: Optional[float] = None) -> list:
    hb = h if h is not None else checks.DEFAULT_H
    hu = h if h is not None else checks.UNBOUNDED_H
    B = load_builtin
    t = [partial(checks.check_thm1, d, hb, tol) for d in thm1_domains(seed)]
    for n in ("half-strip-0.5-0", "T", "half-strip-2-1", "parabola"):
        t.append(partial(checks.check_thm2, B(n), tol, hu, trunc_tol))
    for n in ("disk", "square", "rectangle-1.5-0.5", "rectangle-1-0.5"):
        t.append(partial(checks.check_sw, B(n), tol, hb))
    for n in ("disk", "square", "rectangle-1.5-0.5", "rectangle-thin"):
        t.append(partial(checks.check_an, B(n), tol, hb))
    for n in ("disk", "square", "T"):
        t.append(partial(checks.check_gap, B(n), tol, hb, trunc_tol))
    t.append(partial(checks.dumbbell_sweep, (0.4, 0.2, 0.1, 0.05), hb))
    t.append(partial(checks.jacobian_audit, B("T"), 6, 1000, seed))
    t.append(partial(checks.check_plane_spectrum, 12.0, 0.25 if h is None else h))
    for a, b in ((1.0, 1.0), (1.0, 2.0), (0.5, 1.0)):
        t.append(partial(checks.check_rectangle_equality, a, b, hb if a >= 1 else 0.5 * hb))
    t.append(partial(checks.check_t_example, hu, 1e-2, trunc_tol))
    return t


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def run_battery(seed: int = 7, h: Optional[float] = None, tol: float = checks.TOL_2D,
                trunc_tol: Optional[float] = None, threads: Optional[int] = None) -> list[CheckReport]:
    """Run every check; results are merged in (check_id, domain_id) order."""
    tasks = battery_tasks(seed, h, tol, trunc_tol)
    n = threads or thread_count()
    if n == 1:
        reports = [f() for f in tasks]
    else:
        with ThreadPoolExecutor(max_workers=n) as ex:
            reports = list(ex.map(lambda f: f(), tasks))
    return sort_reports(reports)
