"""Deterministic triangulations of bounded domains.

Rectangles and dumbbells get structured tensor-product meshes; every other
(convex) domain gets boundary samples plus a hexagonal interior lattice,
joined by a Delaunay triangulation.  Optional radial grading coarsens the mesh
proportionally to ``|x|`` beyond a radius ``r0`` (the Gaussian weight makes the
far field irrelevant).  Uniform red refinement keeps meshes nested and
projects new boundary vertices onto curved boundary pieces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.spatial import Delaunay, cKDTree

from .errors import MeshError, ResolutionError, UnsupportedDomainError
from .gaussian import TRIANGLE_RULE
from .geometry import Domain, LinePiece, Tag

MIN_INTERIOR = 3


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming triangulation with tagged boundary edges.

    ``edge_piece[e]`` indexes ``pieces`` for boundary edges lying on a curved
    piece (-1 otherwise) and ``edge_t[e]`` holds the piece parameters of the
    edge ends, so refinement can place midpoints on the true boundary.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    edge_tags: tuple
    h: float
    edge_piece: np.ndarray = None
    edge_t: np.ndarray = None
    pieces: tuple = ()
    domain: Optional[Domain] = None
    target_h: float = float("nan")
    level: int = 0

    def __post_init__(self):
        E = len(self.boundary_edges)
        if self.edge_piece is None:
            object.__setattr__(self, "edge_piece", -np.ones(E, dtype=int))
        if self.edge_t is None:
            object.__setattr__(self, "edge_t", np.zeros((E, 2)))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def signed_areas(self) -> np.ndarray:
        X = self.vertices[self.triangles]
        d1, d2 = X[:, 1] - X[:, 0], X[:, 2] - X[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def area(self) -> float:
        return float(self.signed_areas().sum())

    def gaussian_mass(self) -> float:
        """Sum over triangles of the degree-6 rule applied to the Gaussian density."""
        X = self.vertices[self.triangles]
        q = np.einsum("qk,mkd->mqd", TRIANGLE_RULE.nodes, X)
        w = np.exp(-0.5 * (q * q).sum(-1)) @ TRIANGLE_RULE.weights
        return float(np.dot(w, self.signed_areas()) / (2 * math.pi))

    def axis_nodes(self) -> np.ndarray:
        tags = np.array([t is Tag.AXIS for t in self.edge_tags], dtype=bool)
        if not tags.any():
            return np.empty(0, dtype=int)
        return np.unique(self.boundary_edges[tags].ravel())

    def boundary_nodes(self) -> np.ndarray:
        return np.unique(self.boundary_edges.ravel())

    def interior_count(self) -> int:
        return self.n_vertices - len(self.boundary_nodes())

    def edge_lengths(self) -> np.ndarray:
        X = self.vertices[self.triangles]
        return np.hypot(*(np.roll(X, -1, axis=1) - X).transpose(2, 0, 1)).ravel()

    def mirror(self) -> "Mesh":
        """The mesh reflected through ``x = 0`` (orientation restored)."""
        V = self.vertices * np.array([-1.0, 1.0])
        return Mesh(V, self.triangles[:, [0, 2, 1]].copy(), self.boundary_edges[:, ::-1].copy(),
                    self.edge_tags, self.h, target_h=self.target_h, level=self.level)

    def validate(self) -> None:
        """Raise MeshError unless the mesh invariants hold."""
        if np.any(self.signed_areas() <= 0):
            raise MeshError("triangle with non-positive orientation")
        used = np.zeros(self.n_vertices, dtype=bool)
        used[self.triangles.ravel()] = True
        if not used.all():
            raise MeshError("vertex not used by any triangle")
        free = _free_edges(self.triangles)
        got = {tuple(sorted(e)) for e in self.boundary_edges.tolist()}
        if got != free or len(got) != len(self.boundary_edges):
            raise MeshError("boundary edges do not match the triangulation's free edges")
        if len(self.edge_tags) != len(self.boundary_edges):
            raise MeshError("every boundary edge needs exactly one tag")
        ax = np.array([t is Tag.AXIS for t in self.edge_tags], dtype=bool)
        if ax.any() and np.max(np.abs(self.vertices[self.boundary_edges[ax]][..., 0])) > 1e-12:
            raise MeshError("axis-tagged edge off the line x = 0")
        counts = _edge_counts(self.triangles)
        if max(counts.values()) > 2:
            raise MeshError("non-manifold edge")


def _edge_counts(T: np.ndarray) -> dict:
    E = np.sort(np.concatenate([T[:, [0, 1]], T[:, [1, 2]], T[:, [2, 0]]]), axis=1)
    u, c = np.unique(E, axis=0, return_counts=True)
    return {tuple(e): int(k) for e, k in zip(u.tolist(), c)}


def _free_edges(T: np.ndarray) -> set:
    return {e for e, k in _edge_counts(T).items() if k == 1}


def _max_edge(V, T) -> float:
    X = V[T]
    return float(np.max(np.hypot(*(np.roll(X, -1, axis=1) - X).transpose(2, 0, 1))))


def _tag_edges(V, edges, domain: Domain) -> tuple:
    tags = []
    for i, j in edges:
        on_axis = domain.half and abs(V[i, 0]) <= 1e-12 and abs(V[j, 0]) <= 1e-12
        tags.append(Tag.AXIS if on_axis else Tag.OUTER)
    return tuple(tags)


def _oriented_boundary(T: np.ndarray) -> np.ndarray:
    """Free edges with the orientation they have in their triangle (CCW traversal)."""
    free = _free_edges(T)
    out = []
    for tri in T:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            if (min(a, b), max(a, b)) in free:
                out.append((a, b))
    return np.array(out, dtype=int).reshape(-1, 2)


# ---------------------------------------------------------------------------
# structured meshes


def _axis_lines(lo: float, hi: float, marks, h: float, r0: Optional[float] = None) -> np.ndarray:
    """Grid lines on ``[lo, hi]`` through every mark, spacing ``h * max(1, |t| / r0)``."""
    gap = 1e-9 * h
    pts = [lo]
    for m in sorted(float(m) for m in marks):
        if pts[-1] + gap < m < hi - gap:
            pts.append(m)
    pts.append(hi)
    out = []
    for u, v in zip(pts[:-1], pts[1:]):
        if r0 is None:
            k = max(1, int(math.ceil((v - u) / h - 1e-9)))
            out.append(np.linspace(u, v, k + 1)[:-1])
            continue
        t = np.linspace(u, v, 4097)
        size = h * np.maximum(1.0, np.abs(0.5 * (t[1:] + t[:-1])) / r0)
        s = np.concatenate([[0.0], np.cumsum(np.diff(t) / size)])
        k = max(1, int(math.ceil(s[-1] - 1e-9)))
        out.append(np.interp(np.linspace(0.0, s[-1], k + 1), s, t)[:-1])
    out.append([hi])
    return np.concatenate(out)


def _tensor_mesh(domain: Domain, h: float, r0: Optional[float] = None) -> Mesh:
    lo, hi = domain.x_lo, domain.x_max
    x_marks = domain.x_breaks()
    xb = np.asarray(x_marks, dtype=float)
    probe = np.concatenate([xb, 0.5 * (xb[1:] + xb[:-1])])
    y_top = float(np.max(domain.top(probe)))
    y_marks = sorted(set(np.round(np.concatenate([domain.top(probe), domain.bottom(probe)]), 14)))
    min_cells = 2
    hx = min(h, (hi - lo) / min_cells)
    hy = min(h, 2 * y_top / min_cells)
    xs = _axis_lines(lo, hi, x_marks, hx, r0)
    ys = _axis_lines(-y_top, y_top, list(y_marks), hy, r0)
    nx, ny = len(xs), len(ys)
    cx = 0.5 * (xs[:-1] + xs[1:])
    cy = 0.5 * (ys[:-1] + ys[1:])
    CX, CY = np.meshgrid(cx, cy, indexing="ij")
    keep = domain.contains(np.column_stack([CX.ravel(), CY.ravel()])).reshape(CX.shape)
    I, J = np.nonzero(keep)
    idx = lambda i, j: i * ny + j
    a, b, c, d = idx(I, J), idx(I + 1, J), idx(I + 1, J + 1), idx(I, J + 1)
    T = np.concatenate([np.column_stack([a, b, c]), np.column_stack([a, c, d])])
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    V = np.column_stack([X.ravel(), Y.ravel()])
    used = np.unique(T)
    remap = -np.ones(len(V), dtype=int)
    remap[used] = np.arange(used.size)
    V, T = V[used], remap[T]
    edges = _oriented_boundary(T)
    return Mesh(V, T, edges, _tag_edges(V, edges, domain), _max_edge(V, T), domain=domain, target_h=h)


# ---------------------------------------------------------------------------
# unstructured meshes


def _size_fn(h: float, r0: Optional[float]):
    if r0 is None:
        return lambda P: np.full(len(P), h)
    return lambda P: h * np.maximum(1.0, np.hypot(P[:, 0], P[:, 1]) / r0)


def _sample_piece(piece, size) -> np.ndarray:
    t = np.linspace(0.0, 1.0, 2049)
    P = np.asarray(piece.point(t))
    mid = 0.5 * (P[1:] + P[:-1])
    ds = np.hypot(*(P[1:] - P[:-1]).T) / size(mid)
    s = np.concatenate([[0.0], np.cumsum(ds)])
    k = max(1, int(math.ceil(s[-1] - 1e-9)))
    return np.interp(np.linspace(0.0, s[-1], k + 1), s, t)


def _lattice(h: float, bbox, r0: Optional[float]) -> np.ndarray:
    (x0, y0), (x1, y1) = bbox
    dy = h * math.sqrt(3) / 2
    rmax = max(math.hypot(x, y) for x in (x0, x1) for y in (y0, y1))
    inner = rmax if r0 is None else min(rmax, r0)
    xr = min(max(abs(x0), abs(x1)), inner) + h
    yr_lo, yr_hi = max(y0, -inner - h), min(y1, inner + h)
    j = np.arange(math.floor(yr_lo / dy), math.ceil(yr_hi / dy) + 1)
    i = np.arange(-math.ceil(xr / h) - 1, math.ceil(xr / h) + 2)
    I, J = np.meshgrid(i, j, indexing="ij")
    P = np.column_stack([((I + 0.5 * (J % 2)) * h).ravel(), (J * dy).ravel()])
    if r0 is None:
        return P
    P = P[np.hypot(P[:, 0], P[:, 1]) < r0 - 0.6 * h]
    nth = int(math.ceil(2 * math.pi * r0 / h))
    growth = 1.0 + (math.sqrt(3) / 2) * (2 * math.pi / nth)
    rings = []
    r = r0
    k = 0
    while r <= rmax + h * r / r0:
        th = 2 * math.pi * (np.arange(nth) + 0.5 * (k % 2)) / nth
        rings.append(np.column_stack([r * np.cos(th), r * np.sin(th)]))
        r *= growth
        k += 1
    return np.vstack([P] + rings)


def _delaunay_mesh(domain: Domain, h: float, r0: Optional[float]) -> Mesh:
    size = _size_fn(h, r0)
    pieces = domain.boundary_pieces()
    loop, info = [], []
    for k, pc in enumerate(pieces):
        t = _sample_piece(pc, size)
        pts = np.asarray(pc.point(t))
        loop.append(pts[:-1])
        curved = not isinstance(pc, LinePiece)
        for a, b in zip(t[:-1], t[1:]):
            info.append((k if curved else -1, a, b))
    B = np.vstack(loop)
    nb = len(B)
    seg_a, seg_b = B, np.roll(B, -1, axis=0)
    # dense boundary sample for distance queries
    L = np.hypot(*(seg_b - seg_a).T)
    fine = []
    for p, q, l in zip(seg_a, seg_b, L):
        m = max(2, int(math.ceil(l / (0.05 * h))))
        s = np.linspace(0, 1, m, endpoint=False)[:, None]
        fine.append(p + s * (q - p))
    tree = cKDTree(np.vstack(fine))
    bbox = (B.min(axis=0), B.max(axis=0))
    Q = _lattice(h, bbox, r0)
    Q = Q[domain.contains(Q)]
    if len(Q):
        dist, _ = tree.query(Q)
        Q = Q[dist >= 0.5 * size(Q)]
    V = np.vstack([B, Q])
    tri = Delaunay(V, qhull_options="Qbb Qc Qz Q12")
    T = tri.simplices.copy()
    if len(np.unique(T)) != len(V):
        tri = Delaunay(V, qhull_options="QJ")
        T = tri.simplices.copy()
    X = V[T]
    d1, d2 = X[:, 1] - X[:, 0], X[:, 2] - X[:, 0]
    area = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    T[area < 0] = T[area < 0][:, [0, 2, 1]]
    keep = np.abs(area) > 1e-12 * h * h
    cent = V[T].mean(axis=1)
    if not domain.convex:
        keep &= domain.contains(cent)
    T = T[keep]
    edges = _oriented_boundary(T)
    # map boundary edges to loop edges (piece parameters for refinement)
    lookup = {}
    for k in range(nb):
        lookup[(k, (k + 1) % nb)] = info[k]
    epiece = np.empty(len(edges), dtype=int)
    et = np.empty((len(edges), 2))
    for e, (i, j) in enumerate(edges):
        rec = lookup.get((int(i), int(j)))
        if rec is None:
            raise MeshError(f"boundary edge ({i}, {j}) is not a boundary-loop edge")
        epiece[e], et[e, 0], et[e, 1] = rec
    return Mesh(V, T, edges, _tag_edges(V, edges, domain), _max_edge(V, T), epiece, et,
                tuple(pieces), domain, target_h=h)


def triangulate(domain: Domain, h: float, grade_radius: Optional[float] = None,
                min_interior: int = MIN_INTERIOR) -> Mesh:
    """Triangulate a bounded domain with target edge length ``h``.

    Rectangles and dumbbells get a structured mesh; other domains must be
    convex.  ``grade_radius`` turns on radial coarsening beyond that radius.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    if not domain.bounded:
        raise UnsupportedDomainError(f"cannot mesh the unbounded domain {domain.name!r}")
    if domain.base_kind in ("rectangle", "dumbbell"):
        mesh = _tensor_mesh(domain, h, grade_radius)
    else:
        if not domain.convex:
            raise UnsupportedDomainError("unstructured meshing needs a convex domain")
        mesh = _delaunay_mesh(domain, h, grade_radius)
    if mesh.interior_count() < min_interior:
        raise ResolutionError(f"h = {h:g} leaves {mesh.interior_count()} interior vertices; "
                              f"at least {min_interior} are needed")
    mesh.validate()
    return mesh


def refine(mesh: Mesh) -> Mesh:
    """Uniform red refinement (each triangle split into four)."""
    V, T = mesh.vertices, mesh.triangles
    E = np.sort(np.concatenate([T[:, [0, 1]], T[:, [1, 2]], T[:, [2, 0]]]), axis=1)
    uniq, inv = np.unique(E, axis=0, return_inverse=True)
    inv = inv.ravel()
    mids = 0.5 * (V[uniq[:, 0]] + V[uniq[:, 1]])
    key = {tuple(e): k for k, e in enumerate(uniq.tolist())}
    nv = len(V)
    new_edges, new_tags, new_piece, new_t = [], [], [], []
    for e, (i, j) in enumerate(mesh.boundary_edges):
        k = key[(min(i, j), max(i, j))]
        pc = mesh.edge_piece[e]
        t0, t1 = mesh.edge_t[e]
        tm = 0.5 * (t0 + t1)
        if pc >= 0:
            mids[k] = np.asarray(mesh.pieces[pc].point(tm))
        m = nv + k
        new_edges += [(i, m), (m, j)]
        new_tags += [mesh.edge_tags[e]] * 2
        new_piece += [pc, pc]
        new_t += [(t0, tm), (tm, t1)]
    m = len(T)
    ab, bc, ca = (nv + inv[:m], nv + inv[m:2 * m], nv + inv[2 * m:])
    a, b, c = T[:, 0], T[:, 1], T[:, 2]
    T2 = np.concatenate([np.column_stack([a, ab, ca]), np.column_stack([ab, b, bc]),
                         np.column_stack([ca, bc, c]), np.column_stack([ab, bc, ca])])
    V2 = np.vstack([V, mids])
    out = Mesh(V2, T2, np.array(new_edges, dtype=int), tuple(new_tags), _max_edge(V2, T2),
               np.array(new_piece, dtype=int), np.array(new_t).reshape(-1, 2), mesh.pieces, mesh.domain,
               target_h=0.5 * mesh.target_h, level=mesh.level + 1)
    if np.any(out.signed_areas() <= 0):
        raise MeshError("refinement produced an inverted triangle near a curved boundary")
    return out


def nested_meshes(domain: Domain, h: float, levels: int = 3, grade_radius: Optional[float] = None) -> list[Mesh]:
    """``levels`` nested meshes with finest target size ``h`` (coarsest ``2**(levels-1) h``)."""
    base = triangulate(domain, h * 2 ** (levels - 1), grade_radius, min_interior=0)
    out = [base]
    for _ in range(levels - 1):
        out.append(refine(out[-1]))
    if out[-1].interior_count() < MIN_INTERIOR:
        raise ResolutionError(f"h = {h:g} leaves {out[-1].interior_count()} interior vertices; "
                              f"at least {MIN_INTERIOR} are needed")
    return out


def write_mesh(path, mesh: Mesh, values: Optional[np.ndarray] = None) -> None:
    """ASCII export: vertex, triangle and edge-tag sections, optional nodal values."""
    lines = ["# hermite-gap mesh v1", f"VERTICES {mesh.n_vertices}"]
    lines += [f"{x:.17g} {y:.17g}" for x, y in mesh.vertices]
    lines.append(f"TRIANGLES {len(mesh.triangles)}")
    lines += [f"{i} {j} {k}" for i, j, k in mesh.triangles]
    lines.append(f"EDGES {len(mesh.boundary_edges)}")
    lines += [f"{i} {j} {t.value}" for (i, j), t in zip(mesh.boundary_edges, mesh.edge_tags)]
    if values is not None:
        vals = np.atleast_2d(np.asarray(values, dtype=float).T).T
        if vals.shape[0] != mesh.n_vertices:
            raise ValueError("one value per vertex is required")
        lines.append(f"NODAL {vals.shape[1]}")
        lines += [" ".join(f"{v:.17g}" for v in row) for row in vals]
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write mesh to {path}: {exc}") from exc


def read_mesh(path) -> tuple[Mesh, Optional[np.ndarray]]:
    it = iter(Path(path).read_text().splitlines()[1:])
    nv = int(next(it).split()[1])
    V = np.array([list(map(float, next(it).split())) for _ in range(nv)]).reshape(-1, 2)
    nt = int(next(it).split()[1])
    T = np.array([list(map(int, next(it).split())) for _ in range(nt)], dtype=int).reshape(-1, 3)
    ne = int(next(it).split()[1])
    rows = [next(it).split() for _ in range(ne)]
    edges = np.array([[int(r[0]), int(r[1])] for r in rows], dtype=int).reshape(-1, 2)
    tags = tuple(Tag(r[2]) for r in rows)
    vals = None
    head = next(it, None)
    if head is not None and head.startswith("NODAL"):
        vals = np.array([list(map(float, next(it).split())) for _ in range(nv)])
    return Mesh(V, T, edges, tags, _max_edge(V, T)), vals
