"""Triangulated surfaces with boundary: data model, builders, measures, I/O.

A mesh carries exactly one kind of geometry: either an embedding of its
vertices in R^n (n >= 2), or flat parameter coordinates ``(t, theta)`` on a
cylinder together with a positive per-vertex conformal factor.  The second
kind represents the metric ``factor^2 (dt^2 + dtheta^2)`` with theta
periodic; periodicity is realized by vertex identification, not by a seam.

File format (text, line oriented, ``#`` starts a comment)::

    SMESH v1 <EMB|PARAM> <ambient dim, or 0 for PARAM>
    V <count>
    <one vertex per line: coordinates, or "t theta factor">
    F <count>
    <one triangle per line: three 0-based vertex indices>
    B <loop count>
    <one boundary loop per line: vertex index cycle>
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

__all__ = [
    "MeshError",
    "MeshFormatError",
    "Embedding",
    "ParamFlat",
    "SurfaceMesh",
    "MeshMeasures",
    "extract_boundary_loops",
    "build_annulus_grid",
    "build_disk_mesh",
    "measures",
    "topology",
    "save",
    "load",
    "embed_in_dimension",
]


class MeshError(ValueError):
    """A mesh violates a structural invariant."""


class MeshFormatError(MeshError):
    """A mesh file cannot be parsed; the message carries the line number."""


@dataclass(frozen=True)
class Embedding:
    """Per-vertex coordinates in R^n, n >= 2."""

    coords: np.ndarray

    def __post_init__(self) -> None:
        coords = np.ascontiguousarray(self.coords, dtype=float)
        if coords.ndim != 2 or coords.shape[1] < 2:
            raise MeshError("embedding coordinates must have shape (V, n) with n >= 2")
        if not np.all(np.isfinite(coords)):
            raise MeshError("embedding coordinates must be finite")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @property
    def num_vertices(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]


@dataclass(frozen=True)
class ParamFlat:
    """Flat cylinder coordinates ``(t, theta)`` plus a conformal factor."""

    coords: np.ndarray
    factor: np.ndarray

    def __post_init__(self) -> None:
        coords = np.ascontiguousarray(self.coords, dtype=float)
        factor = np.ascontiguousarray(self.factor, dtype=float)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise MeshError("parameter coordinates must have shape (V, 2)")
        if factor.shape != (coords.shape[0],):
            raise MeshError("conformal factor must be one value per vertex")
        if not np.all(np.isfinite(coords)) or not np.all(np.isfinite(factor)):
            raise MeshError("parameter data must be finite")
        if not np.all(factor > 0.0):
            raise MeshError("conformal factor must be strictly positive")
        coords.setflags(write=False)
        factor.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "factor", factor)

    @property
    def num_vertices(self) -> int:
        return self.coords.shape[0]


Geometry = Union[Embedding, ParamFlat]


@dataclass(frozen=True)
class SurfaceMesh:
    """Oriented triangle mesh with explicit boundary loops.

    Construction validates index ranges, orientation consistency across
    shared edges, that the boundary edges partition exactly into the stored
    loops, and that the Euler characteristic is that of an orientable
    surface with nonnegative genus and at least one boundary loop.
    """

    triangles: np.ndarray
    boundary_loops: tuple
    geometry: Geometry

    def __post_init__(self) -> None:
        tris = np.ascontiguousarray(self.triangles, dtype=np.int64)
        loops = tuple(np.ascontiguousarray(lp, dtype=np.int64) for lp in self.boundary_loops)
        tris.setflags(write=False)
        for lp in loops:
            lp.setflags(write=False)
        object.__setattr__(self, "triangles", tris)
        object.__setattr__(self, "boundary_loops", loops)
        _validate(self)

    @property
    def num_vertices(self) -> int:
        return self.geometry.num_vertices

    @property
    def is_embedded(self) -> bool:
        return isinstance(self.geometry, Embedding)


@dataclass(frozen=True)
class MeshMeasures:
    area: float
    boundary_lengths: tuple
    total_boundary_length: float


def _directed_edges(triangles: np.ndarray) -> np.ndarray:
    """All directed edges (i, j) of the triangles, 3 per face."""
    return np.concatenate(
        [triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]], axis=0
    )


def _validate(mesh: SurfaceMesh) -> None:
    tris = mesh.triangles
    nv = mesh.num_vertices
    if tris.ndim != 2 or tris.shape[1] != 3 or tris.shape[0] == 0:
        raise MeshError("triangles must be a nonempty (F, 3) index array")
    if tris.min() < 0 or tris.max() >= nv:
        raise MeshError(
            f"triangle index out of range: valid range is [0, {nv - 1}]"
        )
    if (
        np.any(tris[:, 0] == tris[:, 1])
        or np.any(tris[:, 1] == tris[:, 2])
        or np.any(tris[:, 2] == tris[:, 0])
    ):
        raise MeshError("each triangle needs three distinct vertices")
    used = np.zeros(nv, dtype=bool)
    used[tris.ravel()] = True
    if not used.all():
        raise MeshError(f"{np.count_nonzero(~used)} vertices belong to no triangle")

    directed = _directed_edges(tris)
    # orientation: no directed edge may repeat, undirected edges carry <= 2 faces
    keys = directed[:, 0] * np.int64(nv) + directed[:, 1]
    uniq, counts = np.unique(keys, return_counts=True)
    if np.any(counts > 1):
        raise MeshError("inconsistent orientation: a directed edge appears twice")
    lo = np.minimum(directed[:, 0], directed[:, 1])
    hi = np.maximum(directed[:, 0], directed[:, 1])
    ukeys, ucounts = np.unique(lo * np.int64(nv) + hi, return_counts=True)
    if np.any(ucounts > 2):
        raise MeshError("non-manifold edge: more than two incident triangles")

    boundary_keys = set(ukeys[ucounts == 1].tolist())
    loop_keys = set()
    for lp in mesh.boundary_loops:
        if len(lp) < 3:
            raise MeshError("boundary loops must have at least three vertices")
        if lp.min() < 0 or lp.max() >= nv:
            raise MeshError("boundary loop index out of range")
        for k in range(len(lp)):
            a, b = int(lp[k]), int(lp[(k + 1) % len(lp)])
            key = min(a, b) * nv + max(a, b)
            if key in loop_keys:
                raise MeshError("boundary edge repeated across loops")
            loop_keys.add(key)
    if loop_keys != boundary_keys:
        raise MeshError(
            "stored boundary loops do not match the mesh boundary edges"
        )
    if not mesh.boundary_loops:
        raise MeshError("mesh must have at least one boundary loop")

    euler = nv - len(ukeys) + tris.shape[0]
    k = len(mesh.boundary_loops)
    genus2 = 2 - euler - k
    if genus2 < 0 or genus2 % 2 != 0:
        raise MeshError(
            f"Euler characteristic {euler} with {k} boundary loops is not an "
            "orientable surface of nonnegative genus"
        )


def extract_boundary_loops(triangles: np.ndarray, num_vertices: int) -> tuple:
    """Order the boundary edges of a triangle soup into closed vertex cycles.

    Boundary edges are those with exactly one incident triangle; each loop
    follows the orientation induced by the triangles.
    """
    triangles = np.asarray(triangles, dtype=np.int64)
    directed = _directed_edges(triangles)
    lo = np.minimum(directed[:, 0], directed[:, 1])
    hi = np.maximum(directed[:, 0], directed[:, 1])
    keys = lo * np.int64(num_vertices) + hi
    uniq, counts = np.unique(keys, return_counts=True)
    boundary = set(uniq[counts == 1].tolist())
    succ = {}
    for a, b in directed:
        key = min(a, b) * num_vertices + max(a, b)
        if key in boundary:
            # boundary loops run opposite to the face orientation
            succ[int(b)] = int(a)
    loops = []
    seen = set()
    for start in sorted(succ):
        if start in seen:
            continue
        cycle = [start]
        seen.add(start)
        v = succ[start]
        while v != start:
            cycle.append(v)
            seen.add(v)
            v = succ[v]
        loops.append(np.array(cycle, dtype=np.int64))
    return tuple(loops)


def _grid_triangles(n_t: int, n_theta: int) -> np.ndarray:
    tris = np.empty((2 * n_t * n_theta, 3), dtype=np.int64)
    idx = 0
    for i in range(n_t):
        for j in range(n_theta):
            jn = (j + 1) % n_theta
            v00 = i * n_theta + j
            v01 = i * n_theta + jn
            v10 = (i + 1) * n_theta + j
            v11 = (i + 1) * n_theta + jn
            tris[idx] = (v00, v10, v11)
            tris[idx + 1] = (v00, v11, v01)
            idx += 2
    return tris


def build_annulus_grid(
    T: float,
    n_t: int,
    n_theta: int,
    factor: Callable[[float, float], float],
) -> SurfaceMesh:
    """Structured cylinder mesh carrying the metric ``factor^2 (dt^2+dtheta^2)``.

    The grid has ``n_t + 1`` rows of ``n_theta`` vertices; theta is periodic
    by identification.  The two boundary loops sit at ``t = 0`` and ``t = T``.
    """
    if not (T > 0.0 and math.isfinite(T)):
        raise MeshError(f"modulus T must be positive, got {T}")
    if n_t < 2 or n_theta < 8:
        raise MeshError(f"resolution too coarse: n_t={n_t}, n_theta={n_theta}")
    nv = (n_t + 1) * n_theta
    coords = np.empty((nv, 2))
    lam = np.empty(nv)
    for i in range(n_t + 1):
        t = T * i / n_t
        for j in range(n_theta):
            theta = 2.0 * math.pi * j / n_theta
            v = i * n_theta + j
            coords[v] = (t, theta)
            value = factor(t, theta)
            if not (value > 0.0 and math.isfinite(value)):
                raise MeshError(
                    f"conformal factor must be positive, got {value} at "
                    f"(t={t}, theta={theta})"
                )
            lam[v] = value
    tris = _grid_triangles(n_t, n_theta)
    loops = (
        np.arange(n_theta, dtype=np.int64),
        np.arange(n_t * n_theta, nv, dtype=np.int64),
    )
    return SurfaceMesh(tris, loops, ParamFlat(coords, lam))


def build_disk_mesh(n_r: int, n_theta: int) -> SurfaceMesh:
    """Planar unit disk: a center vertex, ``n_r`` rings, one boundary loop."""
    if n_r < 2 or n_theta < 8:
        raise MeshError(f"resolution too coarse: n_r={n_r}, n_theta={n_theta}")
    nv = 1 + n_r * n_theta
    coords = np.zeros((nv, 2))
    for i in range(1, n_r + 1):
        r = i / n_r
        for j in range(n_theta):
            theta = 2.0 * math.pi * j / n_theta
            coords[1 + (i - 1) * n_theta + j] = (r * math.cos(theta), r * math.sin(theta))
    tris = []
    for j in range(n_theta):
        jn = (j + 1) % n_theta
        tris.append((0, 1 + j, 1 + jn))
    for i in range(1, n_r):
        base0 = 1 + (i - 1) * n_theta
        base1 = 1 + i * n_theta
        for j in range(n_theta):
            jn = (j + 1) % n_theta
            tris.append((base0 + j, base1 + j, base1 + jn))
            tris.append((base0 + j, base1 + jn, base0 + jn))
    loop = np.arange(1 + (n_r - 1) * n_theta, nv, dtype=np.int64)
    return SurfaceMesh(np.array(tris, dtype=np.int64), (loop,), Embedding(coords))


def flat_triangle_coords(mesh: SurfaceMesh) -> np.ndarray:
    """Per-triangle ``(t, theta)`` corner coordinates with theta unwrapped.

    Triangles crossing the periodic seam get their theta values shifted by
    multiples of 2*pi into a window of width < 2*pi around the first corner.
    """
    geom = mesh.geometry
    if not isinstance(geom, ParamFlat):
        raise MeshError("flat coordinates are only defined for parameter meshes")
    P = geom.coords[mesh.triangles]  # (F, 3, 2)
    theta0 = P[:, :1, 1]
    dtheta = (P[:, :, 1] - theta0 + math.pi) % (2.0 * math.pi) - math.pi
    out = P.copy()
    out[:, :, 1] = theta0 + dtheta
    return out


def _embedded_triangle_areas(coords: np.ndarray, tris: np.ndarray) -> np.ndarray:
    p0 = coords[tris[:, 0]]
    p1 = coords[tris[:, 1]]
    p2 = coords[tris[:, 2]]
    e1 = p1 - p0
    e2 = p2 - p0
    g11 = np.einsum("ij,ij->i", e1, e1)
    g22 = np.einsum("ij,ij->i", e2, e2)
    g12 = np.einsum("ij,ij->i", e1, e2)
    return 0.5 * np.sqrt(np.maximum(g11 * g22 - g12 * g12, 0.0))


def _flat_triangle_areas(mesh: SurfaceMesh) -> np.ndarray:
    Q = flat_triangle_coords(mesh)
    e1 = Q[:, 1] - Q[:, 0]
    e2 = Q[:, 2] - Q[:, 0]
    return 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def _loop_edge_lengths(mesh: SurfaceMesh, loop: np.ndarray) -> np.ndarray:
    """Metric length of each edge (v_k, v_{k+1}) around one boundary loop."""
    geom = mesh.geometry
    nxt = np.roll(loop, -1)
    if isinstance(geom, Embedding):
        return np.linalg.norm(geom.coords[nxt] - geom.coords[loop], axis=1)
    dt = geom.coords[nxt, 0] - geom.coords[loop, 0]
    dth = geom.coords[nxt, 1] - geom.coords[loop, 1]
    dth = (dth + math.pi) % (2.0 * math.pi) - math.pi
    flat = np.hypot(dt, dth)
    # trapezoid rule for the conformal factor along the edge
    return flat * 0.5 * (geom.factor[loop] + geom.factor[nxt])


def measures(mesh: SurfaceMesh) -> MeshMeasures:
    """Area and boundary lengths of the mesh in its own metric.

    For parameter meshes the area uses the centroid value of the conformal
    factor on each triangle and the boundary uses the trapezoid rule along
    each edge; both are second-order accurate.
    """
    geom = mesh.geometry
    if isinstance(geom, Embedding):
        area = float(_embedded_triangle_areas(geom.coords, mesh.triangles).sum())
    else:
        flat = _flat_triangle_areas(mesh)
        lam_c = geom.factor[mesh.triangles].mean(axis=1)
        area = float((flat * lam_c * lam_c).sum())
    lengths = tuple(float(_loop_edge_lengths(mesh, lp).sum()) for lp in mesh.boundary_loops)
    return MeshMeasures(
        area=area,
        boundary_lengths=lengths,
        total_boundary_length=float(sum(lengths)),
    )


def topology(mesh: SurfaceMesh) -> tuple[int, int]:
    """(genus, number of boundary loops), from the Euler characteristic."""
    tris = mesh.triangles
    directed = _directed_edges(tris)
    lo = np.minimum(directed[:, 0], directed[:, 1])
    hi = np.maximum(directed[:, 0], directed[:, 1])
    n_edges = np.unique(lo * np.int64(mesh.num_vertices) + hi).size
    euler = mesh.num_vertices - n_edges + tris.shape[0]
    k = len(mesh.boundary_loops)
    genus2 = 2 - euler - k
    if genus2 < 0 or genus2 % 2 != 0:
        raise MeshError(f"Euler characteristic {euler} is not a valid surface")
    return genus2 // 2, k


def embed_in_dimension(mesh: SurfaceMesh, dim: int) -> SurfaceMesh:
    """Pad an embedded mesh with zero coordinates up to ambient dimension."""
    geom = mesh.geometry
    if not isinstance(geom, Embedding):
        raise MeshError("only embedded meshes can change ambient dimension")
    if dim < geom.dim:
        raise MeshError(f"cannot shrink ambient dimension {geom.dim} to {dim}")
    coords = np.zeros((geom.num_vertices, dim))
    coords[:, : geom.dim] = geom.coords
    return SurfaceMesh(mesh.triangles, mesh.boundary_loops, Embedding(coords))


def save(mesh: SurfaceMesh, path) -> None:
    """Write the mesh in SMESH v1 text form; floats round-trip exactly."""
    geom = mesh.geometry
    lines = []
    if isinstance(geom, Embedding):
        lines.append(f"SMESH v1 EMB {geom.dim}")
        lines.append(f"V {geom.num_vertices}")
        for row in geom.coords:
            lines.append(" ".join(repr(float(x)) for x in row))
    else:
        lines.append("SMESH v1 PARAM 0")
        lines.append(f"V {geom.num_vertices}")
        for (t, theta), lam in zip(geom.coords, geom.factor):
            lines.append(f"{t!r} {theta!r} {lam!r}")
    lines.append(f"F {mesh.triangles.shape[0]}")
    for a, b, c in mesh.triangles:
        lines.append(f"{a} {b} {c}")
    lines.append(f"B {len(mesh.boundary_loops)}")
    for lp in mesh.boundary_loops:
        lines.append(" ".join(str(int(v)) for v in lp))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


class _TokenLines:
    """Iterator over non-empty, comment-stripped lines with line numbers."""

    def __init__(self, text: str):
        self.items = []
        for num, raw in enumerate(text.splitlines(), start=1):
            body = raw.split("#", 1)[0].strip()
            if body:
                self.items.append((num, body.split()))
        self.pos = 0

    def next(self, context: str):
        if self.pos >= len(self.items):
            raise MeshFormatError(f"unexpected end of file while reading {context}")
        item = self.items[self.pos]
        self.pos += 1
        return item


def load(path) -> SurfaceMesh:
    """Parse an SMESH v1 file; malformed input raises with the line number."""
    with open(path) as fh:
        text = fh.read()
    lines = _TokenLines(text)

    num, tok = lines.next("header")
    if len(tok) != 4 or tok[0] != "SMESH" or tok[1] != "v1" or tok[2] not in ("EMB", "PARAM"):
        raise MeshFormatError(f"line {num}: malformed SMESH header")
    kind = tok[2]
    try:
        ambient = int(tok[3])
    except ValueError:
        raise MeshFormatError(f"line {num}: ambient dimension is not an integer") from None
    if kind == "EMB" and ambient < 2:
        raise MeshFormatError(f"line {num}: embedded meshes need ambient dimension >= 2")

    num, tok = lines.next("vertex count")
    if len(tok) != 2 or tok[0] != "V":
        raise MeshFormatError(f"line {num}: expected 'V <count>'")
    nv = _parse_count(tok[1], num, "vertex count")
    width = ambient if kind == "EMB" else 3
    rows = np.empty((nv, width))
    for r in range(nv):
        num, tok = lines.next(f"vertex {r}")
        if len(tok) != width:
            raise MeshFormatError(f"line {num}: expected {width} numbers for vertex {r}")
        try:
            rows[r] = [float(x) for x in tok]
        except ValueError:
            raise MeshFormatError(f"line {num}: vertex {r} has a malformed number") from None

    num, tok = lines.next("face count")
    if len(tok) != 2 or tok[0] != "F":
        raise MeshFormatError(f"line {num}: expected 'F <count>'")
    nf = _parse_count(tok[1], num, "face count")
    tris = np.empty((nf, 3), dtype=np.int64)
    for r in range(nf):
        num, tok = lines.next(f"face {r}")
        if len(tok) != 3:
            raise MeshFormatError(f"line {num}: expected 3 indices for face {r}")
        try:
            tris[r] = [int(x) for x in tok]
        except ValueError:
            raise MeshFormatError(f"line {num}: face {r} has a malformed index") from None

    num, tok = lines.next("boundary loop count")
    if len(tok) != 2 or tok[0] != "B":
        raise MeshFormatError(f"line {num}: expected 'B <count>'")
    nloops = _parse_count(tok[1], num, "loop count")
    loops = []
    for r in range(nloops):
        num, tok = lines.next(f"boundary loop {r}")
        try:
            loops.append(np.array([int(x) for x in tok], dtype=np.int64))
        except ValueError:
            raise MeshFormatError(f"line {num}: loop {r} has a malformed index") from None

    if kind == "EMB":
        geometry: Geometry = Embedding(rows)
    else:
        geometry = ParamFlat(rows[:, :2], rows[:, 2])
    try:
        return SurfaceMesh(tris, tuple(loops), geometry)
    except MeshError as exc:
        raise MeshError(f"{path}: {exc}") from exc


def _parse_count(token: str, line: int, what: str) -> int:
    try:
        n = int(token)
    except ValueError:
        raise MeshFormatError(f"line {line}: {what} is not an integer") from None
    if n < 0:
        raise MeshFormatError(f"line {line}: {what} must be nonnegative")
    return n
