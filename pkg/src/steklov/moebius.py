"""Conformal automorphisms of the unit ball and conformal-volume search.

A map is stored as a rotation composed with the ball Moebius transform

    mu_a(x) = ((1-|a|^2)(x-a) - |x-a|^2 a) / (1 - 2<x,a> + |x|^2 |a|^2),

which carries the open ball onto itself and the unit sphere onto itself.
Volume objectives are rotation invariant, so the searches optimize over the
center ``a`` only, capped at ``|a| <= 1 - cap`` to keep the numerics finite;
the degenerate boundary behaviour is exposed separately through
``limit_concentration``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mesh import Embedding, MeshError, MeshMeasures, SurfaceMesh

__all__ = [
    "MoebiusMap",
    "OptimizerConfig",
    "ConformalVolumeEstimate",
    "apply",
    "push_mesh",
    "balance",
    "boundary_volume_sup",
    "relative_volume_sup",
    "limit_concentration",
]

_BALL_SLACK = 1e-12


@dataclass(frozen=True)
class MoebiusMap:
    """Ball Moebius transform centered at ``center`` followed by ``rotation``."""

    center: np.ndarray
    rotation: np.ndarray

    def __post_init__(self) -> None:
        center = np.ascontiguousarray(self.center, dtype=float)
        rotation = np.ascontiguousarray(self.rotation, dtype=float)
        n = center.shape[0]
        if center.ndim != 1 or rotation.shape != (n, n):
            raise ValueError("center must be (n,) and rotation (n, n)")
        if np.linalg.norm(center) >= 1.0:
            raise ValueError(f"center must lie in the open unit ball, |a|={np.linalg.norm(center)}")
        if np.max(np.abs(rotation.T @ rotation - np.eye(n))) > 1e-12:
            raise ValueError("rotation must be orthogonal to 1e-12")
        center.setflags(write=False)
        rotation.setflags(write=False)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "rotation", rotation)

    @classmethod
    def identity(cls, dim: int) -> "MoebiusMap":
        return cls(center=np.zeros(dim), rotation=np.eye(dim))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def inverse(self) -> "MoebiusMap":
        """Inverse map: rotation transpose, center pushed through the rotation."""
        return MoebiusMap(
            center=-(self.rotation @ self.center), rotation=self.rotation.T
        )


def _moebius_center(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    xa = x - a
    na2 = float(a @ a)
    num = (1.0 - na2) * xa - np.einsum("ij,ij->i", xa, xa)[:, None] * a
    den = 1.0 - 2.0 * (x @ a) + np.einsum("ij,ij->i", x, x) * na2
    return num / den[:, None]


def apply(m: MoebiusMap, x: np.ndarray) -> np.ndarray:
    """Apply the map to one point or to rows of a batch; ``|x| <= 1`` required."""
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    if pts.shape[1] != m.dim:
        raise ValueError(f"points have dimension {pts.shape[1]}, map has {m.dim}")
    norms = np.linalg.norm(pts, axis=1)
    if np.any(norms > 1.0 + _BALL_SLACK):
        raise ValueError(f"point outside the closed unit ball: |x| = {norms.max()}")
    out = _moebius_center(m.center, pts) @ m.rotation.T
    return out[0] if single else out


def push_mesh(m: MoebiusMap, mesh: SurfaceMesh) -> SurfaceMesh:
    """Map every vertex of an embedded mesh; combinatorics are unchanged."""
    geom = mesh.geometry
    if not isinstance(geom, Embedding):
        raise MeshError("only embedded meshes can be pushed through a Moebius map")
    return SurfaceMesh(mesh.triangles, mesh.boundary_loops, Embedding(apply(m, geom.coords)))


def _boundary_lumped_weights(mesh: SurfaceMesh):
    """Per-vertex boundary arclength weights: integrals of hat functions."""
    from . import mesh as mesh_mod

    verts = []
    weights = []
    for lp in mesh.boundary_loops:
        lengths = mesh_mod._loop_edge_lengths(mesh, lp)
        w = 0.5 * (lengths + np.roll(lengths, 1))
        verts.append(np.asarray(lp))
        weights.append(w)
    return np.concatenate(verts), np.concatenate(weights)


def balance(
    mesh: SurfaceMesh,
    tol: float = 1e-10,
    damping: float = 0.5,
    max_iter: int = 200,
) -> MoebiusMap:
    """Center chosen so the pushed boundary integrates to zero coordinatewise.

    The boundary integral uses the arclength of the input mesh.  Damped
    Newton iteration on the center with a finite-difference Jacobian; the
    residual is measured relative to the total boundary length.
    """
    geom = mesh.geometry
    if not isinstance(geom, Embedding):
        raise MeshError("balancing requires an embedded mesh")
    bv, w = _boundary_lumped_weights(mesh)
    total = w.sum()
    if not (total > 0.0):
        raise MeshError("boundary measure must be positive")
    X = geom.coords[bv]
    n = geom.dim

    def residual(a: np.ndarray) -> np.ndarray:
        return w @ _moebius_center(a, X) / total

    a = np.zeros(n)
    r = residual(a)
    for _ in range(max_iter):
        if np.abs(r).max() <= tol:
            return MoebiusMap(center=a, rotation=np.eye(n))
        J = np.empty((n, n))
        h = 1e-7
        for k in range(n):
            step = np.zeros(n)
            step[k] = h
            J[:, k] = (residual(a + step) - residual(a - step)) / (2.0 * h)
        try:
            delta = np.linalg.solve(J, r)
        except np.linalg.LinAlgError:
            delta = r
        a = a - damping * delta
        norm = np.linalg.norm(a)
        if norm >= 1.0 - 1e-9:
            a *= (1.0 - 1e-9) / norm
        r = residual(a)
    raise RuntimeError(
        f"balancing did not converge in {max_iter} iterations; "
        f"last residual {np.abs(r).max():.3e} (relative to boundary length)"
    )


@dataclass(frozen=True)
class OptimizerConfig:
    """Deterministic multi-start search over Moebius centers.

    ``starts`` low-discrepancy centers (the first is the identity) are
    scored; the best ``refine_top`` are polished by coordinatewise
    golden-section passes.  ``seed``/``extra_random`` add optional seeded
    random starts.  Centers are capped at ``|a| <= 1 - cap``.
    """

    starts: int = 32
    cap: float = 1e-3
    refine_rounds: int = 3
    golden_iters: int = 40
    refine_top: int = 8
    tol: float = 1e-9
    seed: int | None = None
    extra_random: int = 0

    def __post_init__(self) -> None:
        if self.starts < 1 or not (0.0 < self.cap < 1.0):
            raise ValueError("need starts >= 1 and 0 < cap < 1")


@dataclass(frozen=True)
class ConformalVolumeEstimate:
    """Best value found over the searched group orbit (a lower bound)."""

    best_value: float
    best_map: MoebiusMap
    samples: int
    converged: bool


def _halton(index: int, base: int) -> float:
    f = 1.0
    r = 0.0
    while index > 0:
        f /= base
        r += f * (index % base)
        index //= base
    return r


_HALTON_BASES = (2, 3, 5, 7, 11, 13, 17)


def _start_centers(dim: int, config: OptimizerConfig) -> np.ndarray:
    if dim > len(_HALTON_BASES):
        raise ValueError(f"no low-discrepancy pattern beyond dimension {len(_HALTON_BASES)}")
    rmax = 1.0 - config.cap
    centers = [np.zeros(dim)]
    for k in range(1, config.starts):
        u = np.array([_halton(k, _HALTON_BASES[d]) for d in range(dim)])
        a = (2.0 * u - 1.0) * rmax
        norm = np.linalg.norm(a)
        if norm > rmax:
            a *= rmax / norm
        centers.append(a)
    if config.seed is not None and config.extra_random > 0:
        rng = np.random.default_rng(config.seed)
        for _ in range(config.extra_random):
            a = rng.uniform(-rmax, rmax, size=dim)
            norm = np.linalg.norm(a)
            if norm > rmax:
                a *= rmax / norm
            centers.append(a)
    return np.array(centers)


class _PushedObjective:
    """Boundary length or area of the pushed mesh as a function of the center."""

    def __init__(self, mesh: SurfaceMesh, kind: str):
        geom = mesh.geometry
        if not isinstance(geom, Embedding):
            raise MeshError("conformal volume search requires an embedded mesh")
        norms = np.linalg.norm(geom.coords, axis=1)
        if np.any(norms > 1.0 + _BALL_SLACK):
            raise MeshError("mesh vertices must lie in the closed unit ball")
        self.kind = kind
        self.dim = geom.dim
        self.evaluations = 0
        if kind == "boundary":
            bv = np.concatenate([np.asarray(lp) for lp in mesh.boundary_loops])
            self.points = geom.coords[bv]
            splits = np.cumsum([len(lp) for lp in mesh.boundary_loops])[:-1]
            self.loop_slices = np.split(np.arange(len(bv)), splits)
        elif kind == "area":
            self.points = geom.coords
            self.triangles = mesh.triangles
        else:
            raise ValueError(f"unknown objective {kind!r}")

    def __call__(self, a: np.ndarray) -> float:
        self.evaluations += 1
        Y = _moebius_center(a, self.points)
        if self.kind == "boundary":
            total = 0.0
            for idx in self.loop_slices:
                pts = Y[idx]
                total += float(np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1).sum())
            return total
        p0 = Y[self.triangles[:, 0]]
        e1 = Y[self.triangles[:, 1]] - p0
        e2 = Y[self.triangles[:, 2]] - p0
        g11 = np.einsum("ij,ij->i", e1, e1)
        g22 = np.einsum("ij,ij->i", e2, e2)
        g12 = np.einsum("ij,ij->i", e1, e2)
        return float(0.5 * np.sqrt(np.maximum(g11 * g22 - g12 * g12, 0.0)).sum())


def _golden_refine(objective, a: np.ndarray, rmax: float, config: OptimizerConfig):
    """Coordinatewise golden-section ascent inside the capped ball."""
    inv_gr = (math.sqrt(5.0) - 1.0) / 2.0
    a = a.copy()
    best = objective(a)
    for _ in range(config.refine_rounds):
        improved = 0.0
        for k in range(a.shape[0]):
            rest = np.delete(a, k)
            span = math.sqrt(max(rmax * rmax - float(rest @ rest), 0.0))
            lo, hi = -span, span

            def line(x: float) -> float:
                trial = a.copy()
                trial[k] = x
                return objective(trial)

            c = hi - inv_gr * (hi - lo)
            d = lo + inv_gr * (hi - lo)
            fc, fd = line(c), line(d)
            for _ in range(config.golden_iters):
                if fc >= fd:
                    hi, d, fd = d, c, fc
                    c = hi - inv_gr * (hi - lo)
                    fc = line(c)
                else:
                    lo, c, fc = c, d, fd
                    d = lo + inv_gr * (hi - lo)
                    fd = line(d)
            x = 0.5 * (lo + hi)
            val = line(x)
            if val > best:
                improved += val - best
                best = val
                a[k] = x
        if improved <= config.tol * max(1.0, abs(best)):
            return a, best, True
    return a, best, False


def _volume_sup(mesh: SurfaceMesh, kind: str, config: OptimizerConfig) -> ConformalVolumeEstimate:
    objective = _PushedObjective(mesh, kind)
    rmax = 1.0 - config.cap
    centers = _start_centers(objective.dim, config)
    scored = [(objective(a), tuple(a), a) for a in centers]
    # deterministic ranking: value descending, then lexicographic center
    scored.sort(key=lambda item: (-item[0], item[1]))
    best_value, _, best_center = scored[0]
    converged = True
    for _, _, start in scored[: config.refine_top]:
        a, val, conv = _golden_refine(objective, start, rmax, config)
        if val > best_value + config.tol * max(1.0, abs(best_value)):
            best_value, best_center, converged = val, a, conv
        elif val > best_value:
            best_value, best_center = val, a
    return ConformalVolumeEstimate(
        best_value=best_value,
        best_map=MoebiusMap(center=best_center, rotation=np.eye(objective.dim)),
        samples=objective.evaluations,
        converged=converged,
    )


def boundary_volume_sup(
    mesh: SurfaceMesh, config: OptimizerConfig = OptimizerConfig()
) -> ConformalVolumeEstimate:
    """Largest boundary length found over the searched conformal images."""
    return _volume_sup(mesh, "boundary", config)


def relative_volume_sup(
    mesh: SurfaceMesh, config: OptimizerConfig = OptimizerConfig()
) -> ConformalVolumeEstimate:
    """Largest area found over the searched conformal images."""
    return _volume_sup(mesh, "area", config)


def limit_concentration(
    mesh: SurfaceMesh, vertex: int, t_sequence
) -> list[MeshMeasures]:
    """Measures of the mesh pushed along the family ``a = tanh(t) * (-p)``.

    ``p`` is the position of the given boundary vertex, which must lie on
    the unit sphere.  Centers are clamped to ``|a| <= 1 - 1e-9``; beyond
    that the transform is numerically meaningless in double precision.
    Returns one measure record per entry of ``t_sequence``.
    """
    from .mesh import measures

    geom = mesh.geometry
    if not isinstance(geom, Embedding):
        raise MeshError("concentration limits require an embedded mesh")
    boundary = np.concatenate([np.asarray(lp) for lp in mesh.boundary_loops])
    if vertex not in set(boundary.tolist()):
        raise ValueError(f"vertex {vertex} is not a boundary vertex")
    p = geom.coords[vertex]
    if abs(np.linalg.norm(p) - 1.0) > 1e-9:
        raise ValueError("the chosen boundary vertex must lie on the unit sphere")
    out = []
    for t in t_sequence:
        s = max(min(math.tanh(float(t)), 1.0 - 1e-9), -(1.0 - 1e-9))
        pushed = push_mesh(MoebiusMap(center=-s * p, rotation=np.eye(geom.dim)), mesh)
        out.append(measures(pushed))
    return out
