"""Catenoid-family constants and embedded catenoid meshes.

Revolving the graph ``x = cosh(t - a)`` produces a one-parameter family of
annular minimal surfaces.  The trimming parameters ``t1(a)`` and ``t2(a)``
solve ``t = coth(t + a)`` and ``t = coth(t - a)``; at ``a = 0`` the surface
rescales into the unit ball so that it meets the sphere orthogonally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .annulus import coth
from .mesh import Embedding, MeshError, SurfaceMesh

__all__ = [
    "CatenoidFamilyMember",
    "CriticalCatenoid",
    "solve_family",
    "critical_catenoid",
    "max_sigma1L_over_a",
    "catenoid_mesh",
]


@dataclass(frozen=True)
class CatenoidFamilyMember:
    """Trimmed catenoid with offset ``a`` and its derived constants.

    ``R1`` and ``R2`` are the radii of the spheres containing the two
    boundary circles; ``sigma1L_max`` is the value ``2*pi*(1/t1 + 1/t2)``
    attained by the normalized first eigenvalue times boundary length.
    """

    a: float
    t1: float
    t2: float
    alpha: float
    T: float
    sigma1L_max: float
    R1: float
    R2: float


@dataclass(frozen=True)
class CriticalCatenoid:
    """Constants of the ``a = 0`` member scaled into the unit ball."""

    t1: float
    T1: float
    sigma1L_star: float
    scale: float


def _coth_root(c: float, tol: float) -> float:
    """Positive root of ``t = coth(t + c)``.

    The function ``g(t) = t - coth(t + c)`` is increasing on the domain
    ``t + c > 0``, so bisection over an expanding bracket converges; five
    Newton steps (``g' = coth^2``) polish the result.
    """
    if not (tol > 0.0):
        raise ValueError(f"tol must be positive, got {tol}")

    def g(t: float) -> float:
        if t + c <= 0.0:
            raise ArithmeticError(f"root iteration left the domain t + c > 0 at t={t}")
        return t - coth(t + c)

    lo = max(1.0, -c) + 1e-12
    if g(lo) >= 0.0:
        # root pinned against t = 1 within double precision (large offset):
        # t - 1 = 2 / (e^{2(t+c)} - 1) evaluated at t = 1
        return 1.0 + 2.0 / math.expm1(2.0 * (1.0 + c))
    hi = lo + 1.0
    while g(hi) <= 0.0:
        hi += hi - lo
        if hi > 1e3 + max(0.0, -c):
            raise ArithmeticError(f"bracket expansion failed for offset {c}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    for _ in range(5):
        ct = coth(t + c)
        t -= (t - ct) / (ct * ct)
    return t


def solve_family(a: float, tol: float = 1e-12) -> CatenoidFamilyMember:
    """Member of the catenoid family at offset ``a``."""
    t1 = _coth_root(a, tol)
    t2 = _coth_root(-a, tol)
    R1 = math.hypot(t1, math.cosh(t1 + a))
    R2 = math.hypot(t2, math.cosh(t2 - a))
    return CatenoidFamilyMember(
        a=a,
        t1=t1,
        t2=t2,
        alpha=t1 / t2,
        T=t1 + t2,
        sigma1L_max=2.0 * math.pi * (1.0 / t1 + 1.0 / t2),
        R1=R1,
        R2=R2,
    )


def critical_catenoid(tol: float = 1e-12) -> CriticalCatenoid:
    """Constants of the symmetric member, scaled to the unit ball."""
    t1 = _coth_root(0.0, tol)
    R = math.hypot(t1, math.cosh(t1))
    return CriticalCatenoid(
        t1=t1,
        T1=2.0 * t1,
        sigma1L_star=4.0 * math.pi / t1,
        scale=1.0 / R,
    )


def _objective(a: float) -> float:
    m = solve_family(a)
    return 2.0 * math.pi * (1.0 / m.t1 + 1.0 / m.t2)


def max_sigma1L_over_a(
    half_width: float = 5.0, grid: int = 201, tol: float = 1e-9
) -> tuple[float, float]:
    """Maximize ``2*pi*(1/t1 + 1/t2)`` over the offset parameter.

    A uniform scan over ``[-half_width, half_width]`` locates the best grid
    point and golden-section search refines the bracket around it.
    Returns ``(a_star, value)``.
    """
    if grid < 3:
        raise ValueError(f"grid must have at least 3 points, got {grid}")
    xs = np.linspace(-half_width, half_width, grid)
    vals = [_objective(float(x)) for x in xs]
    k = int(np.argmax(vals))
    lo = xs[max(k - 1, 0)]
    hi = xs[min(k + 1, grid - 1)]
    inv_gr = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - inv_gr * (hi - lo)
    d = lo + inv_gr * (hi - lo)
    fc, fd = _objective(c), _objective(d)
    while hi - lo > tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - inv_gr * (hi - lo)
            fc = _objective(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv_gr * (hi - lo)
            fd = _objective(d)
    a_star = 0.5 * (lo + hi)
    return a_star, _objective(a_star)


def catenoid_mesh(a: float, n_t: int, n_theta: int) -> SurfaceMesh:
    """Triangulated trimmed catenoid, embedded in R^3.

    The parameter domain ``[-t1, t2] x S^1`` maps through
    ``(cosh(t-a) cos(theta), cosh(t-a) sin(theta), t)``.  For ``a = 0`` the
    surface is rescaled so both boundary circles lie on the unit sphere; for
    ``a != 0`` the boundary circles lie on spheres of different radii and no
    rescale is applied, so the mesh is geometry only and will not pass a
    free-boundary check.  Each grid quad is split along its shorter embedded
    diagonal, ties going to the diagonal of increasing t and theta.
    """
    if n_t < 2 or n_theta < 8:
        raise MeshError(f"resolution too coarse: n_t={n_t}, n_theta={n_theta}")
    member = solve_family(a)
    ts = np.linspace(-member.t1, member.t2, n_t + 1)
    thetas = 2.0 * math.pi * np.arange(n_theta) / n_theta
    radii = np.cosh(ts - a)
    nv = (n_t + 1) * n_theta
    coords = np.empty((nv, 3))
    for i in range(n_t + 1):
        base = i * n_theta
        coords[base : base + n_theta, 0] = radii[i] * np.cos(thetas)
        coords[base : base + n_theta, 1] = radii[i] * np.sin(thetas)
        coords[base : base + n_theta, 2] = ts[i]
    if a == 0.0:
        coords /= math.hypot(member.t1, math.cosh(member.t1 + a))
    tris = np.empty((2 * n_t * n_theta, 3), dtype=np.int64)
    idx = 0
    for i in range(n_t):
        for j in range(n_theta):
            jn = (j + 1) % n_theta
            v00 = i * n_theta + j
            v01 = i * n_theta + jn
            v10 = (i + 1) * n_theta + j
            v11 = (i + 1) * n_theta + jn
            d_main = np.linalg.norm(coords[v00] - coords[v11])
            d_anti = np.linalg.norm(coords[v10] - coords[v01])
            if d_main <= d_anti:
                tris[idx] = (v00, v10, v11)
                tris[idx + 1] = (v00, v11, v01)
            else:
                tris[idx] = (v00, v10, v01)
                tris[idx + 1] = (v10, v11, v01)
            idx += 2
    loops = (
        np.arange(n_theta, dtype=np.int64),
        np.arange(n_t * n_theta, nv, dtype=np.int64),
    )
    return SurfaceMesh(tris, loops, Embedding(coords))
