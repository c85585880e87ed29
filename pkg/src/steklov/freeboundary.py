"""Residual checks for free-boundary behaviour of embedded meshes.

A surface meeting the unit sphere orthogonally along its boundary is
characterized by three conditions that all admit discrete residuals: the
outward conormal equals the position vector, the coordinate functions are
harmonic, and on the boundary the Dirichlet-to-Neumann operator maps each
coordinate to itself.  The residuals converge at second order on refining
meshes of smooth solutions, so pass thresholds should be scaled with the
squared mesh size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fem, mesh as mesh_mod, moebius
from .mesh import Embedding, MeshError, SurfaceMesh

__all__ = [
    "FreeBoundaryThresholds",
    "FreeBoundaryReport",
    "AreaLengthReport",
    "OrbitLengthReport",
    "check_free_boundary",
    "verify_area_length",
    "orbit_length_maximality",
]


@dataclass(frozen=True)
class FreeBoundaryThresholds:
    """Pass thresholds; the default 2e-2 suits the default mesh resolutions."""

    conormal: float = 2e-2
    harmonic: float = 2e-2
    eigenvalue_one: float = 2e-2
    sphere: float = 1e-9

    def scaled(self, factor: float) -> "FreeBoundaryThresholds":
        """Thresholds for a mesh refined by ``1/factor`` (quadratic scaling)."""
        return FreeBoundaryThresholds(
            conormal=self.conormal * factor * factor,
            harmonic=self.harmonic * factor * factor,
            eigenvalue_one=self.eigenvalue_one * factor * factor,
            sphere=self.sphere,
        )


@dataclass(frozen=True)
class FreeBoundaryReport:
    conormal_deviation: float
    harmonic_defect: float
    eigenvalue_one_residual: float
    area: float
    boundary_length: float

    def passes(self, thresholds: FreeBoundaryThresholds = FreeBoundaryThresholds()) -> bool:
        return (
            self.conormal_deviation <= thresholds.conormal
            and self.harmonic_defect <= thresholds.harmonic
            and self.eigenvalue_one_residual <= thresholds.eigenvalue_one
        )


@dataclass(frozen=True)
class AreaLengthReport:
    two_A_minus_L: float
    area_minus_pi: float
    isoperimetric_slack: float


@dataclass(frozen=True)
class OrbitLengthReport:
    identity_length: float
    sup_length: float
    margin: float


def _vertex_adjacency(mesh: SurfaceMesh) -> list:
    adj = [set() for _ in range(mesh.num_vertices)]
    for a, b, c in mesh.triangles:
        adj[a].update((b, c))
        adj[b].update((c, a))
        adj[c].update((a, b))
    return adj


def _tangent_basis(offsets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Osculating tangent plane of a vertex star via a quadric height fit.

    A plane fit alone is first-order accurate on the one-sided stars found
    along the boundary; fitting quadratic height functions over the
    provisional plane and keeping their linear part restores second order.
    """
    n = offsets.shape[1]
    _, _, vt = np.linalg.svd(offsets, full_matrices=True)
    u1, u2 = vt[0], vt[1]
    if n == 2:
        return u1, u2
    normals = vt[2:]
    xi = offsets @ u1
    eta = offsets @ u2
    design = np.column_stack([xi, eta, xi * xi, xi * eta, eta * eta])
    heights = offsets @ normals.T
    if design.shape[0] >= design.shape[1]:
        sol, *_ = np.linalg.lstsq(design, heights, rcond=None)
        t1 = u1 + normals.T @ sol[0]
        t2 = u2 + normals.T @ sol[1]
    else:
        t1, t2 = u1, u2
    t1 = t1 / np.linalg.norm(t1)
    t2 = t2 - (t2 @ t1) * t1
    t2 = t2 / np.linalg.norm(t2)
    return t1, t2


def _conormal_deviation(mesh: SurfaceMesh) -> float:
    """Max over boundary vertices of |conormal - position|.

    The conormal is the unit vector in the fitted vertex tangent plane that
    is orthogonal to the boundary direction (central difference along the
    loop) and points away from the mean of the incident face centroids.
    """
    coords = mesh.geometry.coords
    adj = _vertex_adjacency(mesh)
    face_centroid_sum = np.zeros_like(coords)
    face_count = np.zeros(mesh.num_vertices)
    for tri in mesh.triangles:
        centroid = coords[tri].mean(axis=0)
        for v in tri:
            face_centroid_sum[v] += centroid
            face_count[v] += 1
    worst = 0.0
    for lp in mesh.boundary_loops:
        m = len(lp)
        for k in range(m):
            v = int(lp[k])
            ring = set(adj[v])
            for u in list(ring):
                ring |= adj[u]
            ring.discard(v)
            offsets = coords[sorted(ring)] - coords[v]
            t1, t2 = _tangent_basis(offsets)
            tau = coords[int(lp[(k + 1) % m])] - coords[int(lp[(k - 1) % m])]
            c1, c2 = tau @ t1, tau @ t2
            nu = -c2 * t1 + c1 * t2
            nu /= np.linalg.norm(nu)
            interior_dir = face_centroid_sum[v] / face_count[v] - coords[v]
            if nu @ interior_dir > 0.0:
                nu = -nu
            worst = max(worst, float(np.linalg.norm(nu - coords[v])))
    return worst


def check_free_boundary(
    mesh: SurfaceMesh,
    thresholds: FreeBoundaryThresholds = FreeBoundaryThresholds(),
) -> FreeBoundaryReport:
    """Compute the three free-boundary residuals of an embedded mesh.

    The boundary must lie on the unit sphere (within ``thresholds.sphere``);
    meshes at other scales should be rescaled first.  The harmonic defect is
    the sup-norm distance of the coordinates from the harmonic extension of
    their boundary trace; the eigenvalue-one residual compares the discrete
    boundary operator against the boundary mass on each coordinate.
    """
    geom = mesh.geometry
    if not isinstance(geom, Embedding):
        raise MeshError("free-boundary checks require an embedded mesh")
    bv = fem.boundary_vertices(mesh)
    radii = np.linalg.norm(geom.coords[bv], axis=1)
    off = float(np.abs(radii - 1.0).max())
    if off > thresholds.sphere:
        raise MeshError(
            f"boundary is off the unit sphere by {off:.3e}; rescale the mesh first"
        )
    trace = geom.coords[bv]
    extension = fem.harmonic_extension(mesh, trace)
    harmonic_defect = float(np.abs(geom.coords - extension).max())
    dtn = fem.dtn_matrix(mesh)
    D = 0.5 * (dtn.matrix + dtn.matrix.T)
    flux = D @ trace
    mass = dtn.mass @ trace
    ev1 = float(
        max(
            np.linalg.norm(flux[:, i] - mass[:, i]) / np.linalg.norm(mass[:, i])
            for i in range(trace.shape[1])
        )
    )
    mm = mesh_mod.measures(mesh)
    return FreeBoundaryReport(
        conormal_deviation=_conormal_deviation(mesh),
        harmonic_defect=harmonic_defect,
        eigenvalue_one_residual=ev1,
        area=mm.area,
        boundary_length=mm.total_boundary_length,
    )


def verify_area_length(
    mesh: SurfaceMesh,
    thresholds: FreeBoundaryThresholds = FreeBoundaryThresholds(),
) -> AreaLengthReport:
    """Area and boundary-length identities of a verified free-boundary mesh.

    Refuses meshes that fail ``check_free_boundary`` at the given
    thresholds.  On solutions, twice the area equals the boundary length,
    the area is at least pi, and the isoperimetric slack is nonnegative,
    all up to discretization error.
    """
    report = check_free_boundary(mesh, thresholds)
    if not report.passes(thresholds):
        raise ValueError(
            "mesh does not pass the free-boundary residual check: "
            f"{report}"
        )
    A = report.area
    L = report.boundary_length
    return AreaLengthReport(
        two_A_minus_L=2.0 * A - L,
        area_minus_pi=A - math.pi,
        isoperimetric_slack=L * L / (4.0 * math.pi) - A,
    )


def orbit_length_maximality(
    mesh: SurfaceMesh,
    config: moebius.OptimizerConfig = moebius.OptimizerConfig(),
    thresholds: FreeBoundaryThresholds = FreeBoundaryThresholds(),
    geometric_tol: float = 2e-2,
) -> OrbitLengthReport:
    """Search the conformal orbit for a longer boundary; there should be none.

    For a free-boundary mesh the boundary length is maximal over conformal
    images of the surface, so the search margin is only allowed to go
    negative by the geometric (discretization) tolerance; a larger
    violation raises.
    """
    report = check_free_boundary(mesh, thresholds)
    if not report.passes(thresholds):
        raise ValueError(
            "mesh does not pass the free-boundary residual check: "
            f"{report}"
        )
    estimate = moebius.boundary_volume_sup(mesh, config)
    identity_length = report.boundary_length
    margin = (identity_length - estimate.best_value) / identity_length
    if estimate.best_value > identity_length * (1.0 + geometric_tol):
        raise RuntimeError(
            f"conformal image exceeds the identity boundary length by "
            f"{-margin:.3%}, beyond the geometric tolerance {geometric_tol:.1%}"
        )
    return OrbitLengthReport(
        identity_length=identity_length,
        sup_length=estimate.best_value,
        margin=margin,
    )
