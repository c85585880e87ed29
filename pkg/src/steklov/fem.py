"""Discrete Dirichlet-to-Neumann operator and Steklov spectra on meshes.

Piecewise-linear elements give the Dirichlet energy matrix; eliminating the
interior by a Schur complement leaves a dense symmetric operator on the
boundary vertices whose generalized eigenvalues against the boundary mass
matrix are the discrete Steklov eigenvalues.

For parameter meshes the energy matrix is assembled from the flat ``(t,
theta)`` triangle shapes: in two dimensions the Dirichlet energy does not
see the conformal factor, so meshes differing only in their factor field
produce the identical matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import mesh as mesh_mod
from ._jacobi import generalized_eigh
from .mesh import Embedding, MeshError, ParamFlat, SurfaceMesh

__all__ = [
    "DtNMatrix",
    "SteklovSpectrum",
    "boundary_vertices",
    "assemble_stiffness",
    "assemble_boundary_mass",
    "dtn_matrix",
    "steklov_spectrum",
    "harmonic_extension",
    "rayleigh_quotient",
]


@dataclass(frozen=True)
class DtNMatrix:
    """Dense boundary operator together with the boundary mass matrix.

    Rows and columns follow ``boundary_vertices``, the concatenation of the
    mesh boundary loops.
    """

    matrix: np.ndarray
    mass: np.ndarray
    boundary_vertices: np.ndarray


@dataclass(frozen=True)
class SteklovSpectrum:
    """Ascending eigenvalues with mass-orthonormal boundary eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    boundary_vertices: np.ndarray
    clusters: tuple


def boundary_vertices(mesh: SurfaceMesh) -> np.ndarray:
    """Boundary vertex indices in canonical (loop concatenation) order."""
    return np.concatenate([np.asarray(lp) for lp in mesh.boundary_loops])


def _triangle_corner_coords(mesh: SurfaceMesh) -> np.ndarray:
    """(F, 3, d) corner coordinates used for element shapes."""
    geom = mesh.geometry
    if isinstance(geom, Embedding):
        return geom.coords[mesh.triangles]
    return mesh_mod.flat_triangle_coords(mesh)


def assemble_stiffness(mesh: SurfaceMesh) -> sp.csr_matrix:
    """Dirichlet energy matrix of piecewise-linear functions (cotan weights).

    The quadratic form of the result is ``u^T K u = integral |grad u|^2``.
    Embedded meshes use the intrinsic triangle shapes in any ambient
    dimension; parameter meshes use the flat shapes.
    """
    P = _triangle_corner_coords(mesh)
    p0, p1, p2 = P[:, 0], P[:, 1], P[:, 2]
    e1 = p1 - p0
    e2 = p2 - p0
    g11 = np.einsum("ij,ij->i", e1, e1)
    g22 = np.einsum("ij,ij->i", e2, e2)
    g12 = np.einsum("ij,ij->i", e1, e2)
    area4 = 2.0 * np.sqrt(np.maximum(g11 * g22 - g12 * g12, 0.0))
    bad = np.where(area4 <= 1e-300)[0]
    if bad.size:
        raise MeshError(f"degenerate triangle {int(bad[0])} has zero area")
    # cot(angle at corner k) = <e_ki, e_kj> / (2 area)
    c0 = np.einsum("ij,ij->i", p1 - p0, p2 - p0) / area4 * 2.0
    c1 = np.einsum("ij,ij->i", p2 - p1, p0 - p1) / area4 * 2.0
    c2 = np.einsum("ij,ij->i", p0 - p2, p1 - p2) / area4 * 2.0
    t0, t1, t2 = mesh.triangles[:, 0], mesh.triangles[:, 1], mesh.triangles[:, 2]
    rows, cols, vals = [], [], []
    for i, j, c in ((t1, t2, c0), (t2, t0, c1), (t0, t1, c2)):
        w = 0.5 * c
        rows += [i, j, i, j]
        cols += [j, i, i, j]
        vals += [-w, -w, w, w]
    K = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(mesh.num_vertices, mesh.num_vertices),
    )
    K.sum_duplicates()
    return K


def assemble_boundary_mass(mesh: SurfaceMesh, lumped: bool = False) -> np.ndarray:
    """Mass matrix of the boundary arclength, over the boundary vertices.

    Consistent by default (tridiagonal around each loop, wrapping at the
    loop ends); ``lumped`` collapses it to the diagonal.  Parameter meshes
    weight each edge by the trapezoid rule in the conformal factor.
    """
    bv = boundary_vertices(mesh)
    nb = bv.size
    pos = np.empty(mesh.num_vertices, dtype=np.int64)
    pos[bv] = np.arange(nb)
    B = np.zeros((nb, nb))
    for lp in mesh.boundary_loops:
        lengths = mesh_mod._loop_edge_lengths(mesh, lp)
        ia = pos[lp]
        ib = pos[np.roll(lp, -1)]
        if lumped:
            np.add.at(B, (ia, ia), 0.5 * lengths)
            np.add.at(B, (ib, ib), 0.5 * lengths)
        else:
            np.add.at(B, (ia, ia), lengths / 3.0)
            np.add.at(B, (ib, ib), lengths / 3.0)
            np.add.at(B, (ia, ib), lengths / 6.0)
            np.add.at(B, (ib, ia), lengths / 6.0)
    return B


def _interior_factor(K: sp.csr_matrix, interior: np.ndarray):
    """Deterministic sparse factorization of the interior block."""
    Kii = K[interior][:, interior].tocsc()
    return spla.splu(
        Kii,
        permc_spec="MMD_AT_PLUS_A",
        diag_pivot_thresh=0.0,
        options=dict(SymmetricMode=True),
    )


def _split(mesh: SurfaceMesh):
    bv = boundary_vertices(mesh)
    mask = np.zeros(mesh.num_vertices, dtype=bool)
    mask[bv] = True
    interior = np.where(~mask)[0]
    return bv, interior


def dtn_matrix(mesh: SurfaceMesh) -> DtNMatrix:
    """Boundary Schur complement ``K_bb - K_bi K_ii^{-1} K_ib`` plus mass."""
    K = assemble_stiffness(mesh)
    bv, interior = _split(mesh)
    Kbb = K[bv][:, bv].toarray()
    if interior.size:
        Kbi = K[bv][:, interior]
        lu = _interior_factor(K, interior)
        X = lu.solve(Kbi.T.toarray())
        if not np.all(np.isfinite(X)):
            raise ArithmeticError(
                "interior stiffness block is singular; the mesh has a "
                "component without boundary"
            )
        D = Kbb - Kbi @ X
    else:
        D = Kbb
    return DtNMatrix(matrix=D, mass=assemble_boundary_mass(mesh), boundary_vertices=bv)


def _cluster(values: np.ndarray, rel_tol: float) -> tuple:
    clusters = []
    for v in values:
        if clusters:
            ref, mult = clusters[-1]
            if abs(v - ref) <= rel_tol * max(abs(v), abs(ref), 1e-30):
                clusters[-1] = (float(ref * mult + v) / (mult + 1), mult + 1)
                continue
        clusters.append((float(v), 1))
    return tuple(clusters)


def steklov_spectrum(
    mesh: SurfaceMesh, count: int, cluster_tol: float = 1e-3
) -> SteklovSpectrum:
    """First ``count`` discrete Steklov eigenvalues of the mesh.

    Solves the dense generalized problem (Schur complement, boundary mass)
    with the deterministic Jacobi eigensolver; eigenvectors come back
    orthonormal in the boundary mass inner product.  Eigenvalues closer
    than ``cluster_tol`` (relative) are reported as one cluster.
    """
    dtn = dtn_matrix(mesh)
    nb = dtn.boundary_vertices.size
    if not (1 <= count <= nb):
        raise ValueError(f"count must lie in [1, {nb}], got {count}")
    D = 0.5 * (dtn.matrix + dtn.matrix.T)
    try:
        w, X = generalized_eigh(D, dtn.mass)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"boundary mass is not positive definite: {exc}") from exc
    return SteklovSpectrum(
        eigenvalues=w[:count],
        eigenvectors=X[:, :count],
        boundary_vertices=dtn.boundary_vertices,
        clusters=_cluster(w[:count], cluster_tol),
    )


def harmonic_extension(mesh: SurfaceMesh, boundary_values: np.ndarray) -> np.ndarray:
    """Extend boundary data (in canonical boundary order) harmonically.

    Accepts a vector or a stack of columns; returns values on all vertices.
    """
    values = np.asarray(boundary_values, dtype=float)
    bv, interior = _split(mesh)
    if values.shape[0] != bv.size:
        raise ValueError(
            f"boundary data has {values.shape[0]} rows, expected {bv.size}"
        )
    K = assemble_stiffness(mesh)
    out_shape = (mesh.num_vertices,) + values.shape[1:]
    out = np.zeros(out_shape)
    out[bv] = values
    if interior.size:
        Kib = K[interior][:, bv]
        lu = _interior_factor(K, interior)
        rhs = -(Kib @ values)
        sol = lu.solve(rhs if rhs.ndim > 1 else rhs[:, None])
        if not np.all(np.isfinite(sol)):
            raise ArithmeticError("interior stiffness block is singular")
        out[interior] = sol if rhs.ndim > 1 else sol[:, 0]
    return out


def rayleigh_quotient(mesh: SurfaceMesh, boundary_values: np.ndarray) -> float:
    """Energy of the harmonic extension over the boundary mass norm.

    The boundary mean is projected out first, so the result bounds the
    first nonzero eigenvalue from above.
    """
    values = np.asarray(boundary_values, dtype=float)
    if values.ndim != 1:
        raise ValueError("boundary data must be a single vector")
    B = assemble_boundary_mass(mesh)
    ones = np.ones(values.shape[0])
    total = ones @ B @ ones
    values = values - (ones @ B @ values) / total * ones
    norm2 = values @ B @ values
    if norm2 <= 1e-30 * total:
        raise ValueError("boundary data is constant: zero norm after centering")
    ext = harmonic_extension(mesh, values)
    K = assemble_stiffness(mesh)
    return float(ext @ (K @ ext)) / float(norm2)
