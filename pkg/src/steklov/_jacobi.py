"""Deterministic dense symmetric eigensolver (cyclic Jacobi rotations).

The sweep order is fixed (row major over the strict upper triangle) and
there is no pivot search, so identical inputs give bit-identical output on
every run.  Convergence is declared when the off-diagonal Frobenius norm
drops below ``tol`` times the Frobenius norm of the input.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg as sla
from numba import njit


@njit(cache=True)
def _jacobi_sweeps(A, V, tol, max_sweeps):
    n = A.shape[0]
    norm_a = 0.0
    for i in range(n):
        for j in range(n):
            norm_a += A[i, j] * A[i, j]
    norm_a = math.sqrt(norm_a)
    if norm_a == 0.0:
        return 0
    # rotations this small cannot push the off-norm above the target
    skip = 0.01 * tol * norm_a / n
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += 2.0 * A[p, q] * A[p, q]
        if math.sqrt(off) <= tol * norm_a:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= skip:
                    continue
                theta = 0.5 * (A[q, q] - A[p, p]) / apq
                t = 1.0 / (abs(theta) + math.sqrt(1.0 + theta * theta))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * apk - s * aqk
                    A[q, k] = s * apk + c * aqk
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq
    return max_sweeps


def symmetric_eigh(A: np.ndarray, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of symmetric A."""
    work = np.array(A, dtype=float, copy=True)
    n = work.shape[0]
    vecs = np.eye(n)
    _jacobi_sweeps(work, vecs, tol, 64)
    w = np.diag(work).copy()
    order = np.argsort(w, kind="stable")
    return w[order], vecs[:, order]


def generalized_eigh(
    A: np.ndarray, B: np.ndarray, tol: float = 1e-12
) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``A x = lambda B x`` for symmetric A and SPD B.

    Cholesky congruence reduces to a standard symmetric problem; returned
    eigenvectors are B-orthonormal.
    """
    L = sla.cholesky(B, lower=True, check_finite=False)
    C = sla.solve_triangular(L, A, lower=True, check_finite=False)
    C = sla.solve_triangular(L, C.T, lower=True, check_finite=False)
    C = 0.5 * (C + C.T)
    w, Y = symmetric_eigh(C, tol)
    X = sla.solve_triangular(L.T, Y, lower=False, check_finite=False)
    return w, X
