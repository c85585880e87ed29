"""Closed-form Steklov spectrum of flat conformal metrics on an annulus.

The annulus is the cylinder ``[0, T] x S^1`` with metric
``f(t)^2 (dt^2 + dtheta^2)``.  The Dirichlet-to-Neumann spectrum depends on
the conformal factor only through its boundary values, so an annulus is
stored as the triple ``(f0, fT, T)``.  Separating variables turns each
angular frequency ``n >= 1`` into a quadratic equation whose two roots form
one spectral band; the ``n = 0`` band consists of the eigenvalue zero and a
single positive eigenvalue coming from functions linear in ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

__all__ = [
    "FlatAnnulus",
    "SpectrumBand",
    "CriticalityClass",
    "SUBCRITICAL",
    "SUPERCRITICAL",
    "CRITICAL",
    "coth",
    "zero_band",
    "band_eigenvalues",
    "sigma1",
    "sigma1_length",
    "ratio_first_bands",
    "critical_modulus",
    "classify",
    "spectrum",
]

SUBCRITICAL = "Subcritical"
SUPERCRITICAL = "Supercritical"
CRITICAL = "Critical"

# coth saturates to 1 in double precision well before this point.
_COTH_SATURATION = 350.0


def coth(x: float) -> float:
    """Hyperbolic cotangent of ``x > 0``, stable for both tiny and large x.

    Evaluated as ``1 + 2/ (e^{2x} - 1)`` which avoids overflow of
    cosh/sinh; beyond the saturation point the result is exactly 1.0.
    """
    if x <= 0.0:
        raise ValueError(f"coth requires a positive argument, got {x}")
    if x >= _COTH_SATURATION:
        return 1.0
    return 1.0 + 2.0 / math.expm1(2.0 * x)


@dataclass(frozen=True)
class FlatAnnulus:
    """Flat conformal metric on ``[0, T] x S^1``.

    ``f0`` and ``fT`` are the conformal factors on the two boundary
    circles, so the boundary lengths are ``2*pi*f0`` and ``2*pi*fT``;
    ``T`` is the conformal modulus.
    """

    f0: float
    fT: float
    T: float

    def __post_init__(self) -> None:
        for name in ("f0", "fT", "T"):
            v = getattr(self, name)
            if not (v > 0.0 and math.isfinite(v)):
                raise ValueError(f"{name} must be a positive finite real, got {v}")

    @property
    def alpha(self) -> float:
        """Ratio of boundary lengths f0/fT."""
        return self.f0 / self.fT

    @property
    def boundary_length(self) -> float:
        """Total boundary length 2*pi*(f0 + fT)."""
        return 2.0 * math.pi * (self.f0 + self.fT)


@dataclass(frozen=True)
class SpectrumBand:
    """The pair of eigenvalues attached to one angular frequency ``n``."""

    n: int
    lam1: float
    lam2: float
    multiplicity: int


@dataclass(frozen=True)
class CriticalityClass:
    """Outcome of comparing the modulus against the critical threshold."""

    tag: str
    threshold: float


def zero_band(m: FlatAnnulus) -> SpectrumBand:
    """Band ``n = 0``: eigenvalue 0 plus the eigenvalue of data linear in t.

    The nonzero eigenvalue is ``(f0 + fT) / (f0 * fT * T)``; both members
    of this band are simple.
    """
    lam2 = (m.f0 + m.fT) / (m.f0 * m.fT * m.T)
    return SpectrumBand(n=0, lam1=0.0, lam2=lam2, multiplicity=1)


def band_eigenvalues(m: FlatAnnulus, n: int) -> SpectrumBand:
    """Both roots of the frequency-``n`` quadratic, each with multiplicity 2.

    The quadratic is ``lam^2 - n*(1/f0 + 1/fT)*coth(n*T)*lam
    + n^2/(f0*fT) = 0``.  The larger root uses the direct formula; the
    smaller one is computed from the product of the roots to avoid
    cancellation when ``coth(n*T)`` is large.
    """
    if n < 1:
        raise ValueError(f"band index must be >= 1, got {n}")
    inv0 = 1.0 / m.f0
    invT = 1.0 / m.fT
    s = (inv0 + invT) * coth(n * m.T)
    disc = s * s - 4.0 * inv0 * invT
    if disc < -1e-12 * s * s:
        raise ArithmeticError(
            f"negative discriminant {disc} for band n={n}; inputs are corrupt"
        )
    root = math.sqrt(max(disc, 0.0))
    lam2 = 0.5 * n * (s + root)
    lam1 = 2.0 * n * inv0 * invT / (s + root)
    return SpectrumBand(n=n, lam1=lam1, lam2=lam2, multiplicity=2)


def sigma1(m: FlatAnnulus) -> float:
    """First nonzero Steklov eigenvalue: the smaller of the two candidates."""
    return min(zero_band(m).lam2, band_eigenvalues(m, 1).lam1)


def sigma1_length(m: FlatAnnulus) -> float:
    """Scale-invariant product of sigma1 with the total boundary length."""
    return sigma1(m) * m.boundary_length


def _symmetric_ratio_coefficient(alpha: float) -> float:
    """``4*alpha/(alpha+1)^2`` evaluated symmetrically in alpha <-> 1/alpha.

    Computed as ``4 / (alpha + 1/alpha + 2)`` with the two reciprocal terms
    added in sorted order, so the bracketing sequence of the root finder is
    identical for alpha and 1/alpha whenever 1/(1/alpha) == alpha in floating
    point.
    """
    u = alpha
    v = 1.0 / alpha
    lo, hi = (u, v) if u <= v else (v, u)
    return 4.0 / ((lo + hi) + 2.0)


def ratio_first_bands(m: FlatAnnulus) -> float:
    """Quotient of the first ``n = 1`` eigenvalue by the nonzero ``n = 0`` one.

    Uses the closed reciprocal form, which is monotone increasing in ``T``
    for fixed boundary ratio and therefore drives the critical-modulus root
    finder.
    """
    q = _symmetric_ratio_coefficient(m.alpha)
    return _ratio_from_coefficient(q, m.T)


def _ratio_from_coefficient(q: float, T: float) -> float:
    c = coth(T)
    return 0.5 * T * q / (c + math.sqrt(max(c * c - q, 0.0)))


_BRACKET_LO = 1e-6
_BRACKET_HI = 1e6
_BRACKET_CAP = 1e12


def critical_modulus(alpha: float, tol: float = 1e-12) -> float:
    """Modulus at which the two first-band candidates cross, for fixed alpha.

    Below the returned value the first nonzero eigenvalue comes from the
    ``n = 1`` band, above it from the ``n = 0`` band.  Found by bisection
    on the band ratio over ``[1e-6, 1e6]`` (expanded if needed, capped)
    followed by five Newton polish steps; symmetric in alpha <-> 1/alpha.
    """
    if not (alpha > 0.0 and math.isfinite(alpha)):
        raise ValueError(f"alpha must be a positive finite real, got {alpha}")
    if not (tol > 0.0):
        raise ValueError(f"tol must be positive, got {tol}")
    q = _symmetric_ratio_coefficient(alpha)
    g = lambda T: _ratio_from_coefficient(q, T) - 1.0
    lo, hi = _BRACKET_LO, _BRACKET_HI
    while g(lo) >= 0.0:
        lo *= 0.1
        if lo < 1.0 / _BRACKET_CAP:
            raise ArithmeticError(f"cannot bracket critical modulus for alpha={alpha}")
    while g(hi) <= 0.0:
        hi *= 10.0
        if hi > _BRACKET_CAP:
            raise ArithmeticError(f"cannot bracket critical modulus for alpha={alpha}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    T = 0.5 * (lo + hi)
    for _ in range(5):
        h = 1e-7 * T
        slope = (g(T + h) - g(T - h)) / (2.0 * h)
        if slope == 0.0:
            break
        T -= g(T) / slope
    return T


@lru_cache(maxsize=None)
def _cached_critical_modulus(alpha: float, tol: float) -> float:
    return critical_modulus(alpha, tol)


def classify(m: FlatAnnulus, class_tol: float = 1e-9) -> CriticalityClass:
    """Compare the modulus against ``(sqrt(a)+1/sqrt(a))^2/4`` times T(1).

    A modulus within ``class_tol`` (relative) of the threshold is tagged
    Critical; at or above the threshold Supercritical; below, Subcritical.
    """
    u = m.alpha
    v = 1.0 / u
    lo, hi = (u, v) if u <= v else (v, u)
    threshold = 0.25 * ((lo + hi) + 2.0) * _cached_critical_modulus(1.0, 1e-12)
    if abs(m.T - threshold) <= class_tol * threshold:
        tag = CRITICAL
    elif m.T >= threshold:
        tag = SUPERCRITICAL
    else:
        tag = SUBCRITICAL
    return CriticalityClass(tag=tag, threshold=threshold)


def spectrum(
    m: FlatAnnulus, n_max: int, cluster_tol: float = 1e-8
) -> list[tuple[float, int]]:
    """Sorted eigenvalues with multiplicities from bands ``n = 0 .. n_max``.

    Eigenvalues closer than ``cluster_tol`` (relative) are merged into one
    entry whose value is the multiplicity-weighted mean of its members.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    entries: list[tuple[float, int]] = [(0.0, 1), (zero_band(m).lam2, 1)]
    for n in range(1, n_max + 1):
        band = band_eigenvalues(m, n)
        entries.append((band.lam1, 2))
        entries.append((band.lam2, 2))
    entries.sort()
    clustered: list[tuple[float, int]] = []
    for value, mult in entries:
        if clustered:
            ref, ref_mult = clustered[-1]
            if abs(value - ref) <= cluster_tol * max(abs(value), abs(ref)):
                merged = (ref * ref_mult + value * mult) / (ref_mult + mult)
                clustered[-1] = (merged, ref_mult + mult)
                continue
        clustered.append((value, mult))
    return clustered
