import math

import numpy as np
import pytest

from steklov.annulus import (
    CRITICAL,
    SUBCRITICAL,
    SUPERCRITICAL,
    FlatAnnulus,
    band_eigenvalues,
    classify,
    coth,
    critical_modulus,
    ratio_first_bands,
    sigma1,
    sigma1_length,
    spectrum,
    zero_band,
)

# frozen from the bisection oracle on t - coth(t) over [1.1, 1.3]
T_STAR = 1.199678640257734
FOUR_PI_OVER_T = 10.474780655975891


def quadratic_roots(m, n):
    """Root oracle: numpy companion-matrix roots of the band quadratic."""
    coeffs = [1.0, -n * (1 / m.f0 + 1 / m.fT) * coth(n * m.T), n * n / (m.f0 * m.fT)]
    return np.sort(np.roots(coeffs).real)


def test_coth_stability():
    assert coth(400.0) == 1.0
    assert coth(1e-8) == pytest.approx(1e8, rel=1e-6)
    assert coth(1.0) == pytest.approx(math.cosh(1.0) / math.sinh(1.0), rel=1e-15)
    with pytest.raises(ValueError):
        coth(0.0)


def test_invalid_annulus_rejected():
    for bad in ((0.0, 1.0, 1.0), (1.0, -2.0, 1.0), (1.0, 1.0, 0.0)):
        with pytest.raises(ValueError):
            FlatAnnulus(*bad)


def test_zero_band_examples():
    assert zero_band(FlatAnnulus(1, 1, 2)).lam2 == pytest.approx(1.0, rel=1e-15)
    assert zero_band(FlatAnnulus(1, 1, 1)).lam2 == pytest.approx(2.0, rel=1e-15)
    # hand check: (2*1*3)^-1 * (2+1) = 1/2
    assert zero_band(FlatAnnulus(2, 1, 3)).lam2 == pytest.approx(0.5, rel=1e-15)
    band = zero_band(FlatAnnulus(1, 1, 2))
    assert band.lam1 == 0.0 and band.multiplicity == 1


def test_first_band_symmetric_annulus(t_star):
    # for equal boundary factors the lower root collapses to tanh(T/2)
    m = FlatAnnulus(1, 1, 2)
    band = band_eigenvalues(m, 1)
    assert band.lam1 == pytest.approx(math.tanh(1.0), rel=1e-12)
    lo, hi = quadratic_roots(m, 1)
    assert band.lam1 == pytest.approx(lo, rel=1e-12)
    assert band.lam2 == pytest.approx(hi, rel=1e-12)
    assert band.multiplicity == 2


def test_band_against_root_oracle():
    m = FlatAnnulus(1, 2, 1)
    band = band_eigenvalues(m, 3)
    lo, hi = quadratic_roots(m, 3)
    assert band.lam1 == pytest.approx(lo, rel=1e-12)
    assert band.lam2 == pytest.approx(hi, rel=1e-12)
    # product of the roots of lam^2 - 3*(3/2)coth(3) lam + 9/2
    assert band.lam1 * band.lam2 == pytest.approx(4.5, rel=1e-12)


def test_vieta_identities_random():
    rng = np.random.default_rng(17)
    for _ in range(1000):
        f0 = math.exp(rng.uniform(-2, 2))
        fT = math.exp(rng.uniform(-2, 2))
        T = math.exp(rng.uniform(math.log(0.01), math.log(20.0)))
        n = int(rng.integers(1, 8))
        m = FlatAnnulus(f0, fT, T)
        band = band_eigenvalues(m, n)
        total = n * (1 / f0 + 1 / fT) * coth(n * T)
        prod = n * n / (f0 * fT)
        assert band.lam1 + band.lam2 == pytest.approx(total, rel=1e-12)
        assert band.lam1 * band.lam2 == pytest.approx(prod, rel=1e-12)
        assert band.lam1 < band.lam2


def test_band_ordering_and_monotonicity():
    m = FlatAnnulus(0.7, 1.9, 1.3)
    lam1_prev = 0.0
    for n in range(1, 51):
        band = band_eigenvalues(m, n)
        assert band.lam1 < band.lam2
        assert band.lam1 > lam1_prev
        lam1_prev = band.lam1


def test_sigma1_branch_crossing(t_star):
    m = FlatAnnulus(1, 1, 2 * t_star)
    low = zero_band(m).lam2
    first = band_eigenvalues(m, 1).lam1
    assert low == pytest.approx(first, rel=1e-10)
    assert sigma1(m) == pytest.approx(1.0 / t_star, rel=1e-10)


def test_sigma1_branch_selection():
    # large modulus: the linear-in-t eigenvalue wins
    m = FlatAnnulus(1, 1, 25.0)
    assert sigma1(m) == pytest.approx(2.0 / 25.0, rel=1e-12)
    # small modulus: the first oscillatory band wins
    m = FlatAnnulus(1, 1, 0.1)
    assert sigma1(m) == pytest.approx(math.tanh(0.05), rel=1e-12)


def test_sigma1_length_crossing(t_star):
    m = FlatAnnulus(1, 1, 2 * t_star)
    assert sigma1_length(m) == pytest.approx(4 * math.pi / t_star, rel=1e-12)
    assert sigma1_length(m) == pytest.approx(FOUR_PI_OVER_T, abs=1e-9)


def test_sigma1_length_supercritical_branch():
    for T in (3.0, 5.0, 12.0):
        m = FlatAnnulus(1, 1, T)
        assert sigma1_length(m) == pytest.approx(8 * math.pi / T, rel=1e-12)


def test_sigma1_length_scale_invariance():
    rng = np.random.default_rng(3)
    for _ in range(50):
        f0, fT = math.exp(rng.uniform(-1, 1)), math.exp(rng.uniform(-1, 1))
        T = math.exp(rng.uniform(-2, 2))
        c = math.exp(rng.uniform(-3, 3))
        base = sigma1_length(FlatAnnulus(f0, fT, T))
        scaled = sigma1_length(FlatAnnulus(c * f0, c * fT, T))
        assert scaled == pytest.approx(base, rel=1e-12)


def test_ratio_examples(t_star):
    assert ratio_first_bands(FlatAnnulus(1, 1, 2 * t_star)) == pytest.approx(1.0, rel=1e-10)
    # alpha = 1 simplifies to (T/2) tanh(T/2)
    for T in (0.5, 1.0, 3.0):
        expected = (T / 2) * math.tanh(T / 2)
        assert ratio_first_bands(FlatAnnulus(2, 2, T)) == pytest.approx(expected, rel=1e-12)
    assert ratio_first_bands(FlatAnnulus(1, 1, 1e-3)) < 1e-6


def test_ratio_matches_direct_quotient():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        alpha = math.exp(rng.uniform(math.log(0.01), math.log(100.0)))
        T = math.exp(rng.uniform(math.log(0.01), math.log(20.0)))
        m = FlatAnnulus(alpha, 1.0, T)
        direct = band_eigenvalues(m, 1).lam1 / zero_band(m).lam2
        assert ratio_first_bands(m) == pytest.approx(direct, rel=1e-10)


def test_ratio_increasing_in_modulus():
    for alpha in (0.2, 1.0, 7.0):
        values = [
            ratio_first_bands(FlatAnnulus(alpha, 1.0, T))
            for T in np.geomspace(0.05, 20.0, 60)
        ]
        assert all(a < b for a, b in zip(values, values[1:]))


def test_critical_modulus_value(t_star):
    assert critical_modulus(1.0) == pytest.approx(2 * t_star, abs=1e-10)
    assert critical_modulus(1.0, tol=1e-6) == pytest.approx(2 * t_star, abs=1e-6)


def test_critical_modulus_symmetry():
    # dyadic ratios invert exactly in floating point
    for alpha in (2.0, 4.0, 0.125):
        assert critical_modulus(alpha) == critical_modulus(1.0 / alpha)


def test_critical_modulus_rejects_bad_input():
    with pytest.raises(ValueError):
        critical_modulus(0.0)
    with pytest.raises(ValueError):
        critical_modulus(math.inf)
    with pytest.raises(ValueError):
        critical_modulus(1.0, tol=-1.0)


def test_multiplicity_three_at_crossing():
    T1 = critical_modulus(1.0)
    entries = spectrum(FlatAnnulus(1, 1, T1), 1)
    assert entries[0] == (0.0, 1)
    value, mult = entries[1]
    assert mult == 3
    assert value == pytest.approx(2.0 / T1, rel=1e-9)


def test_classify_examples():
    T1 = critical_modulus(1.0)
    assert classify(FlatAnnulus(1, 1, 3.0)).tag == SUPERCRITICAL
    assert classify(FlatAnnulus(1, 1, 1.0)).tag == SUBCRITICAL
    cls = classify(FlatAnnulus(1, 1, 3.0))
    assert cls.threshold == pytest.approx(T1, rel=1e-12)
    # threshold formula at alpha = 4: (sqrt(4) + 1/sqrt(4))^2 / 4 = 1.5625
    m = FlatAnnulus(4, 1, 1.5625 * T1)
    assert classify(m).tag == CRITICAL
    assert classify(FlatAnnulus(4, 1, 1.5625 * T1 * 1.001)).tag == SUPERCRITICAL
    assert classify(FlatAnnulus(4, 1, 1.5625 * T1 * 0.999)).tag == SUBCRITICAL


def test_spectrum_sorted_with_multiplicities():
    m = FlatAnnulus(1.3, 0.8, 1.7)
    entries = spectrum(m, 6)
    values = [v for v, _ in entries]
    assert values == sorted(values)
    assert entries[0][0] == 0.0
    assert sum(mult for _, mult in entries) == 2 + 4 * 6


def test_closed_form_bounds_random():
    # every flat annulus stays below 4*pi; supercritical ones below 4*pi/t1
    star = FOUR_PI_OVER_T
    rng = np.random.default_rng(23)
    for _ in range(500):
        f0 = math.exp(rng.uniform(-1.5, 1.5))
        fT = math.exp(rng.uniform(-1.5, 1.5))
        T = math.exp(rng.uniform(math.log(0.05), math.log(15.0)))
        m = FlatAnnulus(f0, fT, T)
        value = sigma1_length(m)
        assert value < 4 * math.pi
        if classify(m).tag in (SUPERCRITICAL, CRITICAL):
            assert value <= star + 1e-9


def test_fixed_alpha_maximum_at_critical_modulus():
    for alpha in (0.3, 1.0, 2.5, 9.0):
        Tc = critical_modulus(alpha)
        peak = sigma1_length(FlatAnnulus(alpha, 1.0, Tc))
        for T in np.linspace(0.3 * Tc, 3.0 * Tc, 61):
            assert sigma1_length(FlatAnnulus(alpha, 1.0, T)) <= peak + 1e-12 * peak
