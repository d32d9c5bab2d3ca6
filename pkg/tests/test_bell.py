import math

import numpy as np
import pytest

from conftest import random_unit_vectors
from macrobell import bell
from macrobell.clifford import E_X_HAT, E_Y_HAT, E_Z_HAT, UnitVector
from macrobell.errors import DomainError
from macrobell.rng import SeededStream


def test_observable_examples():
    assert bell.observable_A(E_Z_HAT, E_Z_HAT) == 1
    assert bell.observable_A(E_Z_HAT, -E_Z_HAT) == -1
    assert bell.observable_A(E_Z_HAT, E_Y_HAT) == 1
    assert bell.observable_B(E_Z_HAT, E_Z_HAT) == -1
    assert bell.observable_B(E_Z_HAT, E_Y_HAT) == -1


@pytest.mark.parametrize(
    "n, lam, expected",
    [
        ((0, 0, 1), (0, 1, 0), 1),
        ((0, -1, 0), (1, 0, 0), -1),
        ((-1, 0, 0), (0, 0, 1), -1),
        ((0, 0.6, -0.8), (1, 0, 0), 1),
        ((-0.6, 0.8, 0), (0, 0, 1), -1),
    ],
)
def test_tie_break_uses_first_nonzero_component(n, lam, expected):
    assert np.dot(n, lam) == 0.0
    assert bell.observable_A(n, lam) == expected
    assert bell.observable_B(n, lam) == -expected


def test_tie_break_rejects_zero():
    with pytest.raises(DomainError):
        bell.tie_break_sign([0.0, 0.0, 0.0])


def test_a_plus_b_vanishes(rng):
    ns = random_unit_vectors(rng, 100_000)
    lams = random_unit_vectors(rng, 100_000)
    for n, lam in zip(ns[:300], lams[:300]):
        assert bell.observable_A(n, lam) + bell.observable_B(n, lam) == 0
    # grid of exact ties too
    grid = np.array([[x, y, z] for x in (-1, 0, 1) for y in (-1, 0, 1) for z in (-1, 0, 1) if (x, y, z) != (0, 0, 0)], float)
    for n in grid:
        for lam in grid:
            assert bell.observable_A(n, lam) == -bell.observable_B(n, lam)
    a = np.array([bell.outcomes(n, lams[:1000]) for n in ns[:20]])
    assert set(np.unique(a)) <= {-1, 1}


def test_sign_matrix_matches_pointwise(rng):
    lams = random_unit_vectors(rng, 500)
    ns = np.vstack([random_unit_vectors(rng, 10), np.eye(3)])
    lams[:3] = [[0, 1, 0], [1, 0, 0], [0, 0, 1]]
    m = bell.sign_matrix(lams, ns)
    for j in range(0, 500, 37):
        for k in range(len(ns)):
            assert m[j, k] == bell.observable_A(ns[k], lams[j])


def test_tie_eps_widens_tie_region():
    n = E_Z_HAT
    lam = UnitVector.normalize([1.0, 0.0, -1e-9])
    assert bell.observable_A(n, lam) == -1
    assert bell.observable_A(n, lam, tie_eps=1e-6) == 1


def test_rotational_covariance(rng):
    # A_{Rn}(R lam) == A_n(lam) for a random rotation
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    ns = random_unit_vectors(rng, 5)
    lams = random_unit_vectors(rng, 2000)
    for n in ns:
        direct = bell.outcomes(n, lams)
        rotated = bell.outcomes(q @ n, lams @ q.T)
        assert np.array_equal(direct, rotated)


def test_sample_isotropic_is_reproducible():
    s1, s2 = SeededStream(42), SeededStream(42)
    seq1 = [bell.sample_isotropic(s1) for _ in range(5)]
    seq2 = [bell.sample_isotropic(s2) for _ in range(5)]
    assert seq1 == seq2
    assert len(set(seq1)) == 5
    batch = bell.isotropic_directions(SeededStream(42), 0, 5)
    # UnitVector renormalizes, so agreement is to rounding only
    assert np.allclose(np.array([np.asarray(s) for s in seq1]), batch, rtol=0, atol=1e-15)


def test_isotropic_octants_and_moments():
    n = 10**6
    d = bell.isotropic_directions(SeededStream(9), 0, n)
    assert np.max(np.abs(np.linalg.norm(d, axis=1) - 1.0)) <= 1e-15
    octant = (d[:, 0] > 0) * 4 + (d[:, 1] > 0) * 2 + (d[:, 2] > 0)
    counts = np.bincount(octant, minlength=8)
    sigma = math.sqrt(n * (1 / 8) * (7 / 8))
    assert np.all(np.abs(counts - n / 8) <= 5 * sigma)
    # uniform on the sphere: each coordinate has mean 0 and variance 1/3
    assert np.all(np.abs(d.mean(axis=0)) <= 5 * math.sqrt(1 / 3 / n))
    assert np.all(np.abs((d**2).mean(axis=0) - 1 / 3) <= 5 * math.sqrt(4 / 45 / n))


def test_linear_correlation_examples():
    assert bell.analytic_correlation_linear(E_Z_HAT, E_Z_HAT) == -1.0
    assert bell.analytic_correlation_linear(E_Z_HAT, E_X_HAT) == 0.0
    assert bell.analytic_correlation_linear(E_Z_HAT, -E_Z_HAT) == 1.0
    sixty = UnitVector.from_angle(60)
    assert abs(bell.analytic_correlation_linear(E_Z_HAT, sixty) - (-1 / 3)) <= 1e-15


def test_linear_correlation_shape():
    angles = np.linspace(0, 180, 361)
    vals = [bell.analytic_correlation_linear(E_Z_HAT, UnitVector.from_angle(t)) for t in angles]
    assert np.all(np.diff(vals) > 0)
    # odd about 90 degrees
    for t, v in zip(angles, vals):
        mirror = bell.analytic_correlation_linear(E_Z_HAT, UnitVector.from_angle(180 - t))
        assert abs(v + mirror) <= 1e-12
    # clipping guards dot products rounding past 1
    assert bell.analytic_correlation_linear([1.0, 0, 0], [1.0 + 1e-16, 0, 0]) == -1.0


def test_marginal_examples():
    assert bell.marginal_mean([E_Z_HAT, -E_Z_HAT], E_Z_HAT) == 0.0
    assert bell.marginal_mean([E_Z_HAT], E_Z_HAT) == 1.0
    with pytest.raises(DomainError):
        bell.marginal_mean([], E_Z_HAT)


def test_monte_carlo_product_matches_linear(million_ensemble):
    lams = million_ensemble.directions
    n = len(lams)
    for t in (30.0, 120.0):
        a, b = E_Z_HAT, UnitVector.from_angle(t)
        prod = bell.outcomes(a, lams).astype(np.int64) * -bell.outcomes(b, lams).astype(np.int64)
        e = prod.sum() / n
        expected = bell.analytic_correlation_linear(a, b)
        assert abs(e - expected) <= 5 * math.sqrt((1 - expected**2) / n)
