import random
from fractions import Fraction
from math import factorial

import pytest

from hypercheck.services.analysis import sample_nonresonant
from hypercheck.services.gammaseries import (
    HomogenizedSeries,
    OffsetUnsolvable,
    apply_partial,
    dehomogenize,
    euler_residual,
    gamma_series,
    structure_generators,
    structure_residual,
)
from hypercheck.services.geometry import LatticeBasis, PointConfig, gamma_candidates
from hypercheck.services.pseries import PuiseuxSeries
from hypercheck.services.scalars import ONE, GaussianRational
from hypercheck.services.tables import _fc_geometry

R = Fraction(1, 3)
HALF = Fraction(1, 2)
BETA = (-R, -R - HALF, -HALF, -HALF)
GAMMA1 = (-R, -R - HALF, -HALF, -HALF, Fraction(0), Fraction(0))


def _rising(a: Fraction, k: int) -> Fraction:
    value = Fraction(1)
    for j in range(k):
        value *= a + j
    return value


@pytest.fixture(scope="module")
def f4():
    geometry = _fc_geometry(2)
    return PointConfig.from_columns(geometry["A"]), LatticeBasis.from_rows(geometry["lattice"]), geometry


# ----------------------------------------------------------------
# Gamma-series coefficients

def test_normalized_at_origin(f4):
    cfg, basis, _ = f4
    ts = gamma_series(cfg, basis, GAMMA1, 3)
    assert ts.coefficient((0, 0)) == ONE


def test_f4_first_coefficient(f4):
    cfg, basis, _ = f4
    ts = gamma_series(cfg, basis, GAMMA1, 3)
    assert ts.coefficient((1, 0)) == GaussianRational(Fraction(5, 9))


def test_vanishing_slot_prunes_support(f4):
    cfg, basis, _ = f4
    ts = gamma_series(cfg, basis, GAMMA1, 3)
    assert ts.coefficient((-1, 0)).is_zero()
    assert all(m[0] >= 0 and m[1] >= 0 for m in ts.coeffs)


def test_coefficient_outside_radius(f4):
    cfg, basis, _ = f4
    ts = gamma_series(cfg, basis, GAMMA1, 2)
    with pytest.raises(ValueError):
        ts.coefficient((2, 1))


def test_dehomogenized_series_is_f4_double_sum(f4):
    cfg, basis, _ = f4
    series = dehomogenize(gamma_series(cfg, basis, GAMMA1, 4), GAMMA1)
    for m in range(5):
        for n in range(5 - m):
            expected = _rising(R, m + n) * _rising(R + HALF, m + n) / (
                _rising(HALF, m) * _rising(HALF, n) * factorial(m) * factorial(n)
            )
            assert series.coefficient((m, n)) == GaussianRational(expected)


def test_dehomogenized_offsets(f4):
    cfg, basis, geometry = f4
    offsets = []
    for simplex in geometry["triangulation"]:
        for gamma in gamma_candidates(cfg, BETA, simplex):
            offsets.append(dehomogenize(gamma_series(cfg, basis, gamma, 2), GAMMA1).offset)
    assert offsets == [(0, 0), (0, HALF), (HALF, 0), (HALF, HALF)]


def test_dehomogenize_rejects_foreign_reference(f4):
    cfg, basis, _ = f4
    ts = gamma_series(cfg, basis, GAMMA1, 2)
    reference = (GAMMA1[0] + 1,) + GAMMA1[1:]
    with pytest.raises(OffsetUnsolvable):
        dehomogenize(ts, reference)


def test_dehomogenize_applies_signs(f4):
    cfg, basis, _ = f4
    ts = gamma_series(cfg, basis, GAMMA1, 3)
    plain = dehomogenize(ts, GAMMA1)
    flipped = dehomogenize(ts, GAMMA1, signs=(-1, 1))
    assert flipped.coefficient((1, 0)) == -plain.coefficient((1, 0))
    assert flipped.coefficient((2, 1)) == plain.coefficient((2, 1))


# ----------------------------------------------------------------
# GKZ operators

def test_partial_of_monomial(f4):
    _, basis, _ = f4
    hs = HomogenizedSeries(GAMMA1, basis, PuiseuxSeries.constant(1, 2, 4))
    derived = apply_partial(hs, 0)
    assert derived.mu == (-R - 1,) + GAMMA1[1:]
    assert derived.S.constant_term() == GaussianRational(-R)


def test_partials_commute(f4):
    cfg, basis, _ = f4
    hs = HomogenizedSeries.from_twisted(gamma_series(cfg, basis, GAMMA1, 3))
    a = apply_partial(apply_partial(hs, 0), 2)
    b = apply_partial(apply_partial(hs, 2), 0)
    assert a.mu == b.mu
    assert a.S.agrees_with(b.S)


def test_gamma_series_solves_structure_equations(f4):
    cfg, basis, geometry = f4
    for simplex in geometry["triangulation"]:
        for gamma in gamma_candidates(cfg, BETA, simplex):
            hs = HomogenizedSeries.from_twisted(gamma_series(cfg, basis, gamma, 4))
            for l in structure_generators(basis):
                assert structure_residual(hs, l).is_zero()


def test_gamma_series_solves_euler_equations(f4):
    cfg, basis, _ = f4
    hs = HomogenizedSeries.from_twisted(gamma_series(cfg, basis, GAMMA1, 4))
    assert all(residual.is_zero() for residual in euler_residual(hs, cfg, BETA))


def test_bare_monomial_structure_residual(f4):
    _, basis, _ = f4
    hs = HomogenizedSeries(GAMMA1, basis, PuiseuxSeries.constant(1, 2, 4))
    residual = structure_residual(hs, (-1, -1, 1, 0, 1, 0))
    assert residual.terms() == [((0, 0), GaussianRational(R * (R + HALF)))]


def test_structure_residual_rejects_non_lattice_vector(f4):
    _, basis, _ = f4
    hs = HomogenizedSeries(GAMMA1, basis, PuiseuxSeries.constant(1, 2, 4))
    with pytest.raises(ValueError):
        structure_residual(hs, (1, 0, 0, 0, 0, 0))


def test_euler_residual_detects_wrong_homogeneity(f4):
    cfg, basis, _ = f4
    mu = (GAMMA1[0] + 1,) + GAMMA1[1:]
    hs = HomogenizedSeries(mu, basis, PuiseuxSeries.constant(1, 2, 4))
    residuals = euler_residual(hs, cfg, BETA)
    assert residuals[0].constant_term() == ONE
    assert all(r.is_zero() for r in residuals[1:])


@pytest.mark.parametrize("seed", range(50))
def test_euler_residual_vanishes_iff_homogeneous(f4, seed):
    cfg, basis, _ = f4
    rng = random.Random(seed)
    mu = tuple(Fraction(rng.randint(-6, 6), rng.choice((1, 2, 3))) for _ in range(cfg.size))
    beta = cfg.apply(mu)
    hs = HomogenizedSeries(mu, basis, PuiseuxSeries.constant(1, 2, 3) + PuiseuxSeries.variable(0, 2, 3))
    assert all(r.is_zero() for r in euler_residual(hs, cfg, beta))
    shifted = tuple(b + 1 for b in beta)
    assert not any(r.is_zero() for r in euler_residual(hs, cfg, shifted))


@pytest.mark.slow
@pytest.mark.parametrize("r", sample_nonresonant(random.Random(7), 15))
def test_gamma_series_solves_gkz_at_random_r(f4, r):
    cfg, basis, geometry = f4
    beta = (-r, -r - HALF, -HALF, -HALF)
    for simplex in geometry["triangulation"]:
        for gamma in gamma_candidates(cfg, beta, simplex):
            assert cfg.apply(gamma) == beta
            hs = HomogenizedSeries.from_twisted(gamma_series(cfg, basis, gamma, 4))
            assert all(structure_residual(hs, l).is_zero() for l in structure_generators(basis))
            assert all(residual.is_zero() for residual in euler_residual(hs, cfg, beta))


def test_structure_generators_cover_sums_and_differences():
    basis = LatticeBasis.from_rows([[1, -2, 1, 0], [-2, 1, 0, 1]])
    generators = structure_generators(basis)
    assert (1, -2, 1, 0) in generators
    assert (-1, -1, 1, 1) in generators
    assert (3, -3, 1, -1) in generators
    assert len(generators) == 4
