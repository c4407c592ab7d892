from fractions import Fraction

import pytest

from hypercheck.services.scalars import (
    I,
    ONE,
    ZERO,
    DegenerateBase,
    GaussianRational,
    invgamma_ratio,
    is_resonant,
    parse_rational,
)


def _random_gaussian(rng):
    return GaussianRational(Fraction(rng.randint(-9, 9), rng.randint(1, 7)), Fraction(rng.randint(-9, 9), rng.randint(1, 7)))


# ----------------------------------------------------------------
# reciprocal Gamma ratio

@pytest.mark.parametrize(
    "gamma, l, expected",
    [
        (Fraction(-1, 2), 1, Fraction(2)),
        (Fraction(0), -2, Fraction(0)),
        (Fraction(-1, 3), 2, Fraction(9, 10)),
        (Fraction(1, 2), -1, Fraction(1, 2)),
        (Fraction(3), -3, Fraction(6)),
        (Fraction(2, 5), 0, Fraction(1)),
    ],
)
def test_invgamma_ratio_values(gamma, l, expected):
    assert invgamma_ratio(gamma, l) == expected


def test_invgamma_ratio_vanishes_past_nonnegative_integer():
    # Gamma(3)/Gamma(-1) is an exact zero
    assert invgamma_ratio(2, -4) == 0
    assert invgamma_ratio(2, -3) == 0
    assert invgamma_ratio(2, -2) == 2


def test_invgamma_ratio_rejects_negative_integer_base():
    with pytest.raises(DegenerateBase):
        invgamma_ratio(-2, 1)


def test_invgamma_ratio_composes(rng):
    for _ in range(20):
        den = rng.choice((3, 5, 7))
        gamma = Fraction(rng.randint(-4, 4) * den + rng.randint(1, den - 1), den)
        a, b = rng.randint(-3, 3), rng.randint(-3, 3)
        step = invgamma_ratio(gamma, a) * invgamma_ratio(gamma + a, b)
        assert step == invgamma_ratio(gamma, a + b)


def test_resonance():
    assert is_resonant(Fraction(1, 2))
    assert is_resonant(Fraction(3))
    assert not is_resonant(Fraction(1, 3))
    assert not is_resonant(Fraction(2, 5))


# ----------------------------------------------------------------
# Gaussian rationals

def test_field_operations(rng):
    for _ in range(50):
        a, b = _random_gaussian(rng), _random_gaussian(rng)
        assert (a + b) - b == a
        assert a * b == b * a
        if b:
            assert (a * b) / b == a
            assert b * b.inverse() == ONE


def test_i_squared():
    assert I * I == GaussianRational(-1)
    assert I ** -1 == -I
    assert ONE + ZERO == 1


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        ONE / ZERO


@pytest.mark.parametrize(
    "value, root",
    [
        (GaussianRational(4), GaussianRational(2)),
        (GaussianRational(-4), GaussianRational(0, 2)),
        (GaussianRational(0, 2), GaussianRational(1, 1)),
        (GaussianRational(3, 4), GaussianRational(2, 1)),
        (GaussianRational(Fraction(9, 16)), GaussianRational(Fraction(3, 4))),
    ],
)
def test_sqrt_canonical_branch(value, root):
    assert value.sqrt() == root
    assert value.sqrt(-1) == -root


def test_sqrt_not_representable():
    assert GaussianRational(2).sqrt() is None
    assert GaussianRational(1, 1).sqrt() is None


def test_sqrt_squares_back(rng):
    for _ in range(30):
        a = _random_gaussian(rng)
        root = (a * a).sqrt()
        assert root in (a, -a)


def test_rational_power():
    assert GaussianRational(8).power(Fraction(2, 3)) == GaussianRational(4)
    assert GaussianRational(-4).power(Fraction(3, 2)) == GaussianRational(0, -8)
    assert GaussianRational(2).power(Fraction(1, 3)) is None
    assert ONE.power(Fraction(5, 7)) == ONE


@pytest.mark.parametrize(
    "base, alpha, expected",
    [
        (10**600, Fraction(1, 3), 10**200),
        ((10**20 + 1) ** 3, Fraction(1, 3), 10**20 + 1),
        (Fraction(3**100, 7**50), Fraction(2, 5), Fraction(3**40, 7**20)),
    ],
)
def test_rational_power_of_large_exact_powers(base, alpha, expected):
    assert GaussianRational(Fraction(base)).power(alpha) == GaussianRational(expected)


def test_rational_power_of_large_non_power():
    assert GaussianRational(Fraction(10**600 + 1)).power(Fraction(1, 3)) is None


@pytest.mark.parametrize(
    "text, value",
    [
        ("3", GaussianRational(3)),
        ("-1/2", GaussianRational(Fraction(-1, 2))),
        ("i", I),
        ("-i", -I),
        ("2/3*i", GaussianRational(0, Fraction(2, 3))),
        ("1/2-3/4*i", GaussianRational(Fraction(1, 2), Fraction(-3, 4))),
        ("1+i", GaussianRational(1, 1)),
    ],
)
def test_parse(text, value):
    assert GaussianRational.parse(text) == value


@pytest.mark.parametrize("text", ["", "abc", "1/2/3", "i1"])
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        GaussianRational.parse(text)


def test_text_round_trip(rng):
    for _ in range(20):
        a = _random_gaussian(rng)
        assert GaussianRational.parse(a.to_text()) == a
        assert GaussianRational.from_json(a.to_json()) == a


def test_parse_rational():
    assert parse_rational("2/5") == Fraction(2, 5)
    assert parse_rational(" -3 ") == Fraction(-3)
    with pytest.raises(ValueError):
        parse_rational("0.4")
    with pytest.raises(ValueError):
        parse_rational("x")
