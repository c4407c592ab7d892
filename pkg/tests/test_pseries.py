import random
from fractions import Fraction

import pytest
from conftest import poly, random_series

from hypercheck.services.pseries import (
    EXACT_ORDER,
    ExponentGrid,
    NonRepresentableConstantPower,
    NonUnit,
    NotDivisible,
    PuiseuxSeries,
    UnboundedExpansion,
)
from hypercheck.services.scalars import ONE, GaussianRational


def x(order=8, nvars=1, root=1):
    return PuiseuxSeries.variable(0, nvars, order, root)


def y(order=8, nvars=2):
    return PuiseuxSeries.variable(1, nvars, order)


# ----------------------------------------------------------------
# ring operations

def test_geometric_series():
    inverse = (1 - x()).invert()
    assert [c for _, c in inverse.terms()] == [ONE] * 8
    assert inverse.order == 8


@pytest.mark.parametrize("seed", range(60))
def test_inverse_property(seed):
    rng = random.Random(seed)
    nvars = 1 + seed % 3
    s = random_series(rng, nvars, 6)
    product = s * s.invert()
    assert product.agrees_with(PuiseuxSeries.constant(1, nvars, 6))


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(25))
def test_inverse_property_deep(seed):
    s = random_series(random.Random(1000 + seed), 2, 12)
    assert (s.invert() * s).agrees_with(PuiseuxSeries.constant(1, 2, 12))


def test_inverse_without_constant_term():
    with pytest.raises(NonUnit):
        x().invert()


def test_inverse_factoring_out_monomial():
    s = x() * (1 + x())
    inverse = s.invert(factor_out=True)
    assert inverse.offset == (Fraction(-1),)
    assert (inverse * s).agrees_with(PuiseuxSeries.constant(1, 1, 7))


def test_exact_constant_inverse_stays_exact():
    c = PuiseuxSeries.constant(4, 1, EXACT_ORDER)
    inverse = c.invert()
    assert inverse.constant_term() == GaussianRational(Fraction(1, 4))
    assert inverse.order == EXACT_ORDER


def test_exact_polynomial_multiplies_exactly():
    exact_x = x(EXACT_ORDER)
    product = (1 - exact_x) * (1 + exact_x)
    assert product.order == EXACT_ORDER
    assert product.terms() == [((Fraction(0),), ONE), ((Fraction(2),), -ONE)]


@pytest.mark.parametrize(
    "operation",
    [
        lambda s: s.invert(),
        lambda s: s.log_unit(),
        lambda s: (s - 1).exp_nilpotent(),
        lambda s: s.pow_rational(Fraction(1, 2)),
    ],
)
def test_exact_non_constant_series_has_no_infinite_expansion(operation):
    with pytest.raises(UnboundedExpansion):
        operation(1 - x(EXACT_ORDER))


def test_order_of_product_is_minimum():
    assert (x(5) * (1 + x(9))).order == 5
    assert (x(5) + 3).order == 5


def test_mixed_ramification_aligns_on_lcm():
    s = x(root=2) + x(root=3)
    assert s.grid.ram == (6,)
    assert [exp for exp, _ in s.terms()] == [(Fraction(1, 3),), (Fraction(1, 2),)]


def test_offsets_align_to_minimum():
    a = PuiseuxSeries.monomial([Fraction(1, 2)], 6)
    b = PuiseuxSeries.monomial([Fraction(-1, 3)], 6)
    total = a + b
    assert total.offset == (Fraction(-1, 3),)
    assert total.coefficient([Fraction(1, 2)]) == ONE
    assert total.coefficient([Fraction(-1, 3)]) == ONE


def test_coefficient_beyond_order_is_an_error():
    with pytest.raises(ValueError):
        x(3).coefficient([3])


# ----------------------------------------------------------------
# log, exp, rational powers

@pytest.mark.parametrize("seed", range(50))
def test_log_exp_round_trip(seed):
    s = random_series(random.Random(seed), 1 + seed % 2, 6)
    unit = s.scale(s.constant_term().inverse())
    assert unit.log_unit().exp_nilpotent().agrees_with(unit)


@pytest.mark.parametrize("seed", range(30))
def test_log_of_product_is_sum_of_logs(seed):
    rng = random.Random(seed)
    a = random_series(rng, 2, 5)
    b = random_series(rng, 2, 5)
    a = a.scale(a.constant_term().inverse())
    b = b.scale(b.constant_term().inverse())
    assert (a * b).log_unit().agrees_with(a.log_unit() + b.log_unit())


def test_binomial_square_root():
    root = (1 + x(5)).pow_rational(Fraction(1, 2))
    assert [c for _, c in root.terms()] == [
        ONE,
        GaussianRational(Fraction(1, 2)),
        GaussianRational(Fraction(-1, 8)),
        GaussianRational(Fraction(1, 16)),
        GaussianRational(Fraction(-5, 128)),
    ]


def _random_exponent(rng):
    return Fraction(rng.randint(-7, 7), rng.randint(1, 6))


@pytest.mark.parametrize("seed", range(40))
def test_power_laws(seed):
    rng = random.Random(seed)
    s = random_series(rng, 2, 5)
    s = s.scale(s.constant_term().inverse())
    a, b = _random_exponent(rng), _random_exponent(rng)
    assert (s.pow_rational(a) * s.pow_rational(b)).agrees_with(s.pow_rational(a + b))
    assert s.pow_rational(a).pow_rational(b).agrees_with(s.pow_rational(a * b))
    assert (s.pow_rational(Fraction(1, 2)) ** 2).agrees_with(s)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_power_laws_three_variables(seed):
    rng = random.Random(500 + seed)
    s = random_series(rng, 3, 6)
    s = s.scale(s.constant_term().inverse())
    a = _random_exponent(rng)
    assert (s.pow_rational(a) * s.pow_rational(-a)).agrees_with(PuiseuxSeries.constant(1, 3, 6))


def test_power_of_constant_four_uses_branch():
    s = 4 + x(4)
    assert s.pow_rational(Fraction(1, 2)).constant_term() == GaussianRational(2)
    assert s.pow_rational(Fraction(1, 2), branch=-1).constant_term() == GaussianRational(-2)


def test_power_with_leading_monomial_moves_offset():
    s = x(6) * x(6) * (1 + x(6))
    root = s.pow_rational(Fraction(1, 2))
    assert root.offset == (Fraction(1),)
    assert (root * root).agrees_with(s)


def test_non_representable_constant_power():
    with pytest.raises(NonRepresentableConstantPower):
        (2 + x()).pow_rational(Fraction(1, 2))


# ----------------------------------------------------------------
# operators and monomial division

def test_theta_scales_by_total_exponent():
    s = PuiseuxSeries.monomial([Fraction(1, 3)], 6) * (1 + x(6))
    derived = s.theta(0)
    assert derived.coefficient([Fraction(1, 3)]) == GaussianRational(Fraction(1, 3))
    assert derived.coefficient([Fraction(4, 3)]) == GaussianRational(Fraction(4, 3))


def test_strict_monomial_division():
    s = x(6) ** 2 + x(6) ** 3
    quotient = s.monomial_div([2])
    assert quotient.agrees_with(1 + x(4))


def test_strict_division_reports_monomial():
    with pytest.raises(NotDivisible) as info:
        (1 + x()).monomial_div([1])
    assert info.value.monomial == (Fraction(0),)
    assert info.value.coefficient == ONE


def test_laurent_division_reports_lowest_negative():
    quotient, offending = (1 + x()).monomial_div_laurent([1])
    assert offending == (Fraction(0),)
    assert quotient.offset == (Fraction(-1),)


@pytest.mark.parametrize("seed", range(30))
def test_laurent_division_undoes_monomial_product(seed):
    rng = random.Random(seed)
    s = random_series(rng, 2, 5)
    m = tuple(Fraction(rng.randint(0, 4), rng.choice((1, 2, 3))) for _ in range(2))
    shifted = s * PuiseuxSeries.monomial(m, 5)
    quotient, offending = shifted.monomial_div_laurent(m)
    assert offending is None
    assert quotient.agrees_with(s)


@pytest.mark.parametrize("seed", range(30))
def test_laurent_division_past_the_support(seed):
    rng = random.Random(seed)
    s = random_series(rng, 2, 5)
    m = (Fraction(rng.randint(1, 3)), Fraction(rng.randint(0, 2)))
    quotient, offending = s.monomial_div_laurent(m)
    assert offending == (Fraction(0), Fraction(0))
    assert quotient.offset == tuple(-q for q in m)
    with pytest.raises(NotDivisible):
        s.monomial_div(m)
    assert (quotient * PuiseuxSeries.monomial(m, 5)).agrees_with(s)


def test_fractional_strict_division():
    s = x(6, root=2) * (1 + x(6))
    quotient = s.monomial_div([Fraction(1, 2)])
    assert quotient.agrees_with(1 + x(5))


def test_substitute_signs():
    s = poly({(0, 0): 1, (1, 0): 2, (0, 1): 3, (1, 1): 5}, 4)
    flipped = s.substitute_signs([-1, 1])
    assert flipped.coeffs[(1, 0)] == GaussianRational(-2)
    assert flipped.coeffs[(1, 1)] == GaussianRational(-5)
    assert flipped.coeffs[(0, 1)] == GaussianRational(3)


def test_restrict_zero():
    s = poly({(0, 0): 1, (1, 0): 2, (0, 1): 3}, 4)
    assert s.restrict_zero(1).agrees_with(poly({(0, 0): 1, (1, 0): 2}, 4))


# ----------------------------------------------------------------
# comparison and serialization

def test_first_mismatch_is_lowest_weight():
    a = poly({(0, 0): 1, (2, 0): 1, (0, 1): 1}, 4)
    b = poly({(0, 0): 1, (2, 0): 2, (0, 1): 7}, 4)
    mismatch = a.first_mismatch(b)
    assert mismatch.monomial == (Fraction(0), Fraction(1))
    assert mismatch.left == ONE
    assert mismatch.right == GaussianRational(7)


def test_mismatch_ignores_terms_beyond_common_order():
    a = poly({(0,): 1, (3,): 1}, 5)
    b = poly({(0,): 1}, 3)
    assert a.agrees_with(b)


def test_json_preserves_grid_and_offset():
    s = (1 + PuiseuxSeries.variable(1, 2, 6, root=2)).with_offset([Fraction(-1, 3), 0])
    again = PuiseuxSeries.from_json(s.to_json())
    assert again.grid == s.grid == ExponentGrid((1, 2))
    assert again.offset == s.offset
    assert again.agrees_with(s)


def test_text_rendering():
    assert (1 + x(3)).to_text(["z"]) == "1 + z + O(weight 3/1)"
