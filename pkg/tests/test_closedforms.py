from fractions import Fraction

import pytest
import sympy
import yaml
from conftest import poly

from hypercheck.services.closedforms import (
    AlgRoot,
    BranchSign,
    FamilyFileError,
    Mul,
    RamificationRequired,
    RecipeParser,
    SeedNotRoot,
    Sqrt,
    UnknownFamily,
    VarRoot,
    algebraic_root,
    get_family,
    load_family_file,
    registry,
)
from hypercheck.services.scalars import ONE, GaussianRational

R = Fraction(1, 3)


def _values(series, exponents):
    return [series.coefficient(e) for e in exponents]


def _g(*values):
    return [GaussianRational(Fraction(v)) for v in values]


# ----------------------------------------------------------------
# recipe parsing

def test_monomial_square_root_has_no_slot():
    parser = RecipeParser(["x", "y"], [])
    assert parser.parse("sqrt(x*y)") == Mul((VarRoot(0, 2), VarRoot(1, 2)))
    assert parser.parse("sqrt(y)") == VarRoot(1, 2)
    assert parser.slots == {}


def test_square_root_slots_are_shared_by_base():
    parser = RecipeParser(["z"], ["f"])
    first = parser.parse("sqrt(1-z)")
    second = parser.parse("(1+sqrt(1-z))/2")
    third = parser.parse("sqrt(1+z)")
    assert isinstance(first, Sqrt) and first.slot == "s1"
    assert "s1" in repr(second)
    assert third.slot == "s2"


def test_sign_and_algroot_nodes():
    parser = RecipeParser(["x", "y"], [])
    assert parser.parse("pm(2)") == BranchSign("pm2")
    node = parser.parse("algroot(1, 2, 1, 4*y-2, 1-2*x, 2*x, x**2)")
    assert isinstance(node, AlgRoot)
    assert node.hint == 1
    assert node.slot == "w1"
    assert node.seed == ONE
    assert len(node.coeffs) == 5


@pytest.mark.parametrize("text", ["q + x", "algroot(1, 0, x)", "x**y", "divmono(x, 1)"])
def test_parse_errors(text):
    with pytest.raises(ValueError):
        RecipeParser(["x", "y"], []).parse(text)


# ----------------------------------------------------------------
# algebraic roots

def test_newton_root_of_quadratic():
    # F**2 - F - x = 0 through F(0) = 1
    coeffs = [poly({(1,): -1}, 6), poly({(0,): -1}, 6), poly({(0,): 1}, 6)]
    root = algebraic_root(coeffs, ONE)
    assert _values(root, [[0], [1], [2], [3], [4], [5]]) == _g(1, 1, -1, 2, -5, 14)


def test_seed_must_be_a_root():
    coeffs = [poly({(1,): -1}, 4), poly({(0,): -1}, 4), poly({(0,): 1}, 4)]
    with pytest.raises(SeedNotRoot):
        algebraic_root(coeffs, GaussianRational(2))


def test_double_root_needs_hint():
    # (F - 1)**2 - x
    coeffs = [poly({(0,): 1, (1,): -1}, 6), poly({(0,): -2}, 6), poly({(0,): 1}, 6)]
    with pytest.raises(RamificationRequired):
        algebraic_root(coeffs, ONE)


def test_ramified_root_of_square():
    # (F - 1)**2 = x gives F = 1 + sqrt(x) on the + branch
    coeffs = [poly({(0,): 1, (1,): -1}, 6), poly({(0,): -2}, 6), poly({(0,): 1}, 6)]
    plus = algebraic_root(coeffs, ONE, hint=0)
    minus = algebraic_root(coeffs, ONE, hint=0, branch=-1)
    assert plus.grid.ram == (2,)
    assert plus.coefficient([Fraction(1, 2)]) == ONE
    assert minus.coefficient([Fraction(1, 2)]) == -ONE
    assert plus.coefficient([1]).is_zero()


# ----------------------------------------------------------------
# family closed forms

def test_gauss1_expansion():
    family = get_family("Gauss-1")
    phi = family.evaluate(R, 8, {"s1": 1})
    assert phi.coefficient([0]) == ONE
    assert phi.coefficient([1]) == GaussianRational(-2 * R * R)


def test_gauss2_expansion():
    family = get_family("Gauss-2")
    phi = family.evaluate(R, 8, {})
    assert phi.coefficient([1]) == GaussianRational(Fraction(5, 9))
    assert phi.coefficient([Fraction(1, 2)]).is_zero()


def test_gauss3_expansion():
    family = get_family("Gauss-3")
    assert family.slots() == ["s1"]
    phi = family.evaluate(R, 8, {"s1": 1})
    assert phi.coefficient([1]) == GaussianRational(Fraction(5, 12))


def test_f4_2_base_function():
    family = get_family("F4-2")
    f = family.evaluate(R, 6, {}, name="f")
    half = Fraction(1, 2)
    exponents = [[0, 0], [half, 0], [0, half], [1, 0], [half, half], [0, 1]]
    assert _values(f, exponents) == _g(1, 2, 2, 3, 6, 3)


def test_g3_root_on_the_axis():
    family = get_family("G3")
    f = family.evaluate(R, 6, {}, name="f").restrict_zero(1)
    assert _values(f, [[k, 0] for k in range(4)]) == _g(1, 1, -1, 2)


def test_g3_first_coefficient():
    family = get_family("G3")
    phi = family.evaluate(R, 6, {"s1": 1})
    assert phi.coefficient([1, 0]) == GaussianRational(R - 2)


def test_h5_root_on_the_axis():
    family = get_family("H5")
    assert family.slots() == ["w1"]
    f = family.evaluate(R, 8, {"w1": 1}, name="f")
    axis = f.restrict_zero(1)
    assert _values(axis, [[k, 0] for k in range(4)]) == _g(1, -1, 2, -5)


def test_g3_discriminant():
    computed, expected = get_family("G3").discriminant_exprs()
    assert sympy.expand(computed - expected) == 0


def test_g3_plus_x_discriminant_differs():
    computed, expected = get_family("G3", variant="plus-x").discriminant_exprs()
    assert not sympy.cancel(computed / expected).is_number


def test_missing_branch_is_an_error():
    with pytest.raises(ValueError):
        get_family("Gauss-3").evaluate(R, 6, {})


# ----------------------------------------------------------------
# registry

def test_registry_volumes():
    assert get_family("F4-1").volume == 4
    assert get_family("G3").volume == 3
    assert get_family("FC-2", n=3).volume == 8
    assert get_family("FC-1", n=4).volume == 16
    assert get_family("H5").volume == 4


def test_lookup_is_case_insensitive():
    assert get_family("f4-2").name == "F4-2"
    assert get_family("gauss-3").name == "Gauss-3"


def test_unknown_family():
    with pytest.raises(UnknownFamily):
        get_family("nosuch")


def test_variants():
    family = get_family("G3", variant="plus-x")
    assert family.label == "G3[plus-x]"
    assert not family.validated
    with pytest.raises(UnknownFamily):
        get_family("G3", variant="minus-y")


def test_validated_flags():
    families = registry()
    assert not families["H4-3"].validated
    assert all(families[name].validated for name in ("Gauss-1", "F4-1", "G3", "H4-1", "H4-2", "H5"))


def test_registry_coefficients():
    assert get_family("F4-2").coefficient_values(R) == _g(1, Fraction(2, 3), Fraction(2, 3), Fraction(10, 9))
    assert get_family("F4-1").coefficient_values(R) == [
        ONE,
        GaussianRational(0, Fraction(2, 3)),
        GaussianRational(0, Fraction(-2, 3)),
        GaussianRational(Fraction(4, 9)),
    ]


def test_fc_horn_only_in_two_variables():
    assert len(get_family("FC-1").horn_operators()) == 2
    assert get_family("FC-1", n=3).horn_operators() == ()
    assert get_family("FC-1", n=3).gkz_route


# ----------------------------------------------------------------
# family files

GAUSS_FILE = {
    "families": [
        {
            "name": "Sqrt-Gauss",
            "source": "2F1(r, r+1/2; 1/2; z) in a family file",
            "variables": ["z"],
            "ram": [2],
            "A": [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, -1]],
            "beta": ["-r", "-r-1/2", "-1/2"],
            "triangulation": [[1, 2, 3], [1, 2, 4]],
            "horn": ["theta(1)*(theta(1)-1/2) - z*(theta(1)+r)*(theta(1)+r+1/2)"],
            "coefficients": ["1", "0"],
            "recipes": {"phi": "(1+sqrt(z))**(-2*r)/2 + (1-sqrt(z))**(-2*r)/2"},
            "power_form": False,
        }
    ]
}


def test_load_family_file(tmp_path):
    path = tmp_path / "families.yaml"
    path.write_text(yaml.safe_dump(GAUSS_FILE), encoding="utf-8")
    (family,) = load_family_file(path)
    assert family.name == "Sqrt-Gauss"
    assert family.description.startswith("2F1")
    assert family.lattice.dim == 1
    assert get_family("sqrt-gauss", extra=[family]) is family
    phi = family.evaluate(R, 6)
    assert phi.coefficient([1]) == GaussianRational(Fraction(5, 9))


def test_family_file_missing_field(tmp_path):
    entry = dict(GAUSS_FILE["families"][0])
    del entry["beta"]
    path = tmp_path / "broken.yaml"
    path.write_text(yaml.safe_dump([entry]), encoding="utf-8")
    with pytest.raises(FamilyFileError):
        load_family_file(path)


def test_family_file_rejects_non_relation(tmp_path):
    entry = dict(GAUSS_FILE["families"][0], lattice=[[1, 0, 0, 0]])
    path = tmp_path / "broken.yaml"
    path.write_text(yaml.safe_dump([entry]), encoding="utf-8")
    with pytest.raises(FamilyFileError):
        load_family_file(path)


def test_family_file_must_be_a_list(tmp_path):
    path = tmp_path / "scalar.yaml"
    path.write_text("42\n", encoding="utf-8")
    with pytest.raises(FamilyFileError):
        load_family_file(path)


@pytest.mark.parametrize(
    "columns, message",
    [
        ([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 0]], "No linear form"),
        ([[2, 0, 0], [0, 1, 0], [0, 0, 1], [2, 1, -1]], "gcd 2"),
    ],
)
def test_family_file_rejects_invalid_configuration(tmp_path, columns, message):
    entry = dict(GAUSS_FILE["families"][0], A=columns)
    path = tmp_path / "broken.yaml"
    path.write_text(yaml.safe_dump([entry]), encoding="utf-8")
    with pytest.raises(FamilyFileError, match=message):
        load_family_file(path)
