"""Closed-form recipes, algebraic-root expansion and the family registry."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import sympy
import yaml
from sympy.parsing.sympy_parser import parse_expr

from hypercheck.services.geometry import (
    LatticeBasis,
    PointConfig,
    RationalVector,
    Triangulation,
    gamma_candidates,
    lattice_kernel,
    simplex_volume,
)
from hypercheck.services.homops import R, ThetaOperator
from hypercheck.services.pseries import ExponentGrid, PuiseuxSeries
from hypercheck.services.scalars import ONE, ZERO, GaussianRational

logger = logging.getLogger(__name__)


class SeedNotRoot(ValueError):
    """Raised when the seed is not a root of the constant-term polynomial."""


class RamificationRequired(RuntimeError):
    """Raised when a multiple root cannot be lifted with the given hint."""


class UnknownFamily(KeyError):
    """Raised when a family name is not in the registry."""


class FamilyFileError(ValueError):
    """Raised when a family definition file is malformed."""


# ----------------------------------------------------------------------
# recipe AST
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Const:
    value: sympy.Expr


@dataclass(frozen=True)
class VarRoot:
    """z_j ** (1/root)."""

    index: int
    root: int = 1


@dataclass(frozen=True)
class Add:
    terms: Tuple[Any, ...]


@dataclass(frozen=True)
class Mul:
    factors: Tuple[Any, ...]


@dataclass(frozen=True)
class Neg:
    operand: Any


@dataclass(frozen=True)
class Inv:
    operand: Any


@dataclass(frozen=True)
class PowRat:
    base: Any
    exponent: sympy.Expr


@dataclass(frozen=True)
class Sqrt:
    base: Any
    slot: str


@dataclass(frozen=True)
class BranchSign:
    slot: str


@dataclass(frozen=True)
class DivMonomialStrict:
    base: Any
    exponents: Tuple[Fraction, ...]


@dataclass(frozen=True)
class AlgRoot:
    """Root of sum_i coeffs[i] * f**i through ``seed`` at the origin."""

    coeffs: Tuple[Any, ...]
    seed: GaussianRational
    hint: Optional[int]
    slot: Optional[str]
    polynomial: Tuple[sympy.Expr, ...] = field(compare=False)


@dataclass(frozen=True)
class Ref:
    name: str


Recipe = Union[Const, VarRoot, Add, Mul, Neg, Inv, PowRat, Sqrt, BranchSign, DivMonomialStrict, AlgRoot, Ref]

_SQRT = sympy.Function("Sqrt")
_PM = sympy.Function("pm")
_DIVMONO = sympy.Function("divmono")
_ALGROOT = sympy.Function("algroot")
_CUSTOM = (_SQRT, _PM, _DIVMONO, _ALGROOT)


class RecipeParser:
    """Turns sympy-syntax strings into recipe trees sharing one slot table."""

    def __init__(self, variables: Sequence[str], names: Iterable[str]):
        self.variables = tuple(variables)
        self.var_symbols = [sympy.Symbol(name) for name in self.variables]
        self.names = set(names)
        self.slots: Dict[str, str] = {}
        self.local_dict: Dict[str, Any] = {name: symbol for name, symbol in zip(self.variables, self.var_symbols)}
        self.local_dict.update({name: sympy.Symbol(name) for name in self.names})
        self.local_dict.update(
            {"r": R, "i": sympy.I, "I": sympy.I, "sqrt": _SQRT, "pm": _PM, "divmono": _DIVMONO, "algroot": _ALGROOT}
        )

    def expression(self, text: str) -> sympy.Expr:
        try:
            return parse_expr(str(text), local_dict=self.local_dict)
        except (SyntaxError, TypeError) as exc:
            raise ValueError(f"Cannot parse expression {text!r}: {exc}") from exc

    def parse(self, text: str) -> Recipe:
        return self.convert(self.expression(text))

    def _is_constant(self, expr: sympy.Expr) -> bool:
        if expr.has(*_CUSTOM):
            return False
        return not any(symbol != R for symbol in expr.free_symbols)

    def _monomial_exponents(self, expr: sympy.Expr) -> Optional[Tuple[int, ...]]:
        if not expr.free_symbols or not expr.free_symbols <= set(self.var_symbols) or expr.has(*_CUSTOM):
            return None
        poly = sympy.Poly(expr, *self.var_symbols)
        if len(poly.terms()) != 1 or poly.LC() != 1:
            return None
        return tuple(int(e) for e in poly.monoms()[0])

    def convert(self, expr: sympy.Expr) -> Recipe:
        if self._is_constant(expr):
            return Const(expr)
        if isinstance(expr, sympy.Symbol):
            if expr in self.var_symbols:
                return VarRoot(self.var_symbols.index(expr))
            if expr.name in self.names:
                return Ref(expr.name)
            raise ValueError(f"Unknown name {expr.name!r}")
        if isinstance(expr, sympy.Add):
            return Add(tuple(self.convert(arg) for arg in expr.args))
        if isinstance(expr, sympy.Mul):
            factors = list(expr.args)
            if factors[0] == -1:
                return Neg(self.convert(sympy.Mul(*factors[1:])))
            return Mul(tuple(self.convert(arg) for arg in factors))
        if isinstance(expr, sympy.Pow):
            base, exponent = expr.args
            if exponent == sympy.Rational(1, 2):
                return self._sqrt(base)
            if exponent == -1:
                return Inv(self.convert(base))
            if not self._is_constant(exponent):
                raise ValueError(f"Exponent {exponent} depends on a variable")
            return PowRat(self.convert(base), exponent)
        if expr.func == _SQRT:
            return self._sqrt(expr.args[0])
        if expr.func == _PM:
            return BranchSign(f"pm{int(expr.args[0])}")
        if expr.func == _DIVMONO:
            exponents = tuple(Fraction(str(e)) for e in expr.args[1:])
            if len(exponents) != len(self.variables):
                raise ValueError(f"divmono needs {len(self.variables)} exponents")
            return DivMonomialStrict(self.convert(expr.args[0]), exponents)
        if expr.func == _ALGROOT:
            return self._algroot(expr.args)
        raise ValueError(f"Unsupported expression {expr}")

    def _sqrt(self, base: sympy.Expr) -> Recipe:
        exponents = self._monomial_exponents(base)
        if exponents is not None:
            factors = tuple(VarRoot(j, 2) for j, e in enumerate(exponents) for _ in range(e))
            return factors[0] if len(factors) == 1 else Mul(factors)
        slot = self.slots.setdefault(str(base), f"s{len(self.slots) + 1}")
        return Sqrt(self.convert(base), slot)

    def _algroot(self, args: Sequence[sympy.Expr]) -> Recipe:
        if len(args) < 4:
            raise ValueError("algroot needs a seed, a hint and at least two coefficients")
        seed = GaussianRational.from_sympy(args[0])
        hint = int(args[1])
        slot = None
        if hint:
            slot = self.slots.setdefault(f"algroot:{args}", f"w{sum(1 for s in self.slots.values() if s.startswith('w')) + 1}")
        return AlgRoot(
            tuple(self.convert(c) for c in args[2:]),
            seed,
            hint - 1 if hint else None,
            slot,
            tuple(args[2:]),
        )


def recipe_slots(node: Recipe, recipes: Mapping[str, Recipe], found: Optional[List[str]] = None) -> List[str]:
    """Branch slots reachable from node, in first-visit order."""

    found = [] if found is None else found
    if isinstance(node, (Sqrt, BranchSign)) and node.slot not in found:
        found.append(node.slot)
    if isinstance(node, AlgRoot) and node.slot and node.slot not in found:
        found.append(node.slot)
    if isinstance(node, Ref):
        return recipe_slots(recipes[node.name], recipes, found)
    for child in _children(node):
        recipe_slots(child, recipes, found)
    return found


def _children(node: Recipe) -> Tuple[Any, ...]:
    if isinstance(node, Add):
        return node.terms
    if isinstance(node, Mul):
        return node.factors
    if isinstance(node, (Neg, Inv)):
        return (node.operand,)
    if isinstance(node, (PowRat, Sqrt, DivMonomialStrict)):
        return (node.base,)
    if isinstance(node, AlgRoot):
        return node.coeffs
    return ()


def _at(expr: sympy.Expr, r: Fraction) -> GaussianRational:
    return GaussianRational.from_sympy(sympy.expand(sympy.sympify(expr).subs(R, sympy.Rational(r.numerator, r.denominator))))


def rational_at(expr: sympy.Expr, r: Fraction) -> Fraction:
    value = _at(expr, r)
    if not value.is_real():
        raise ValueError(f"{expr} is not real at r = {r}")
    return value.re


# ----------------------------------------------------------------------
# algebraic roots
# ----------------------------------------------------------------------
def _horner(coeffs: Sequence[PuiseuxSeries], f: PuiseuxSeries) -> PuiseuxSeries:
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * f + c
    return acc


def _derivative(coeffs: Sequence[PuiseuxSeries]) -> List[PuiseuxSeries]:
    return [c.scale(k) for k, c in enumerate(coeffs)][1:]


def _taylor_shift(coeffs: Sequence[PuiseuxSeries], seed: GaussianRational) -> List[PuiseuxSeries]:
    """Coefficients of P(seed + w) as a polynomial in w."""

    degree = len(coeffs) - 1
    shifted = []
    for k in range(degree + 1):
        total = None
        for i in range(k, degree + 1):
            term = coeffs[i].scale(seed ** (i - k) * math.comb(i, k))
            total = term if total is None else total + term
        shifted.append(total)
    return shifted


def _natural_grid(coeffs: Sequence[PuiseuxSeries]) -> ExponentGrid:
    """Coarsest grid that still holds every stored exponent."""

    base = coeffs[0].grid
    ram = []
    for j, k in enumerate(base.ram):
        step = 0
        for c in coeffs:
            for exps in c.coeffs:
                step = math.gcd(step, exps[j])
        step = math.gcd(step, k) if step else k
        ram.append(k // step)
    return ExponentGrid(tuple(ram))


def _coarsen(series: PuiseuxSeries, grid: ExponentGrid) -> PuiseuxSeries:
    factors = [old // new for old, new in zip(series.grid.ram, grid.ram)]
    coeffs = {tuple(e // f for e, f in zip(exps, factors)): c for exps, c in series.coeffs.items()}
    order = -((-series.order * grid.unit) // series.grid.unit)
    return PuiseuxSeries(grid, series.offset, coeffs, order)


def _homogeneous_part(series: PuiseuxSeries, weight: int) -> Dict[Tuple[int, ...], GaussianRational]:
    return {e: c for e, c in series.coeffs.items() if series.grid.weight(e) == weight}


def algebraic_root(
    coeffs: Sequence[PuiseuxSeries],
    seed: GaussianRational,
    hint: Optional[int] = None,
    branch: int = 1,
) -> PuiseuxSeries:
    """Series root f of sum_i coeffs[i] * f**i with f(0) = seed.

    Simple roots are lifted by Newton iteration. A double root at the origin
    is expanded in the square root of variable ``hint`` (0-based index),
    solving one homogeneous layer at a time.
    """

    if len(coeffs) < 2:
        raise ValueError("Polynomial must have degree at least 1")
    if any(any(c.offset) for c in coeffs):
        raise ValueError("Polynomial coefficients must be offset-free series")
    grid = coeffs[0].grid
    for c in coeffs[1:]:
        grid = grid.join(c.grid)
    coeffs = [c.regrid(grid) for c in coeffs]
    order = min(c.order for c in coeffs)

    constants = [c.constant_term() for c in coeffs]
    value = sum((c * seed ** k for k, c in enumerate(constants)), ZERO)
    if value:
        raise SeedNotRoot(f"Seed {seed.to_text()} leaves {value.to_text()} in the constant polynomial")
    slope = sum((c * k * seed ** (k - 1) for k, c in enumerate(constants) if k), ZERO)

    if slope:
        return _newton_root(coeffs, seed, order)
    if hint is None:
        raise RamificationRequired("Seed is a multiple root and no ramification hint was given")
    return _ramified_root(coeffs, seed, hint, branch)


def _newton_root(coeffs: List[PuiseuxSeries], seed: GaussianRational, order: int) -> PuiseuxSeries:
    derivative = _derivative(coeffs)
    f = PuiseuxSeries.constant(seed, coeffs[0].nvars, order, coeffs[0].grid)
    iterations = max(1, order).bit_length() + 1
    for step in range(iterations):
        residual = _horner(coeffs, f)
        if residual.is_zero():
            break
        f = f - residual * _horner(derivative, f).invert()
        logger.debug("Newton step %d: %d terms", step + 1, len(f.coeffs))
    return f.with_order(order)


def _ramified_root(coeffs: List[PuiseuxSeries], seed: GaussianRational, hint: int, branch: int) -> PuiseuxSeries:
    """Double root lifted in the square root of variable ``hint``.

    The result is known half a leading layer below the coefficient order.
    """

    natural = _natural_grid(coeffs)
    ram = list(natural.ram)
    ram[hint] *= 2
    grid = ExponentGrid(tuple(ram))
    lifted = [_coarsen(c, natural).regrid(grid) for c in coeffs]
    work_order = min(c.order for c in lifted)
    q = _taylor_shift(lifted, seed)
    if len(q) < 3 or not q[2].constant_term():
        raise RamificationRequired("Only double roots with a non-vanishing quadratic term are supported")
    q2_0 = q[2].constant_term()

    low0 = q[0].lowest_weight()
    if low0 is None:
        return PuiseuxSeries.constant(seed, grid.nvars, work_order, grid)
    if low0 % 2:
        raise RamificationRequired(f"Lowest layer of P(seed) has odd weight {low0}")
    half = low0 // 2
    low1 = q[1].lowest_weight()
    if low1 is not None and low1 <= half:
        raise RamificationRequired("Linear term interferes with the leading balance")

    leading = _homogeneous_part(q[0], low0)
    if len(leading) != 1:
        raise RamificationRequired("Leading layer of P(seed) is not a monomial")
    ((exps, c),) = leading.items()
    if any(e % 2 for e in exps):
        raise RamificationRequired("Leading monomial is not a square on the refined grid")
    root = (-c / q2_0).sqrt(branch)
    if root is None:
        raise RamificationRequired(f"Leading coefficient {(-c / q2_0).to_text()} has no exact square root")
    w1_exps = tuple(e // 2 for e in exps)
    pivot = root * 2 * q2_0
    target = work_order - half

    terms: Dict[Tuple[int, ...], GaussianRational] = {w1_exps: root}
    n = 2
    while half + n - 1 < target:
        w = PuiseuxSeries(grid, (0,) * grid.nvars, terms, work_order)
        residual = _horner(lifted, PuiseuxSeries.constant(seed, grid.nvars, work_order, grid) + w)
        layer = _homogeneous_part(residual, low0 + n - 1)
        for key, value in layer.items():
            reduced = tuple(a - b for a, b in zip(key, w1_exps))
            if any(v < 0 for v in reduced):
                raise RamificationRequired(f"Layer {n} is not divisible by the leading monomial")
            terms[reduced] = terms.get(reduced, ZERO) - value / pivot
        logger.debug("Ramified layer %d: %d terms", n, len(layer))
        n += 1
    w = PuiseuxSeries(grid, (0,) * grid.nvars, terms, target)
    return PuiseuxSeries.constant(seed, grid.nvars, target, grid) + w


# ----------------------------------------------------------------------
# recipe evaluation
# ----------------------------------------------------------------------
class RecipeEvaluator:
    """Evaluates recipe trees to series at one r and one branch choice."""

    max_attempts = 4

    def __init__(
        self,
        grid: ExponentGrid,
        recipes: Mapping[str, Recipe],
        r: Fraction,
        branches: Optional[Mapping[str, int]] = None,
    ):
        self.grid = grid
        self.recipes = recipes
        self.r = Fraction(r)
        self.branches = dict(branches or {})
        self._cache: Dict[Tuple[Any, int], PuiseuxSeries] = {}

    def _branch(self, slot: str) -> int:
        if slot not in self.branches:
            raise ValueError(f"No branch chosen for slot {slot}")
        return self.branches[slot]

    def evaluate(self, node: Recipe, order: int) -> PuiseuxSeries:
        """Evaluate node, asking for more terms until the result is known below ``order``."""

        request = order
        for _ in range(self.max_attempts):
            series = self._eval(node, request)
            if series.order >= order:
                return series.with_order(order)
            request += order - series.order
        raise ValueError(f"Recipe lost too much order: reached {series.order} of {order}")

    def _eval(self, node: Recipe, order: int) -> PuiseuxSeries:
        key = (node, order)
        if key not in self._cache:
            self._cache[key] = self._compute(node, order)
        return self._cache[key]

    def _compute(self, node: Recipe, order: int) -> PuiseuxSeries:
        nvars = self.grid.nvars
        if isinstance(node, Const):
            return PuiseuxSeries.constant(_at(node.value, self.r), nvars, order, self.grid)
        if isinstance(node, VarRoot):
            return PuiseuxSeries.variable(node.index, nvars, order, node.root, self.grid)
        if isinstance(node, Add):
            total = self._eval(node.terms[0], order)
            for term in node.terms[1:]:
                total = total + self._eval(term, order)
            return total
        if isinstance(node, Mul):
            product = self._eval(node.factors[0], order)
            for factor in node.factors[1:]:
                product = product * self._eval(factor, order)
            return product
        if isinstance(node, Neg):
            return -self._eval(node.operand, order)
        if isinstance(node, Inv):
            return self._eval(node.operand, order).invert(factor_out=True)
        if isinstance(node, PowRat):
            alpha = rational_at(node.exponent, self.r)
            base = self._eval(node.base, order)
            if alpha.denominator == 1:
                n = int(alpha)
                return base ** n if n >= 0 else base.invert(factor_out=True) ** (-n)
            return base.pow_rational(alpha)
        if isinstance(node, Sqrt):
            return self._eval(node.base, order).pow_rational(Fraction(1, 2), self._branch(node.slot))
        if isinstance(node, BranchSign):
            return PuiseuxSeries.constant(self._branch(node.slot), nvars, order, self.grid)
        if isinstance(node, DivMonomialStrict):
            return self._eval(node.base, order).monomial_div(node.exponents)
        if isinstance(node, AlgRoot):
            coeffs = [self._eval(c, order) for c in node.coeffs]
            branch = self._branch(node.slot) if node.slot else 1
            return algebraic_root(coeffs, node.seed, node.hint, branch)
        if isinstance(node, Ref):
            return self._eval(self.recipes[node.name], order)
        raise TypeError(f"Unknown recipe node {node!r}")


# ----------------------------------------------------------------------
# family registry
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Variant:
    name: str
    recipes: Tuple[Tuple[str, str], ...]
    validated: bool = False


@dataclass(frozen=True)
class FamilySpec:
    """A closed-form candidate together with the A-hypergeometric data it lives on."""

    name: str
    description: str
    variables: Tuple[str, ...]
    ram: Tuple[int, ...]
    config: PointConfig
    lattice: LatticeBasis
    signs: Tuple[int, ...]
    beta: Tuple[sympy.Expr, ...]
    triangulation: Triangulation
    horn: Tuple[str, ...] = ()
    recipes: Tuple[Tuple[str, str], ...] = ()
    relations: Tuple[Tuple[str, str], ...] = ()
    coefficients: Optional[Tuple[sympy.Expr, ...]] = None
    discriminant: Optional[Tuple[str, str]] = None
    horn_extra: Tuple[Tuple[sympy.Expr, ...], ...] = ()
    variants: Tuple[Variant, ...] = ()
    validated: bool = True
    gkz_route: bool = False
    power_form: bool = True
    fg: Tuple[Tuple[str, str], ...] = ()
    variant: Optional[str] = None
    target: str = "phi"

    @property
    def nvars(self) -> int:
        return len(self.variables)

    @property
    def grid(self) -> ExponentGrid:
        return ExponentGrid(self.ram)

    @property
    def label(self) -> str:
        return f"{self.name}[{self.variant}]" if self.variant else self.name

    def beta_at(self, r: Fraction) -> RationalVector:
        return tuple(rational_at(b, Fraction(r)) for b in self.beta)

    def gammas(self, r: Fraction) -> List[RationalVector]:
        """All gamma vectors of the triangulation, simplex by simplex."""

        beta = self.beta_at(r)
        found: List[RationalVector] = []
        for simplex in self.triangulation.simplices:
            found.extend(gamma_candidates(self.config, beta, simplex))
        return found

    @property
    def volume(self) -> int:
        return simplex_volume(self.config, self.triangulation)

    def horn_operators(self) -> Tuple[ThetaOperator, ...]:
        return _horn_operators(self.horn, self.variables)

    def coefficient_values(self, r: Fraction) -> Optional[List[GaussianRational]]:
        if self.coefficients is None:
            return None
        return [_at(c, Fraction(r)) for c in self.coefficients]

    def extra_monomials(self, r: Fraction, order: int) -> List[PuiseuxSeries]:
        return [
            PuiseuxSeries.monomial([rational_at(e, Fraction(r)) for e in exps], order, ONE, self.grid)
            for exps in self.horn_extra
        ]

    def compiled(self) -> "CompiledRecipes":
        return _compile(self)

    def slots(self) -> List[str]:
        return self.compiled().slots

    def evaluate(
        self,
        r: Fraction,
        order: int,
        branches: Optional[Mapping[str, int]] = None,
        name: Optional[str] = None,
    ) -> PuiseuxSeries:
        compiled = self.compiled()
        name = name or self.target
        if name not in compiled.nodes:
            raise KeyError(f"{self.label} has no recipe named {name!r}")
        evaluator = RecipeEvaluator(self.grid, compiled.nodes, r, branches)
        return evaluator.evaluate(compiled.nodes[name], order)

    def evaluator(self, r: Fraction, branches: Optional[Mapping[str, int]] = None) -> RecipeEvaluator:
        return RecipeEvaluator(self.grid, self.compiled().nodes, r, branches)

    def with_variant(self, variant: Optional[str]) -> "FamilySpec":
        if not variant:
            return self
        for candidate in self.variants:
            if candidate.name == variant:
                merged = dict(self.recipes)
                merged.update(dict(candidate.recipes))
                return replace(
                    self,
                    recipes=tuple(merged.items()),
                    validated=candidate.validated,
                    variant=candidate.name,
                )
        known = ", ".join(v.name for v in self.variants) or "none"
        raise UnknownFamily(f"{self.name} has no variant {variant!r} (known: {known})")

    def discriminant_exprs(self) -> Optional[Tuple[sympy.Expr, sympy.Expr]]:
        """(computed, expected) discriminant of the algebraic root behind a recipe."""

        if self.discriminant is None:
            return None
        recipe_name, expected = self.discriminant
        node = self.compiled().nodes.get(recipe_name)
        if not isinstance(node, AlgRoot):
            raise FamilyFileError(f"{self.label}: recipe {recipe_name!r} is not an algroot")
        unknown = sympy.Symbol("F")
        polynomial = sum(c * unknown ** k for k, c in enumerate(node.polynomial))
        computed = sympy.factor(sympy.discriminant(sympy.expand(polynomial), unknown))
        parser = RecipeParser(self.variables, ())
        return computed, parser.expression(expected)

    def to_json(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "variant": self.variant,
            "description": self.description,
            "variables": list(self.variables),
            "ram": list(self.ram),
            "config": [list(column) for column in self.config.columns],
            "lattice": [list(row) for row in self.lattice.rows],
            "signs": list(self.signs),
            "beta": [str(b) for b in self.beta],
            "triangulation": [list(s) for s in self.triangulation.simplices],
            "horn": list(self.horn),
            "recipes": dict(self.recipes),
            "relations": [list(pair) for pair in self.relations],
            "coefficients": [str(c) for c in self.coefficients] if self.coefficients is not None else None,
            "validated": self.validated,
            "power_form": self.power_form,
        }

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "FamilySpec":
        """Build a family from the mapping layout used by family files."""

        try:
            name = str(data["name"])
            variables = tuple(str(v) for v in data["variables"])
            config = PointConfig.from_columns(data["A"] if "A" in data else data["config"]).validate()
            beta = tuple(sympy.sympify(str(b), locals={"r": R}) for b in data["beta"])
            triangulation = Triangulation.from_lists(data["triangulation"])
            recipes = data["recipes"]
        except KeyError as exc:
            raise FamilyFileError(f"Family definition is missing field {exc}") from exc
        except (TypeError, ValueError, sympy.SympifyError) as exc:
            raise FamilyFileError(f"Family {data.get('name', '?')}: {exc}") from exc

        lattice = LatticeBasis.from_rows(data["lattice"]) if data.get("lattice") else lattice_kernel(config)
        for row in lattice.rows:
            if any(config.apply(row)):
                raise FamilyFileError(f"{name}: lattice row {row} is not a relation of A")
        if len(beta) != config.rank:
            raise FamilyFileError(f"{name}: beta has {len(beta)} entries, A has rank {config.rank}")
        if lattice.dim != len(variables):
            raise FamilyFileError(f"{name}: {len(variables)} variables for a lattice of rank {lattice.dim}")

        ram = tuple(int(k) for k in data.get("ram", (1,) * len(variables)))
        signs = tuple(int(s) for s in data.get("signs", (1,) * len(variables)))
        coefficients = data.get("coefficients")
        discriminant = data.get("discriminant")
        variants = tuple(
            Variant(
                str(variant_name),
                tuple((str(k), str(v)) for k, v in body.get("recipes", {}).items()),
                bool(body.get("validated", False)),
            )
            for variant_name, body in (data.get("variants") or {}).items()
        )
        spec = cls(
            name=name,
            description=str(data.get("description", data.get("source", ""))),
            variables=variables,
            ram=ram,
            config=config,
            lattice=lattice,
            signs=signs,
            beta=beta,
            triangulation=triangulation,
            horn=tuple(str(h) for h in data.get("horn", ())),
            recipes=tuple((str(k), str(v)) for k, v in recipes.items()),
            relations=tuple((str(lhs), str(rhs)) for lhs, rhs in data.get("relations", ())),
            coefficients=tuple(sympy.sympify(str(c), locals={"r": R, "i": sympy.I}) for c in coefficients)
            if coefficients is not None
            else None,
            discriminant=(str(discriminant["recipe"]), str(discriminant["expected"])) if discriminant else None,
            horn_extra=tuple(
                tuple(sympy.sympify(str(e), locals={"r": R}) for e in exps) for exps in data.get("horn_extra", ())
            ),
            variants=variants,
            validated=bool(data.get("validated", True)),
            gkz_route=bool(data.get("gkz_route", False)),
            power_form=bool(data.get("power_form", True)),
            fg=tuple((str(k), str(v)) for k, v in (data.get("fg") or {}).items()),
            target=str(data.get("target", "phi")),
        )
        try:
            spec.compiled()
        except ValueError as exc:
            raise FamilyFileError(f"{name}: {exc}") from exc
        return spec


@dataclass(frozen=True)
class CompiledRecipes:
    nodes: Dict[str, Recipe]
    relations: List[Tuple[Recipe, Recipe]]
    slots: List[str]
    fg: Dict[str, Recipe] = field(default_factory=dict)


@lru_cache(maxsize=None)
def _compile(spec: FamilySpec) -> CompiledRecipes:
    names = [name for name, _ in spec.recipes]
    if spec.target not in names:
        raise ValueError(f"No recipe for the target {spec.target!r}")
    parser = RecipeParser(spec.variables, names)
    nodes = {name: parser.parse(text) for name, text in spec.recipes}
    relations = [(parser.parse(lhs), parser.parse(rhs)) for lhs, rhs in spec.relations]
    slots = recipe_slots(nodes[spec.target], nodes)
    for lhs, rhs in relations:
        recipe_slots(lhs, nodes, slots)
        recipe_slots(rhs, nodes, slots)
    fg = {key: parser.parse(text) for key, text in spec.fg}
    return CompiledRecipes(nodes, relations, slots, fg)


@lru_cache(maxsize=None)
def _horn_operators(horn: Tuple[str, ...], variables: Tuple[str, ...]) -> Tuple[ThetaOperator, ...]:
    return tuple(ThetaOperator.parse(text, variables) for text in horn)


def load_family_file(path: Union[str, Path]) -> List[FamilySpec]:
    """Read families from a YAML file holding a list or a ``families`` key."""

    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise FamilyFileError(f"Cannot read family file {path}: {exc}") from exc
    if isinstance(data, dict):
        data = data.get("families")
    if not isinstance(data, list):
        raise FamilyFileError(f"{path} must hold a list of families")
    families = [FamilySpec.from_mapping(entry) for entry in data]
    logger.info("Loaded %d families from %s", len(families), path)
    return families


@lru_cache(maxsize=8)
def _builtin_families(fc_n: int) -> Tuple[Tuple[str, FamilySpec], ...]:
    from hypercheck.services.tables import builtin_families

    specs = [FamilySpec.from_mapping(data) for data in builtin_families(fc_n)]
    return tuple((spec.name, spec) for spec in specs)


def registry(fc_n: int = 2, extra: Iterable[FamilySpec] = ()) -> Dict[str, FamilySpec]:
    """Built-in families keyed by name; FC-k at n = 2 is also reachable as F4-k."""

    families = dict(_builtin_families(fc_n))
    for spec in extra:
        families[spec.name] = spec
    if fc_n == 2:
        for k in (1, 2, 3):
            families[f"F4-{k}"] = replace(families[f"FC-{k}"], name=f"F4-{k}")
    return families


def get_family(
    name: str,
    n: Optional[int] = None,
    variant: Optional[str] = None,
    extra: Iterable[FamilySpec] = (),
) -> FamilySpec:
    families = registry(n or 2, extra)
    lookup = {key.lower(): spec for key, spec in families.items()}
    spec = lookup.get(name.lower())
    if spec is None:
        raise UnknownFamily(f"Unknown family {name!r}; known: {', '.join(sorted(families))}")
    return spec.with_variant(variant)
