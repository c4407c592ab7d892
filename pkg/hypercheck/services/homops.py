"""Horn theta-operators and annihilation checks on Puiseux series."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import sympy
from sympy.parsing.sympy_parser import parse_expr

from hypercheck.services.pseries import Mismatch, PuiseuxSeries
from hypercheck.services.scalars import ZERO, GaussianRational

logger = logging.getLogger(__name__)

R = sympy.Symbol("r")


class InsufficientOrder(ValueError):
    """Raised when a series is too short for the operator's degree shift."""


@dataclass(frozen=True)
class ThetaTerm:
    """z**monomial * P(theta), with P acting first."""

    monomial: Tuple[int, ...]
    polynomial: Dict[Tuple[int, ...], sympy.Expr] = field(compare=False)

    def instantiate(self, r: Fraction) -> Dict[Tuple[int, ...], GaussianRational]:
        value = sympy.Rational(r.numerator, r.denominator)
        return {
            exps: GaussianRational.from_sympy(sympy.expand(coeff.subs(R, value)))
            for exps, coeff in self.polynomial.items()
        }


@dataclass(frozen=True)
class ThetaOperator:
    """sum of monomial * polynomial(theta_1..theta_d) terms, coefficients polynomial in r."""

    source: str
    variables: Tuple[str, ...]
    terms: Tuple[ThetaTerm, ...]

    @property
    def degree_shift(self) -> int:
        return max(sum(term.monomial) for term in self.terms)

    @classmethod
    def parse(cls, text: str, variables: Sequence[str]) -> "ThetaOperator":
        """Parse e.g. "theta(1)*(theta(1)-1/2) - x*(theta(1)+theta(2)+r)*(theta(1)+theta(2)-r)".

        theta(j) is 1-based or takes a variable name; monomials in the named
        variables multiply after the theta-polynomial has acted.
        """

        variables = tuple(variables)
        var_symbols = [sympy.Symbol(name) for name in variables]
        theta_symbols = [sympy.Symbol(f"theta_{name}") for name in variables]

        def theta(arg):
            if isinstance(arg, sympy.Symbol) and arg in var_symbols:
                return theta_symbols[var_symbols.index(arg)]
            index = int(arg)
            if not 1 <= index <= len(variables):
                raise ValueError(f"theta({index}) outside 1..{len(variables)}")
            return theta_symbols[index - 1]

        local_dict = {name: symbol for name, symbol in zip(variables, var_symbols)}
        local_dict.update({"theta": theta, "r": R, "i": sympy.I, "I": sympy.I})
        try:
            expr = sympy.expand(parse_expr(text, local_dict=local_dict))
        except (SyntaxError, TypeError) as exc:
            raise ValueError(f"Cannot parse operator {text!r}: {exc}") from exc

        stray = expr.free_symbols - set(var_symbols) - set(theta_symbols) - {R}
        if stray:
            raise ValueError(f"Unknown symbols {sorted(map(str, stray))} in operator {text!r}")

        by_monomial = sympy.Poly(expr, *var_symbols).as_dict()
        terms: List[ThetaTerm] = []
        for monomial, coeff in sorted(by_monomial.items()):
            polynomial = sympy.Poly(coeff, *theta_symbols).as_dict()
            terms.append(ThetaTerm(tuple(int(v) for v in monomial), {tuple(k): sympy.sympify(c) for k, c in polynomial.items()}))
        logger.debug("Parsed operator %r into %d terms", text, len(terms))
        return cls(text, variables, tuple(terms))

    def to_json(self) -> Dict[str, object]:
        return {"operator": self.source, "variables": list(self.variables)}


def _evaluate(polynomial: Dict[Tuple[int, ...], GaussianRational], point: Sequence[Fraction]) -> GaussianRational:
    total = ZERO
    for exps, coeff in polynomial.items():
        value = Fraction(1)
        for q, e in zip(point, exps):
            value *= q ** e
        total = total + coeff * value
    return total


def _shift_on(op: ThetaOperator, s: PuiseuxSeries) -> int:
    """Degree shift measured in the grid units of s."""

    return max(s.grid.weight(tuple(m * k for m, k in zip(term.monomial, s.grid.ram))) for term in op.terms)


def apply_theta_op(op: ThetaOperator, s: PuiseuxSeries, r: Fraction) -> PuiseuxSeries:
    """Apply op to s; the result is reported valid below s.order minus the degree shift."""

    r = Fraction(r)
    shift = _shift_on(op, s)
    result: Optional[PuiseuxSeries] = None
    for term in op.terms:
        polynomial = term.instantiate(r)
        coeffs = {}
        for exps, c in s.coeffs.items():
            factor = _evaluate(polynomial, s.total_exponent(exps))
            if factor:
                coeffs[exps] = c * factor
        offset = tuple(q + m for q, m in zip(s.offset, term.monomial))
        piece = PuiseuxSeries(s.grid, offset, coeffs, s.order)
        result = piece if result is None else result + piece
    return result.with_order(s.order - shift) if result is not None else s.scale(0)


@dataclass(frozen=True)
class AnnihilationVerdict:
    operator: str
    annihilated: bool
    verified_order: int
    mismatch: Optional[Mismatch] = None

    def to_json(self) -> Dict[str, object]:
        return {
            "operator": self.operator,
            "annihilated": self.annihilated,
            "verified_order": self.verified_order,
            "mismatch": self.mismatch.to_json() if self.mismatch else None,
        }


def annihilation_check(op: ThetaOperator, s: PuiseuxSeries, r: Fraction) -> AnnihilationVerdict:
    """Verify op(s) = 0 below the valid order, or report the first non-zero residual term."""

    shift = _shift_on(op, s)
    if s.order <= shift:
        raise InsufficientOrder(f"Series order {s.order} does not exceed the degree shift {shift}")
    residual = apply_theta_op(op, s, r)
    if residual.is_zero():
        return AnnihilationVerdict(op.source, True, residual.order)
    monomial, coefficient = residual.terms()[0]
    logger.debug("Operator %s leaves %s at %s", op.source, coefficient.to_text(), monomial)
    return AnnihilationVerdict(op.source, False, residual.order, Mismatch(monomial, coefficient, ZERO))
