"""Truncated multivariate Puiseux series over the Gaussian rationals."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from hypercheck.services.scalars import ONE, ZERO, GaussianRational

logger = logging.getLogger(__name__)

Exponents = Tuple[int, ...]
Scalar = Union[GaussianRational, int, Fraction]

# Order given to exact constants so that alignment keeps the other operand's bound.
EXACT_ORDER = 10 ** 9


class NonUnit(ArithmeticError):
    """Raised when inverting or powering a series without a constant term."""


class NonRepresentableConstantPower(ArithmeticError):
    """Raised when c**alpha of a leading constant is not a Gaussian rational."""


class UnboundedExpansion(ArithmeticError):
    """Raised when an exact non-constant series is inverted, logged or exponentiated."""


class NotDivisible(ArithmeticError):
    """Raised when an exact monomial division leaves a negative exponent."""

    def __init__(self, message: str, monomial: Tuple[Fraction, ...], coefficient: GaussianRational):
        super().__init__(message)
        self.monomial = monomial
        self.coefficient = coefficient


def _lcm(*values: int) -> int:
    return reduce(lambda a, b: a * b // gcd(a, b), values, 1)


@dataclass(frozen=True)
class ExponentGrid:
    """Per-variable ramification: grid exponent e on variable j means z_j**(e/k_j)."""

    ram: Tuple[int, ...]

    def __post_init__(self):
        if any(k < 1 for k in self.ram):
            raise ValueError(f"Ramification indices must be positive: {self.ram}")

    @classmethod
    def plain(cls, nvars: int) -> "ExponentGrid":
        return cls((1,) * nvars)

    @property
    def nvars(self) -> int:
        return len(self.ram)

    @property
    def unit(self) -> int:
        return _lcm(*self.ram)

    def weight(self, exps: Sequence[int]) -> int:
        unit = self.unit
        return sum(e * (unit // k) for e, k in zip(exps, self.ram))

    def join(self, other: "ExponentGrid") -> "ExponentGrid":
        if self.nvars != other.nvars:
            raise ValueError(f"Grid arity mismatch: {self.nvars} vs {other.nvars}")
        return ExponentGrid(tuple(_lcm(a, b) for a, b in zip(self.ram, other.ram)))


@dataclass(frozen=True)
class Mismatch:
    """First monomial (lowest weight, then lexicographic) where two series differ."""

    monomial: Tuple[Fraction, ...]
    left: GaussianRational
    right: GaussianRational

    def to_json(self) -> Dict[str, object]:
        return {
            "monomial": [str(q) for q in self.monomial],
            "left": self.left.to_text(),
            "right": self.right.to_text(),
        }


class PuiseuxSeries:
    """z**offset times a finite sum of grid monomials, known below weight ``order``.

    Stored exponents are non-negative grid units; the weight of a monomial is
    measured in units of 1/lcm(ram).
    """

    __slots__ = ("grid", "offset", "coeffs", "order")

    def __init__(
        self,
        grid: ExponentGrid,
        offset: Iterable[Union[int, Fraction]],
        coeffs: Dict[Exponents, Scalar],
        order: int,
    ):
        self.grid = grid
        self.offset = tuple(Fraction(q) for q in offset)
        if len(self.offset) != grid.nvars:
            raise ValueError("Offset arity does not match grid")
        self.order = int(order)
        clean: Dict[Exponents, GaussianRational] = {}
        for exps, value in coeffs.items():
            value = GaussianRational.coerce(value)
            if value.is_zero():
                continue
            if any(e < 0 for e in exps):
                raise ValueError(f"Negative grid exponent {exps}")
            if grid.weight(exps) >= self.order:
                continue
            clean[tuple(exps)] = value
        self.coeffs = clean

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------
    @classmethod
    def zero(cls, nvars: int, order: int, grid: Optional[ExponentGrid] = None) -> "PuiseuxSeries":
        grid = grid or ExponentGrid.plain(nvars)
        return cls(grid, (0,) * grid.nvars, {}, order)

    @classmethod
    def constant(
        cls, value: Scalar, nvars: int, order: int, grid: Optional[ExponentGrid] = None
    ) -> "PuiseuxSeries":
        grid = grid or ExponentGrid.plain(nvars)
        return cls(grid, (0,) * grid.nvars, {(0,) * grid.nvars: value}, order)

    @classmethod
    def variable(
        cls, j: int, nvars: int, order: int, root: int = 1, grid: Optional[ExponentGrid] = None
    ) -> "PuiseuxSeries":
        """z_j**(1/root) on a grid fine enough to hold it."""

        grid = grid or ExponentGrid.plain(nvars)
        ram = list(grid.ram)
        ram[j] = _lcm(ram[j], root)
        grid = ExponentGrid(tuple(ram))
        exps = [0] * nvars
        exps[j] = ram[j] // root
        return cls(grid, (0,) * nvars, {tuple(exps): ONE}, order)

    @classmethod
    def monomial(
        cls,
        exponents: Sequence[Union[int, Fraction]],
        order: int,
        coefficient: Scalar = ONE,
        grid: Optional[ExponentGrid] = None,
    ) -> "PuiseuxSeries":
        grid = grid or ExponentGrid.plain(len(exponents))
        return cls(grid, exponents, {(0,) * grid.nvars: coefficient}, order)

    # ------------------------------------------------------------------
    # basic views
    # ------------------------------------------------------------------
    @property
    def nvars(self) -> int:
        return self.grid.nvars

    @property
    def _zero_key(self) -> Exponents:
        return (0,) * self.nvars

    def total_exponent(self, exps: Exponents) -> Tuple[Fraction, ...]:
        return tuple(q + Fraction(e, k) for q, e, k in zip(self.offset, exps, self.grid.ram))

    def terms(self) -> List[Tuple[Tuple[Fraction, ...], GaussianRational]]:
        """(total exponent, coefficient) pairs sorted by weight then lexicographically."""

        keys = sorted(self.coeffs, key=lambda e: (self.grid.weight(e), e))
        return [(self.total_exponent(e), self.coeffs[e]) for e in keys]

    def coefficient(self, exponents: Sequence[Union[int, Fraction]]) -> GaussianRational:
        """Coefficient of the monomial with the given total exponents."""

        exps = []
        for q, offset, k in zip(exponents, self.offset, self.grid.ram):
            units = (Fraction(q) - offset) * k
            if units.denominator != 1 or units < 0:
                return ZERO
            exps.append(int(units))
        exps_t = tuple(exps)
        if self.grid.weight(exps_t) >= self.order:
            raise ValueError(f"Monomial {tuple(exponents)} lies beyond the known order {self.order}")
        return self.coeffs.get(exps_t, ZERO)

    def constant_term(self) -> GaussianRational:
        return self.coeffs.get(self._zero_key, ZERO)

    def is_zero(self) -> bool:
        return not self.coeffs

    def lowest_weight(self) -> Optional[int]:
        if not self.coeffs:
            return None
        return min(self.grid.weight(e) for e in self.coeffs)

    def with_order(self, order: int) -> "PuiseuxSeries":
        return PuiseuxSeries(self.grid, self.offset, self.coeffs, min(order, self.order))

    # ------------------------------------------------------------------
    # grid and offset bookkeeping
    # ------------------------------------------------------------------
    def regrid(self, grid: ExponentGrid) -> "PuiseuxSeries":
        if grid.ram == self.grid.ram:
            return self
        factors = []
        for new, old in zip(grid.ram, self.grid.ram):
            if new % old:
                raise ValueError(f"Grid {grid.ram} does not refine {self.grid.ram}")
            factors.append(new // old)
        coeffs = {tuple(e * f for e, f in zip(exps, factors)): c for exps, c in self.coeffs.items()}
        order = self.order * (grid.unit // self.grid.unit) if self.order < EXACT_ORDER else self.order
        return PuiseuxSeries(grid, self.offset, coeffs, order)

    def _shift(self, units: Sequence[int]) -> "PuiseuxSeries":
        """Move ``units`` grid steps from the offset into the stored exponents."""

        if not any(units):
            return self
        offset = tuple(q - Fraction(u, k) for q, u, k in zip(self.offset, units, self.grid.ram))
        coeffs = {tuple(e + u for e, u in zip(exps, units)): c for exps, c in self.coeffs.items()}
        order = self.order + self.grid.weight(units) if self.order < EXACT_ORDER else self.order
        return PuiseuxSeries(self.grid, offset, coeffs, order)

    def normalized(self) -> "PuiseuxSeries":
        """Factor the componentwise minimum exponent into the offset."""

        if not self.coeffs:
            return self
        mins = tuple(min(exps[j] for exps in self.coeffs) for j in range(self.nvars))
        if not any(mins):
            return self
        offset = tuple(q + Fraction(m, k) for q, m, k in zip(self.offset, mins, self.grid.ram))
        coeffs = {tuple(e - m for e, m in zip(exps, mins)): c for exps, c in self.coeffs.items()}
        return PuiseuxSeries(self.grid, offset, coeffs, self.order - self.grid.weight(mins))

    def strip_offset(self) -> "PuiseuxSeries":
        return PuiseuxSeries(self.grid, self._zero_key, self.coeffs, self.order)

    def with_offset(self, offset: Sequence[Union[int, Fraction]]) -> "PuiseuxSeries":
        return PuiseuxSeries(self.grid, offset, self.coeffs, self.order)

    @staticmethod
    def align(a: "PuiseuxSeries", b: "PuiseuxSeries") -> Tuple["PuiseuxSeries", "PuiseuxSeries"]:
        """Bring two series to a common grid and a common (minimal) offset."""

        if a.nvars != b.nvars:
            raise ValueError(f"Arity mismatch: {a.nvars} vs {b.nvars}")
        base = tuple(min(p, q) for p, q in zip(a.offset, b.offset))
        ram = tuple(
            _lcm(ka, kb, (pa - q).denominator, (pb - q).denominator)
            for ka, kb, pa, pb, q in zip(a.grid.ram, b.grid.ram, a.offset, b.offset, base)
        )
        grid = ExponentGrid(ram)
        a2, b2 = a.regrid(grid), b.regrid(grid)
        a2 = a2._shift([int((p - q) * k) for p, q, k in zip(a.offset, base, ram)])
        b2 = b2._shift([int((p - q) * k) for p, q, k in zip(b.offset, base, ram)])
        return a2, b2

    # ------------------------------------------------------------------
    # ring operations
    # ------------------------------------------------------------------
    def _lift(self, other) -> "PuiseuxSeries":
        if isinstance(other, PuiseuxSeries):
            return other
        if isinstance(other, (GaussianRational, int, Fraction)):
            return PuiseuxSeries.constant(other, self.nvars, EXACT_ORDER, self.grid)
        return NotImplemented

    def __add__(self, other) -> "PuiseuxSeries":
        other = self._lift(other)
        if other is NotImplemented:
            return other
        a, b = PuiseuxSeries.align(self, other)
        coeffs = dict(a.coeffs)
        for exps, c in b.coeffs.items():
            coeffs[exps] = coeffs.get(exps, ZERO) + c
        return PuiseuxSeries(a.grid, a.offset, coeffs, min(a.order, b.order))

    __radd__ = __add__

    def __neg__(self) -> "PuiseuxSeries":
        return PuiseuxSeries(self.grid, self.offset, {e: -c for e, c in self.coeffs.items()}, self.order)

    def __sub__(self, other) -> "PuiseuxSeries":
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "PuiseuxSeries":
        return (-self) + other

    def scale(self, factor: Scalar) -> "PuiseuxSeries":
        factor = GaussianRational.coerce(factor)
        return PuiseuxSeries(self.grid, self.offset, {e: c * factor for e, c in self.coeffs.items()}, self.order)

    def __mul__(self, other) -> "PuiseuxSeries":
        if isinstance(other, (GaussianRational, int, Fraction)):
            return self.scale(other)
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        grid = self.grid.join(other.grid)
        a, b = self.regrid(grid), other.regrid(grid)
        order = min(a.order, b.order)
        offset = tuple(p + q for p, q in zip(a.offset, b.offset))
        return PuiseuxSeries(grid, offset, _convolve(a.coeffs, b.coeffs, grid, order), order)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "PuiseuxSeries":
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return self.invert() ** (-exponent)
        result = PuiseuxSeries.constant(ONE, self.nvars, self.order, self.grid)
        for _ in range(exponent):
            result = result * self
        return result

    def _graded(self) -> List[Dict[Exponents, GaussianRational]]:
        size = max(self.order, 0)
        if self.order >= EXACT_ORDER:
            if any(self.grid.weight(e) for e in self.coeffs):
                raise UnboundedExpansion("Exact non-constant series has no finite truncation order")
            size = 1
        parts: List[Dict[Exponents, GaussianRational]] = [dict() for _ in range(size)]
        for exps, c in self.coeffs.items():
            parts[self.grid.weight(exps)][exps] = c
        return parts

    def invert(self, factor_out: bool = False) -> "PuiseuxSeries":
        """Multiplicative inverse; the offset negates."""

        c0 = self.coeffs.get(self._zero_key)
        if c0 is None:
            if factor_out and self.coeffs:
                return self.normalized().invert(factor_out=False)
            raise NonUnit("Series has no constant term to invert")
        inv0 = c0.inverse()
        parts = self._graded()
        result: List[Dict[Exponents, GaussianRational]] = [{self._zero_key: inv0}]
        for n in range(1, len(parts)):
            acc: Dict[Exponents, GaussianRational] = {}
            for k in range(1, n + 1):
                if parts[k] and result[n - k]:
                    _accumulate(acc, parts[k], result[n - k])
            result.append({e: -(inv0 * c) for e, c in acc.items() if c})
        coeffs = {e: c for part in result for e, c in part.items()}
        return PuiseuxSeries(self.grid, tuple(-q for q in self.offset), coeffs, self.order)

    def __truediv__(self, other) -> "PuiseuxSeries":
        if isinstance(other, (GaussianRational, int, Fraction)):
            return self.scale(GaussianRational.coerce(other).inverse())
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        return self * other.invert(factor_out=True)

    def __rtruediv__(self, other) -> "PuiseuxSeries":
        return self.invert(factor_out=True) * other

    # ------------------------------------------------------------------
    # formal log / exp on offset-free series
    # ------------------------------------------------------------------
    def log_unit(self) -> "PuiseuxSeries":
        """Formal log of a series with offset zero and constant term 1."""

        if any(self.offset) or self.constant_term() != ONE:
            raise NonUnit("log_unit needs offset zero and constant term 1")
        parts = self._graded()
        logs: List[Dict[Exponents, GaussianRational]] = [dict() for _ in parts]
        for n in range(1, len(parts)):
            acc: Dict[Exponents, GaussianRational] = {e: c * n for e, c in parts[n].items()}
            for k in range(1, n):
                if parts[k] and logs[n - k]:
                    term: Dict[Exponents, GaussianRational] = {}
                    _accumulate(term, parts[k], logs[n - k])
                    for e, c in term.items():
                        acc[e] = acc.get(e, ZERO) - c * (n - k)
            logs[n] = {e: c * Fraction(1, n) for e, c in acc.items() if c}
        coeffs = {e: c for part in logs for e, c in part.items()}
        return PuiseuxSeries(self.grid, self.offset, coeffs, self.order)

    def exp_nilpotent(self) -> "PuiseuxSeries":
        """Formal exp of a series with offset zero and no constant term."""

        if any(self.offset) or not self.constant_term().is_zero():
            raise ValueError("exp_nilpotent needs offset zero and no constant term")
        parts = self._graded()
        result: List[Dict[Exponents, GaussianRational]] = [{self._zero_key: ONE}]
        for n in range(1, len(parts)):
            acc: Dict[Exponents, GaussianRational] = {}
            for k in range(1, n + 1):
                if parts[k] and result[n - k]:
                    term: Dict[Exponents, GaussianRational] = {}
                    _accumulate(term, parts[k], result[n - k])
                    for e, c in term.items():
                        acc[e] = acc.get(e, ZERO) + c * k
            result.append({e: c * Fraction(1, n) for e, c in acc.items() if c})
        coeffs = {e: c for part in result for e, c in part.items()}
        return PuiseuxSeries(self.grid, self.offset, coeffs, self.order)

    def pow_rational(self, alpha: Union[int, Fraction], branch: int = 1) -> "PuiseuxSeries":
        """self**alpha = c**alpha * exp(alpha * log(self / c)) after offset removal."""

        alpha = Fraction(alpha)
        base = self if self._zero_key in self.coeffs else self.normalized()
        c = base.coeffs.get(base._zero_key)
        if c is None:
            raise NonUnit("Series has no constant term; rational power undefined")
        if alpha == 0:
            return PuiseuxSeries.constant(ONE, self.nvars, base.order, base.grid)
        c_alpha = c.power(alpha, branch)
        if c_alpha is None:
            raise NonRepresentableConstantPower(
                f"Constant {c.to_text()} raised to {alpha} is not a Gaussian rational"
            )
        unit = base.strip_offset().scale(c.inverse())
        powered = unit.log_unit().scale(alpha).exp_nilpotent().scale(c_alpha)
        return powered.with_offset(tuple(alpha * q for q in base.offset))

    # ------------------------------------------------------------------
    # operators
    # ------------------------------------------------------------------
    def theta(self, j: int) -> "PuiseuxSeries":
        """z_j d/dz_j; each monomial is scaled by its total z_j exponent."""

        offset, k = self.offset[j], self.grid.ram[j]
        coeffs = {exps: c * (offset + Fraction(exps[j], k)) for exps, c in self.coeffs.items()}
        return PuiseuxSeries(self.grid, self.offset, coeffs, self.order)

    def _lowest(self, keys: Iterable[Exponents]) -> Optional[Exponents]:
        keys = list(keys)
        if not keys:
            return None
        return min(keys, key=lambda e: (self.grid.weight(e), e))

    def monomial_div(self, m: Sequence[Union[int, Fraction]]) -> "PuiseuxSeries":
        """Exact division by z**m; every stored monomial must stay non-negative."""

        m = tuple(Fraction(q) for q in m)
        offending = self._lowest(
            exps for exps in self.coeffs
            if any(t - q < 0 for t, q in zip(self.total_exponent(exps), m))
        )
        if offending is not None:
            monomial = self.total_exponent(offending)
            raise NotDivisible(
                f"Monomial {tuple(str(q) for q in monomial)} is not divisible by {tuple(str(q) for q in m)}",
                monomial,
                self.coeffs[offending],
            )
        # whatever the offset cannot absorb is taken from the stored exponents
        consumed = tuple(max(q - p, Fraction(0)) for p, q in zip(self.offset, m))
        ram = tuple(_lcm(k, c.denominator) for k, c in zip(self.grid.ram, consumed))
        series = self.regrid(ExponentGrid(ram))
        units = tuple(int(c * k) for c, k in zip(consumed, ram))
        coeffs = {tuple(e - u for e, u in zip(exps, units)): c for exps, c in series.coeffs.items()}
        offset = tuple(p - q + c for p, q, c in zip(series.offset, m, consumed))
        return PuiseuxSeries(series.grid, offset, coeffs, series.order - series.grid.weight(units))

    def monomial_div_laurent(
        self, m: Sequence[Union[int, Fraction]]
    ) -> Tuple["PuiseuxSeries", Optional[Tuple[Fraction, ...]]]:
        """Division by z**m through the offset, plus the lowest monomial left negative."""

        m = tuple(Fraction(q) for q in m)
        offending = self._lowest(
            exps for exps in self.coeffs
            if any(t - q < 0 for t, q in zip(self.total_exponent(exps), m))
        )
        result = self.with_offset(tuple(p - q for p, q in zip(self.offset, m)))
        if offending is None:
            return result, None
        return result, self.total_exponent(offending)

    def substitute_signs(self, signs: Sequence[int]) -> "PuiseuxSeries":
        """Replace z_j by s_j * z_j on the stored (integral) exponents."""

        coeffs: Dict[Exponents, GaussianRational] = {}
        for exps, c in self.coeffs.items():
            sign = 1
            for e, k, s in zip(exps, self.grid.ram, signs):
                if s == 1:
                    continue
                if e % k:
                    raise ValueError("Sign substitution needs integral exponents on negated variables")
                if (e // k) % 2:
                    sign = -sign
            coeffs[exps] = c if sign == 1 else -c
        return PuiseuxSeries(self.grid, self.offset, coeffs, self.order)

    def restrict_zero(self, j: int) -> "PuiseuxSeries":
        """Set z_j = 0 (keeps the terms free of z_j)."""

        if self.offset[j] != 0:
            raise ValueError(f"Cannot restrict variable {j} with non-zero offset")
        coeffs = {exps: c for exps, c in self.coeffs.items() if exps[j] == 0}
        return PuiseuxSeries(self.grid, self.offset, coeffs, self.order)

    # ------------------------------------------------------------------
    # comparison
    # ------------------------------------------------------------------
    def first_mismatch(self, other: "PuiseuxSeries") -> Optional[Mismatch]:
        a, b = PuiseuxSeries.align(self, other)
        order = min(a.order, b.order)
        differing = [
            exps for exps in set(a.coeffs) | set(b.coeffs)
            if a.grid.weight(exps) < order and a.coeffs.get(exps, ZERO) != b.coeffs.get(exps, ZERO)
        ]
        lowest = a._lowest(differing)
        if lowest is None:
            return None
        return Mismatch(a.total_exponent(lowest), a.coeffs.get(lowest, ZERO), b.coeffs.get(lowest, ZERO))

    def agrees_with(self, other: "PuiseuxSeries") -> bool:
        return self.first_mismatch(other) is None

    # ------------------------------------------------------------------
    # serialization
    # ------------------------------------------------------------------
    def to_json(self) -> Dict[str, object]:
        keys = sorted(self.coeffs, key=lambda e: (self.grid.weight(e), e))
        return {
            "ram": list(self.grid.ram),
            "offset": [str(q) for q in self.offset],
            "order": self.order,
            "terms": [[list(e), str(self.coeffs[e].re), str(self.coeffs[e].im)] for e in keys],
        }

    @classmethod
    def from_json(cls, payload: Dict[str, object]) -> "PuiseuxSeries":
        coeffs = {
            tuple(e): GaussianRational(Fraction(re), Fraction(im)) for e, re, im in payload["terms"]
        }
        return cls(ExponentGrid(tuple(payload["ram"])), [Fraction(q) for q in payload["offset"]], coeffs, payload["order"])

    def to_text(self, names: Optional[Sequence[str]] = None) -> str:
        names = list(names) if names else [f"z{j + 1}" for j in range(self.nvars)]
        pieces = []
        for exponent, c in self.terms():
            factors = []
            for name, q in zip(names, exponent):
                if q == 0:
                    continue
                factors.append(name if q == 1 else f"{name}^({q})")
            coefficient = c.to_text()
            if not factors:
                pieces.append(coefficient)
            elif c == ONE:
                pieces.append("*".join(factors))
            else:
                pieces.append(f"({coefficient})*" + "*".join(factors))
        body = " + ".join(pieces) if pieces else "0"
        return f"{body} + O(weight {self.order}/{self.grid.unit})"

    def __iter__(self) -> Iterator[Tuple[Tuple[Fraction, ...], GaussianRational]]:
        return iter(self.terms())

    def __repr__(self) -> str:
        return f"PuiseuxSeries({self.to_text()})"


def _accumulate(
    acc: Dict[Exponents, GaussianRational],
    p: Dict[Exponents, GaussianRational],
    q: Dict[Exponents, GaussianRational],
) -> None:
    for ea, ca in p.items():
        for eb, cb in q.items():
            key = tuple(x + y for x, y in zip(ea, eb))
            acc[key] = acc.get(key, ZERO) + ca * cb


def _convolve(
    p: Dict[Exponents, GaussianRational],
    q: Dict[Exponents, GaussianRational],
    grid: ExponentGrid,
    order: int,
) -> Dict[Exponents, GaussianRational]:
    ranked = sorted(((grid.weight(e), e, c) for e, c in q.items()), key=lambda item: (item[0], item[1]))
    out: Dict[Exponents, GaussianRational] = {}
    for ea, ca in p.items():
        wa = grid.weight(ea)
        for wb, eb, cb in ranked:
            if wa + wb >= order:
                break
            key = tuple(x + y for x, y in zip(ea, eb))
            out[key] = out.get(key, ZERO) + ca * cb
    return out


def mul(a: PuiseuxSeries, b: PuiseuxSeries) -> PuiseuxSeries:
    return a * b


def invert(a: PuiseuxSeries, factor_out: bool = False) -> PuiseuxSeries:
    return a.invert(factor_out=factor_out)


def pow_rational(a: PuiseuxSeries, alpha: Union[int, Fraction], branch: int = 1) -> PuiseuxSeries:
    return a.pow_rational(alpha, branch)


def theta(a: PuiseuxSeries, j: int) -> PuiseuxSeries:
    return a.theta(j)


def monomial_div(a: PuiseuxSeries, m: Sequence[Union[int, Fraction]], strict: bool = True):
    if strict:
        return a.monomial_div(m)
    return a.monomial_div_laurent(m)
