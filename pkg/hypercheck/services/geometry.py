"""Combinatorics of the point configuration A.

Lattice of relations, simplex volumes, gamma-vector enumeration and a bounded
normality probe. Integer work is done with extended-gcd row operations;
determinants, inverses and Smith forms come from sympy.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import sympy
from sympy.matrices.normalforms import smith_normal_form

logger = logging.getLogger(__name__)

IntVector = Tuple[int, ...]
RationalVector = Tuple[Fraction, ...]


class InvalidConfiguration(ValueError):
    """Raised when A has no linear form h with h(a_i) = 1 or ZA is not Z^r."""


class SingularSimplex(ValueError):
    """Raised when a simplex of a triangulation has a vanishing determinant."""


def _to_fraction(value) -> Fraction:
    value = sympy.sympify(value)
    if not value.is_Rational:
        raise ValueError(f"Expected an exact rational, got {value}")
    return Fraction(int(value.p), int(value.q))


def _extgcd(a: int, b: int) -> Tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""

    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        old_r, old_x, old_y = -old_r, -old_x, -old_y
    return old_r, old_x, old_y


def _row_echelon(rows: List[List[int]], ncols: int) -> Tuple[List[List[int]], List[Tuple[int, int]]]:
    """Unimodular row reduction on the first ``ncols`` columns."""

    rows = [list(row) for row in rows]
    pivots: List[Tuple[int, int]] = []
    top = 0
    for col in range(ncols):
        if top >= len(rows):
            break
        for i in range(top + 1, len(rows)):
            a, b = rows[top][col], rows[i][col]
            if b == 0:
                continue
            g, x, y = _extgcd(a, b)
            upper = [x * u + y * v for u, v in zip(rows[top], rows[i])]
            lower = [(-b // g) * u + (a // g) * v for u, v in zip(rows[top], rows[i])]
            rows[top], rows[i] = upper, lower
        if rows[top][col] == 0:
            continue
        if rows[top][col] < 0:
            rows[top] = [-u for u in rows[top]]
        pivots.append((top, col))
        top += 1
    return rows, pivots


def hermite_normal_form(rows: Sequence[Sequence[int]]) -> Tuple[IntVector, ...]:
    """Row-style HNF of the lattice spanned by ``rows`` (zero rows dropped)."""

    if not rows:
        return ()
    ncols = len(rows[0])
    reduced, pivots = _row_echelon([list(row) for row in rows], ncols)
    for p, col in pivots:
        pivot = reduced[p][col]
        for q in range(p):
            k = reduced[q][col] // pivot
            if k:
                reduced[q] = [u - k * v for u, v in zip(reduced[q], reduced[p])]
    return tuple(tuple(reduced[p]) for p, _ in pivots)


@dataclass(frozen=True)
class PointConfig:
    """The columns a_1..a_N of A, each an integer vector in Z^r."""

    columns: Tuple[IntVector, ...]

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]]) -> "PointConfig":
        return cls(tuple(tuple(int(v) for v in column) for column in columns))

    @property
    def rank(self) -> int:
        return len(self.columns[0])

    @property
    def size(self) -> int:
        return len(self.columns)

    def matrix(self) -> sympy.Matrix:
        return sympy.Matrix(self.rank, self.size, lambda i, j: self.columns[j][i])

    def submatrix(self, simplex: Sequence[int]) -> sympy.Matrix:
        """Columns with the given 1-based indices."""

        return sympy.Matrix.hstack(*(sympy.Matrix(self.columns[i - 1]) for i in simplex))

    def linear_form(self) -> RationalVector:
        """The h with h(a_i) = 1 for every column."""

        A = self.matrix()
        solution, params = A.T.gauss_jordan_solve(sympy.ones(self.size, 1))
        if params.shape[0]:
            solution = solution.subs({p: 0 for p in params})
        return tuple(_to_fraction(v) for v in solution)

    def validate(self) -> "PointConfig":
        try:
            h = self.linear_form()
        except ValueError as exc:
            raise InvalidConfiguration(f"No linear form is 1 on every column: {exc}") from exc
        logger.debug("Linear form h = %s", [str(v) for v in h])
        A = self.matrix()
        if A.rank() != self.rank:
            raise InvalidConfiguration("Columns of A do not span Q^r")
        minors_gcd = 0
        for subset in itertools.combinations(range(1, self.size + 1), self.rank):
            minors_gcd = sympy.gcd(minors_gcd, self.submatrix(subset).det())
            if minors_gcd == 1:
                return self
        raise InvalidConfiguration(f"Maximal minors of A have gcd {minors_gcd}, so ZA is not Z^r")

    def apply(self, vector: Sequence[Fraction]) -> RationalVector:
        """A times an N-vector."""

        return tuple(
            sum((Fraction(column[i]) * Fraction(v) for column, v in zip(self.columns, vector)), Fraction(0))
            for i in range(self.rank)
        )


@dataclass(frozen=True)
class LatticeBasis:
    """Rows b_1..b_d spanning the lattice of relations L."""

    rows: Tuple[IntVector, ...]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "LatticeBasis":
        return cls(tuple(tuple(int(v) for v in row) for row in rows))

    @property
    def dim(self) -> int:
        return len(self.rows)

    def matrix(self) -> sympy.Matrix:
        if not self.rows:
            return sympy.zeros(0, 0)
        return sympy.Matrix(self.rows)

    def combine(self, coordinates: Sequence[int]) -> IntVector:
        """B^T m for integer lattice coordinates m."""

        size = len(self.rows[0]) if self.rows else 0
        return tuple(sum(m * row[i] for m, row in zip(coordinates, self.rows)) for i in range(size))

    def canonical(self) -> Tuple[IntVector, ...]:
        return hermite_normal_form(self.rows)

    def spans_same_lattice(self, other: "LatticeBasis") -> bool:
        return self.canonical() == other.canonical()

    def is_primitive(self) -> bool:
        """All Smith invariant factors equal 1."""

        if not self.rows:
            return True
        snf = smith_normal_form(self.matrix(), domain=sympy.ZZ)
        diagonal = [snf[i, i] for i in range(min(snf.shape))]
        return all(abs(v) == 1 for v in diagonal)

    def coordinates(self, vector: Sequence[Fraction]) -> Optional[RationalVector]:
        """Rational m with B^T m = vector, or None outside the row span."""

        if not self.rows:
            return () if not any(vector) else None
        target = sympy.Matrix([sympy.Rational(v.numerator, v.denominator) for v in map(Fraction, vector)])
        try:
            solution, params = self.matrix().T.gauss_jordan_solve(target)
        except ValueError:
            return None
        if params.shape[0]:
            solution = solution.subs({p: 0 for p in params})
        return tuple(_to_fraction(v) for v in solution)


@dataclass(frozen=True)
class Triangulation:
    """Simplices as 1-based index sets into the columns of A."""

    simplices: Tuple[Tuple[int, ...], ...]

    @classmethod
    def from_lists(cls, simplices: Sequence[Sequence[int]]) -> "Triangulation":
        return cls(tuple(tuple(int(i) for i in simplex) for simplex in simplices))


def lattice_kernel(cfg: PointConfig) -> LatticeBasis:
    """Integer kernel of A, canonicalized to Hermite normal form."""

    size, rank = cfg.size, cfg.rank
    augmented = [list(cfg.columns[i]) + [1 if j == i else 0 for j in range(size)] for i in range(size)]
    reduced, pivots = _row_echelon(augmented, rank)
    kernel = [row[rank:] for row in reduced[len(pivots):]]
    basis = LatticeBasis(hermite_normal_form(kernel))
    logger.debug("Kernel of A has dimension %d", basis.dim)
    return basis


def simplex_determinant(cfg: PointConfig, simplex: Sequence[int]) -> int:
    return int(cfg.submatrix(simplex).det())


def simplex_volume(cfg: PointConfig, triangulation: Triangulation) -> int:
    total = 0
    for simplex in triangulation.simplices:
        det = simplex_determinant(cfg, simplex)
        if det == 0:
            raise SingularSimplex(f"Simplex {simplex} has determinant 0")
        total += abs(det)
    return total


def gamma_candidates(cfg: PointConfig, beta: Sequence[Fraction], simplex: Sequence[int]) -> List[RationalVector]:
    """The |det A_I| gamma vectors of a simplex, pairwise inequivalent modulo L."""

    det = simplex_determinant(cfg, simplex)
    if det == 0:
        raise SingularSimplex(f"Simplex {simplex} has determinant 0")
    inverse = cfg.submatrix(simplex).inv()
    inverse_q = [[_to_fraction(inverse[i, j]) for j in range(cfg.rank)] for i in range(cfg.rank)]
    inside = [i - 1 for i in simplex]
    outside = [j for j in range(cfg.size) if j not in inside]
    beta = [Fraction(b) for b in beta]

    found: List[RationalVector] = []
    seen_classes = set()
    for assignment in itertools.product(range(abs(det)), repeat=len(outside)):
        rhs = list(beta)
        for j, value in zip(outside, assignment):
            for i in range(cfg.rank):
                rhs[i] -= cfg.columns[j][i] * value
        solved = [sum((row[k] * rhs[k] for k in range(cfg.rank)), Fraction(0)) for row in inverse_q]
        residue_class = tuple(v - (v.numerator // v.denominator) for v in solved)
        if residue_class in seen_classes:
            continue
        seen_classes.add(residue_class)
        gamma = [Fraction(0)] * cfg.size
        for i, v in zip(inside, solved):
            gamma[i] = v
        for j, value in zip(outside, assignment):
            gamma[j] = Fraction(value)
        found.append(tuple(gamma))
        if len(found) == abs(det):
            break
    logger.debug("Simplex %s yields %d gamma vectors", tuple(simplex), len(found))
    return found


@dataclass(frozen=True)
class NormalityVerdict:
    normal_up_to_bound: bool
    bound: int
    counterexample: Optional[IntVector] = None

    def to_json(self) -> Dict[str, object]:
        return {
            "normal_up_to_bound": self.normal_up_to_bound,
            "bound": self.bound,
            "counterexample": list(self.counterexample) if self.counterexample else None,
        }


def normality_probe(cfg: PointConfig, bound: int) -> NormalityVerdict:
    """Check that cone lattice points with h <= bound are sums of columns."""

    if bound < 1:
        raise ValueError("bound must be at least 1")
    h = cfg.linear_form()
    cones = []
    for subset in itertools.combinations(range(1, cfg.size + 1), cfg.rank):
        sub = cfg.submatrix(subset)
        if sub.det() == 0:
            continue
        inverse = sub.inv()
        cones.append([[_to_fraction(inverse[i, j]) for j in range(cfg.rank)] for i in range(cfg.rank)])

    def in_cone(point: IntVector) -> bool:
        for inverse in cones:
            if all(sum((row[k] * point[k] for k in range(cfg.rank)), Fraction(0)) >= 0 for row in inverse):
                return True
        return False

    reach = max(abs(v) for column in cfg.columns for v in column)
    semigroup = {tuple(column) for column in cfg.columns}
    for level in range(1, bound + 1):
        if level > 1:
            semigroup = {tuple(s + a for s, a in zip(point, column)) for point in semigroup for column in cfg.columns}
        box = range(-level * reach, level * reach + 1)
        for point in itertools.product(box, repeat=cfg.rank):
            if sum((hv * p for hv, p in zip(h, point)), Fraction(0)) != level:
                continue
            if point not in semigroup and in_cone(point):
                logger.info("Normality probe found a hole at %s", point)
                return NormalityVerdict(False, bound, point)
    return NormalityVerdict(True, bound)
