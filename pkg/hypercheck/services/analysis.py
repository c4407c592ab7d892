"""Verification layer: Gamma-series bases, decompositions, family verdicts and f/g extraction."""

from __future__ import annotations

import itertools
import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import sympy

from hypercheck.services.closedforms import (
    AlgRoot,
    FamilySpec,
    Recipe,
    RecipeEvaluator,
    Ref,
    SeedNotRoot,
    get_family,
    load_family_file,
)
from hypercheck.services.gammaseries import (
    HomogenizedSeries,
    dehomogenize,
    euler_residual,
    gamma_series,
    structure_generators,
    structure_residual,
)
from hypercheck.services.geometry import gamma_candidates, simplex_determinant
from hypercheck.services.homops import annihilation_check, apply_theta_op
from hypercheck.services.pseries import EXACT_ORDER, ExponentGrid, Mismatch, PuiseuxSeries
from hypercheck.services.scalars import ZERO, GaussianRational, is_resonant

logger = logging.getLogger(__name__)

CHECK_NAMES = (
    "evaluation",
    "horn-annihilation",
    "gkz-structure",
    "gkz-euler",
    "basis-identity",
    "defining-relations",
    "power-relation",
)

Branches = Dict[str, int]

# Failures of exact arithmetic while expanding a closed form.
EVALUATION_ERRORS = (ArithmeticError, RuntimeError, SeedNotRoot)


class RankDeficient(RuntimeError):
    """Raised when the basis is not independent on the available monomials."""


class ResidualNonzero(RuntimeError):
    """Raised when a decomposition leaves a non-zero residual."""

    def __init__(self, message: str, certificate: Mismatch, coefficients: List[GaussianRational]):
        super().__init__(message)
        self.certificate = certificate
        self.coefficients = coefficients


class ResonantParameter(ValueError):
    """Raised when 2r is an integer."""


def ensure_nonresonant(*values: Fraction) -> None:
    for value in values:
        if is_resonant(value):
            raise ResonantParameter(f"r = {value} is resonant (2r is an integer)")


# ----------------------------------------------------------------------
# branch assignments
# ----------------------------------------------------------------------
def parse_branches(text: str) -> Branches:
    """Parse "s1=+,pm1=-" into {"s1": 1, "pm1": -1}."""

    branches: Branches = {}
    for item in filter(None, (piece.strip() for piece in text.split(","))):
        slot, sep, sign = item.partition("=")
        if not sep or sign.strip() not in ("+", "-", "+1", "-1"):
            raise ValueError(f"Malformed branch assignment {item!r}; expected slot=+ or slot=-")
        branches[slot.strip()] = -1 if sign.strip().startswith("-") else 1
    return branches


def format_branches(branches: Optional[Mapping[str, int]]) -> str:
    if not branches:
        return "-"
    return ",".join(f"{slot}={'+' if sign > 0 else '-'}" for slot, sign in branches.items())


def branch_assignments(slots: Sequence[str]) -> List[Branches]:
    """Every sign choice over the slots, all-plus first."""

    return [dict(zip(slots, signs)) for signs in itertools.product((1, -1), repeat=len(slots))]


# ----------------------------------------------------------------------
# results
# ----------------------------------------------------------------------
@dataclass
class CheckResult:
    name: str
    passed: bool
    verified_order: Optional[int] = None
    detail: str = ""
    certificate: Optional[Dict[str, Any]] = None

    def to_json(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "verified_order": self.verified_order,
            "detail": self.detail,
            "certificate": self.certificate,
        }

    @classmethod
    def from_json(cls, payload: Mapping[str, Any]) -> "CheckResult":
        return cls(
            payload["name"],
            bool(payload["passed"]),
            payload.get("verified_order"),
            payload.get("detail", ""),
            payload.get("certificate"),
        )


@dataclass
class BranchVerdict:
    branches: Branches
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def certificate(self) -> Optional[Dict[str, Any]]:
        for check in self.checks:
            if not check.passed:
                return dict(check.certificate or {}, check=check.name)
        return None

    def to_json(self) -> Dict[str, Any]:
        return {
            "branch": format_branches(self.branches),
            "passed": self.passed,
            "checks": [check.to_json() for check in self.checks],
        }

    @classmethod
    def from_json(cls, payload: Mapping[str, Any]) -> "BranchVerdict":
        branches = parse_branches(payload["branch"]) if payload["branch"] != "-" else {}
        return cls(branches, [CheckResult.from_json(c) for c in payload["checks"]])


@dataclass
class Verdict:
    """Outcome of one family at one r: the validating branch or the first certificate."""

    family: str
    r: Fraction
    order: int
    attempts: List[BranchVerdict] = field(default_factory=list)
    validated: bool = True
    coefficients: Optional[List[GaussianRational]] = None
    empirical: Optional[Dict[str, Any]] = None

    @property
    def winner(self) -> Optional[BranchVerdict]:
        for attempt in self.attempts:
            if attempt.passed:
                return attempt
        return None

    @property
    def passed(self) -> bool:
        return self.winner is not None

    @property
    def as_expected(self) -> bool:
        return self.passed == self.validated

    @property
    def branch(self) -> Optional[Branches]:
        winner = self.winner
        return winner.branches if winner else None

    @property
    def checks(self) -> List[CheckResult]:
        chosen = self.winner or (self.attempts[0] if self.attempts else None)
        return chosen.checks if chosen else []

    @property
    def certificate(self) -> Optional[Dict[str, Any]]:
        if self.passed or not self.attempts:
            return None
        return dict(self.attempts[0].certificate or {}, branch=format_branches(self.attempts[0].branches))

    def to_json(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "r": str(self.r),
            "order": self.order,
            "passed": self.passed,
            "validated": self.validated,
            "branch": format_branches(self.branch) if self.passed else None,
            "checks": [check.to_json() for check in self.checks],
            "certificate": self.certificate,
            "coefficients": [c.to_text() for c in self.coefficients] if self.coefficients is not None else None,
            "attempts": [attempt.to_json() for attempt in self.attempts],
            "empirical": self.empirical,
        }

    @classmethod
    def from_json(cls, payload: Mapping[str, Any]) -> "Verdict":
        coefficients = payload.get("coefficients")
        return cls(
            family=payload["family"],
            r=Fraction(payload["r"]),
            order=int(payload["order"]),
            attempts=[BranchVerdict.from_json(a) for a in payload.get("attempts", [])],
            validated=bool(payload.get("validated", True)),
            coefficients=[GaussianRational.parse(c) for c in coefficients] if coefficients is not None else None,
            empirical=payload.get("empirical"),
        )


def _mismatch_certificate(mismatch: Mismatch, **extra: Any) -> Dict[str, Any]:
    return dict(mismatch.to_json(), **extra)


def error_certificate(exc: Exception) -> Dict[str, Any]:
    certificate: Dict[str, Any] = {"error": type(exc).__name__, "message": str(exc)}
    monomial = getattr(exc, "monomial", None)
    if monomial is not None:
        certificate["monomial"] = [str(q) for q in monomial]
    coefficient = getattr(exc, "coefficient", None)
    if coefficient is not None:
        certificate["coefficient"] = coefficient.to_text()
    nested = getattr(exc, "certificate", None)
    if isinstance(nested, Mismatch):
        certificate.update(nested.to_json())
    return certificate


# ----------------------------------------------------------------------
# bases and decompositions
# ----------------------------------------------------------------------
def _radius(family: FamilySpec, order: int) -> int:
    """Lattice radius whose Gamma-series reach ``order`` on the family grid."""

    return -(-order // family.grid.unit) + 1


def build_basis(family: FamilySpec, r: Fraction, order: int) -> List[PuiseuxSeries]:
    """One dehomogenized Gamma-series per gamma vector, then the Horn-only monomials."""

    r = Fraction(r)
    ensure_nonresonant(r)
    gammas = family.gammas(r)
    radius = _radius(family, order)
    reference = gammas[0]
    basis = []
    for gamma in gammas:
        ts = gamma_series(family.config, family.lattice, gamma, radius)
        series = dehomogenize(ts, reference, family.signs)
        basis.append(series.regrid(series.grid.join(family.grid)).with_order(order))
    basis.extend(family.extra_monomials(r, order))
    logger.debug("%s basis at r = %s: %d elements", family.label, r, len(basis))
    return basis


def _frame(series: Sequence[PuiseuxSeries]) -> List[PuiseuxSeries]:
    """Bring every series to one grid and one offset."""

    base = tuple(min(s.offset[j] for s in series) for j in range(series[0].nvars))
    anchor = PuiseuxSeries(ExponentGrid.plain(series[0].nvars), base, {}, EXACT_ORDER)
    for s in series:
        anchor, _ = PuiseuxSeries.align(anchor, s)
    return [PuiseuxSeries.align(anchor, s)[1] for s in series]


def combine(coefficients: Sequence[GaussianRational], basis: Sequence[PuiseuxSeries]) -> PuiseuxSeries:
    total: Optional[PuiseuxSeries] = None
    for c, b in zip(coefficients, basis):
        term = b.scale(c)
        total = term if total is None else total + term
    return total


def decompose(target: PuiseuxSeries, basis: Sequence[PuiseuxSeries]) -> List[GaussianRational]:
    """Exact coefficients of target in the span of basis, re-checked on every known monomial."""

    if not basis:
        raise RankDeficient("Empty basis")
    framed = _frame([target, *basis])
    target_f, basis_f = framed[0], framed[1:]
    grid = target_f.grid
    order = min(s.order for s in framed)
    keys = sorted(
        {e for s in framed for e in s.coeffs if grid.weight(e) < order},
        key=lambda e: (grid.weight(e), e),
    )
    size = len(basis_f)
    pivots: List[Tuple[int, List[GaussianRational]]] = []
    for key in keys:
        row = [b.coeffs.get(key, ZERO) for b in basis_f] + [target_f.coeffs.get(key, ZERO)]
        for col, pivot_row in pivots:
            factor = row[col]
            if factor:
                row = [a - factor * b for a, b in zip(row, pivot_row)]
        lead = next((j for j in range(size) if row[j]), None)
        if lead is None:
            continue
        inverse = row[lead].inverse()
        row = [v * inverse for v in row]
        pivots = [
            (col, [a - prow[lead] * b for a, b in zip(prow, row)]) if prow[lead] else (col, prow)
            for col, prow in pivots
        ]
        pivots.append((lead, row))
        if len(pivots) == size:
            break
    if len(pivots) < size:
        raise RankDeficient(f"Basis of {size} series has rank {len(pivots)} below weight {order}")

    coefficients = [ZERO] * size
    for col, prow in pivots:
        coefficients[col] = prow[size]
    residual = combine(coefficients, basis).first_mismatch(target)
    if residual is not None:
        raise ResidualNonzero(
            f"Target leaves a residual at {[str(q) for q in residual.monomial]}",
            residual,
            coefficients,
        )
    return coefficients


# ----------------------------------------------------------------------
# individual checks
# ----------------------------------------------------------------------
def _horn_check(family: FamilySpec, phi: PuiseuxSeries, basis: Sequence[PuiseuxSeries], r: Fraction) -> CheckResult:
    orders = []
    for label, series in [("closed form", phi)] + [(f"basis[{k}]", b) for k, b in enumerate(basis)]:
        for op in family.horn_operators():
            verdict = annihilation_check(op, series, r)
            if not verdict.annihilated:
                return CheckResult(
                    "horn-annihilation",
                    False,
                    verdict.verified_order,
                    f"{op.source} does not annihilate the {label}",
                    _mismatch_certificate(verdict.mismatch, operator=op.source, series=label),
                )
            orders.append(verdict.verified_order)
    return CheckResult("horn-annihilation", True, min(orders), f"{len(family.horn)} operators on {1 + len(basis)} series")


def _gkz_targets(
    family: FamilySpec, phi: Optional[PuiseuxSeries], r: Fraction, order: int
) -> List[Tuple[str, HomogenizedSeries]]:
    gammas = family.gammas(r)
    radius = _radius(family, order)
    targets = [
        (f"gamma[{k}]", HomogenizedSeries.from_twisted(gamma_series(family.config, family.lattice, gamma, radius)))
        for k, gamma in enumerate(gammas)
    ]
    if phi is not None and family.gkz_route:
        targets.append(("closed form", HomogenizedSeries.from_dehomogenized(phi, gammas[0], family.lattice, family.signs)))
    return targets


def gkz_checks(
    family: FamilySpec, r: Fraction, order: int, phi: Optional[PuiseuxSeries] = None
) -> Tuple[CheckResult, CheckResult]:
    """Structure and Euler residuals of every Gamma-series (and of the homogenized closed form)."""

    r = Fraction(r)
    targets = _gkz_targets(family, phi, r, order)
    generators = structure_generators(family.lattice)
    beta = family.beta_at(r)

    structure = CheckResult("gkz-structure", True, detail=f"{len(generators)} lattice vectors on {len(targets)} series")
    orders = []
    for label, hs in targets:
        for l in generators:
            residual = structure_residual(hs, l)
            if not residual.is_zero():
                monomial, coefficient = residual.terms()[0]
                structure = CheckResult(
                    "gkz-structure",
                    False,
                    residual.order,
                    f"box operator for {list(l)} leaves a residual on the {label}",
                    _mismatch_certificate(Mismatch(monomial, coefficient, ZERO), lattice_vector=list(l), series=label),
                )
                break
            orders.append(residual.order)
        if not structure.passed:
            break
    if structure.passed:
        structure.verified_order = min(orders) if orders else None

    euler = CheckResult("gkz-euler", True, detail=f"{family.config.rank} rows on {len(targets)} series")
    orders = []
    for label, hs in targets:
        for row, residual in enumerate(euler_residual(hs, family.config, beta)):
            if not residual.is_zero():
                monomial, coefficient = residual.terms()[0]
                euler = CheckResult(
                    "gkz-euler",
                    False,
                    residual.order,
                    f"Euler row {row + 1} leaves a residual on the {label}",
                    _mismatch_certificate(Mismatch(monomial, coefficient, ZERO), row=row + 1, series=label),
                )
                break
            orders.append(residual.order)
        if not euler.passed:
            break
    if euler.passed:
        euler.verified_order = min(orders) if orders else None
    return structure, euler


def _identity_check(
    family: FamilySpec, phi: PuiseuxSeries, basis: Sequence[PuiseuxSeries], r: Fraction
) -> Tuple[CheckResult, Optional[List[GaussianRational]]]:
    try:
        found = decompose(phi, basis)
    except (RankDeficient, ResidualNonzero) as exc:
        return CheckResult("basis-identity", False, detail=str(exc), certificate=error_certificate(exc)), None
    order = min(s.order for s in [phi, *basis])
    expected = family.coefficient_values(r)
    if expected is None:
        return CheckResult("basis-identity", True, order, "decomposition exists; no registry coefficients"), found
    if len(expected) != len(found):
        return (
            CheckResult(
                "basis-identity",
                False,
                order,
                f"registry lists {len(expected)} coefficients for a basis of {len(found)}",
            ),
            found,
        )
    for k, (want, got) in enumerate(zip(expected, found)):
        if want != got:
            return (
                CheckResult(
                    "basis-identity",
                    False,
                    order,
                    f"coefficient {k + 1} differs from the registry",
                    {"index": k + 1, "expected": want.to_text(), "found": got.to_text()},
                ),
                found,
            )
    return CheckResult("basis-identity", True, order, "coefficients match the registry"), found


def _algroot_nodes(nodes: Iterable[Recipe]) -> List[AlgRoot]:
    found: List[AlgRoot] = []

    def visit(node):
        if isinstance(node, AlgRoot) and node not in found:
            found.append(node)
        for child in getattr(node, "coeffs", ()) or ():
            visit(child)
        for attr in ("terms", "factors"):
            for child in getattr(node, attr, ()):
                visit(child)
        for attr in ("operand", "base"):
            child = getattr(node, attr, None)
            if child is not None:
                visit(child)

    for node in nodes:
        visit(node)
    return found


def polynomial_residual(
    node: AlgRoot, evaluator: RecipeEvaluator, root: PuiseuxSeries, order: int
) -> PuiseuxSeries:
    """sum_i c_i * root**i for the coefficients of an algebraic-root recipe."""

    coeffs = [evaluator.evaluate(c, order) for c in node.coeffs]
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * root + c
    return acc


def _relations_check(family: FamilySpec, evaluator: RecipeEvaluator, order: int) -> CheckResult:
    compiled = family.compiled()
    count = 0
    for lhs, rhs in compiled.relations:
        left, right = evaluator.evaluate(lhs, order), evaluator.evaluate(rhs, order)
        mismatch = left.first_mismatch(right)
        if mismatch is not None:
            return CheckResult("defining-relations", False, order, "declared relation fails", _mismatch_certificate(mismatch))
        count += 1
    for node in _algroot_nodes(compiled.nodes.values()):
        residual = polynomial_residual(node, evaluator, evaluator.evaluate(node, order), order)
        if not residual.is_zero():
            monomial, coefficient = residual.terms()[0]
            return CheckResult(
                "defining-relations",
                False,
                residual.order,
                "algebraic root does not satisfy its polynomial",
                _mismatch_certificate(Mismatch(monomial, coefficient, ZERO)),
            )
        count += 1
    if family.discriminant is not None:
        computed, expected = family.discriminant_exprs()
        ratio = sympy.cancel(computed / expected)
        if not (ratio.is_number and ratio != 0):
            return CheckResult(
                "defining-relations",
                False,
                None,
                "discriminant differs from the declared one",
                {"computed": str(sympy.expand(computed)), "expected": str(expected)},
            )
        count += 1
    return CheckResult("defining-relations", True, order, f"{count} relations hold")


def power_relation_residual(
    phi_r: PuiseuxSeries, phi_s: PuiseuxSeries, phi_mid: PuiseuxSeries
) -> Optional[Mismatch]:
    """First monomial where phi(r) * phi(s) and phi((r+s)/2)**2 differ."""

    return (phi_r * phi_s).first_mismatch(phi_mid * phi_mid)


def _closed_power_check(
    family: FamilySpec, r: Fraction, s: Fraction, order: int, branches: Optional[Branches]
) -> CheckResult:
    mid = (r + s) / 2
    values = [family.evaluate(t, order, branches) for t in (r, s, mid)]
    mismatch = power_relation_residual(*values)
    if mismatch is not None:
        return CheckResult(
            "power-relation", False, order, f"closed route at r = {r}, s = {s}", _mismatch_certificate(mismatch)
        )
    return CheckResult("power-relation", True, order, f"closed route at r = {r}, s = {s}")


def basis_combination(family: FamilySpec, r: Fraction, order: int) -> PuiseuxSeries:
    """Phi(r) as the registry coefficient combination of the Gamma-series basis."""

    coefficients = family.coefficient_values(r)
    if coefficients is None:
        raise ValueError(f"{family.label} has no registry coefficients")
    return combine(coefficients, build_basis(family, r, order))


def power_relation_check(
    family: FamilySpec,
    r: Fraction,
    s: Fraction,
    order: int,
    branches: Optional[Branches] = None,
    route: str = "closed",
) -> Verdict:
    """Phi(r) * Phi(s) against Phi((r+s)/2)**2, from recipes or from the Gamma-series basis."""

    r, s = Fraction(r), Fraction(s)
    branches = branches if branches is not None else dict.fromkeys(family.slots(), 1)
    try:
        if route == "closed":
            check = _closed_power_check(family, r, s, order, branches)
        elif route == "basis":
            ensure_nonresonant(r, s, (r + s) / 2)
            values = [basis_combination(family, t, order) for t in (r, s, (r + s) / 2)]
            mismatch = power_relation_residual(*values)
            check = CheckResult(
                "power-relation",
                mismatch is None,
                order,
                f"basis route at r = {r}, s = {s}",
                _mismatch_certificate(mismatch) if mismatch else None,
            )
        else:
            raise ValueError(f"Unknown route {route!r}; expected closed or basis")
    except (ArithmeticError, RuntimeError) as exc:
        check = CheckResult("power-relation", False, None, str(exc), error_certificate(exc))
    return Verdict(family.label, r, order, [BranchVerdict(branches, [check])], family.validated)


# ----------------------------------------------------------------------
# family verification
# ----------------------------------------------------------------------
POWER_PARTNERS = (Fraction(1, 5), Fraction(2, 7))


def _guarded(name: str, check) -> List[CheckResult]:
    """Run a check, turning arithmetic failures into a failing result."""

    try:
        result = check()
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        return [CheckResult(name, False, None, str(exc), error_certificate(exc))]
    return list(result) if isinstance(result, tuple) else [result]


def _verify_branch(
    family: FamilySpec,
    r: Fraction,
    order: int,
    branches: Branches,
    basis: Sequence[PuiseuxSeries],
    gamma_gkz: List[CheckResult],
) -> Tuple[BranchVerdict, Optional[List[GaussianRational]]]:
    verdict = BranchVerdict(dict(branches))
    try:
        phi = family.evaluate(r, order, branches)
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        verdict.checks.append(CheckResult("evaluation", False, None, str(exc), error_certificate(exc)))
        return verdict, None
    verdict.checks.append(CheckResult("evaluation", True, phi.order, f"{len(phi.coeffs)} terms"))

    if family.horn:
        verdict.checks.extend(_guarded("horn-annihilation", lambda: _horn_check(family, phi, basis, r)))
    if family.gkz_route:
        verdict.checks.extend(_guarded("gkz-structure", lambda: gkz_checks(family, r, order, phi)))
    else:
        verdict.checks.extend(gamma_gkz)
    evaluator = family.evaluator(r, branches)
    verdict.checks.extend(_guarded("defining-relations", lambda: _relations_check(family, evaluator, order)))

    identity, found = _identity_check(family, phi, basis, r)
    verdict.checks.append(identity)
    if family.power_form:
        partner = next(p for p in POWER_PARTNERS if p != r)
        verdict.checks.extend(
            _guarded("power-relation", lambda: _closed_power_check(family, r, partner, order, branches))
        )
    return verdict, found


def verify_family(
    family: FamilySpec,
    r: Fraction,
    order: int,
    branches: Optional[Branches] = None,
    fallback_pairs: Optional[Sequence[Tuple[Fraction, Fraction]]] = None,
) -> Verdict:
    """Search branch assignments until every check passes, keeping each attempt."""

    r = Fraction(r)
    ensure_nonresonant(r)
    verdict = Verdict(family.label, r, order, validated=family.validated)
    try:
        basis = build_basis(family, r, order)
    except (ArithmeticError, ValueError) as exc:
        attempt = BranchVerdict(dict(branches or {}))
        attempt.checks.append(CheckResult("basis-identity", False, None, str(exc), error_certificate(exc)))
        verdict.attempts.append(attempt)
        return verdict

    gamma_gkz = [] if family.gkz_route else _guarded("gkz-structure", lambda: gkz_checks(family, r, order))
    assignments = [branches] if branches is not None else branch_assignments(family.slots())
    for assignment in assignments:
        logger.info("Verifying %s at r = %s, branch %s", family.label, r, format_branches(assignment))
        attempt, found = _verify_branch(family, r, order, assignment, basis, gamma_gkz)
        verdict.attempts.append(attempt)
        if attempt.passed:
            verdict.coefficients = found
            break
        logger.warning(
            "%s fails under branch %s: %s", family.label, format_branches(assignment), attempt.certificate
        )

    if not verdict.passed and fallback_pairs and family.coefficients is not None:
        try:
            verdict.empirical = fg_consistency(family, fallback_pairs, min(order, 10)).to_json()
        except (ArithmeticError, RuntimeError, ValueError) as exc:
            verdict.empirical = error_certificate(exc)
    logger.info("%s at r = %s: %s", family.label, r, "pass" if verdict.passed else "fail")
    return verdict


# ----------------------------------------------------------------------
# f and g from the Gamma-series side
# ----------------------------------------------------------------------
def extract_fg(family: FamilySpec, r1: Fraction, r2: Fraction, order: int) -> Tuple[PuiseuxSeries, PuiseuxSeries]:
    """f = (Phi(r1)/Phi(r2))**(1/(r1-r2)) and g = Phi(r1) * f**(-r1)."""

    r1, r2 = Fraction(r1), Fraction(r2)
    if r1 == r2:
        raise ValueError("extract_fg needs two different r values")
    phi1 = basis_combination(family, r1, order)
    phi2 = basis_combination(family, r2, order)
    f = (phi1 / phi2).pow_rational(1 / (r1 - r2))
    g = phi1 * f.pow_rational(-r1)
    return f, g


@dataclass
class FgReport:
    family: str
    pairs: List[Tuple[Fraction, Fraction]]
    f: PuiseuxSeries
    g: PuiseuxSeries
    checks: List[CheckResult]

    @property
    def consistent(self) -> bool:
        return all(check.passed for check in self.checks)

    def to_json(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "pairs": [[str(a), str(b)] for a, b in self.pairs],
            "consistent": self.consistent,
            "f": self.f.to_json(),
            "g": self.g.to_json(),
            "checks": [check.to_json() for check in self.checks],
        }


def fg_consistency(
    family: FamilySpec,
    pairs: Sequence[Tuple[Fraction, Fraction]],
    order: int,
    branches: Optional[Branches] = None,
) -> FgReport:
    """Extract f and g for every pair and check they agree, rebuild Phi, and match the declared f and g."""

    pairs = [(Fraction(a), Fraction(b)) for a, b in pairs]
    if not pairs:
        raise ValueError("fg_consistency needs at least one (r1, r2) pair")
    f, g = extract_fg(family, *pairs[0], order)
    checks: List[CheckResult] = []
    for a, b in pairs[1:]:
        f2, g2 = extract_fg(family, a, b, order)
        mismatch = f.first_mismatch(f2) or g.first_mismatch(g2)
        checks.append(
            CheckResult(
                "pair-independence",
                mismatch is None,
                min(f.order, f2.order),
                f"({a}, {b}) against ({pairs[0][0]}, {pairs[0][1]})",
                _mismatch_certificate(mismatch) if mismatch else None,
            )
        )
    for t in sorted({v for pair in pairs for v in pair}):
        rebuilt = f.pow_rational(t) * g
        mismatch = rebuilt.first_mismatch(basis_combination(family, t, order))
        checks.append(
            CheckResult(
                "reconstruction",
                mismatch is None,
                rebuilt.order,
                f"f**r * g against Phi at r = {t}",
                _mismatch_certificate(mismatch) if mismatch else None,
            )
        )
    compiled = family.compiled()
    if compiled.fg:
        evaluator = family.evaluator(pairs[0][0], branches or dict.fromkeys(family.slots(), 1))
        for key, empirical in (("f", f), ("g", g)):
            if key not in compiled.fg:
                continue
            declared = evaluator.evaluate(compiled.fg[key], order)
            mismatch = empirical.first_mismatch(declared)
            checks.append(
                CheckResult(
                    f"declared-{key}",
                    mismatch is None,
                    min(empirical.order, declared.order),
                    f"empirical {key} against the declared recipe",
                    _mismatch_certificate(mismatch) if mismatch else None,
                )
            )
        node = compiled.fg.get("f")
        if isinstance(node, Ref):
            node = compiled.nodes.get(node.name)
        if isinstance(node, AlgRoot):
            residual = polynomial_residual(node, evaluator, f, order)
            checks.append(
                CheckResult(
                    "f-polynomial",
                    residual.is_zero(),
                    residual.order,
                    "empirical f against the defining polynomial",
                    None if residual.is_zero() else _mismatch_certificate(Mismatch(*residual.terms()[0], ZERO)),
                )
            )
    return FgReport(family.label, pairs, f, g, checks)


# ----------------------------------------------------------------------
# rank census
# ----------------------------------------------------------------------
@dataclass
class CensusReport:
    family: str
    volume: int
    per_simplex: List[Tuple[Tuple[int, ...], int, int]]
    extra_solutions: int
    gamma_checks: bool
    extra_checks: List[Dict[str, Any]] = field(default_factory=list)
    sampled_r: List[Fraction] = field(default_factory=list)

    @property
    def gamma_total(self) -> int:
        return sum(count for _, _, count in self.per_simplex)

    @property
    def horn_rank(self) -> int:
        return self.gamma_total + self.extra_solutions

    def to_json(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "volume": self.volume,
            "simplices": [
                {"simplex": list(simplex), "determinant": det, "gammas": count}
                for simplex, det, count in self.per_simplex
            ],
            "gamma_total": self.gamma_total,
            "extra_solutions": self.extra_solutions,
            "horn_rank": self.horn_rank,
            "gamma_checks": self.gamma_checks,
            "extra_checks": self.extra_checks,
            "sampled_r": [str(t) for t in self.sampled_r],
        }


CENSUS_R = Fraction(1, 3)
CENSUS_SAMPLES = 6


def sample_nonresonant(rng: random.Random, count: int, max_denominator: int = 60) -> List[Fraction]:
    """Random rationals in (-3, 3) with 2r not an integer."""

    values: List[Fraction] = []
    while len(values) < count:
        q = rng.randint(2, max_denominator)
        r = Fraction(rng.randint(-3 * q + 1, 3 * q - 1), q)
        if not is_resonant(r) and r not in values:
            values.append(r)
    return values


def rank_census(
    family: FamilySpec, order: int = 6, samples: int = CENSUS_SAMPLES, seed: Optional[int] = 0
) -> CensusReport:
    """Volume, gamma-vector counts per simplex, and the Horn-only solutions.

    A*gamma = beta is checked at ``samples`` random non-resonant r drawn
    from a generator seeded with ``seed``.
    """

    r = CENSUS_R
    sampled = sample_nonresonant(random.Random(seed), samples)
    logger.debug("Census of %s at r in %s", family.label, [str(t) for t in sampled])
    beta = family.beta_at(r)
    per_simplex = [
        (simplex, simplex_determinant(family.config, simplex), len(gamma_candidates(family.config, beta, simplex)))
        for simplex in family.triangulation.simplices
    ]
    gamma_checks = all(
        family.config.apply(gamma) == family.beta_at(t) for t in sampled for gamma in family.gammas(t)
    )
    extra_checks = []
    for k, monomial in enumerate(family.extra_monomials(r, order)):
        annihilated = all(
            apply_theta_op(op, monomial, r).is_zero() for op in family.horn_operators()
        )
        reference = family.gammas(r)[0]
        mu = tuple(
            g + sum((q * row[i] for q, row in zip(monomial.offset, family.lattice.rows)), Fraction(0))
            for i, g in enumerate(reference)
        )
        hs = HomogenizedSeries(mu, family.lattice, monomial.with_offset((0,) * monomial.nvars))
        structure_nonzero = any(not structure_residual(hs, l).is_zero() for l in structure_generators(family.lattice))
        extra_checks.append(
            {
                "index": k + 1,
                "offset": [str(q) for q in monomial.offset],
                "horn_annihilated": annihilated,
                "gkz_structure_nonzero": structure_nonzero,
            }
        )
    return CensusReport(
        family.label,
        family.volume,
        per_simplex,
        len(family.horn_extra),
        gamma_checks,
        extra_checks,
        sampled,
    )


# ----------------------------------------------------------------------
# fan-out over the acceptance matrix
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class VerifyTask:
    name: str
    r: Fraction
    order: int
    fc_n: int = 2
    variant: Optional[str] = None
    family_file: Optional[str] = None
    fallback_pairs: Tuple[Tuple[Fraction, Fraction], ...] = ()


def _run_task(task: VerifyTask) -> Dict[str, Any]:
    extra = load_family_file(task.family_file) if task.family_file else ()
    family = get_family(task.name, task.fc_n, task.variant, extra)
    return verify_family(family, task.r, task.order, fallback_pairs=task.fallback_pairs or None).to_json()


def verify_all(tasks: Sequence[VerifyTask], workers: Optional[int] = None) -> List[Verdict]:
    """Run every task, one process each, and return verdicts in task order."""

    if not tasks:
        return []
    workers = max(1, min(workers or 1, len(tasks)))
    logger.info("Running %d verification tasks on %d workers", len(tasks), workers)
    if workers == 1:
        payloads = [_run_task(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            payloads = list(pool.map(_run_task, tasks))
    return [Verdict.from_json(payload) for payload in payloads]
