"""Gamma-series of A-hypergeometric systems and the exact GKZ operator checks."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from hypercheck.services.geometry import IntVector, LatticeBasis, PointConfig, RationalVector
from hypercheck.services.pseries import ExponentGrid, PuiseuxSeries
from hypercheck.services.scalars import GaussianRational, invgamma_ratio

logger = logging.getLogger(__name__)


class OffsetUnsolvable(ValueError):
    """Raised when gamma - gamma_ref is not in the rational row span of B."""


@dataclass(frozen=True)
class TwistedSeries:
    """z**gamma * sum_m c(m) z**(B^T m), with ||m||_1 <= radius."""

    gamma: RationalVector
    basis: LatticeBasis
    coeffs: Dict[IntVector, GaussianRational] = field(compare=False)
    radius: int

    def coefficient(self, m: Sequence[int]) -> GaussianRational:
        m = tuple(m)
        if sum(abs(v) for v in m) > self.radius:
            raise ValueError(f"Lattice point {m} lies outside radius {self.radius}")
        return self.coeffs.get(m, GaussianRational(0))

    def to_json(self) -> Dict[str, object]:
        keys = sorted(self.coeffs, key=lambda m: (sum(abs(v) for v in m), m))
        return {
            "gamma": [str(g) for g in self.gamma],
            "basis": [list(row) for row in self.basis.rows],
            "radius": self.radius,
            "coefficients": [[list(m), self.coeffs[m].to_text()] for m in keys],
        }


def _l1_ball(dim: int, radius: int):
    for m in itertools.product(range(-radius, radius + 1), repeat=dim):
        if sum(abs(v) for v in m) <= radius:
            yield m


def gamma_series(cfg: PointConfig, basis: LatticeBasis, gamma: Sequence[Fraction], radius: int) -> TwistedSeries:
    """Normalized Gamma-series coefficients c(m) = prod_i Gamma(g_i+1)/Gamma(g_i+l_i+1)."""

    gamma = tuple(Fraction(g) for g in gamma)
    integral_slots = [i for i, g in enumerate(gamma) if g.denominator == 1 and g >= 0]
    coeffs: Dict[IntVector, GaussianRational] = {}
    for m in _l1_ball(basis.dim, radius):
        l = basis.combine(m)
        if any(gamma[i] + l[i] < 0 for i in integral_slots):
            continue
        value = Fraction(1)
        for g, step in zip(gamma, l):
            value *= invgamma_ratio(g, step)
            if value == 0:
                break
        if value:
            coeffs[m] = GaussianRational(value)
    logger.debug("Gamma-series at %s: %d non-zero coefficients", [str(g) for g in gamma], len(coeffs))
    return TwistedSeries(gamma, basis, coeffs, radius)


def _support_series(ts: TwistedSeries, offset: Sequence[Fraction]) -> PuiseuxSeries:
    grid = ExponentGrid.plain(ts.basis.dim)
    if not ts.coeffs:
        return PuiseuxSeries(grid, offset, {}, ts.radius + 1)
    lows = tuple(min(m[j] for m in ts.coeffs) for j in range(ts.basis.dim))
    coeffs = {tuple(v - low for v, low in zip(m, lows)): c for m, c in ts.coeffs.items()}
    shifted = tuple(Fraction(q) + low for q, low in zip(offset, lows))
    # terms are complete up to total degree radius measured from the origin of m
    return PuiseuxSeries(grid, shifted, coeffs, ts.radius + 1 - sum(lows))


def dehomogenize(ts: TwistedSeries, gamma_ref: Sequence[Fraction], signs: Optional[Sequence[int]] = None) -> PuiseuxSeries:
    """The series in lattice coordinates t with prefactor t**delta, gamma - gamma_ref = B^T delta."""

    difference = tuple(Fraction(g) - Fraction(q) for g, q in zip(ts.gamma, gamma_ref))
    delta = ts.basis.coordinates(difference)
    if delta is None:
        raise OffsetUnsolvable(
            f"gamma - gamma_ref = {[str(v) for v in difference]} is not in the row span of the lattice basis"
        )
    if any(m[j] < 0 for m in ts.coeffs for j in range(ts.basis.dim)):
        raise OffsetUnsolvable("Gamma-series support leaves the non-negative orthant of the lattice basis")
    series = _support_series(ts, delta)
    if signs is not None and any(s != 1 for s in signs):
        series = series.substitute_signs(signs)
    return series


@dataclass(frozen=True)
class HomogenizedSeries:
    """z**mu * S(t) with t_j = z**(b_j)."""

    mu: RationalVector
    basis: LatticeBasis
    S: PuiseuxSeries = field(compare=False)

    @classmethod
    def from_twisted(cls, ts: TwistedSeries) -> "HomogenizedSeries":
        return cls(ts.gamma, ts.basis, _support_series(ts, (0,) * ts.basis.dim))

    @classmethod
    def from_dehomogenized(
        cls,
        series: PuiseuxSeries,
        mu: Sequence[Fraction],
        basis: LatticeBasis,
        signs: Optional[Sequence[int]] = None,
    ) -> "HomogenizedSeries":
        if signs is not None and any(s != 1 for s in signs):
            series = series.substitute_signs(signs)
        return cls(tuple(Fraction(v) for v in mu), basis, series)


def _log_derivative(hs: HomogenizedSeries, i: int) -> PuiseuxSeries:
    """Series part of z_i d/dz_i applied to hs (mu unchanged)."""

    result = hs.S.scale(GaussianRational(hs.mu[i]))
    for j, row in enumerate(hs.basis.rows):
        if row[i]:
            result = result + hs.S.theta(j).scale(GaussianRational(row[i]))
    return result


def apply_partial(hs: HomogenizedSeries, i: int) -> HomogenizedSeries:
    """d/dz_i: mu -> mu - e_i, S -> (mu_i + sum_j B_ji theta_j) S."""

    mu = tuple(v - 1 if k == i else v for k, v in enumerate(hs.mu))
    return HomogenizedSeries(mu, hs.basis, _log_derivative(hs, i))


def _apply_power(hs: HomogenizedSeries, exponents: Sequence[int]) -> HomogenizedSeries:
    for i, count in enumerate(exponents):
        for _ in range(count):
            hs = apply_partial(hs, i)
    return hs


def structure_residual(hs: HomogenizedSeries, l: Sequence[int]) -> PuiseuxSeries:
    """(prod_{l_i<0} d_i^(-l_i) - prod_{l_i>0} d_i^(l_i)) hs, in the frame of the negative part."""

    m = hs.basis.coordinates([Fraction(v) for v in l])
    if m is None or any(v.denominator != 1 for v in m):
        raise ValueError(f"{tuple(l)} is not a lattice vector")
    positive = _apply_power(hs, [max(v, 0) for v in l])
    negative = _apply_power(hs, [max(-v, 0) for v in l])
    # z**mu_P = z**mu_Q * t**(-m)
    moved = positive.S.with_offset(tuple(q - v for q, v in zip(positive.S.offset, m)))
    return negative.S - moved


def euler_residual(hs: HomogenizedSeries, cfg: PointConfig, beta: Sequence[Fraction]) -> List[PuiseuxSeries]:
    """(sum_i a_ji z_i d_i - beta_j) hs for every row j of A."""

    derivatives = [_log_derivative(hs, i) for i in range(cfg.size)]
    residuals = []
    for j in range(cfg.rank):
        total = hs.S.scale(GaussianRational(-Fraction(beta[j])))
        for i, column in enumerate(cfg.columns):
            if column[j]:
                total = total + derivatives[i].scale(GaussianRational(column[j]))
        residuals.append(total)
    return residuals


def structure_generators(basis: LatticeBasis) -> List[IntVector]:
    """Basis rows together with their pairwise sums and differences."""

    generators: List[IntVector] = []
    for row in basis.rows:
        if row not in generators:
            generators.append(row)
    for a, b in itertools.combinations(basis.rows, 2):
        for combined in (tuple(x + y for x, y in zip(a, b)), tuple(x - y for x, y in zip(a, b))):
            if any(combined) and combined not in generators:
                generators.append(combined)
    return generators
