"""Exact Gaussian-rational scalars and the reciprocal-Gamma ratio kernel."""

from __future__ import annotations

import logging
import re
from fractions import Fraction
from math import isqrt
from typing import Optional, Union

from sympy import integer_nthroot

logger = logging.getLogger(__name__)

RationalLike = Union[int, Fraction]

_RATIONAL = r"\d+(?:/\d+)?"
_GAUSSIAN_PATTERN = re.compile(
    rf"^(?P<re>[+-]?{_RATIONAL})?"
    rf"(?:(?P<sign>[+-])?(?P<im>{_RATIONAL})?\*?i)?$"
)


class DegenerateBase(ValueError):
    """Raised when a Gamma-series base exponent is a negative integer."""


def parse_rational(text: str) -> Fraction:
    """Parse a "p/q" or "p" literal into a Fraction."""

    cleaned = text.strip()
    if not re.fullmatch(r"[+-]?\d+(?:/\d+)?", cleaned):
        raise ValueError(f"Not a rational literal: {text!r}")
    value = Fraction(cleaned)
    return value


def _exact_sqrt(value: Fraction) -> Optional[Fraction]:
    if value < 0:
        return None
    num, den = value.numerator, value.denominator
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn != num or rd * rd != den:
        return None
    return Fraction(rn, rd)


def _exact_root(value: Fraction, degree: int) -> Optional[Fraction]:
    """Exact positive real root of a positive rational, if it exists."""

    if value <= 0:
        return None

    def _int_root(n: int) -> Optional[int]:
        root, exact = integer_nthroot(n, degree)
        return int(root) if exact else None

    rn = _int_root(value.numerator)
    rd = _int_root(value.denominator)
    if rn is None or rd is None:
        return None
    return Fraction(rn, rd)


class GaussianRational:
    """An exact complex number a + b*i with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: RationalLike = 0, im: RationalLike = 0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, value: Union["GaussianRational", RationalLike]) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        return cls(value)

    @classmethod
    def parse(cls, text: str) -> "GaussianRational":
        """Parse literals such as "3", "-1/2", "i", "2/3*i" or "1/2-3/4*i"."""

        cleaned = text.replace(" ", "")
        match = _GAUSSIAN_PATTERN.match(cleaned)
        if not cleaned or not match:
            raise ValueError(f"Not a Gaussian rational literal: {text!r}")
        real, sign, imag = match.group("re", "sign", "im")
        if not cleaned.endswith("i"):
            return cls(Fraction(real))
        if sign is None:
            if real is not None and imag is not None:
                raise ValueError(f"Not a Gaussian rational literal: {text!r}")
            # "i", "-i", "2/3*i": the leading number is the imaginary part
            coefficient = real if real is not None else imag
            if coefficient is None:
                return cls(0, 1)
            return cls(0, Fraction(coefficient))
        im_value = Fraction(imag) if imag else Fraction(1)
        if sign == "-":
            im_value = -im_value
        return cls(Fraction(real or 0), im_value)

    @classmethod
    def from_sympy(cls, value) -> "GaussianRational":
        """Convert an exact sympy number (rational or Gaussian rational)."""

        import sympy

        real, imag = sympy.re(value), sympy.im(value)
        if not (real.is_Rational and imag.is_Rational):
            raise ValueError(f"Not an exact Gaussian rational: {value}")
        return cls(Fraction(int(real.p), int(real.q)), Fraction(int(imag.p), int(imag.q)))

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __add__(self, other):
        other = _as_gaussian(other)
        if other is NotImplemented:
            return other
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_gaussian(other)
        if other is NotImplemented:
            return other
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _as_gaussian(other)
        if other is NotImplemented:
            return other
        return other - self

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return GaussianRational(self.re * other, self.im * other)
        other = _as_gaussian(other)
        if other is NotImplemented:
            return other
        if other.im == 0:
            return GaussianRational(self.re * other.re, self.im * other.re)
        if self.im == 0:
            return GaussianRational(self.re * other.re, self.re * other.im)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def inverse(self) -> "GaussianRational":
        if self.is_zero():
            raise ZeroDivisionError("Gaussian rational division by zero")
        if self.im == 0:
            return GaussianRational(1 / self.re)
        n = self.norm()
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        other = _as_gaussian(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = _as_gaussian(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, exponent: int) -> "GaussianRational":
        if not isinstance(exponent, int):
            return NotImplemented
        base = self if exponent >= 0 else self.inverse()
        result = GaussianRational(1)
        for _ in range(abs(exponent)):
            result = result * base
        return result

    def __eq__(self, other) -> bool:
        other = _as_gaussian(other)
        if other is NotImplemented:
            return False
        return self.re == other.re and self.im == other.im

    def __hash__(self) -> int:
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self) -> bool:
        return not self.is_zero()

    def sqrt(self, branch: int = 1) -> Optional["GaussianRational"]:
        """Exact square root, or None when it is not a Gaussian rational.

        The canonical root has positive real part, ties broken by a positive
        imaginary part; branch -1 returns its negative.
        """

        if self.is_zero():
            return GaussianRational(0)
        modulus = _exact_sqrt(self.norm())
        if modulus is None:
            return None
        a = _exact_sqrt((self.re + modulus) / 2)
        b = _exact_sqrt((modulus - self.re) / 2)
        if a is None or b is None:
            return None
        if self.im < 0:
            b = -b
        root = GaussianRational(a, b)
        if root.re < 0 or (root.re == 0 and root.im < 0):
            root = -root
        return root if branch >= 0 else -root

    def power(self, alpha: Fraction, branch: int = 1) -> Optional["GaussianRational"]:
        """c**alpha when exactly representable, else None."""

        alpha = Fraction(alpha)
        if alpha.denominator == 1:
            return self ** int(alpha)
        if alpha.denominator == 2:
            root = self.sqrt(branch)
            return None if root is None else root ** alpha.numerator
        if self.im == 0 and self.re > 0:
            root = _exact_root(self.re, alpha.denominator)
            if root is not None:
                return GaussianRational(root) ** alpha.numerator
        if self == 1:
            return GaussianRational(1)
        return None

    def to_text(self) -> str:
        if self.im == 0:
            return str(self.re)
        imag = "i" if self.im == 1 else "-i" if self.im == -1 else f"{self.im}*i"
        if self.re == 0:
            return imag
        if imag.startswith("-"):
            return f"{self.re}{imag}"
        return f"{self.re}+{imag}"

    def to_json(self) -> list:
        return [str(self.re), str(self.im)]

    @classmethod
    def from_json(cls, payload) -> "GaussianRational":
        return cls(Fraction(payload[0]), Fraction(payload[1]))

    def __repr__(self) -> str:
        return f"GaussianRational({self.to_text()})"

    __str__ = to_text


def _as_gaussian(value):
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, (int, Fraction)):
        return GaussianRational(value)
    return NotImplemented


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I = GaussianRational(0, 1)


def invgamma_ratio(gamma: RationalLike, l: int) -> Fraction:
    """Gamma(gamma+1) / Gamma(gamma+l+1) as an exact rational.

    Reciprocal Gamma vanishes at non-positive integers, so the ratio is an
    exact zero whenever gamma+l+1 is one of them.
    """

    gamma = Fraction(gamma)
    if gamma.denominator == 1 and gamma < 0:
        raise DegenerateBase(f"Base exponent {gamma} is a negative integer")
    if l >= 0:
        denominator = Fraction(1)
        for j in range(1, l + 1):
            denominator *= gamma + j
        return 1 / denominator
    product = Fraction(1)
    for j in range(-l):
        factor = gamma - j
        if factor == 0:
            return Fraction(0)
        product *= factor
    return product


def is_resonant(r: RationalLike) -> bool:
    """True when 2r is an integer."""

    return (2 * Fraction(r)).denominator == 1
