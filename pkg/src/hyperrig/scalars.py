"""Exact scalar types used throughout the package.

Two kinds of numbers appear in the core:

* ``QI`` -- Gaussian rationals a + b*i with a, b plain ``Fraction``s.  All
  operator entries, inner products and residuals are QI; no floating point
  is ever introduced, so "residual is zero" is a decidable statement.
* ``Count`` -- cardinalities of vertex/edge classes: a non-negative integer
  or the single infinite value ``OMEGA``.  Addition and multiplication
  follow the usual absorption rules (n + omega = omega, 0 * omega = 0).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import MalformedInputError


@dataclass(frozen=True)
class QI:
    """Gaussian rational a + b*i."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @staticmethod
    def of(value: "QILike") -> "QI":
        if isinstance(value, QI):
            return value
        if isinstance(value, (int, Fraction)):
            return QI(Fraction(value))
        raise TypeError(f"cannot coerce {value!r} to QI")

    def __add__(self, other: "QILike") -> "QI":
        o = QI.of(other)
        return QI(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other: "QILike") -> "QI":
        o = QI.of(other)
        return QI(self.re - o.re, self.im - o.im)

    def __rsub__(self, other: "QILike") -> "QI":
        return QI.of(other) - self

    def __mul__(self, other: "QILike") -> "QI":
        o = QI.of(other)
        return QI(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other: "QILike") -> "QI":
        o = QI.of(other)
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by zero in QI")
        return QI((self.re * o.re + self.im * o.im) / d,
                  (self.im * o.re - self.re * o.im) / d)

    def __neg__(self) -> "QI":
        return QI(-self.re, -self.im)

    def conj(self) -> "QI":
        return QI(self.re, -self.im)

    def abs2(self) -> Fraction:
        """Squared modulus, an exact non-negative rational."""
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


QILike = Union[QI, int, Fraction]

QI_ZERO = QI()
QI_ONE = QI(Fraction(1))
QI_I = QI(Fraction(0), Fraction(1))


class _Omega:
    """The single countably infinite cardinality."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "OMEGA"

    def __reduce__(self):
        return (_Omega, ())


OMEGA = _Omega()

Count = Union[int, _Omega]


def is_finite(c: Count) -> bool:
    return isinstance(c, int)


def count_add(a: Count, b: Count) -> Count:
    if isinstance(a, int) and isinstance(b, int):
        return a + b
    return OMEGA


def count_mul(a: Count, b: Count) -> Count:
    if a == 0 or b == 0:
        return 0
    if isinstance(a, int) and isinstance(b, int):
        return a * b
    return OMEGA


def count_sum(items) -> Count:
    total: Count = 0
    for c in items:
        total = count_add(total, c)
    return total


# -- serialization helpers ---------------------------------------------------

def parse_count(obj) -> Count:
    if obj == "omega":
        return OMEGA
    if isinstance(obj, int) and not isinstance(obj, bool) and obj >= 1:
        return obj
    raise MalformedInputError(f"count must be a positive integer or \"omega\", got {obj!r}")


def emit_count(c: Count):
    return "omega" if not is_finite(c) else c


def parse_fraction(text) -> Fraction:
    if not isinstance(text, str):
        raise MalformedInputError(f"rational values must be strings, got {text!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise MalformedInputError(f"not a rational: {text!r}") from exc


def emit_fraction(f: Fraction) -> str:
    return str(f)


def parse_qi(obj) -> QI:
    if not (isinstance(obj, list) and len(obj) == 2):
        raise MalformedInputError(f"scalar must be a [re, im] pair of rational strings, got {obj!r}")
    return QI(parse_fraction(obj[0]), parse_fraction(obj[1]))


def emit_qi(z: QI) -> list:
    return [emit_fraction(z.re), emit_fraction(z.im)]
