"""Unit-tagged scalars for the environmental estimate formulas.

A Quantity carries a value and a (kg, m, s) dimension signature with rational
exponents.  Addition and comparison of unlike dimensions raise DimensionError
at construction/operation time, so a formula transcribed with wrong units
fails immediately instead of producing a silently wrong magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import DimensionError

Dims = tuple[Fraction, Fraction, Fraction]

DIMENSIONLESS: Dims = (Fraction(0), Fraction(0), Fraction(0))


def _dims(kg=0, m=0, s=0) -> Dims:
    return (Fraction(kg), Fraction(m), Fraction(s))


def _fmt(dims: Dims) -> str:
    if dims == DIMENSIONLESS:
        return "1"
    names = ("kg", "m", "s")
    parts = [f"{n}^{e}" for n, e in zip(names, dims) if e != 0]
    return "*".join(parts)


@dataclass(frozen=True)
class Quantity:
    value: float
    dims: Dims = DIMENSIONLESS

    def _check_same(self, other: "Quantity", op: str) -> None:
        if self.dims != other.dims:
            raise DimensionError(
                f"cannot {op} [{_fmt(self.dims)}] and [{_fmt(other.dims)}]"
            )

    @staticmethod
    def _coerce(x: Union["Quantity", float, int]) -> "Quantity":
        if isinstance(x, Quantity):
            return x
        return Quantity(float(x))

    def __add__(self, other):
        other = self._coerce(other)
        self._check_same(other, "add")
        return Quantity(self.value + other.value, self.dims)

    def __sub__(self, other):
        other = self._coerce(other)
        self._check_same(other, "subtract")
        return Quantity(self.value - other.value, self.dims)

    def __mul__(self, other):
        other = self._coerce(other)
        dims = tuple(a + b for a, b in zip(self.dims, other.dims))
        return Quantity(self.value * other.value, dims)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        dims = tuple(a - b for a, b in zip(self.dims, other.dims))
        return Quantity(self.value / other.value, dims)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, n: int):
        dims = tuple(a * n for a in self.dims)
        return Quantity(self.value**n, dims)

    def sqrt(self) -> "Quantity":
        dims = tuple(a / 2 for a in self.dims)
        return Quantity(self.value**0.5, dims)

    def __lt__(self, other):
        other = self._coerce(other)
        self._check_same(other, "compare")
        return self.value < other.value

    def __le__(self, other):
        other = self._coerce(other)
        self._check_same(other, "compare")
        return self.value <= other.value

    def __float__(self) -> float:
        if self.dims != DIMENSIONLESS:
            raise DimensionError(
                f"refusing to strip dimension [{_fmt(self.dims)}]; use .value"
            )
        return self.value

    def __repr__(self) -> str:
        return f"Quantity({self.value!r}, [{_fmt(self.dims)}])"


def kilograms(x: float) -> Quantity:
    return Quantity(float(x), _dims(kg=1))


def meters(x: float) -> Quantity:
    return Quantity(float(x), _dims(m=1))


def seconds(x: float) -> Quantity:
    return Quantity(float(x), _dims(s=1))


def per_cubic_meter(x: float) -> Quantity:
    return Quantity(float(x), _dims(m=-3))


def meters_per_second(x: float) -> Quantity:
    return Quantity(float(x), _dims(m=1, s=-1))


def momentum(x: float) -> Quantity:
    return Quantity(float(x), _dims(kg=1, m=1, s=-1))


def joule_seconds(x: float) -> Quantity:
    # J*s = kg m^2 / s
    return Quantity(float(x), _dims(kg=1, m=2, s=-1))
