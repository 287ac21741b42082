from __future__ import annotations

import math
from collections.abc import Iterator
from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction
from typing import Self, override

import numpy as np
from numpy.typing import ArrayLike

from vnumra._core.common.grid import ComplexArray
from vnumra._core.lct import LctParams
from vnumra.exceptions import (
    EvenR,
    NonPositiveN,
    NotCoprime,
    ROutOfRange,
    ShiftNotOnLattice,
)

__all__ = (
    "Coset",
    "Lattice",
    "LatticePoint",
    "chirp_factor",
    "enumerate_lambda",
    "validate_lattice",
)

type Rational = Fraction | int


class Coset(StrEnum):
    ZERO = "0"
    R_OVER_N = "r/N"


@dataclass(frozen=True, slots=True)
class LatticePoint:
    base: Coset
    translate: int
    value: Fraction

    def __float__(self) -> float:
        return float(self.value)

    def __lt__(self, other: LatticePoint) -> bool:
        return self.value < other.value

    @override
    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, slots=True)
class Lattice:
    """
    Translation set `{0, r/N} + 2Z` with `1 <= r <= 2N - 1`, `r` odd and coprime to `N`.
    """

    n: int
    r: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise NonPositiveN(f"N must be at least 1, got {self.n}.")

        if self.r % 2 == 0:
            raise EvenR(f"r must be odd, got {self.r}.")

        if not 1 <= self.r <= 2 * self.n - 1:
            raise ROutOfRange(f"r must lie in [1, {2 * self.n - 1}], got {self.r}.")

        if math.gcd(self.r, self.n) != 1:
            raise NotCoprime(f"r = {self.r} and N = {self.n} aren't coprime.")

    def __contains__(self, value: object) -> bool:
        if isinstance(value, LatticePoint):
            value = value.value

        if not isinstance(value, Fraction | int):
            return False

        try:
            self.locate(value)
        except ShiftNotOnLattice:
            return False

        return True

    @property
    def dilation(self) -> int:
        return 2 * self.n

    @property
    def offset(self) -> Fraction:
        return Fraction(self.r, self.n)

    @property
    def period(self) -> int:
        """
        Period of `2N * Lambda` seen as a translation set: `{0, 2r} + 4NZ`.
        """

        return 4 * self.n

    def point(self, base: Coset, translate: int) -> LatticePoint:
        value = 2 * translate + (self.offset if base == Coset.R_OVER_N else 0)
        return LatticePoint(base, translate, Fraction(value))

    def locate(self, value: Rational) -> LatticePoint:
        value = Fraction(value)

        for base, shift in ((Coset.ZERO, Fraction(0)), (Coset.R_OVER_N, self.offset)):
            even = value - shift

            if even.denominator == 1 and even.numerator % 2 == 0:
                return LatticePoint(base, even.numerator // 2, value)

        raise ShiftNotOnLattice(f"{value} doesn't belong to {{0, {self.offset}}} + 2Z.")

    def enumerate(self, lo: int, hi: int) -> list[LatticePoint]:
        points = (
            self.point(base, k) for k in range(lo, hi + 1) for base in tuple(Coset)
        )
        return sorted(points, key=lambda point: point.value)

    def refine(self, point: LatticePoint) -> Fraction:
        return self.dilation * point.value

    def iter_between(self, lo: Rational, hi: Rational) -> Iterator[LatticePoint]:
        """
        Every lattice point in the closed interval `[lo, hi]`, ascending.
        """

        k_lo = math.floor((Fraction(lo) - self.offset) / 2)
        k_hi = math.ceil(Fraction(hi) / 2)

        for point in self.enumerate(k_lo, k_hi):
            if lo <= point.value <= hi:
                yield point

    def fundamental_domain(self) -> tuple[tuple[Fraction, Fraction], ...]:
        """
        Intervals `[2kr/N mod 2, 2kr/N mod 2 + 1/N)`, `0 <= k < N`, whose
        Lambda-translates tile the real line.
        """

        width = Fraction(1, self.n)
        starts = sorted((2 * k * self.offset) % 2 for k in range(self.n))
        return tuple((start, start + width) for start in starts)

    @classmethod
    def classical(cls) -> Self:
        return cls(1, 1)


def validate_lattice(n: int, r: int) -> Lattice:
    return Lattice(n, r)


def enumerate_lambda(lattice: Lattice, lo: int, hi: int) -> list[LatticePoint]:
    return lattice.enumerate(lo, hi)


def chirp_factor(
    t: ArrayLike,
    lam: LatticePoint | Rational | float,
    params: LctParams,
) -> ComplexArray:
    """
    `exp(-iπ (A/B) (t² - λ²))`, unit modulus.
    """

    t = np.asarray(t, dtype=np.float64)
    lam = float(lam)
    return np.exp(-1j * np.pi * params.chirp_ratio() * (t**2 - lam**2))
