from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Literal, Self

import numpy as np
from numpy.typing import ArrayLike, NDArray

from vnumra.exceptions import ChannelMismatch, EmptyGrid, GridError

__all__ = ("ComplexArray", "Domain", "Grid", "SampledVectorFunction")

type ComplexArray = NDArray[np.complex128]
type RealArray = NDArray[np.float64]


class Domain(StrEnum):
    TIME = "time"
    OMEGA = "omega"

    @property
    def code(self) -> int:
        return tuple(type(self)).index(self)

    @classmethod
    def from_code(cls, code: int) -> Domain:
        return tuple(cls)[code]

    @classmethod
    def get_default(cls) -> Domain:
        return cls.TIME


type DomainStr = Literal["time", "omega"]


@dataclass(frozen=True, slots=True)
class Grid:
    """
    Uniform sampling grid: `start + k * step` for `0 <= k < count`.
    """

    start: float
    step: float
    count: int

    def __post_init__(self) -> None:
        if self.count < 1:
            raise EmptyGrid("A grid needs at least one point.")

        if not (self.step > 0 and math.isfinite(self.step)):
            raise GridError(f"Grid step must be positive, got {self.step!r}.")

    def __len__(self) -> int:
        return self.count

    @property
    def points(self) -> RealArray:
        return self.start + self.step * np.arange(self.count, dtype=np.float64)

    @property
    def stop(self) -> float:
        return self.start + self.step * (self.count - 1)

    @property
    def length(self) -> float:
        return self.step * self.count

    def dual(self, b: float) -> Grid:
        """
        Centered frequency grid on which the rectangle-rule LCT with parameter `b`
        is unitary: same count, `step * dual.step = 2π|b| / count`.
        """

        step = 2.0 * math.pi * abs(b) / (self.count * self.step)
        return type(self)(-(self.count // 2) * step, step, self.count)

    def scaled(self, factor: float) -> Grid:
        if factor <= 0:
            raise GridError(f"Scale factor must be positive, got {factor!r}.")

        return type(self)(self.start * factor, self.step * factor, self.count)

    def index_of(self, x: ArrayLike) -> NDArray[np.int64]:
        """
        Index of the cell `[start + k*step, start + (k+1)*step)` holding each `x`.
        """

        position = (np.asarray(x, dtype=np.float64) - self.start) / self.step
        return np.floor(position + 1e-9).astype(np.int64)

    @classmethod
    def from_bounds(
        cls,
        lo: float,
        hi: float,
        count: int,
        *,
        endpoint: bool = False,
    ) -> Self:
        if count < 1:
            raise EmptyGrid("A grid needs at least one point.")

        if hi <= lo:
            raise GridError(f"Empty interval [{lo}, {hi}].")

        divisions = count - 1 if endpoint else count
        step = (hi - lo) / max(divisions, 1)
        return cls(lo, step, count)

    @classmethod
    def parse(cls, text: str) -> Self:
        try:
            start, step, count = text.split(",")
            return cls(float(start), float(step), int(count))
        except ValueError as exc:
            if isinstance(exc, GridError):
                raise

            raise GridError(f"`{text}` isn't `start,step,count`.") from exc


@dataclass(frozen=True, slots=True)
class SampledVectorFunction:
    """
    M-channel complex samples on a uniform grid.
    `values` is `count x M` for vector-valued functions and `count x M x M` for
    matrix-valued ones (rows of each sample are the component functions).
    """

    grid: Grid
    values: ComplexArray
    domain: Domain = field(default_factory=Domain.get_default)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.complex128)

        if values.ndim == 1:
            values = values[:, np.newaxis]

        if values.ndim not in (2, 3) or values.shape[0] != self.grid.count:
            raise ChannelMismatch(
                f"Expected {self.grid.count} samples, got shape {values.shape}."
            )

        if values.ndim == 3 and values.shape[1] != values.shape[2]:
            raise ChannelMismatch(f"Matrix samples must be square, got {values.shape}.")

        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def channels(self) -> int:
        return self.values.shape[1]

    @property
    def is_matrix(self) -> bool:
        return self.values.ndim == 3

    def norm(self) -> float:
        return math.sqrt(self.grid.step * float(np.sum(np.abs(self.values) ** 2)))

    def inner(self, other: SampledVectorFunction) -> complex:
        if other.values.shape != self.values.shape:
            raise ChannelMismatch(
                f"Shapes differ: {self.values.shape} and {other.values.shape}."
            )

        return complex(self.grid.step * np.sum(self.values * np.conj(other.values)))

    def column(self, j: int) -> SampledVectorFunction:
        if not self.is_matrix:
            raise ChannelMismatch("Only matrix-valued samples have columns.")

        return type(self)(self.grid, self.values[:, :, j], self.domain)

    def with_values(self, values: ArrayLike) -> SampledVectorFunction:
        return type(self)(self.grid, np.asarray(values), self.domain)

    @classmethod
    def zeros(
        cls,
        grid: Grid,
        channels: int,
        domain: Domain | DomainStr = Domain.get_default(),
    ) -> Self:
        return cls(grid, np.zeros((grid.count, channels), np.complex128), Domain(domain))

    @classmethod
    def from_function(
        cls,
        grid: Grid,
        function: Callable[[RealArray], ArrayLike],
        domain: Domain | DomainStr = Domain.get_default(),
    ) -> Self:
        return cls(grid, np.asarray(function(grid.points)), Domain(domain))
