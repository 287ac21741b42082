from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from logging import getLogger
from typing import Final, Self

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import fft

from vnumra._core.common.grid import (
    ComplexArray,
    Domain,
    Grid,
    SampledVectorFunction,
)
from vnumra.exceptions import DegenerateB, GridError, NotUnimodular

__all__ = (
    "LctParams",
    "lct_forward",
    "lct_forward_fast",
    "lct_inverse",
    "lct_kernel",
    "validate_params",
)

UNIMODULAR_TOLERANCE: Final[float] = 1e-12
COMPOSITION_TOLERANCE: Final[float] = 1e-10

_ROW_CHUNK: Final[int] = 1024

logger = getLogger("vnumra")


@dataclass(frozen=True, slots=True)
class LctParams:
    """
    Unimodular parameter matrix `(a, b; c, d)` of a linear canonical transform.
    Only the `b != 0` branch is supported.
    """

    a: float
    b: float
    c: float
    d: float
    tolerance: float = UNIMODULAR_TOLERANCE

    def __post_init__(self) -> None:
        if self.b == 0:
            raise DegenerateB("B = 0 reduces the transform to a chirp scaling.")

        determinant = self.determinant

        if not abs(determinant - 1.0) <= self.tolerance:
            raise NotUnimodular(determinant)

    def __matmul__(self, other: LctParams) -> LctParams:
        return self.compose(other)

    @property
    def determinant(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def matrix(self) -> NDArray[np.float64]:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=np.float64)

    @property
    def normalization(self) -> complex:
        """
        `(2πiB)^(-1/2)` on the principal branch.
        """

        return cmath.exp(-0.5 * cmath.log(2j * math.pi * self.b))

    @property
    def is_fourier(self) -> bool:
        return self.a == 0 and self.d == 0 and self.b == 1 and self.c == -1

    def inverse(self) -> LctParams:
        return type(self)(self.d, -self.b, -self.c, self.a, self.tolerance)

    def compose(self, other: LctParams) -> LctParams:
        return type(self).from_matrix(
            self.matrix @ other.matrix,
            tolerance=COMPOSITION_TOLERANCE,
        )

    def chirp_ratio(self) -> float:
        return self.a / self.b

    @classmethod
    def from_matrix(
        cls,
        matrix: ArrayLike,
        *,
        tolerance: float = UNIMODULAR_TOLERANCE,
    ) -> Self:
        (a, b), (c, d) = np.asarray(matrix, dtype=np.float64)
        return cls(float(a), float(b), float(c), float(d), tolerance)

    @classmethod
    def fourier(cls) -> Self:
        return cls(0.0, 1.0, -1.0, 0.0)


def validate_params(a: float, b: float, c: float, d: float) -> LctParams:
    return LctParams(float(a), float(b), float(c), float(d))


def lct_kernel(t: ArrayLike, xi: ArrayLike, params: LctParams) -> ComplexArray:
    t = np.asarray(t, dtype=np.float64)
    xi = np.asarray(xi, dtype=np.float64)
    phase = (params.a * t**2 - 2.0 * t * xi + params.d * xi**2) / (2.0 * params.b)
    return params.normalization * np.exp(1j * phase)


def lct_forward(
    f: SampledVectorFunction,
    out_grid: Grid,
    params: LctParams,
) -> SampledVectorFunction:
    """
    Rectangle-rule quadrature `sum_k f(t_k) K(t_k, xi_j) step` for every output point,
    applied channel by channel. Dense reference path.
    """

    t = f.grid.points
    xi = out_grid.points
    source = f.values.reshape(f.grid.count, -1)

    if not np.all(np.isfinite(source)):
        raise GridError("Samples must be finite.")

    chirped = source * np.exp(1j * params.a * t**2 / (2.0 * params.b))[:, np.newaxis]
    out = np.empty((out_grid.count, source.shape[1]), dtype=np.complex128)

    for lo in range(0, out_grid.count, _ROW_CHUNK):
        rows = xi[lo : lo + _ROW_CHUNK]
        exponent = np.exp(-1j * np.outer(rows, t) / params.b)
        out[lo : lo + _ROW_CHUNK] = exponent @ chirped

    out *= (
        params.normalization
        * f.grid.step
        * np.exp(1j * params.d * xi**2 / (2.0 * params.b))
    )[:, np.newaxis]

    domain = Domain.OMEGA if f.domain == Domain.TIME else Domain.TIME
    return SampledVectorFunction(
        out_grid,
        out.reshape((out_grid.count, *f.values.shape[1:])),
        domain,
    )


def lct_inverse(
    F: SampledVectorFunction,  # noqa: N803
    out_grid: Grid,
    params: LctParams,
) -> SampledVectorFunction:
    """
    Inverse transform: the forward transform with parameters `(d, -b, -c, a)`.
    With principal square roots its kernel is the complex conjugate of the forward one.
    """

    return lct_forward(F, out_grid, params.inverse())


def lct_forward_fast(
    f: SampledVectorFunction,
    params: LctParams,
) -> SampledVectorFunction:
    """
    Chirp-multiply / FFT / chirp-multiply evaluation of `lct_forward` on the dual grid
    `f.grid.dual(params.b)`.
    """

    grid = f.grid
    out_grid = grid.dual(params.b)
    n = grid.count
    t = grid.points
    xi = out_grid.points
    source = f.values.reshape(n, -1)

    pre = np.exp(
        1j * params.a * t**2 / (2.0 * params.b)
        - 1j * np.arange(n) * grid.step * out_grid.start / params.b
    )
    spread = source * pre[:, np.newaxis]

    if params.b > 0:
        spectrum = fft.fft(spread, axis=0)
    else:
        spectrum = fft.ifft(spread, axis=0) * n

    post = (
        params.normalization
        * grid.step
        * np.exp(1j * (params.d * xi**2 / 2.0 - grid.start * xi) / params.b)
    )
    out = spectrum * post[:, np.newaxis]
    logger.debug(f"Fast LCT on {n} samples, {source.shape[1]} channel(s).")

    domain = Domain.OMEGA if f.domain == Domain.TIME else Domain.TIME
    return SampledVectorFunction(
        out_grid,
        out.reshape((n, *f.values.shape[1:])),
        domain,
    )
