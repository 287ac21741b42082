from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass
from fractions import Fraction
from logging import getLogger
from typing import Final

import numpy as np
from numpy.typing import NDArray

from vnumra._core.common.grid import ComplexArray, Domain, Grid, SampledVectorFunction
from vnumra._core.lct import LctParams, lct_inverse
from vnumra._core.masks import DEFAULT_TOLERANCE, MaskBank, VectorMask, eval_symbol
from vnumra.exceptions import EllOutOfRange, GridError, NonConverged, NotNormalized

__all__ = (
    "CascadeResult",
    "RefinementResult",
    "phi_hat_product",
    "phi_refine",
    "phi_refine_converged",
    "phi_time",
    "psi_hat",
    "psi_time",
    "refinement_change",
    "refinement_window",
)

DEFAULT_ITERATIONS: Final[int] = 24
DEFAULT_CONVERGENCE: Final[float] = 1e-6
DEFAULT_DEPTH: Final[int] = 3
DEFAULT_REFINE_TOLERANCE: Final[float] = 1e-3
DEFAULT_MAX_DEPTH: Final[int] = 14

_MAX_CELLS: Final[int] = 1 << 20

logger = getLogger("vnumra")


@dataclass(frozen=True, slots=True)
class CascadeResult:
    phi_hat: SampledVectorFunction
    iterations: int
    convergence_metric: float
    history: tuple[float, ...] = ()
    threshold: float = DEFAULT_CONVERGENCE

    @property
    def grid(self) -> Grid:
        return self.phi_hat.grid

    @property
    def converged(self) -> bool:
        return self.convergence_metric <= self.threshold

    @property
    def monotone_tail(self) -> bool:
        tail = self.history[-3:]
        return all(later <= earlier for earlier, later in zip(tail, tail[1:]))


def _require_normalized(mask: VectorMask) -> None:
    deviation = float(np.linalg.norm(eval_symbol(mask, 0.0) - np.eye(mask.channels)))

    if deviation > DEFAULT_TOLERANCE:
        raise NotNormalized(
            f"Symbol at 0 deviates from the identity by {deviation:.3e}."
        )


def _product(
    mask: VectorMask,
    omegas: NDArray[np.float64],
    iterations: int,
) -> tuple[ComplexArray, list[float]]:
    if iterations < 1:
        raise ValueError(f"At least one iteration is required, got {iterations}.")

    dilation = mask.lattice.dilation
    product = np.broadcast_to(
        np.eye(mask.channels, dtype=np.complex128),
        (len(omegas), mask.channels, mask.channels),
    )
    history = []

    for m in range(1, iterations + 1):
        updated = product @ eval_symbol(mask, omegas / float(dilation) ** m)
        change = np.linalg.norm(updated - product, axis=(1, 2))
        history.append(float(change.max(initial=0.0)))
        product = updated

    return np.array(product), history


def phi_hat_product(
    mask: VectorMask,
    omega_grid: Grid,
    iterations: int = DEFAULT_ITERATIONS,
    *,
    threshold: float = DEFAULT_CONVERGENCE,
) -> CascadeResult:
    """
    Truncated infinite product `prod_{m=1}^{iterations} S(omega / (2N)^m)`, the `m = 1`
    factor leftmost.
    """

    _require_normalized(mask)
    values, history = _product(mask, omega_grid.points, iterations)
    metric = history[-1]
    logger.debug(f"Cascade: {iterations} iterations, last change {metric:.3e}.")

    if metric > threshold:
        raise NonConverged(metric, threshold)

    return CascadeResult(
        SampledVectorFunction(omega_grid, values, Domain.OMEGA),
        iterations,
        metric,
        tuple(history),
        threshold,
    )


def phi_time(
    mask: VectorMask,
    params: LctParams,
    time_grid: Grid,
    omega_grid: Grid,
    iterations: int = DEFAULT_ITERATIONS,
) -> SampledVectorFunction:
    """
    Time samples of the scaling function obtained from the frequency product through
    the inverse transform. `omega_grid` sets the spectral window in B-normalized units;
    the transform variable is `xi = 2πB omega`.
    """

    _require_normalized(mask)
    xi_grid = omega_grid.scaled(2.0 * math.pi * abs(params.b))
    xi = xi_grid.points
    values, history = _product(mask, xi / (2.0 * math.pi * params.b), iterations)

    if history[-1] > DEFAULT_CONVERGENCE:
        raise NonConverged(history[-1], DEFAULT_CONVERGENCE)

    spectrum = (
        params.normalization
        * np.exp(1j * params.d * xi**2 / (2.0 * params.b))[:, np.newaxis, np.newaxis]
        * values
    )
    chirped = lct_inverse(
        SampledVectorFunction(xi_grid, spectrum, Domain.OMEGA),
        time_grid,
        params,
    )
    t = time_grid.points
    dechirp = np.exp(1j * params.a * t**2 / (2.0 * params.b))
    return chirped.with_values(chirped.values * dechirp[:, np.newaxis, np.newaxis])


def psi_hat(
    bank: MaskBank,
    phi: CascadeResult,
    ell: int,
    omega_grid: Grid | None = None,
) -> SampledVectorFunction:
    """
    `Psi_ell^(2N omega) = H_ell(omega) Phi^(omega)`, sampled on the `2N`-dilated grid.
    """

    if not 1 <= ell <= len(bank.wavelets):
        raise EllOutOfRange(f"ell must lie in [1, {len(bank.wavelets)}], got {ell}.")

    grid = phi.grid if omega_grid is None else omega_grid

    if grid == phi.grid:
        values = phi.phi_hat.values
    else:
        values, _ = _product(bank.scaling, grid.points, phi.iterations)

    product = eval_symbol(bank.wavelet(ell), grid.points) @ values
    return SampledVectorFunction(grid.scaled(bank.lattice.dilation), product, Domain.OMEGA)


"""
Time-domain refinement
"""


def refinement_window(masks: Iterable[VectorMask]) -> tuple[Fraction, Fraction]:
    """
    Interval holding every cascade iterate started from the fundamental domain, with
    ends on `(1/N)Z`.
    """

    masks = tuple(masks)
    lattice = masks[0].lattice
    spread = lattice.dilation - 1
    domain = lattice.fundamental_domain()
    points = [point.value for mask in masks for point in mask.points]
    lo = min(Fraction(0), min(points, default=Fraction(0)) / spread)
    hi = max(domain[-1][1], max(points, default=Fraction(0)) / spread)
    n = lattice.n
    return Fraction(math.floor(lo * n), n), Fraction(math.ceil(hi * n), n)


def _cell_step(mask: VectorMask, depth: int) -> Fraction:
    n = mask.lattice.n
    return Fraction(1, n * mask.lattice.dilation ** (depth + 1))


def _refine_step(
    values: ComplexArray,
    grid: Grid,
    mask: VectorMask,
    lo: Fraction,
    step: Fraction,
) -> ComplexArray:
    """
    Cell averages of `sqrt(2N) sum_lambda G_lambda F(2N t - lambda)`.
    """

    dilation = mask.lattice.dilation
    count = grid.count
    k = np.arange(count)[:, np.newaxis]
    i = np.arange(dilation)[np.newaxis, :]
    refined = np.zeros_like(values)
    padded = np.concatenate([values, np.zeros_like(values[:1])])

    for point, matrix in mask:
        offset = ((dilation - 1) * lo - point.value) / step
        index = int(offset) + dilation * k + i
        index = np.where((index >= 0) & (index < count), index, count)
        mean = padded[index].mean(axis=1)
        refined += math.sqrt(dilation) * np.einsum("ab,kbc->kac", matrix, mean)

    return refined


def phi_refine(
    mask: VectorMask,
    depth: int = DEFAULT_DEPTH,
    *,
    window: tuple[Fraction, Fraction] | None = None,
) -> SampledVectorFunction:
    """
    Cell averages of the `depth`-th refinement iterate of the indicator of the
    fundamental domain, on cells of width `1 / (N (2N)^(depth + 1))`.
    """

    if depth < 0:
        raise ValueError(f"Depth must be non-negative, got {depth}.")

    _require_normalized(mask)
    lo, hi = refinement_window((mask,)) if window is None else window
    step = _cell_step(mask, depth)
    count = int((hi - lo) / step)
    grid = Grid(float(lo), float(step), count)
    inside = np.zeros(count, dtype=bool)

    for start, stop in mask.lattice.fundamental_domain():
        inside[int((start - lo) / step) : int((stop - lo) / step)] = True

    identity = np.eye(mask.channels, dtype=np.complex128)
    values = inside[:, np.newaxis, np.newaxis] * identity

    for _ in range(depth):
        values = _refine_step(values, grid, mask, lo, step)

    return SampledVectorFunction(grid, values, Domain.TIME)


@dataclass(frozen=True, slots=True)
class RefinementResult:
    cells: SampledVectorFunction
    depth: int
    change: float
    threshold: float = DEFAULT_REFINE_TOLERANCE

    @property
    def converged(self) -> bool:
        return self.change <= self.threshold


def refinement_change(
    coarse: SampledVectorFunction,
    fine: SampledVectorFunction,
) -> float:
    """
    L2 distance between `coarse` and `fine` averaged back onto the cells of `coarse`.
    """

    ratio, remainder = divmod(fine.grid.count, coarse.grid.count)

    if remainder or ratio < 1:
        raise GridError(
            f"{fine.grid.count} cells don't refine {coarse.grid.count} cells."
        )

    averaged = fine.values.reshape(coarse.grid.count, ratio, *coarse.values.shape[1:])
    difference = averaged.mean(axis=1) - coarse.values
    return math.sqrt(coarse.grid.step * float(np.sum(np.abs(difference) ** 2)))


def phi_refine_converged(
    mask: VectorMask,
    depth: int = DEFAULT_DEPTH,
    *,
    window: tuple[Fraction, Fraction] | None = None,
    threshold: float = DEFAULT_REFINE_TOLERANCE,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> RefinementResult:
    """
    `phi_refine` from `depth` on, one level deeper at a time, until an iterate is within
    `threshold` of the next one in L2.
    """

    window = refinement_window((mask,)) if window is None else window
    cells = phi_refine(mask, depth, window=window)
    change = math.inf

    while depth < max_depth and cells.grid.count * mask.lattice.dilation <= _MAX_CELLS:
        finer = phi_refine(mask, depth + 1, window=window)
        change = refinement_change(cells, finer)
        logger.debug(f"Refinement depth {depth}: change {change:.3e}.")

        if change <= threshold:
            return RefinementResult(cells, depth, change, threshold)

        cells, depth = finer, depth + 1

    raise NonConverged(change, threshold)


def psi_time(
    bank: MaskBank,
    ell: int,
    depth: int = DEFAULT_DEPTH,
    *,
    window: tuple[Fraction, Fraction] | None = None,
    phi: SampledVectorFunction | None = None,
) -> SampledVectorFunction:
    """
    One refinement step with `H_ell` of the depth-`depth` scaling cells over `window`
    (the bank window by default); `phi` reuses cells already computed for that depth
    and window.
    """

    if not 1 <= ell <= len(bank.wavelets):
        raise EllOutOfRange(f"ell must lie in [1, {len(bank.wavelets)}], got {ell}.")

    lo, hi = refinement_window(bank) if window is None else window
    step = _cell_step(bank.scaling, depth)

    if phi is None:
        phi = phi_refine(bank.scaling, depth, window=(lo, hi))
    elif phi.grid.count != int((hi - lo) / step) or phi.grid.step != float(step):
        raise GridError(f"Scaling cells on {phi.grid} don't match depth {depth}.")

    values = _refine_step(phi.values, phi.grid, bank.wavelet(ell), lo, step)
    return phi.with_values(values)
