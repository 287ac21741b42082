from __future__ import annotations

import math
from collections.abc import Sequence
from fractions import Fraction
from logging import getLogger
from typing import Final

import numpy as np
import scipy.linalg
import scipy.optimize
from numpy.typing import NDArray

from vnumra._core.common.grid import ComplexArray, Grid
from vnumra._core.lattice import Lattice
from vnumra._core.masks import (
    DEFAULT_FIT_TOLERANCE,
    MaskBank,
    MaskRole,
    VectorMask,
    check_filterbank,
    check_frequency_identity,
)
from vnumra.exceptions import CertificationFailed, CompletionFailed

__all__ = ("complete_wavelet_masks",)

_NEGLIGIBLE: Final[float] = 1e-13
_RANK_TOLERANCE: Final[float] = 1e-10
_RESTARTS: Final[int] = 8
_SEED: Final[int] = 0

logger = getLogger("vnumra")


def _shifts(lattice: Lattice, values: Sequence[Fraction]) -> list[int]:
    """
    Elements `d` of `2N (Lambda - Lambda) = {0, ±2r} + 4NZ` with `|d|` within the span of
    `values`, ascending.
    """

    if not values:
        return [0]

    span = math.floor(values[-1] - values[0])
    period = lattice.period
    residues = {0, (2 * lattice.r) % period, (-2 * lattice.r) % period}
    return [d for d in range(-span, span + 1) if d % period in residues]


def _targets(values: Sequence[Fraction], shift: int) -> list[tuple[int, int]]:
    index = {value: i for i, value in enumerate(values)}
    return [
        (i, index[value + shift]) for i, value in enumerate(values) if value + shift in index
    ]


def _constraints(
    g: VectorMask,
    values: Sequence[Fraction],
    shifts: Sequence[int],
) -> ComplexArray:
    """
    Rows `sum_m conj(G_m[a]) x(m + d) = 0` for every shift `d` and row `a` of `G`, acting
    on a row sequence `x` on the support of `G` flattened as `(point, channel)`.
    """

    size = g.channels
    system = np.zeros((len(shifts) * size, len(values) * size), np.complex128)

    for row, shift in enumerate(shifts):
        block = system[row * size : (row + 1) * size]

        for source, target in _targets(values, shift):
            block[:, target * size : (target + 1) * size] += g.matrices[source].conj()

    return system


def _shifted_gram(
    basis: ComplexArray,
    values: Sequence[Fraction],
    shift: int,
    size: int,
) -> ComplexArray:
    """
    `Gamma_d[j, i] = <b_i, S_d b_j>` with `(S_d y)(m) = y(m + d)`.
    """

    sequences = basis.reshape(len(values), size, -1)
    moved = np.zeros_like(sequences)

    for source, target in _targets(values, shift):
        moved[target] = sequences[source]

    return basis.conj().T @ moved.reshape(basis.shape)


def _orthogonality_residuals(
    coefficients: ComplexArray,
    grams: Sequence[ComplexArray],
) -> NDArray[np.float64]:
    count = coefficients.shape[1]
    blocks = [coefficients.conj().T @ coefficients - np.eye(count)]
    blocks.extend(coefficients.conj().T @ gram @ coefficients for gram in grams)
    stacked = np.concatenate([block.ravel() for block in blocks])
    return np.concatenate([stacked.real, stacked.imag])


def _select(grams: Sequence[ComplexArray], count: int) -> tuple[ComplexArray, float]:
    """
    Isometry `C` with `C^H Gamma_d C = 0` for every positive shift, found by least squares
    from the eigenvectors of `sum_d Gamma_d Gamma_d^H + Gamma_d^H Gamma_d` and then from
    seeded restarts.
    """

    dimension = grams[0].shape[0]
    energy = sum((gram @ gram.conj().T + gram.conj().T @ gram for gram in grams))
    _, vectors = np.linalg.eigh(energy)
    real = not any(np.iscomplexobj(gram) for gram in grams)
    rng = np.random.default_rng(_SEED)
    starts = [vectors[:, :count]]

    for _ in range(_RESTARTS):
        start = rng.standard_normal((dimension, count))

        if not real:
            start = start + 1j * rng.standard_normal((dimension, count))

        starts.append(np.linalg.qr(start)[0])

    def pack(coefficients: ComplexArray) -> NDArray[np.float64]:
        if real:
            return coefficients.real.ravel()

        return np.concatenate([coefficients.real.ravel(), coefficients.imag.ravel()])

    def unpack(x: NDArray[np.float64]) -> ComplexArray:
        if real:
            return x.reshape(dimension, count)

        half = dimension * count
        return (x[:half] + 1j * x[half:]).reshape(dimension, count)

    best, best_residual = starts[0], math.inf

    for start in starts:
        solution = scipy.optimize.least_squares(
            lambda x: _orthogonality_residuals(unpack(x), grams),
            pack(start),
            xtol=1e-14,
            ftol=1e-14,
            gtol=1e-14,
            max_nfev=2000,
        )
        candidate = np.linalg.qr(unpack(solution.x))[0]
        residual = float(np.abs(_orthogonality_residuals(candidate, grams)).max())

        if residual < best_residual:
            best, best_residual = candidate, residual

        if residual <= _NEGLIGIBLE:
            break

    return best, best_residual


def _canonical_rows(sequences: ComplexArray) -> ComplexArray:
    """
    Orthonormal basis of the span of the columns of `sequences`, as rows: Householder QR
    of the adjoint with column pivoting, pivot entries made positive real.
    """

    q, r, pivots = scipy.linalg.qr(sequences.conj().T, pivoting=True)
    count = sequences.shape[1]
    rows = q.conj().T @ sequences.conj().T
    diagonal = np.diag(r)[:count]
    phases = np.where(np.abs(diagonal) > 0, diagonal / np.abs(diagonal), 1.0)
    rows = rows * phases.conj()[:, np.newaxis]
    logger.debug(f"Completion pivots {pivots[:count].tolist()}.")
    return rows


def complete_wavelet_masks(g: VectorMask, omega_grid: Grid) -> MaskBank:
    """
    Extends a scaling mask to a full filter bank supported on the support of `g`.

    The `(2N - 1) M` wavelet rows are row sequences on the support of `g` that are
    orthogonal to every `2N (Lambda - Lambda)`-shift of the rows of `g` and orthonormal
    among their own shifts. The first condition is linear and gives a null space; the
    second fixes a subspace of it, and the rows are its canonical pivoted-QR basis.
    `omega_grid` is where `g` and the result are certified.
    """

    report = check_frequency_identity(g, omega_grid, tolerance=DEFAULT_FIT_TOLERANCE)

    if not report:
        raise CertificationFailed(report)

    lattice = g.lattice
    size = g.channels
    count = (lattice.dilation - 1) * size
    values = [point.value for point in g.points]
    shifts = _shifts(lattice, values)
    constraints = _constraints(g, values, shifts)

    if not constraints.imag.any():
        constraints = constraints.real

    basis = scipy.linalg.null_space(constraints, rcond=_RANK_TOLERANCE)
    dimension = basis.shape[1]
    logger.debug(
        f"Completion: {len(shifts)} shifts, null space of dimension {dimension} "
        f"for {count} wavelet rows."
    )

    if dimension < count:
        raise CompletionFailed(
            f"The support of the scaling mask leaves room for {dimension} wavelet rows, "
            f"{count} are needed.",
            math.inf,
        )

    grams = [_shifted_gram(basis, values, d, size) for d in shifts if d > 0]

    if dimension == count or not grams:
        coefficients = np.eye(dimension, count, dtype=basis.dtype)
        residual = max((float(np.abs(gram).max()) for gram in grams), default=0.0)
    else:
        coefficients, residual = _select(grams, count)

    logger.debug(f"Wavelet row orthogonality residual {residual:.3e}.")

    if residual > DEFAULT_FIT_TOLERANCE:
        raise CompletionFailed(
            f"Wavelet rows on the support of the scaling mask aren't orthonormal "
            f"under shifts (residual {residual:.3e}).",
            residual,
        )

    rows = _canonical_rows(basis @ coefficients)
    stacked = rows.reshape(lattice.dilation - 1, size, len(values), size)
    wavelets = tuple(
        _wavelet_mask(lattice, values, np.swapaxes(block, 0, 1)) for block in stacked
    )
    bank = MaskBank(g, wavelets)
    report = check_filterbank(bank, omega_grid, tolerance=DEFAULT_FIT_TOLERANCE)

    if not report:
        raise CompletionFailed(
            f"Completed bank fails certification: {report.detail}.",
            report.residual,
        )

    return bank


def _wavelet_mask(
    lattice: Lattice,
    values: Sequence[Fraction],
    matrices: ComplexArray,
) -> VectorMask:
    mapping = {
        value: matrix
        for value, matrix in zip(values, matrices)
        if np.linalg.norm(matrix) > _NEGLIGIBLE
    }
    return VectorMask.from_mapping(
        lattice,
        mapping,
        channels=matrices.shape[-1],
        role=MaskRole.WAVELET,
    )
