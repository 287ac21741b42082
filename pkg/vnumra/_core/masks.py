from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from fractions import Fraction
from logging import getLogger
from typing import Final, Literal, Self

import numpy as np
from numpy.typing import ArrayLike, NDArray

from vnumra._core.common.grid import ComplexArray, Grid
from vnumra._core.lattice import Coset, Lattice, LatticePoint
from vnumra.exceptions import (
    BadInterval,
    BankSizeMismatch,
    ChannelMismatch,
    DuplicatePoint,
    LatticeMismatch,
    NotNormalized,
    ShiftNotOnLattice,
)

__all__ = (
    "CertificationReport",
    "Condition",
    "MaskBank",
    "MaskRole",
    "VectorMask",
    "check_filterbank",
    "check_frequency_identity",
    "check_lower_bound",
    "check_symmetry",
    "check_time_orthogonality",
    "default_pairs",
    "eval_symbol",
    "split_symbol",
)

DEFAULT_TOLERANCE: Final[float] = 1e-10
DEFAULT_FIT_TOLERANCE: Final[float] = 1e-8

logger = getLogger("vnumra")

type PointLike = LatticePoint | Fraction | int
type PairLike = tuple[PointLike, PointLike]


class MaskRole(StrEnum):
    SCALING = "scaling"
    WAVELET = "wavelet"

    @classmethod
    def get_default(cls) -> MaskRole:
        return cls.SCALING


type MaskRoleStr = Literal["scaling", "wavelet"]


class Condition(StrEnum):
    TIME_ORTHOGONALITY = "TimeOrthogonality"
    FREQUENCY_IDENTITY = "FrequencyIdentity"
    FILTER_BANK = "FilterBank"
    LOWER_BOUND = "LowerBound"
    SYMMETRY = "Symmetry"
    GRAM = "Gram"


@dataclass(frozen=True, slots=True)
class CertificationReport:
    condition: Condition
    residual: float
    tolerance: float
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def log(self) -> Self:
        verdict = "passed" if self.passed else "failed"
        logger.debug(
            f"{self.condition} {verdict}: residual {self.residual:.3e} "
            f"(tolerance {self.tolerance:.1e}) {self.detail}".rstrip()
        )
        return self


@dataclass(frozen=True, slots=True)
class VectorMask:
    """
    Finitely supported family of `M x M` matrices indexed by lattice points,
    stored in ascending lattice order.
    """

    lattice: Lattice
    points: tuple[LatticePoint, ...]
    matrices: ComplexArray
    role: MaskRole = field(default_factory=MaskRole.get_default)
    __index: dict[Fraction, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        matrices = np.array(self.matrices, dtype=np.complex128)

        if matrices.ndim != 3 or matrices.shape[1] != matrices.shape[2]:
            raise ChannelMismatch(f"Expected square matrices, got shape {matrices.shape}.")

        if matrices.shape[0] != len(self.points):
            raise ChannelMismatch(
                f"{len(self.points)} points for {matrices.shape[0]} matrices."
            )

        for point in self.points:
            if point not in self.lattice:
                raise ShiftNotOnLattice(f"{point} isn't a point of {self.lattice}.")

        order = sorted(range(len(self.points)), key=lambda i: self.points[i].value)
        points = tuple(self.points[i] for i in order)

        if len({point.value for point in points}) != len(points):
            raise DuplicatePoint("Mask support points must be distinct.")

        matrices = matrices[order] if order else matrices
        matrices.flags.writeable = False
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "matrices", matrices)
        object.__setattr__(
            self,
            f"_{type(self).__name__}__index",
            {point.value: i for i, point in enumerate(points)},
        )

        if self.role == MaskRole.SCALING:
            deviation = float(
                np.linalg.norm(eval_symbol(self, 0.0) - np.eye(self.channels))
            )

            if deviation > DEFAULT_TOLERANCE:
                raise NotNormalized(
                    f"Scaling symbol at 0 deviates from the identity by {deviation:.3e}."
                )

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[tuple[LatticePoint, ComplexArray]]:
        yield from zip(self.points, self.matrices)

    @property
    def channels(self) -> int:
        return self.matrices.shape[1]

    @property
    def values(self) -> NDArray[np.float64]:
        return np.array([float(point) for point in self.points], dtype=np.float64)

    def coefficient(self, value: PointLike) -> ComplexArray:
        if isinstance(value, LatticePoint):
            value = value.value

        try:
            return self.matrices[self.__index[Fraction(value)]]
        except KeyError:
            return np.zeros((self.channels, self.channels), np.complex128)

    def scaled(self, factor: complex) -> VectorMask:
        return type(self)(self.lattice, self.points, factor * self.matrices, self.role)

    def with_role(self, role: MaskRole | MaskRoleStr) -> VectorMask:
        return type(self)(self.lattice, self.points, self.matrices, MaskRole(role))

    @classmethod
    def from_mapping(
        cls,
        lattice: Lattice,
        coefficients: Mapping[Fraction | int, ArrayLike],
        *,
        channels: int | None = None,
        role: MaskRole | MaskRoleStr = MaskRole.get_default(),
    ) -> Self:
        points = tuple(lattice.locate(value) for value in coefficients)
        matrices = [np.atleast_2d(np.asarray(m, np.complex128)) for m in coefficients.values()]

        if not matrices:
            size = channels or 1
            stacked = np.zeros((0, size, size), np.complex128)
        else:
            stacked = np.stack(matrices)

        return cls(lattice, points, stacked, MaskRole(role))

    @classmethod
    def zero(
        cls,
        lattice: Lattice,
        channels: int = 1,
        role: MaskRole | MaskRoleStr = MaskRole.WAVELET,
    ) -> Self:
        return cls.from_mapping(lattice, {}, channels=channels, role=role)


@dataclass(frozen=True, slots=True)
class MaskBank:
    """
    Scaling mask `H_0 = G` and the wavelet masks `H_1, ..., H_{2N-1}`.
    """

    scaling: VectorMask
    wavelets: tuple[VectorMask, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "wavelets", tuple(self.wavelets))

        for mask in self.wavelets:
            if mask.channels != self.scaling.channels:
                raise ChannelMismatch(
                    f"Wavelet mask has {mask.channels} channels, "
                    f"scaling mask has {self.scaling.channels}."
                )

            if mask.lattice != self.scaling.lattice:
                raise LatticeMismatch("All masks of a bank must share the lattice.")

    def __len__(self) -> int:
        return 1 + len(self.wavelets)

    def __iter__(self) -> Iterator[VectorMask]:
        yield self.scaling
        yield from self.wavelets

    @property
    def lattice(self) -> Lattice:
        return self.scaling.lattice

    @property
    def channels(self) -> int:
        return self.scaling.channels

    def wavelet(self, ell: int) -> VectorMask:
        return self.wavelets[ell - 1]


"""
Symbols
"""


def _omegas(omega: ArrayLike) -> NDArray[np.float64]:
    return np.atleast_1d(np.asarray(omega, dtype=np.float64))


def _symbol(
    lattice: Lattice,
    values: NDArray[np.float64],
    matrices: ComplexArray,
    omegas: NDArray[np.float64],
) -> ComplexArray:
    scale = 1.0 / np.sqrt(lattice.dilation)
    size = matrices.shape[1]

    if len(values) == 0:
        return np.zeros((len(omegas), size, size), np.complex128)

    phases = np.exp(-2j * np.pi * np.outer(omegas, values))
    return scale * np.einsum("wk,kab->wab", phases, matrices)


def eval_symbol(mask: VectorMask, omega: ArrayLike) -> ComplexArray:
    """
    `(2N)^(-1/2) sum_lambda G_lambda exp(-2πi lambda omega)`; a single `M x M` matrix for a
    scalar `omega`, a stack otherwise.
    """

    omegas = _omegas(omega)
    symbol = _symbol(mask.lattice, mask.values, mask.matrices, omegas)
    return symbol[0] if np.ndim(omega) == 0 else symbol


def split_symbol(mask: VectorMask, omega: ArrayLike) -> tuple[ComplexArray, ComplexArray]:
    """
    Coset parts `(G1, G2)` with `eval_symbol = G1 + exp(-2πi (r/N) omega) G2`.
    """

    omegas = _omegas(omega)
    lattice = mask.lattice
    values = mask.values
    even = np.array([point.base == Coset.ZERO for point in mask.points], dtype=bool)
    offset = float(lattice.offset)
    first = _symbol(lattice, values[even], mask.matrices[even], omegas)
    second = _symbol(lattice, values[~even] - offset, mask.matrices[~even], omegas)

    if np.ndim(omega) == 0:
        return first[0], second[0]

    return first, second


"""
Certification
"""


def _point(lattice: Lattice, value: PointLike) -> LatticePoint:
    if isinstance(value, LatticePoint):
        if value not in lattice:
            raise ShiftNotOnLattice(f"{value} isn't a point of {lattice}.")

        return value

    return lattice.locate(value)


def default_pairs(mask: VectorMask) -> list[tuple[LatticePoint, LatticePoint]]:
    """
    Pairs `(lambda, 0)` and `(0, lambda)` covering every shift `2N (lambda - lambda')`
    that can meet the support of `mask`.
    """

    lattice = mask.lattice
    zero = lattice.point(Coset.ZERO, 0)

    if not mask.points:
        return [(zero, zero)]

    span = mask.points[-1].value - mask.points[0].value
    reach = span / lattice.dilation
    pairs = []

    for point in lattice.iter_between(-reach, reach):
        pairs.append((point, zero))

        if point != zero:
            pairs.append((zero, point))

    return pairs


def check_time_orthogonality(
    mask: VectorMask,
    pairs: Iterable[PairLike] | None = None,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
) -> CertificationReport:
    """
    `sum_m G_m G_{m + 2N(lambda - lambda')}^H - delta I` over the pairs; the residual is
    the largest Frobenius norm.
    """

    lattice = mask.lattice
    identity = np.eye(mask.channels)
    residual = 0.0
    worst = ""

    for first, second in default_pairs(mask) if pairs is None else pairs:
        lam = _point(lattice, first)
        sigma = _point(lattice, second)
        shift = lattice.dilation * (lam.value - sigma.value)
        total = np.zeros_like(identity, dtype=np.complex128)

        for point, matrix in mask:
            target = point.value + shift

            if target not in lattice:
                raise ShiftNotOnLattice(f"Index {target} leaves the lattice.")

            total += matrix @ mask.coefficient(target).conj().T

        if lam.value == sigma.value:
            total -= identity

        norm = float(np.linalg.norm(total))

        if norm > residual or not worst:
            residual = max(residual, norm)
            worst = f"worst pair ({lam}, {sigma})"

    return CertificationReport(
        Condition.TIME_ORTHOGONALITY,
        residual,
        tolerance,
        worst,
    ).log()


def _translate_gram(
    masks: Sequence[VectorMask],
    omega_grid: Grid,
) -> tuple[ComplexArray, NDArray[np.float64]]:
    """
    `(1/2N) sum_s F(w_s) F(w_s)^H` with `w_s = omega + s/(4N)`, `0 <= s < 4N²`, where
    `F` stacks `exp(-2πi t w) H_k(w)` for the translate types `t in {0, 2r}`.
    """

    lattice = masks[0].lattice
    n = lattice.n
    omegas = omega_grid.points
    offsets = np.arange(4 * n * n) / (4 * n)
    shifted = (omegas[:, np.newaxis] + offsets[np.newaxis, :]).ravel()
    size = masks[0].channels
    blocks = []

    for shift in (0, 2 * lattice.r):
        twist = np.exp(-2j * np.pi * shift * shifted)[:, np.newaxis, np.newaxis]

        for mask in masks:
            blocks.append(twist * eval_symbol(mask, shifted))

    stacked = np.concatenate(blocks, axis=1)
    stacked = stacked.reshape(len(omegas), len(offsets), len(blocks) * size, size)
    gram = np.einsum("wsam,wsbm->wab", stacked, stacked.conj()) / lattice.dilation
    return gram, omegas


def _gram_report(
    condition: Condition,
    masks: Sequence[VectorMask],
    omega_grid: Grid,
    tolerance: float,
) -> CertificationReport:
    size = masks[0].channels
    count = len(masks)
    gram, omegas = _translate_gram(masks, omega_grid)
    deviation = gram - np.eye(gram.shape[1])
    blocks = deviation.reshape(len(omegas), 2 * count, size, 2 * count, size)
    norms = np.sqrt(np.sum(np.abs(blocks) ** 2, axis=(2, 4)))
    w, row, col = np.unravel_index(int(np.argmax(norms)), norms.shape)
    detail = (
        f"worst at k={row % count}, l={col % count}, "
        f"types=({row // count}, {col // count}), omega={omegas[w]:.6g}"
    )
    return CertificationReport(condition, float(norms.max()), tolerance, detail).log()


def check_frequency_identity(
    mask: VectorMask,
    omega_grid: Grid,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
) -> CertificationReport:
    return _gram_report(Condition.FREQUENCY_IDENTITY, (mask,), omega_grid, tolerance)


def check_filterbank(
    bank: MaskBank,
    omega_grid: Grid,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
) -> CertificationReport:
    expected = bank.lattice.dilation

    if len(bank) != expected:
        raise BankSizeMismatch(f"Expected {expected} masks, got {len(bank)}.")

    return _gram_report(Condition.FILTER_BANK, tuple(bank), omega_grid, tolerance)


def check_lower_bound(
    mask: VectorMask,
    e_lo: float,
    e_hi: float,
    k_max: int,
    c: float,
    samples: int = 1001,
) -> CertificationReport:
    """
    Smallest singular value of the symbol at `omega / (2N)^k`, `1 <= k <= k_max`, over
    `samples` uniform points of `[e_lo, e_hi]`, compared with `c`.
    """

    if not e_lo < 0 < e_hi:
        raise BadInterval(f"0 must be interior to [{e_lo}, {e_hi}].")

    if c <= 0 or k_max < 1 or samples < 1:
        raise ValueError("Expected c > 0, k_max >= 1 and samples >= 1.")

    omegas = np.linspace(e_lo, e_hi, samples)
    dilation = mask.lattice.dilation
    smallest = np.inf
    worst = ""

    for k in range(1, k_max + 1):
        symbols = eval_symbol(mask, omegas / dilation**k)
        singular = np.linalg.svd(symbols, compute_uv=False).min(axis=1)
        i = int(np.argmin(singular))

        if singular[i] < smallest:
            smallest = float(singular[i])
            worst = f"min singular value {smallest:.6g} at omega={omegas[i]:.6g}, k={k}"

    return CertificationReport(
        Condition.LOWER_BOUND,
        max(0.0, c - smallest),
        0.0,
        worst,
    ).log()


def check_symmetry(mask: VectorMask) -> CertificationReport:
    """
    Informational: how far the coefficient matrices are from being symmetric.
    """

    if not len(mask):
        return CertificationReport(Condition.SYMMETRY, 0.0, DEFAULT_TOLERANCE).log()

    transposed = np.swapaxes(mask.matrices, 1, 2)
    residual = float(np.linalg.norm(mask.matrices - transposed, axis=(1, 2)).max())
    return CertificationReport(Condition.SYMMETRY, residual, DEFAULT_TOLERANCE).log()
