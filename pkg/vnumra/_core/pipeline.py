from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field, replace
from fractions import Fraction
from logging import getLogger
from typing import Final, Literal, Self

import numpy as np

from vnumra._core.cascade import (
    DEFAULT_DEPTH,
    DEFAULT_ITERATIONS,
    DEFAULT_MAX_DEPTH,
    DEFAULT_REFINE_TOLERANCE,
    CascadeResult,
    phi_hat_product,
    phi_refine_converged,
    psi_time,
    refinement_window,
)
from vnumra._core.common.grid import ComplexArray, Domain, Grid, SampledVectorFunction
from vnumra._core.lattice import Coset, Lattice, LatticePoint, chirp_factor
from vnumra._core.lct import LctParams
from vnumra._core.masks import (
    DEFAULT_FIT_TOLERANCE,
    CertificationReport,
    Condition,
    MaskBank,
    VectorMask,
    check_filterbank,
)
from vnumra.exceptions import (
    CertificationFailed,
    ChannelMismatch,
    EllOutOfRange,
    IncompatiblePyramid,
    LatticeMismatch,
    ShiftNotOnLattice,
    SupportOverflow,
    UnalignedGrid,
)

__all__ = (
    "CoefficientBand",
    "CoefficientPyramid",
    "Resolution",
    "VnumraSystem",
    "analyze",
    "build_system",
    "finest_level",
    "gram_matrix",
    "synthesize",
)

DEFAULT_GRAM_TOLERANCE: Final[float] = 1e-3
DEFAULT_TRANSLATES: Final[int] = 8

_GRID_SLACK: Final[float] = 1e-9
_OFFSET_SLACK: Final[float] = 1e-6

logger = getLogger("vnumra")

type Band = Literal["phi"] | int


def _default_omega_grid() -> Grid:
    return Grid.from_bounds(-8.0, 8.0, 4096)


@dataclass(frozen=True, slots=True)
class Resolution:
    """
    Build-time settings of a system.
    """

    omega_grid: Grid = field(default_factory=_default_omega_grid)
    iterations: int = DEFAULT_ITERATIONS
    depth: int = DEFAULT_DEPTH
    frequency_points: int = 1024
    certify_tolerance: float = DEFAULT_FIT_TOLERANCE
    gram_tolerance: float = DEFAULT_GRAM_TOLERANCE
    translates: int = DEFAULT_TRANSLATES
    refine_tolerance: float = DEFAULT_REFINE_TOLERANCE
    max_depth: int = DEFAULT_MAX_DEPTH

    def certification_grid(self, lattice: Lattice) -> Grid:
        return Grid.from_bounds(0.0, float(lattice.n), self.frequency_points)


@dataclass(frozen=True, slots=True)
class VnumraSystem:
    params: LctParams
    bank: MaskBank
    resolution: Resolution
    phi: CascadeResult
    phi_cells: SampledVectorFunction
    psi_cells: tuple[SampledVectorFunction, ...]
    certification: CertificationReport
    gram_deviation: float
    depth: int = DEFAULT_DEPTH
    refine_change: float = 0.0

    @property
    def lattice(self) -> Lattice:
        return self.bank.lattice

    @property
    def channels(self) -> int:
        return self.bank.channels

    @property
    def cell_step(self) -> float:
        return self.phi_cells.grid.step

    @property
    def window(self) -> tuple[float, float]:
        grid = self.phi_cells.grid
        return grid.start, grid.start + grid.length

    def cells(self, band: Band = "phi") -> SampledVectorFunction:
        index = _band_index(self.bank, band)
        return self.phi_cells if index == 0 else self.psi_cells[index - 1]

    def atoms(
        self,
        points: Iterable[LatticePoint | Fraction | int],
        grid: Grid,
        *,
        level: int = 0,
        band: Band = "phi",
    ) -> ComplexArray:
        """
        Chirp-modulated atoms `(2N)^(j/2) F((2N)^j t - lambda) chirp(t, lambda)` on `grid`,
        stacked as `len(points) x count x M x M`.
        """

        cells = self.cells(band)
        scale = self.lattice.dilation**level
        t = grid.points
        stacked = [
            _atom_values(cells, t, float(_locate(self.lattice, point)), scale)
            * chirp_factor(t, _locate(self.lattice, point), self.params)[
                :, np.newaxis, np.newaxis
            ]
            for point in points
        ]
        return np.array(stacked, dtype=np.complex128)


@dataclass(frozen=True, slots=True)
class CoefficientBand:
    points: tuple[LatticePoint, ...]
    values: ComplexArray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.complex128)

        if values.ndim != 2 or values.shape[0] != len(self.points):
            raise ChannelMismatch(
                f"{len(self.points)} points for coefficients of shape {values.shape}."
            )

        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[tuple[LatticePoint, ComplexArray]]:
        yield from zip(self.points, self.values)

    def energy(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))

    def as_dict(self) -> dict[Fraction, ComplexArray]:
        return {point.value: vector for point, vector in self}

    def with_values(self, values: ComplexArray) -> CoefficientBand:
        return type(self)(self.points, values)

    def restricted(self, coset: Coset) -> CoefficientBand:
        keep = np.array([point.base == coset for point in self.points], dtype=bool)
        return self.with_values(self.values * keep.reshape(-1, 1))

    @classmethod
    def from_dict(
        cls,
        lattice: Lattice,
        coefficients: Mapping[Fraction, ComplexArray],
        channels: int,
    ) -> Self:
        values = sorted(coefficients)
        points = tuple(lattice.locate(value) for value in values)
        stacked = np.array(
            [coefficients[value] for value in values],
            dtype=np.complex128,
        ).reshape(len(values), channels)
        return cls(points, stacked)


@dataclass(frozen=True, slots=True)
class CoefficientPyramid:
    """
    Approximation coefficients at level 0 and detail coefficients per level
    `0 <= j < levels` and wavelet index `1 <= ell <= 2N - 1`, for signals sampled on `grid`.
    Level `j` sits at scale `finest - levels + j`, `finest` being the level of `grid`.
    """

    levels: int
    lattice: Lattice
    channels: int
    grid: Grid
    approx: CoefficientBand
    details: Mapping[tuple[int, int], CoefficientBand]

    def __iter__(self) -> Iterator[tuple[str, int, CoefficientBand]]:
        yield "approx", 0, self.approx

        for (level, ell), band in sorted(self.details.items()):
            yield f"detail-{ell}", level, band

    @property
    def finest(self) -> int:
        return finest_level(self.lattice, self.grid)[0]

    def scale(self, level: int) -> int:
        return self.finest - self.levels + level

    def detail(self, level: int, ell: int) -> CoefficientBand:
        return self.details[level, ell]

    def norm(self) -> float:
        return math.sqrt(sum(band.energy() for _, _, band in self))

    def restrict_coset(self, coset: Coset) -> CoefficientPyramid:
        return self.__with_bands(
            self.approx.restricted(coset),
            {key: band.restricted(coset) for key, band in self.details.items()},
        )

    def zeros_like(self) -> CoefficientPyramid:
        return self.__with_bands(
            self.approx.with_values(np.zeros_like(self.approx.values)),
            {
                key: band.with_values(np.zeros_like(band.values))
                for key, band in self.details.items()
            },
        )

    def __with_bands(
        self,
        approx: CoefficientBand,
        details: Mapping[tuple[int, int], CoefficientBand],
    ) -> CoefficientPyramid:
        return type(self)(
            self.levels,
            self.lattice,
            self.channels,
            self.grid,
            approx,
            details,
        )


"""
Atoms
"""


def _locate(lattice: Lattice, point: LatticePoint | Fraction | int) -> LatticePoint:
    try:
        value = point.value if isinstance(point, LatticePoint) else point
        located = lattice.locate(value)
    except ShiftNotOnLattice as exc:
        raise LatticeMismatch(f"{point} isn't a point of {lattice}.") from exc

    if isinstance(point, LatticePoint) and point != located:
        raise LatticeMismatch(f"{point} was built for another lattice.")

    return located


def _band_index(bank: MaskBank, band: Band) -> int:
    if band == "phi":
        return 0

    if isinstance(band, int) and 1 <= band <= len(bank.wavelets):
        return band

    raise EllOutOfRange(f"Unknown band `{band}`.")


def _atom_values(
    cells: SampledVectorFunction,
    t: np.ndarray,
    lam: float,
    scale: int,
) -> ComplexArray:
    index = cells.grid.index_of(scale * t - lam)
    valid = (index >= 0) & (index < cells.grid.count)
    values = np.zeros((len(t), *cells.values.shape[1:]), np.complex128)
    values[valid] = cells.values[index[valid]]
    return math.sqrt(scale) * values


def _chirp_phase(params: LctParams, values: Sequence[Fraction]) -> np.ndarray:
    lam = np.array([float(value) for value in values], dtype=np.float64)
    return np.exp(-1j * np.pi * params.chirp_ratio() * lam**2)


"""
Construction
"""


def build_system(
    params: LctParams,
    bank: MaskBank,
    resolution: Resolution | None = None,
) -> VnumraSystem:
    """
    Certifies `bank`, runs both cascades and checks the Gram matrix of level-0 translates.
    The time-domain cascade goes deeper than `resolution.depth` until successive
    iterates agree within `resolution.refine_tolerance`.
    """

    resolution = resolution or Resolution()
    lattice = bank.lattice
    report = check_filterbank(
        bank,
        resolution.certification_grid(lattice),
        tolerance=resolution.certify_tolerance,
    )

    if not report:
        raise CertificationFailed(report)

    phi = phi_hat_product(bank.scaling, resolution.omega_grid, resolution.iterations)
    window = refinement_window(bank)
    refined = phi_refine_converged(
        bank.scaling,
        resolution.depth,
        window=window,
        threshold=resolution.refine_tolerance,
        max_depth=resolution.max_depth,
    )
    phi_cells = refined.cells
    psi_cells = tuple(
        psi_time(bank, ell, refined.depth, window=window, phi=phi_cells)
        for ell in range(1, len(bank.wavelets) + 1)
    )
    system = VnumraSystem(
        params,
        bank,
        resolution,
        phi,
        phi_cells,
        psi_cells,
        report,
        math.nan,
        refined.depth,
        refined.change,
    )

    translates = [
        point
        for point in lattice.enumerate(0, resolution.translates)
        if point.value >= 0
    ][: resolution.translates]
    gram = gram_matrix(system, translates)
    deviation = float(np.linalg.norm(gram - np.eye(gram.shape[0])))
    gram_report = CertificationReport(
        Condition.GRAM,
        deviation,
        resolution.gram_tolerance,
        f"{len(translates)} translates",
    ).log()

    if not gram_report:
        raise CertificationFailed(gram_report)

    logger.debug(
        f"Built system N={lattice.n}, r={lattice.r}, M={bank.channels}: "
        f"{phi_cells.grid.count} cells at depth {refined.depth} "
        f"(change {refined.change:.3e}), Gram deviation {deviation:.3e}."
    )
    return replace(system, gram_deviation=deviation)


def gram_matrix(
    system: VnumraSystem,
    lambdas: Sequence[LatticePoint | Fraction | int],
    which: Band = "phi",
) -> ComplexArray:
    """
    Blocks `<F(. - lambda) chirp(., lambda), F(. - sigma) chirp(., sigma)>`, assembled as a
    `len(lambdas) M x len(lambdas) M` matrix.
    """

    points = [_locate(system.lattice, value) for value in lambdas]
    size = system.channels

    if not points:
        return np.zeros((0, 0), np.complex128)

    step = system.cell_step
    lo, hi = system.window
    first = min(float(point) for point in points) + lo
    last = max(float(point) for point in points) + hi
    count = max(1, round((last - first) / step))
    grid = Grid(first + step / 2, step, count)
    atoms = system.atoms(points, grid, band=which)
    gram = step * np.einsum("ktab,stcb->kasc", atoms, atoms.conj())
    return gram.reshape(len(points) * size, len(points) * size)


"""
Analysis and synthesis
"""


def finest_level(lattice: Lattice, grid: Grid) -> tuple[int, int]:
    """
    Level `J` with `grid.step = (2N)^(-J)` and the index `start / step` of the first
    sample; samples are the level-`J` coefficients of the signal.
    """

    level = round(-math.log(grid.step) / math.log(lattice.dilation))

    if not math.isclose(grid.step * lattice.dilation**level, 1.0, rel_tol=_GRID_SLACK):
        raise UnalignedGrid(
            f"Grid step {grid.step:.6g} isn't a power of 1/{lattice.dilation}."
        )

    position = grid.start / grid.step
    first = round(position)

    if abs(position - first) > _OFFSET_SLACK:
        raise UnalignedGrid(f"Grid start {grid.start:.6g} isn't a multiple of its step.")

    return level, first


def _sample_point(lattice: Lattice, index: int) -> Fraction:
    translate, odd = divmod(index, 2)
    return lattice.point(Coset.R_OVER_N if odd else Coset.ZERO, translate).value


def _sample_index(lattice: Lattice, value: Fraction) -> int:
    point = lattice.locate(value)
    return 2 * point.translate + (1 if point.base == Coset.R_OVER_N else 0)


def _decompose(
    coefficients: Mapping[Fraction, ComplexArray],
    masks: Sequence[VectorMask],
    channels: int,
) -> list[dict[Fraction, ComplexArray]]:
    """
    One analysis step: `c_sigma = sum_lambda conj(H_lambda) c_{lambda + 2N sigma}` per mask.
    """

    lattice = masks[0].lattice
    dilation = lattice.dilation
    support = sorted({point.value for mask in masks for point in mask.points})
    targets = set()

    for value in coefficients:
        for lam in support:
            sigma = (value - lam) / dilation

            if sigma in lattice:
                targets.add(sigma)

    zero = np.zeros(channels, np.complex128)
    outputs: list[dict[Fraction, ComplexArray]] = []

    for mask in masks:
        band = {}

        for sigma in sorted(targets):
            total = zero.copy()

            for point, matrix in mask:
                source = coefficients.get(point.value + dilation * sigma)

                if source is not None:
                    total += matrix.conj() @ source

            band[sigma] = total

        outputs.append(band)

    return outputs


def _compose(
    bands: Sequence[Mapping[Fraction, ComplexArray]],
    masks: Sequence[VectorMask],
    channels: int,
) -> dict[Fraction, ComplexArray]:
    dilation = masks[0].lattice.dilation
    refined: dict[Fraction, ComplexArray] = {}

    for band, mask in zip(bands, masks):
        for sigma, vector in band.items():
            for point, matrix in mask:
                target = point.value + dilation * sigma
                refined.setdefault(target, np.zeros(channels, np.complex128))
                refined[target] = refined[target] + matrix.T @ vector

    return refined


def analyze(
    system: VnumraSystem,
    signal: SampledVectorFunction,
    levels: int,
) -> CoefficientPyramid:
    """
    Reads the dechirped samples as coefficients at the level of the signal grid (one
    point quadrature against the atoms of that level) and splits them `levels` times
    with the mask recursion.
    """

    if signal.is_matrix or signal.channels != system.channels:
        raise ChannelMismatch(
            f"System has {system.channels} channels, signal has shape "
            f"{signal.values.shape[1:]}."
        )

    if levels < 1:
        raise ValueError(f"At least one level is required, got {levels}.")

    lattice = system.lattice
    grid = signal.grid
    finest, first = finest_level(lattice, grid)

    if levels > finest:
        raise SupportOverflow(
            f"Signal step {grid.step:.6g} resolves {finest} levels, {levels} requested; "
            f"lower the level count or refine the signal grid."
        )

    t = grid.points
    dechirped = signal.values * np.exp(
        1j * np.pi * system.params.chirp_ratio() * t**2
    )[:, np.newaxis]
    scale = math.sqrt(grid.step)
    current: dict[Fraction, ComplexArray] = {
        _sample_point(lattice, first + i): scale * dechirped[i] for i in range(grid.count)
    }
    masks = tuple(system.bank)
    size = system.channels
    details: dict[tuple[int, int], dict[Fraction, ComplexArray]] = {}

    for level in reversed(range(levels)):
        approx, *wavelets = _decompose(current, masks, size)

        for ell, band in enumerate(wavelets, start=1):
            details[level, ell] = band

        current = approx

    return CoefficientPyramid(
        levels,
        lattice,
        size,
        grid,
        _chirped_band(system, current),
        {key: _chirped_band(system, band) for key, band in details.items()},
    )


def _chirped_band(
    system: VnumraSystem,
    coefficients: Mapping[Fraction, ComplexArray],
) -> CoefficientBand:
    band = CoefficientBand.from_dict(system.lattice, coefficients, system.channels)
    phase = _chirp_phase(system.params, [point.value for point in band.points])
    return band.with_values(band.values * phase[:, np.newaxis])


def _dechirped(system: VnumraSystem, band: CoefficientBand) -> dict[Fraction, ComplexArray]:
    phase = _chirp_phase(system.params, [point.value for point in band.points]).conj()
    return dict(zip((point.value for point in band.points), band.values * phase[:, None]))


def synthesize(system: VnumraSystem, pyramid: CoefficientPyramid) -> SampledVectorFunction:
    """
    Inverts `analyze`: composes the pyramid back to the level of its grid and reads the
    coefficients there as samples; coefficients off the grid are dropped.
    """

    if pyramid.lattice != system.lattice or pyramid.channels != system.channels:
        raise IncompatiblePyramid(
            f"Pyramid for {pyramid.lattice} with {pyramid.channels} channels doesn't "
            f"match the system."
        )

    expected = {
        (level, ell)
        for level in range(pyramid.levels)
        for ell in range(1, len(system.bank.wavelets) + 1)
    }

    if set(pyramid.details) != expected:
        raise IncompatiblePyramid("Pyramid detail bands don't match the filter bank.")

    masks = tuple(system.bank)
    size = system.channels
    current = _dechirped(system, pyramid.approx)

    for level in range(pyramid.levels):
        bands = [current]
        bands.extend(
            _dechirped(system, pyramid.detail(level, ell))
            for ell in range(1, len(masks))
        )
        current = _compose(bands, masks, size)

    grid = pyramid.grid
    _, first = finest_level(system.lattice, grid)
    values = np.zeros((grid.count, size), np.complex128)

    for value, vector in current.items():
        index = _sample_index(system.lattice, value) - first

        if 0 <= index < grid.count:
            values[index] = vector

    t = grid.points
    chirp = np.exp(-1j * np.pi * system.params.chirp_ratio() * t**2)
    values *= (chirp / math.sqrt(grid.step))[:, np.newaxis]
    return SampledVectorFunction(grid, values, Domain.TIME)
