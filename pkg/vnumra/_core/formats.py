from __future__ import annotations

import struct
from collections.abc import Iterable
from fractions import Fraction
from pathlib import Path
from typing import Final, Literal, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from vnumra._core.cascade import (
    DEFAULT_DEPTH,
    DEFAULT_MAX_DEPTH,
    DEFAULT_REFINE_TOLERANCE,
    CascadeResult,
)
from vnumra._core.common.grid import ComplexArray, Domain, Grid, SampledVectorFunction
from vnumra._core.lattice import Coset, Lattice
from vnumra._core.lct import LctParams
from vnumra._core.masks import (
    CertificationReport,
    Condition,
    MaskBank,
    MaskRole,
    VectorMask,
)
from vnumra._core.pipeline import (
    CoefficientBand,
    CoefficientPyramid,
    Resolution,
    VnumraSystem,
)
from vnumra.exceptions import ChannelMismatch, DuplicatePoint, FormatError

__all__ = (
    "BankModel",
    "MaskModel",
    "PyramidModel",
    "ReportModel",
    "SystemModel",
    "load_bank",
    "load_mask",
    "load_pyramid",
    "load_signal",
    "load_system",
    "read_signal_csv",
    "read_vnmr",
    "save_bank",
    "save_mask",
    "save_pyramid",
    "save_system",
    "write_signal_csv",
    "write_vnmr",
)

VNMR_MAGIC: Final[bytes] = b"VNMR"
VNMR_VERSION: Final[int] = 1

_HEADER: Final[struct.Struct] = struct.Struct("<4sIIQddB")
_SYSTEM_FILE: Final[str] = "system.json"

type Pair = tuple[float, float]


def _pairs(values: Iterable[complex]) -> list[Pair]:
    return [(float(value.real), float(value.imag)) for value in values]


def _complex(pairs: Iterable[Pair]) -> list[complex]:
    return [complex(re, im) for re, im in pairs]


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    @classmethod
    def load(cls, path: Path) -> Self:
        text = Path(path).read_text()

        try:
            return cls.model_validate_json(text)
        except ValidationError as exc:
            raise FormatError(f"`{path}` isn't a valid {cls.__name__}: {exc}") from exc

    def save(self, path: Path) -> None:
        Path(path).write_text(self.model_dump_json(by_alias=True, indent=2) + "\n")


"""
Masks
"""


class CoefficientModel(_Model):
    base: Coset
    translate: int
    matrix: list[list[Pair]]


class MaskModel(_Model):
    channels: int = Field(alias="M", ge=1)
    n: int = Field(alias="N")
    r: int
    role: MaskRole = MaskRole.SCALING
    coeffs: list[CoefficientModel]

    def to_mask(self, role: MaskRole | None = None) -> VectorMask:
        lattice = Lattice(self.n, self.r)
        points = []
        matrices = []

        for coefficient in self.coeffs:
            matrix = np.array(
                [_complex(row) for row in coefficient.matrix],
                dtype=np.complex128,
            )

            if matrix.shape != (self.channels, self.channels):
                raise ChannelMismatch(
                    f"Expected {self.channels}x{self.channels} matrices, "
                    f"got shape {matrix.shape}."
                )

            points.append(lattice.point(coefficient.base, coefficient.translate))
            matrices.append(matrix)

        stacked = (
            np.stack(matrices)
            if matrices
            else np.zeros((0, self.channels, self.channels), np.complex128)
        )

        try:
            return VectorMask(lattice, tuple(points), stacked, role or self.role)
        except DuplicatePoint as exc:
            raise FormatError(f"Mask lists a coefficient twice: {exc}") from exc

    @classmethod
    def from_mask(cls, mask: VectorMask) -> Self:
        return cls(
            channels=mask.channels,
            n=mask.lattice.n,
            r=mask.lattice.r,
            role=mask.role,
            coeffs=[
                CoefficientModel(
                    base=point.base,
                    translate=point.translate,
                    matrix=[_pairs(row) for row in matrix],
                )
                for point, matrix in mask
            ],
        )


class BankModel(_Model):
    scaling: MaskModel
    wavelets: list[MaskModel]

    def to_bank(self) -> MaskBank:
        return MaskBank(
            self.scaling.to_mask(),
            tuple(wavelet.to_mask(MaskRole.WAVELET) for wavelet in self.wavelets),
        )

    @classmethod
    def from_bank(cls, bank: MaskBank) -> Self:
        return cls(
            scaling=MaskModel.from_mask(bank.scaling),
            wavelets=[MaskModel.from_mask(mask) for mask in bank.wavelets],
        )


def load_mask(path: Path, role: MaskRole | None = None) -> VectorMask:
    return MaskModel.load(path).to_mask(role)


def save_mask(mask: VectorMask, path: Path) -> None:
    MaskModel.from_mask(mask).save(path)


def load_bank(path: Path) -> MaskBank:
    return BankModel.load(path).to_bank()


def save_bank(bank: MaskBank, path: Path) -> None:
    BankModel.from_bank(bank).save(path)


class ReportModel(_Model):
    condition: Condition
    residual: float
    tolerance: float
    passed: bool
    detail: str = ""

    @classmethod
    def from_report(cls, report: CertificationReport) -> Self:
        return cls(
            condition=report.condition,
            residual=report.residual,
            tolerance=report.tolerance,
            passed=report.passed,
            detail=report.detail,
        )


"""
Coefficient pyramids
"""


class GridModel(_Model):
    start: float
    step: float
    count: int

    def to_grid(self) -> Grid:
        return Grid(self.start, self.step, self.count)

    @classmethod
    def from_grid(cls, grid: Grid) -> Self:
        return cls(start=grid.start, step=grid.step, count=grid.count)


class PyramidEntryModel(_Model):
    level: int = Field(ge=0)
    band: str = Field(pattern=r"^(approx|detail-[1-9][0-9]*)$")
    base: Coset
    translate: int
    vector: list[Pair]


class PyramidModel(_Model):
    levels: int = Field(ge=1)
    n: int = Field(alias="N")
    r: int
    channels: int = Field(alias="M", ge=1)
    grid: GridModel
    entries: list[PyramidEntryModel]

    def to_pyramid(self) -> CoefficientPyramid:
        lattice = Lattice(self.n, self.r)
        bands: dict[tuple[str, int], dict[Fraction, ComplexArray]] = {}

        for entry in self.entries:
            if len(entry.vector) != self.channels:
                raise ChannelMismatch(
                    f"Expected {self.channels} components, got {len(entry.vector)}."
                )

            point = lattice.point(entry.base, entry.translate)
            band = bands.setdefault((entry.band, entry.level), {})
            band[point.value] = np.array(_complex(entry.vector), np.complex128)

        def band(key: tuple[str, int]) -> CoefficientBand:
            return CoefficientBand.from_dict(lattice, bands.get(key, {}), self.channels)

        details = {
            (level, ell): band((f"detail-{ell}", level))
            for level in range(self.levels)
            for ell in range(1, lattice.dilation)
        }
        return CoefficientPyramid(
            self.levels,
            lattice,
            self.channels,
            self.grid.to_grid(),
            band(("approx", 0)),
            details,
        )

    @classmethod
    def from_pyramid(cls, pyramid: CoefficientPyramid) -> Self:
        entries = [
            PyramidEntryModel(
                level=level,
                band=name,
                base=point.base,
                translate=point.translate,
                vector=_pairs(vector),
            )
            for name, level, band in pyramid
            for point, vector in band
        ]
        return cls(
            levels=pyramid.levels,
            n=pyramid.lattice.n,
            r=pyramid.lattice.r,
            channels=pyramid.channels,
            grid=GridModel.from_grid(pyramid.grid),
            entries=entries,
        )


def load_pyramid(path: Path) -> CoefficientPyramid:
    return PyramidModel.load(path).to_pyramid()


def save_pyramid(pyramid: CoefficientPyramid, path: Path) -> None:
    PyramidModel.from_pyramid(pyramid).save(path)


"""
Sampled functions
"""


def write_vnmr(function: SampledVectorFunction, path: Path) -> None:
    grid = function.grid
    header = _HEADER.pack(
        VNMR_MAGIC,
        VNMR_VERSION,
        function.channels,
        grid.count,
        grid.start,
        grid.step,
        function.domain.code,
    )
    payload = np.ascontiguousarray(function.values, dtype="<c16").tobytes()
    Path(path).write_bytes(header + payload)


def read_vnmr(path: Path, *, matrix: bool | None = None) -> SampledVectorFunction:
    """
    Reads a dump; vector and matrix payloads are told apart by size unless `matrix` says
    otherwise (they coincide for a single channel).
    """

    data = Path(path).read_bytes()

    if len(data) < _HEADER.size:
        raise FormatError(f"`{path}` is too short for a VNMR header.")

    magic, version, channels, count, start, step, code = _HEADER.unpack_from(data)

    if magic != VNMR_MAGIC or version != VNMR_VERSION:
        raise FormatError(f"`{path}` isn't a VNMR version {VNMR_VERSION} dump.")

    payload = np.frombuffer(data, dtype="<c16", offset=_HEADER.size)

    if matrix is None:
        matrix = channels > 1 and payload.size == count * channels * channels

    shape = (count, channels, channels) if matrix else (count, channels)

    if payload.size != int(np.prod(shape)):
        raise FormatError(f"`{path}` payload doesn't match its header.")

    try:
        return SampledVectorFunction(
            Grid(start, step, count),
            payload.reshape(shape),
            Domain.from_code(code),
        )
    except IndexError as exc:
        raise FormatError(f"`{path}` has an unknown domain code {code}.") from exc


def write_signal_csv(signal: SampledVectorFunction, path: Path) -> None:
    columns = [signal.grid.points]

    for j in range(signal.channels):
        columns.extend((signal.values[:, j].real, signal.values[:, j].imag))

    np.savetxt(path, np.column_stack(columns), fmt="%.17g", delimiter=",")


def read_signal_csv(path: Path) -> SampledVectorFunction:
    try:
        table = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise FormatError(f"`{path}` isn't a numeric CSV table.") from exc

    if table.shape[0] < 2 or table.shape[1] < 3 or table.shape[1] % 2 == 0:
        raise FormatError(
            f"`{path}` needs at least two rows of `t, re, im[, re, im ...]`."
        )

    t = table[:, 0]
    steps = np.diff(t)
    step = float(steps.mean())

    if not np.allclose(steps, step, rtol=1e-9, atol=0.0):
        raise FormatError(f"`{path}` isn't sampled on a uniform grid.")

    values = table[:, 1::2] + 1j * table[:, 2::2]
    return SampledVectorFunction(Grid(float(t[0]), step, len(t)), values, Domain.TIME)


def load_signal(path: Path) -> SampledVectorFunction:
    path = Path(path)

    if path.suffix == ".vnmr":
        return read_vnmr(path, matrix=False)

    return read_signal_csv(path)


"""
System cache
"""


class ResolutionModel(_Model):
    omega_grid: GridModel
    iterations: int
    depth: int
    frequency_points: int
    certify_tolerance: float
    gram_tolerance: float
    translates: int
    refine_tolerance: float = DEFAULT_REFINE_TOLERANCE
    max_depth: int = DEFAULT_MAX_DEPTH

    def to_resolution(self) -> Resolution:
        return Resolution(
            self.omega_grid.to_grid(),
            self.iterations,
            self.depth,
            self.frequency_points,
            self.certify_tolerance,
            self.gram_tolerance,
            self.translates,
            self.refine_tolerance,
            self.max_depth,
        )

    @classmethod
    def from_resolution(cls, resolution: Resolution) -> Self:
        return cls(
            omega_grid=GridModel.from_grid(resolution.omega_grid),
            iterations=resolution.iterations,
            depth=resolution.depth,
            frequency_points=resolution.frequency_points,
            certify_tolerance=resolution.certify_tolerance,
            gram_tolerance=resolution.gram_tolerance,
            translates=resolution.translates,
            refine_tolerance=resolution.refine_tolerance,
            max_depth=resolution.max_depth,
        )


class SystemModel(_Model):
    format: Literal["vnumra-system"] = "vnumra-system"
    abcd: tuple[float, float, float, float]
    resolution: ResolutionModel
    bank: BankModel
    convergence_metric: float
    certification: ReportModel
    gram_deviation: float
    depth: int = Field(default=DEFAULT_DEPTH, ge=0)
    refine_change: float = 0.0


def _dump_name(band: int) -> str:
    return "phi.vnmr" if band == 0 else f"psi_{band}.vnmr"


def save_system(system: VnumraSystem, directory: Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    params = system.params
    SystemModel(
        abcd=(params.a, params.b, params.c, params.d),
        resolution=ResolutionModel.from_resolution(system.resolution),
        bank=BankModel.from_bank(system.bank),
        convergence_metric=system.phi.convergence_metric,
        certification=ReportModel.from_report(system.certification),
        gram_deviation=system.gram_deviation,
        depth=system.depth,
        refine_change=system.refine_change,
    ).save(directory / _SYSTEM_FILE)
    write_vnmr(system.phi.phi_hat, directory / "phi_hat.vnmr")

    for band, cells in enumerate((system.phi_cells, *system.psi_cells)):
        write_vnmr(cells, directory / _dump_name(band))


def load_system(directory: Path) -> VnumraSystem:
    directory = Path(directory)
    model = SystemModel.load(directory / _SYSTEM_FILE)
    bank = model.bank.to_bank()
    resolution = model.resolution.to_resolution()
    cells = [
        read_vnmr(directory / _dump_name(band), matrix=True) for band in range(len(bank))
    ]
    phi = CascadeResult(
        read_vnmr(directory / "phi_hat.vnmr", matrix=True),
        resolution.iterations,
        model.convergence_metric,
    )
    report = model.certification
    return VnumraSystem(
        LctParams(*model.abcd),
        bank,
        resolution,
        phi,
        cells[0],
        tuple(cells[1:]),
        CertificationReport(report.condition, report.residual, report.tolerance, report.detail),
        model.gram_deviation,
        model.depth,
        model.refine_change,
    )
