import logging
from collections.abc import Iterator
from contextlib import contextmanager
from enum import StrEnum
from pathlib import Path
from typing import Annotated, Any, Final, Literal, Self

import numpy as np
import typer
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from tabulate import tabulate
from typer import Option, Typer

from vnumra._core.common.grid import Grid
from vnumra._core.completion import complete_wavelet_masks
from vnumra._core.formats import (
    ReportModel,
    load_bank,
    load_mask,
    load_pyramid,
    load_signal,
    load_system,
    save_bank,
    save_pyramid,
    save_system,
    write_signal_csv,
    write_vnmr,
)
from vnumra._core.lct import LctParams
from vnumra._core.masks import (
    CertificationReport,
    MaskBank,
    VectorMask,
    check_filterbank,
    check_frequency_identity,
    check_lower_bound,
    check_symmetry,
    check_time_orthogonality,
)
from vnumra._core.pipeline import (
    Resolution,
    VnumraSystem,
    analyze,
    build_system,
    gram_matrix,
    synthesize,
)
from vnumra.exceptions import (
    ChannelMismatch,
    EllOutOfRange,
    FormatError,
    GridError,
    LatticeError,
    ParameterError,
    VnumraError,
)

__all__ = ("RunConfig", "app")

EXIT_FAILURE: Final[int] = 1
EXIT_USAGE: Final[int] = 2

app = Typer(no_args_is_help=True, add_completion=False)


class OutputFormat(StrEnum):
    JSON = "json"
    TABLE = "table"


class RunConfig(BaseModel):
    """
    Settings shared by the commands; a `--config` file provides them and explicit flags
    override it.
    """

    model_config = ConfigDict(extra="forbid")

    abcd: tuple[float, float, float, float] = (0.0, 1.0, -1.0, 0.0)
    n: int | None = None
    r: int | None = None
    m: int | None = None
    grid: str | None = None
    iterations: int = Field(default=24, ge=1)
    depth: int = Field(default=3, ge=0)
    tol: float = Field(default=1e-10, gt=0)
    levels: int = Field(default=3, ge=1)
    lower_bound: float | None = Field(default=None, gt=0)
    k_max: int = Field(default=12, ge=1)

    @field_validator("abcd", mode="before")
    @classmethod
    def split_abcd(cls, value: Any) -> Any:
        if isinstance(value, str):
            return tuple(value.split(","))

        return value

    @property
    def params(self) -> LctParams:
        return LctParams(*self.abcd)

    def omega_grid(self, n: int) -> Grid:
        if self.grid is None:
            return Grid.from_bounds(0.0, float(n), 1024)

        return Grid.parse(self.grid)

    def resolution(self) -> Resolution:
        return Resolution(iterations=self.iterations, depth=self.depth)

    @classmethod
    def resolve(cls, config: Path | None, **flags: Any) -> Self:
        try:
            base = cls() if config is None else cls.model_validate_json(config.read_text())
            updates = {key: value for key, value in flags.items() if value is not None}
            return cls.model_validate(base.model_dump() | updates)
        except ValidationError as exc:
            raise typer.BadParameter(str(exc)) from exc


class ValidationSummary(BaseModel):
    passed: bool
    reports: list[ReportModel]


@contextmanager
def _exit_codes() -> Iterator[None]:
    try:
        yield
    except (
        FileNotFoundError,
        NotADirectoryError,
        FormatError,
        GridError,
        LatticeError,
        ParameterError,
        EllOutOfRange,
    ) as exc:
        typer.echo(f"error: {exc}", err=True)
        raise typer.Exit(EXIT_USAGE) from exc
    except (VnumraError, np.linalg.LinAlgError) as exc:
        typer.echo(f"failed: {exc}", err=True)
        raise typer.Exit(EXIT_FAILURE) from exc


def _check_shape(config: RunConfig, mask: VectorMask) -> None:
    expected = (("N", config.n, mask.lattice.n), ("r", config.r, mask.lattice.r))

    for name, flag, actual in (*expected, ("M", config.m, mask.channels)):
        if flag is not None and flag != actual:
            raise typer.BadParameter(f"--{name} {flag} doesn't match the mask ({actual}).")


def _table(rows: list[tuple[str, str]]) -> str:
    return tabulate(rows, tablefmt="plain")


AbcdOption = Annotated[
    str | None,
    Option("--abcd", help="LCT parameters `A,B,C,D` with AD - BC = 1."),
]
ConfigOption = Annotated[Path | None, Option("--config", exists=True, dir_okay=False)]
GridOption = Annotated[str | None, Option("--grid", help="`start,step,count`.")]
MaskOption = Annotated[Path, Option("--mask")]
SystemOption = Annotated[Path, Option("--system", help="System cache directory.")]


@app.callback()
def main(verbose: Annotated[bool, Option("--verbose", "-v")] = False) -> None:
    """
    Linear canonical transform based vector-valued nonuniform multiresolution analysis.
    """

    if verbose:
        logging.basicConfig(level=logging.DEBUG)


@app.command("validate-mask")
def validate_mask(
    mask_path: MaskOption,
    grid: GridOption = None,
    tol: Annotated[float | None, Option("--tol")] = None,
    lower_bound: Annotated[float | None, Option("--lower-bound")] = None,
    k_max: Annotated[int | None, Option("--k-max")] = None,
    n: Annotated[int | None, Option("--N")] = None,
    r: Annotated[int | None, Option("--r")] = None,
    m: Annotated[int | None, Option("--M")] = None,
    output: Annotated[OutputFormat, Option("--format")] = OutputFormat.JSON,
    config: ConfigOption = None,
) -> None:
    """
    Certify a mask: time orthogonality, frequency identity and optionally a lower bound.
    """

    settings = RunConfig.resolve(
        config, grid=grid, tol=tol, lower_bound=lower_bound, k_max=k_max, n=n, r=r, m=m
    )

    with _exit_codes():
        mask = load_mask(mask_path)
        _check_shape(settings, mask)
        reports = [
            check_time_orthogonality(mask, tolerance=settings.tol),
            check_frequency_identity(
                mask,
                settings.omega_grid(mask.lattice.n),
                tolerance=settings.tol,
            ),
        ]

        if settings.lower_bound is not None:
            reports.append(
                check_lower_bound(mask, -0.25, 0.25, settings.k_max, settings.lower_bound)
            )

        passed = all(reports)
        reports.append(check_symmetry(mask))
        summary = ValidationSummary(
            passed=passed,
            reports=[ReportModel.from_report(report) for report in reports],
        )

    if output == OutputFormat.TABLE:
        typer.echo(
            tabulate(
                [
                    (report.condition, f"{report.residual:.3e}", report.passed)
                    for report in summary.reports
                ],
                headers=("condition", "residual", "passed"),
            )
        )
    else:
        typer.echo(summary.model_dump_json(indent=2))

    if not passed:
        raise typer.Exit(EXIT_FAILURE)


def _bank(mask: VectorMask, bank_path: Path | None, omega_grid: Grid) -> MaskBank:
    if bank_path is None:
        return complete_wavelet_masks(mask, omega_grid)

    return load_bank(bank_path)


def build_scaling(
    mask_path: MaskOption,
    out: Annotated[Path, Option("--out", help="System cache directory.")],
    bank_path: Annotated[Path | None, Option("--bank")] = None,
    abcd: AbcdOption = None,
    grid: GridOption = None,
    iterations: Annotated[int | None, Option("--iterations", min=1)] = None,
    depth: Annotated[int | None, Option("--depth", min=0)] = None,
    config: ConfigOption = None,
) -> None:
    """
    Build and cache a system: cascade, wavelet samples and Gram certification.
    """

    settings = RunConfig.resolve(
        config, abcd=abcd, grid=grid, iterations=iterations, depth=depth
    )

    with _exit_codes():
        mask = load_mask(mask_path)
        bank = _bank(mask, bank_path, settings.omega_grid(mask.lattice.n))
        system = build_system(settings.params, bank, settings.resolution())
        save_system(system, out)
        save_bank(bank, out / "bank.json")

    typer.echo(
        _table(
            [
                ("cache", str(out)),
                ("wavelets", str(len(bank.wavelets))),
                ("convergence", f"{system.phi.convergence_metric:.3e}"),
                ("refinement depth", str(system.depth)),
                ("refinement change", f"{system.refine_change:.3e}"),
                ("filter bank residual", f"{system.certification.residual:.3e}"),
                ("gram deviation", f"{system.gram_deviation:.3e}"),
            ]
        )
    )


app.command("build-scaling")(build_scaling)
app.command("build", hidden=True)(build_scaling)


@app.command("build-wavelets")
def build_wavelets(
    mask_path: MaskOption,
    out: Annotated[Path, Option("--out", help="Bank JSON file.")],
    grid: GridOption = None,
    config: ConfigOption = None,
) -> None:
    """
    Complete a scaling mask into a certified filter bank.
    """

    settings = RunConfig.resolve(config, grid=grid)

    with _exit_codes():
        mask = load_mask(mask_path)
        omega_grid = settings.omega_grid(mask.lattice.n)
        bank = complete_wavelet_masks(mask, omega_grid)
        report = check_filterbank(bank, omega_grid)
        save_bank(bank, out)

    typer.echo(_table([("wavelets", str(len(bank.wavelets))), _residual(report)]))


def _residual(report: CertificationReport) -> tuple[str, str]:
    return "filter bank residual", f"{report.residual:.3e}"


def _band(value: str) -> Literal["phi"] | int:
    if value == "phi":
        return "phi"

    if value.startswith("psi-") and value[4:].isdigit():
        return int(value[4:])

    raise EllOutOfRange(f"Unknown band `{value}`.")


@app.command("gram")
def gram(
    system_path: SystemOption,
    out: Annotated[Path, Option("--out")],
    band: Annotated[str, Option("--band", help="`phi` or `psi-<ell>`.")] = "phi",
    translates: Annotated[int, Option("--translates", min=1)] = 8,
    tol: Annotated[float, Option("--tol")] = 1e-3,
) -> None:
    """
    Write the Gram matrix of chirp-modulated translates as `row,col,re,im`.
    """

    with _exit_codes():
        system = load_system(system_path)
        points = system.lattice.enumerate(0, translates)[:translates]
        matrix = gram_matrix(system, points, _band(band))

    _write_matrix(matrix, out)
    deviation = float(np.linalg.norm(matrix - np.eye(matrix.shape[0])))
    typer.echo(_table([("gram deviation", f"{deviation:.3e}")]))

    if deviation > tol:
        raise typer.Exit(EXIT_FAILURE)


def _write_matrix(matrix: np.ndarray, path: Path) -> None:
    rows, cols = np.indices(matrix.shape)
    table = np.column_stack(
        [rows.ravel(), cols.ravel(), matrix.real.ravel(), matrix.imag.ravel()]
    )
    np.savetxt(path, table, fmt=("%d", "%d", "%.17g", "%.17g"), delimiter=",")


@app.command("transform")
def transform(
    system_path: SystemOption,
    signal_path: Annotated[Path, Option("--signal")],
    out: Annotated[Path, Option("--out", help="Pyramid JSON file.")],
    levels: Annotated[int | None, Option("--levels", min=1)] = None,
    config: ConfigOption = None,
) -> None:
    """
    Analyze a signal into a coefficient pyramid.
    """

    settings = RunConfig.resolve(config, levels=levels)

    with _exit_codes():
        system = load_system(system_path)
        signal = load_signal(signal_path)
        pyramid = analyze(system, signal, settings.levels)
        save_pyramid(pyramid, out)

    ratio = pyramid.norm() / max(signal.norm(), np.finfo(float).tiny)
    typer.echo(_table([("levels", str(pyramid.levels)), ("energy ratio", f"{ratio:.6f}")]))


@app.command("reconstruct")
def reconstruct(
    system_path: SystemOption,
    pyramid_path: Annotated[Path, Option("--pyramid")],
    out: Annotated[Path, Option("--out", help="Signal file (.csv or .vnmr).")],
    signal_path: Annotated[
        Path | None,
        Option("--signal", help="Original signal, to report the round-trip error."),
    ] = None,
) -> None:
    """
    Synthesize a signal from a coefficient pyramid.
    """

    with _exit_codes():
        system = load_system(system_path)
        signal = synthesize(system, load_pyramid(pyramid_path))
        original = None if signal_path is None else load_signal(signal_path)

        if original is not None and original.values.shape != signal.values.shape:
            raise ChannelMismatch(
                f"Signal has shape {original.values.shape}, the reconstruction "
                f"{signal.values.shape}."
            )

    if out.suffix == ".vnmr":
        write_vnmr(signal, out)
    else:
        write_signal_csv(signal, out)

    rows = [("samples", str(signal.grid.count))]

    if original is not None:
        error = np.linalg.norm(signal.values - original.values)
        relative = error / max(np.linalg.norm(original.values), np.finfo(float).tiny)
        rows.append(("relative error", f"{relative:.3e}"))

    typer.echo(_table(rows))


def _profiles(system: VnumraSystem, band: str) -> tuple[list[str], list[np.ndarray]]:
    cells = {"phi": system.phi_cells} | {
        f"psi-{ell}": samples for ell, samples in enumerate(system.psi_cells, start=1)
    }

    if band != "all" and band not in cells:
        raise EllOutOfRange(f"Unknown band `{band}`.")

    names = list(cells) if band == "all" else [band]
    grid = system.phi_cells.grid
    profiles = [grid.points + grid.step / 2]
    profiles.extend(np.linalg.norm(cells[name].values, axis=(1, 2)) for name in names)
    return ["t", *(f"abs_{name}" for name in names)], profiles


@app.command("plot-data")
def plot_data(
    system_path: SystemOption,
    out: Annotated[Path, Option("--out")],
    band: Annotated[str, Option("--band", help="`all`, `phi` or `psi-<ell>`.")] = "all",
) -> None:
    """
    Write `|Phi|` and `|Psi_ell|` cell profiles as CSV for external plotting.
    """

    with _exit_codes():
        system = load_system(system_path)
        header, columns = _profiles(system, band)

    np.savetxt(
        out,
        np.column_stack(columns),
        fmt="%.17g",
        delimiter=",",
        header=",".join(header),
        comments="",
    )
