from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:  # pragma: no cover
    from vnumra._core.masks import CertificationReport

__all__ = (
    "BadInterval",
    "BankSizeMismatch",
    "CascadeError",
    "CertificationFailed",
    "ChannelMismatch",
    "CompletionFailed",
    "DegenerateB",
    "DuplicatePoint",
    "EllOutOfRange",
    "EmptyGrid",
    "EvenR",
    "FormatError",
    "GridError",
    "IncompatiblePyramid",
    "LatticeError",
    "LatticeMismatch",
    "MaskError",
    "NonConverged",
    "NonPositiveN",
    "NotCoprime",
    "NotNormalized",
    "NotUnimodular",
    "ParameterError",
    "PipelineError",
    "ROutOfRange",
    "ShiftNotOnLattice",
    "SupportOverflow",
    "UnalignedGrid",
    "VnumraError",
)


class VnumraError(Exception): ...


"""
Parameters
"""


class ParameterError(ValueError, VnumraError): ...


class NotUnimodular(ParameterError):
    __slots__ = ("__determinant",)

    __determinant: float

    def __init__(self, determinant: float) -> None:
        super().__init__(f"AD - BC = {determinant!r}, expected 1.")
        self.__determinant = determinant

    @property
    def determinant(self) -> float:
        return self.__determinant


class DegenerateB(ParameterError): ...


"""
Lattice
"""


class LatticeError(ValueError, VnumraError): ...


class NonPositiveN(LatticeError): ...


class EvenR(LatticeError): ...


class ROutOfRange(LatticeError): ...


class NotCoprime(LatticeError): ...


class ShiftNotOnLattice(LatticeError): ...


class LatticeMismatch(LatticeError): ...


"""
Grids
"""


class GridError(ValueError, VnumraError): ...


class EmptyGrid(GridError): ...


class BadInterval(GridError): ...


class UnalignedGrid(GridError): ...


"""
Masks
"""


class MaskError(VnumraError): ...


class BankSizeMismatch(ValueError, MaskError): ...


class ChannelMismatch(ValueError, MaskError): ...


class DuplicatePoint(ValueError, MaskError): ...


class NotNormalized(ValueError, MaskError): ...


class EllOutOfRange(IndexError, MaskError): ...


class CompletionFailed(MaskError):
    __slots__ = ("__residual",)

    __residual: float

    def __init__(self, message: str, residual: float) -> None:
        super().__init__(message)
        self.__residual = residual

    @property
    def residual(self) -> float:
        return self.__residual


class CertificationFailed(VnumraError):
    __slots__ = ("__report",)

    __report: CertificationReport

    def __init__(self, report: CertificationReport) -> None:
        super().__init__(
            f"`{report.condition}` failed: residual {report.residual:.3e} "
            f"exceeds tolerance {report.tolerance:.3e}."
        )
        self.__report = report

    @property
    def report(self) -> CertificationReport:
        return self.__report


"""
Cascade
"""


class CascadeError(VnumraError): ...


class NonConverged(CascadeError):
    __slots__ = ("__metric",)

    __metric: float

    def __init__(self, metric: float, threshold: float) -> None:
        super().__init__(
            f"Cascade did not converge: last change {metric:.3e} > {threshold:.3e}."
        )
        self.__metric = metric

    @property
    def metric(self) -> float:
        return self.__metric


"""
Transform pipeline
"""


class PipelineError(VnumraError): ...


class SupportOverflow(PipelineError): ...


class IncompatiblePyramid(ValueError, PipelineError): ...


"""
Files
"""


class FormatError(ValueError, VnumraError): ...
