"""
Reference masks and banks with known properties.
"""

import cmath
import math
from fractions import Fraction

import numpy as np

from vnumra import Lattice, LctParams, MaskBank, MaskRole, VectorMask

__all__ = (
    "box_bank",
    "box_mask",
    "daubechies_bank",
    "daubechies_mask",
    "doubled_haar_mask",
    "duplicated_haar_bank",
    "haar_bank",
    "haar_mask",
    "identity_mask",
    "mixed_daubechies_bank",
    "mixed_daubechies_mask",
    "non_fourier_params",
    "notched_mask",
    "perturbed_haar_mask",
    "zero_mask",
)

_HALF_SQRT = 1 / math.sqrt(2)

_HADAMARD = np.array(
    [
        [1, 1, 1, 1],
        [1, 1, -1, -1],
        [1, -1, 1, -1],
        [1, -1, -1, 1],
    ],
    dtype=np.float64,
)
_BOX_SUPPORT = (Fraction(0), Fraction(1, 2), Fraction(4), Fraction(9, 2))

_SQRT3 = math.sqrt(3)
_DAUBECHIES = np.array([1 + _SQRT3, 3 + _SQRT3, 3 - _SQRT3, 1 - _SQRT3]) / (4 * math.sqrt(2))
_ROTATION = np.array([[3.0, -4.0], [4.0, 3.0]]) / 5


def non_fourier_params() -> LctParams:
    return LctParams(1.0, 1.0, 0.0, 1.0)


def _haar_like(
    first: complex,
    second: complex,
    channels: int,
    role: MaskRole,
) -> VectorMask:
    identity = np.eye(channels)
    return VectorMask.from_mapping(
        Lattice.classical(),
        {0: first * identity, 1: second * identity},
        role=role,
    )


def haar_mask(channels: int = 1) -> VectorMask:
    """
    `G_0 = G_1 = I / sqrt(2)` on the integers; one Haar system per channel.
    """

    return _haar_like(_HALF_SQRT, _HALF_SQRT, channels, MaskRole.SCALING)


def haar_bank(channels: int = 1) -> MaskBank:
    wavelet = _haar_like(_HALF_SQRT, -_HALF_SQRT, channels, MaskRole.WAVELET)
    return MaskBank(haar_mask(channels), (wavelet,))


def duplicated_haar_bank() -> MaskBank:
    return MaskBank(haar_mask(), (haar_mask().with_role(MaskRole.WAVELET),))


def doubled_haar_mask() -> VectorMask:
    return haar_mask().with_role(MaskRole.WAVELET).scaled(2)


def perturbed_haar_mask(epsilon: float) -> VectorMask:
    return _haar_like(
        _HALF_SQRT * (1 + epsilon),
        _HALF_SQRT,
        1,
        MaskRole.WAVELET,
    )


def notched_mask() -> VectorMask:
    """
    Symbol vanishing at `omega = 1/16`.
    """

    return _haar_like(
        _HALF_SQRT,
        -_HALF_SQRT * cmath.exp(2j * math.pi / 16),
        1,
        MaskRole.WAVELET,
    )


def identity_mask(channels: int = 1) -> VectorMask:
    return VectorMask.from_mapping(
        Lattice.classical(),
        {0: np.eye(channels)},
        role=MaskRole.WAVELET,
    )


def zero_mask(lattice: Lattice | None = None, channels: int = 1) -> VectorMask:
    return VectorMask.zero(lattice or Lattice.classical(), channels)


def _box(row: np.ndarray, role: MaskRole) -> VectorMask:
    coefficients = {lam: [[value / 2]] for lam, value in zip(_BOX_SUPPORT, row)}
    return VectorMask.from_mapping(Lattice(2, 1), coefficients, role=role)


def box_mask() -> VectorMask:
    """
    Nonuniform box system for `N = 2, r = 1`: the scaling function is the indicator of
    `[0, 1/2) U [1, 3/2)`.
    """

    return _box(_HADAMARD[0], MaskRole.SCALING)


def box_bank() -> MaskBank:
    wavelets = tuple(_box(row, MaskRole.WAVELET) for row in _HADAMARD[1:])
    return MaskBank(box_mask(), wavelets)


def _daubechies_wavelet(filter_: np.ndarray) -> np.ndarray:
    return np.array([(-1) ** k * filter_[3 - k] for k in range(4)])


def _on_integers(
    matrices: np.ndarray,
    role: MaskRole,
) -> VectorMask:
    return VectorMask.from_mapping(
        Lattice.classical(),
        dict(enumerate(matrices)),
        role=role,
    )


def daubechies_mask(channels: int = 1) -> VectorMask:
    """
    Four-tap Daubechies filter on `0, 1, 2, 3`, one copy per channel.
    """

    identity = np.eye(channels)
    return _on_integers(_DAUBECHIES[:, None, None] * identity, MaskRole.SCALING)


def daubechies_bank(channels: int = 1) -> MaskBank:
    identity = np.eye(channels)
    wavelet = _daubechies_wavelet(_DAUBECHIES)[:, None, None] * identity
    return MaskBank(daubechies_mask(channels), (_on_integers(wavelet, MaskRole.WAVELET),))


def _mixed(first: np.ndarray, second: np.ndarray, role: MaskRole) -> VectorMask:
    blocks = np.zeros((4, 2, 2))
    blocks[:, 0, 0] = first
    blocks[:, 1, 1] = second
    return _on_integers(_ROTATION @ blocks @ _ROTATION.T, role)


def mixed_daubechies_mask() -> VectorMask:
    """
    Two channels with full coefficient matrices: the Daubechies filter and its reversal,
    mixed by a fixed rotation.
    """

    return _mixed(_DAUBECHIES, _DAUBECHIES[::-1], MaskRole.SCALING)


def mixed_daubechies_bank() -> MaskBank:
    wavelet = _mixed(
        _daubechies_wavelet(_DAUBECHIES),
        _daubechies_wavelet(_DAUBECHIES[::-1]),
        MaskRole.WAVELET,
    )
    return MaskBank(mixed_daubechies_mask(), (wavelet,))
