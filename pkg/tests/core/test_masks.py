import math
from fractions import Fraction

import numpy as np
import pytest
from numpy.testing import assert_allclose

from vnumra import (
    Condition,
    Grid,
    Lattice,
    MaskBank,
    MaskRole,
    VectorMask,
    check_filterbank,
    check_frequency_identity,
    check_lower_bound,
    check_symmetry,
    check_time_orthogonality,
    eval_symbol,
    split_symbol,
)
from vnumra.exceptions import (
    BadInterval,
    BankSizeMismatch,
    ChannelMismatch,
    DuplicatePoint,
    LatticeMismatch,
    MaskError,
    NotNormalized,
    ShiftNotOnLattice,
)
from vnumra.testing import (
    box_bank,
    box_mask,
    daubechies_bank,
    daubechies_mask,
    doubled_haar_mask,
    duplicated_haar_bank,
    haar_bank,
    haar_mask,
    identity_mask,
    mixed_daubechies_bank,
    mixed_daubechies_mask,
    notched_mask,
    perturbed_haar_mask,
    zero_mask,
)


def period_grid(mask: VectorMask, count: int = 256) -> Grid:
    return Grid.from_bounds(0.0, float(mask.lattice.n), count)


def corpus() -> list[VectorMask]:
    return [
        haar_mask(),
        haar_mask(2),
        haar_mask(3),
        box_mask(),
        *box_bank().wavelets,
        haar_bank().wavelets[0],
        daubechies_mask(),
        daubechies_mask(2),
        mixed_daubechies_mask(),
        daubechies_bank().wavelets[0],
        mixed_daubechies_bank().wavelets[0],
        identity_mask(),
        notched_mask(),
        zero_mask(),
        zero_mask(Lattice(2, 1)),
        doubled_haar_mask(),
        perturbed_haar_mask(1e-2),
    ]


class TestVectorMask:
    def test_vector_mask_with_unsorted_points_store_ascending(self):
        mask = VectorMask.from_mapping(
            Lattice(2, 1),
            {4: [[0.5]], 0: [[0.5]], Fraction(9, 2): [[0.5]], Fraction(1, 2): [[0.5]]},
        )
        assert [point.value for point in mask.points] == [0, Fraction(1, 2), 4, Fraction(9, 2)]
        assert mask.coefficient(4)[0, 0] == 0.5
        assert mask.coefficient(2)[0, 0] == 0

    def test_vector_mask_with_unnormalized_scaling_raise_not_normalized(self):
        with pytest.raises(NotNormalized):
            VectorMask.from_mapping(Lattice.classical(), {0: [[1.0]]})

    def test_vector_mask_with_rectangular_matrix_raise_channel_mismatch(self):
        with pytest.raises(ChannelMismatch):
            VectorMask.from_mapping(
                Lattice.classical(),
                {0: np.ones((1, 2))},
                role=MaskRole.WAVELET,
            )

    def test_vector_mask_with_repeated_point_raise_duplicate_point(self):
        lattice = Lattice.classical()
        points = (lattice.locate(0), lattice.locate(1), lattice.locate(0))

        with pytest.raises(DuplicatePoint) as info:
            VectorMask(lattice, points, np.ones((3, 1, 1)), MaskRole.WAVELET)

        assert isinstance(info.value, MaskError)

    def test_vector_mask_with_foreign_point_raise_shift_not_on_lattice(self):
        with pytest.raises(ShiftNotOnLattice):
            VectorMask.from_mapping(Lattice.classical(), {Fraction(1, 2): [[1.0]]})

    def test_mask_bank_with_mixed_channels_raise_channel_mismatch(self):
        with pytest.raises(ChannelMismatch):
            MaskBank(haar_mask(), (haar_bank(2).wavelets[0],))

    def test_mask_bank_with_mixed_lattices_raise_lattice_mismatch(self):
        with pytest.raises(LatticeMismatch):
            MaskBank(haar_mask(), (box_bank().wavelets[0],))


class TestSymbol:
    def test_eval_symbol_with_haar_return_known_values(self):
        mask = haar_mask()
        assert eval_symbol(mask, 0.0)[0, 0] == pytest.approx(1.0)
        assert abs(eval_symbol(mask, 0.5)[0, 0]) < 1e-15

    def test_eval_symbol_with_empty_mask_return_zeros(self):
        symbols = eval_symbol(zero_mask(channels=2), np.linspace(-1, 1, 7))
        assert symbols.shape == (7, 2, 2)
        assert not symbols.any()

    def test_eval_symbol_with_shift_by_n_return_same_value(self):
        mask = box_mask()
        omega = np.random.default_rng(3).uniform(-5.0, 5.0, 64)
        assert_allclose(
            eval_symbol(mask, omega + mask.lattice.n),
            eval_symbol(mask, omega),
            atol=1e-12,
        )

    def test_eval_symbol_with_box_mask_return_closed_form(self):
        omega = np.linspace(-2.0, 2.0, 41)
        expected = (1 + np.exp(-1j * np.pi * omega)) * (1 + np.exp(-8j * np.pi * omega)) / 4
        assert_allclose(eval_symbol(box_mask(), omega)[:, 0, 0], expected, atol=1e-14)

    def test_split_symbol_with_haar_return_coset_halves(self):
        first, second = split_symbol(haar_mask(), 0.0)
        assert first[0, 0] == pytest.approx(0.5)
        assert second[0, 0] == pytest.approx(0.5)

    @pytest.mark.parametrize("mask", [box_mask(), haar_mask(2), notched_mask()])
    def test_split_symbol_with_any_mask_recombine(self, mask):
        omega = np.linspace(-3.0, 3.0, 97)
        first, second = split_symbol(mask, omega)
        phase = np.exp(-2j * np.pi * float(mask.lattice.offset) * omega)
        recombined = first + phase[:, np.newaxis, np.newaxis] * second
        assert_allclose(recombined, eval_symbol(mask, omega), rtol=0, atol=1e-14)


class TestTimeOrthogonality:
    def test_check_time_orthogonality_with_haar_pass(self):
        report = check_time_orthogonality(haar_mask())
        assert report.passed
        assert report.condition == Condition.TIME_ORTHOGONALITY
        assert report.residual < 1e-12

    def test_check_time_orthogonality_with_zero_mask_return_unit_residual(self):
        report = check_time_orthogonality(zero_mask(), [(0, 0)])
        assert not report
        assert report.residual == pytest.approx(1.0)

    def test_check_time_orthogonality_with_doubled_haar_return_residual_three(self):
        report = check_time_orthogonality(doubled_haar_mask(), [(0, 0)])
        assert report.residual == pytest.approx(3.0)

    def test_check_time_orthogonality_with_box_mask_and_shifts_pass(self):
        lattice = Lattice(2, 1)
        pairs = [(a, b) for a in lattice.enumerate(-1, 1) for b in lattice.enumerate(-1, 1)]
        assert check_time_orthogonality(box_mask(), pairs).residual < 1e-12

    def test_check_time_orthogonality_with_foreign_pair_raise_shift_not_on_lattice(self):
        with pytest.raises(ShiftNotOnLattice):
            check_time_orthogonality(haar_mask(), [(Fraction(1, 3), 0)])


class TestFrequencyIdentity:
    def test_check_frequency_identity_with_haar_pass(self):
        report = check_frequency_identity(haar_mask(), period_grid(haar_mask()))
        assert report.passed
        assert report.residual < 1e-12

    def test_check_frequency_identity_with_zero_mask_return_unit_residual(self):
        mask = zero_mask()
        report = check_frequency_identity(mask, period_grid(mask))
        assert report.residual == pytest.approx(1.0)

    def test_conditions_with_corpus_agree(self):
        for mask in corpus():
            time = check_time_orthogonality(mask)
            frequency = check_frequency_identity(mask, period_grid(mask))
            assert time.passed == frequency.passed

            for report in (time, frequency):
                if report.passed:
                    assert report.residual < 1e-10
                else:
                    assert report.residual > 1e-3


class TestFilterBank:
    @pytest.mark.parametrize(
        "bank",
        [
            haar_bank(),
            haar_bank(2),
            haar_bank(3),
            box_bank(),
            daubechies_bank(),
            daubechies_bank(2),
            mixed_daubechies_bank(),
        ],
    )
    def test_check_filterbank_with_reference_bank_pass(self, bank):
        report = check_filterbank(bank, period_grid(bank.scaling, 1024))
        assert report.condition == Condition.FILTER_BANK
        assert report.residual < 1e-10

    def test_check_filterbank_with_duplicated_filter_fail(self):
        bank = duplicated_haar_bank()
        report = check_filterbank(bank, period_grid(bank.scaling, 1024))
        assert not report
        assert report.residual >= 0.5

    def test_check_filterbank_with_zero_padding_fail(self):
        lattice = Lattice(2, 1)
        bank = MaskBank(box_mask(), (zero_mask(lattice),) * 3)
        assert not check_filterbank(bank, period_grid(bank.scaling))

    def test_check_filterbank_with_missing_wavelets_raise_bank_size_mismatch(self):
        with pytest.raises(BankSizeMismatch):
            check_filterbank(MaskBank(box_mask(), ()), period_grid(box_mask()))


class TestLowerBound:
    def test_check_lower_bound_with_haar_pass(self):
        report = check_lower_bound(haar_mask(), -0.25, 0.25, 12, 0.5)
        assert report.passed
        assert report.condition == Condition.LOWER_BOUND

    def test_check_lower_bound_with_symbol_zero_fail(self):
        report = check_lower_bound(notched_mask(), -0.25, 0.25, 12, 0.5, samples=1001)
        assert not report
        assert report.residual == pytest.approx(0.5, abs=1e-9)

    def test_check_lower_bound_with_zero_mask_return_c(self):
        report = check_lower_bound(zero_mask(), -0.25, 0.25, 3, 0.25)
        assert report.residual == pytest.approx(0.25)

    def test_check_lower_bound_with_identity_mask_pass_below_constant(self):
        assert check_lower_bound(identity_mask(), -0.25, 0.25, 4, 0.7)
        assert not check_lower_bound(identity_mask(), -0.25, 0.25, 4, 0.75)

    def test_check_lower_bound_with_one_sided_interval_raise_bad_interval(self):
        with pytest.raises(BadInterval):
            check_lower_bound(haar_mask(), 0.0, 0.25, 4, 0.5)


class TestSymmetry:
    def test_check_symmetry_with_diagonal_blocks_return_zero(self):
        assert check_symmetry(haar_mask(3)).residual == 0

    def test_check_symmetry_with_skew_block_report_distance(self):
        skew = np.array([[0.0, 1.0], [0.0, 0.0]]) / math.sqrt(2)
        mask = VectorMask.from_mapping(Lattice.classical(), {0: skew}, role=MaskRole.WAVELET)
        assert check_symmetry(mask).residual == pytest.approx(1.0)

    def test_check_symmetry_with_rotated_diagonal_blocks_return_zero(self):
        assert check_symmetry(mixed_daubechies_mask()).residual < 1e-12
