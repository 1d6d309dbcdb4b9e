import math

import numpy as np
import pytest

from strata_lab import (
    AtomSet,
    Box,
    RandomStream,
    TooLarge,
    build_standard_form,
    cell_index,
    cell_measure,
    cell_table,
    component_entropy,
    dyadic_density_estimate,
    info_dimension,
    log_sum_inequality_gap,
    quantized_entropy,
    renyi_defect,
)
from strata_lab.dyadic import (
    aggregate_to_parent,
    defect_term_sequence,
    export_cell_table_csv,
    plugin_entropy_se,
)

from conftest import LN2, LN_SQRT2, SEED


class TestCellIndex:
    def test_floor_arithmetic(self):
        assert cell_index([0.3, 0.7], 1).index == (0, 1)

    def test_half_open_corner(self):
        # a point on a cell's lower-left corner belongs to that cell
        assert cell_index([0.5, 0.25], 2).index == (2, 1)

    def test_level_zero_integer_parts(self):
        assert cell_index([2.3, -0.7], 0).index == (2, -1)


class TestCellMeasure:
    def test_diagonal_sqrt2_over_mesh(self, diag_segment):
        # H^1(C ∩ E) = sqrt(2)/n for the unit-square diagonal at mesh side 1/2
        cell = cell_index([0.1, 0.1], 1)
        assert cell_measure(diag_segment, cell) == pytest.approx(
            math.sqrt(2.0) / 2.0, rel=1e-12
        )

    def test_atom_counting(self):
        comp = AtomSet(points=[[0.25, 0.75]], pmf=[1.0])
        assert cell_measure(comp, cell_index([0.25, 0.75], 3)) == 1.0
        assert cell_measure(comp, cell_index([0.9, 0.9], 3)) == 0.0

    def test_box_quarter(self):
        box = Box(lo=[0.0, 0.0], hi=[1.0, 1.0])
        assert cell_measure(box, cell_index([0.7, 0.2], 1)) == pytest.approx(0.25, rel=1e-12)


class TestCellTable:
    def test_m3_level2(self, m3):
        table = cell_table(m3, 2).as_dict()
        quarter_diag = math.sqrt(2.0) / 4.0
        assert table[(1, 3)] == (pytest.approx(0.5, rel=1e-12), 1.0)
        for j in range(4):
            p, mu = table[(j, j)]
            assert p == pytest.approx(0.125, rel=1e-12)
            assert mu == pytest.approx(quarter_diag, rel=1e-12)
        assert len(table) == 5

    def test_single_atom(self):
        m = build_standard_form([(1.0, AtomSet(points=[[0.3, 0.4]], pmf=[1.0]))])
        t = cell_table(m, 5)
        assert len(t) == 1 and t.probs[0] == 1.0

    def test_uniform_interval(self, unit_interval):
        t = cell_table(unit_interval, 4)
        assert len(t) == 16
        assert np.allclose(t.probs, 1 / 16)

    @pytest.mark.parametrize("level", range(0, 9))
    def test_row_sums(self, level, m1, m3, atoms3, offgrid_measure, unit_square):
        for m in (m1, m3, atoms3, offgrid_measure, unit_square):
            assert abs(cell_table(m, level).probs.sum() - 1.0) <= 1e-12

    @pytest.mark.parametrize("level", range(0, 8))
    def test_refinement_is_exact(self, level, m1, m3, atoms3, offgrid_measure, unit_square):
        # martingale property: children sum to their parent, entry by entry
        for m in (m1, m3, atoms3, offgrid_measure, unit_square):
            parent = cell_table(m, level).as_dict()
            child_agg = aggregate_to_parent(cell_table(m, level + 1))
            assert set(parent) == set(child_agg)
            for key, (p, mu) in parent.items():
                pc, muc = child_agg[key]
                assert abs(p - pc) <= 1e-12
                assert abs(mu - muc) <= 1e-12

    def test_too_large_guard(self):
        m = build_standard_form([(1.0, Box(lo=[0.0, 0.0], hi=[1.0, 1.0]))])
        with pytest.raises(TooLarge):
            cell_table(m, 13)  # 2^26 cells

    def test_csv_export(self, m3, tmp_path):
        path = tmp_path / "cells.csv"
        export_cell_table_csv(cell_table(m3, 2), path)
        lines = path.read_text().splitlines()
        assert lines[0] == "level,index_0,index_1,p,mu_cell,component_id"
        assert len(lines) == 6  # atom cell + 4 diagonal cells


class TestQuantizedEntropy:
    @pytest.mark.parametrize("level", [1, 3, 6])
    def test_uniform_interval_is_l_ln2(self, level, unit_interval):
        assert quantized_entropy(unit_interval, level) == pytest.approx(
            level * LN2, rel=1e-12
        )

    @pytest.mark.parametrize("level", [1, 4, 8])
    def test_diagonal_is_l_ln2(self, level, diag_measure):
        # 2^l diagonal cells of equal mass 2^-l
        assert quantized_entropy(diag_measure, level) == pytest.approx(
            level * LN2, rel=1e-12
        )

    def test_m3_level2(self, m3):
        assert quantized_entropy(m3, 2) == pytest.approx(2 * LN2, rel=1e-12)

    def test_plugin_converges_to_exact(self, m3):
        exact = quantized_entropy(m3, 5)
        est = quantized_entropy(
            m3, 5, mode="plug-in", samples=10**5, stream=RandomStream(SEED), miller_madow=True
        )
        assert abs(est - exact) <= 3 * plugin_entropy_se(m3, 5, 10**5)

    def test_plugin_needs_enough_samples(self, m3):
        with pytest.raises(ValueError):
            quantized_entropy(m3, 3, mode="plug-in", samples=10, stream=RandomStream(0))


class TestInfoDimension:
    def test_unit_square_slope_two(self, unit_square):
        slope, _, r2 = info_dimension(unit_square, range(1, 9))
        assert abs(slope - 2.0) <= 1e-9
        assert r2 == pytest.approx(1.0, abs=1e-12)

    def test_single_atom_slope_zero(self):
        m = build_standard_form([(1.0, AtomSet(points=[[0.3, 0.4]], pmf=[1.0]))])
        slope, _, r2 = info_dimension(m, range(1, 6))
        assert slope == 0.0 and r2 == 1.0

    def test_m3_slope_is_mean_dimension(self, m3):
        # dim_I = sum q_i m_i = 1/2 for M3
        slope, _, r2 = info_dimension(m3, range(3, 11))
        assert abs(slope - 0.5) <= 0.05
        assert r2 > 0.999

    def test_needs_three_levels(self, m3):
        with pytest.raises(ValueError):
            info_dimension(m3, [3, 4])


class TestRenyiDefect:
    @pytest.mark.parametrize("level", range(0, 11))
    def test_diagonal_constant_ln_sqrt2(self, level, diag_measure):
        # l ln 2 + ln(sqrt2 * 2^-l) telescopes to ln sqrt2 at every level
        assert abs(renyi_defect(diag_measure, level) - LN_SQRT2) <= 1e-9

    @pytest.mark.parametrize("level", [0, 2, 5])
    def test_unit_square_zero(self, level, unit_square):
        assert abs(renyi_defect(unit_square, level)) <= 1e-9

    @pytest.mark.parametrize("level", [0, 3])
    def test_single_atom_zero(self, level):
        m = build_standard_form([(1.0, AtomSet(points=[[0.3, 0.4]], pmf=[1.0]))])
        assert renyi_defect(m, level) == pytest.approx(0.0, abs=1e-12)

    def test_offgrid_segment_monotone_convergence(self, offgrid_measure, offgrid_segment):
        h = component_entropy(offgrid_segment)
        gaps = [abs(renyi_defect(offgrid_measure, l) - h) for l in range(2, 11)]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))

    def test_defect_term_sequence_diagonal(self, diag_measure):
        # mu(C∩E) = sqrt(2) 2^-l so K = sqrt(2) exactly at every level
        for val in defect_term_sequence(diag_measure, [1, 3, 6]):
            assert val == pytest.approx(LN_SQRT2, rel=1e-9)


class TestDensityEstimate:
    def test_m1_interior_cell(self, m1):
        # cell [0.25, 0.3125) avoids the atom: rho(C)/mu(C) = (1/2 h)/h
        assert dyadic_density_estimate(m1, [0.3], 4) == pytest.approx(0.5, rel=1e-12)

    def test_m1_cell_containing_atom(self, m1):
        # (1/2 + 1/4) / (1 + 1/2) = 0.5
        assert dyadic_density_estimate(m1, [0.5], 1) == pytest.approx(0.5, rel=1e-12)

    def test_outside_support(self, m1):
        assert dyadic_density_estimate(m1, [5.0], 3) == 0.0

    def test_converges_to_density(self, m3):
        # martingale limit: at a diagonal point the estimate approaches q f = 1/2 / sqrt2 * ...
        target = 0.5 / math.sqrt(2.0)
        vals = [dyadic_density_estimate(m3, [0.3, 0.3], l) for l in (4, 8, 12)]
        errs = [abs(v - target) for v in vals]
        assert errs[-1] <= 1e-3
        assert errs[-1] <= errs[0]


class TestLogSumInequality:
    def test_random_vectors(self):
        rng = RandomStream(13).generator()
        for _ in range(10**4):
            k = int(rng.integers(2, 6))
            a = rng.random(k) * rng.integers(1, 10)
            b = rng.random(k) * rng.integers(1, 10)
            assert log_sum_inequality_gap(a, b) >= -1e-12

    def test_equality_when_proportional(self):
        assert log_sum_inequality_gap([1.0, 2.0], [2.0, 4.0]) == pytest.approx(0.0, abs=1e-12)

    def test_zero_b_with_positive_a(self):
        assert log_sum_inequality_gap([1.0, 1.0], [1.0, 0.0]) == math.inf
