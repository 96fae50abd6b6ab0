import json
import re
from dataclasses import replace

import numpy as np
import pytest

from sumsquares.modules.design import build_design
from sumsquares.modules.formula import Term, parse_formula
from sumsquares.modules.load import Dataset
from sumsquares.modules.projector import Projector, projector_of
from sumsquares.modules.simulate import random_layout
from sumsquares.modules.sstypes import type3_components, type3_ss
from sumsquares.modules.twofactor import (
    LayoutError,
    TwoFactorLayout,
    a_contrasts,
    contrast_ss,
    equivalence_report,
    h_matrices,
    is_connected,
    mwsm_matrix,
    mwsm_projector,
    mwsm_ss,
    rmfm_projector,
    rmfm_ss,
)
from sumsquares.tests.conftest import random_dataset


@pytest.fixture
def fixture_layout(fixture_data):
    return TwoFactorLayout.from_dataset(fixture_data)


@pytest.fixture
def empty_layout(empty_cell_data):
    return TwoFactorLayout.from_dataset(empty_cell_data)


def _random_filled(seed):
    rng = np.random.default_rng(seed)
    a, b = (int(v) for v in rng.integers(2, 6, size=2))
    data = Dataset.from_frame(random_dataset(rng, a, b), "y", ["A", "B"])
    return rng, data, TwoFactorLayout.from_dataset(data)


def test_h_matrices_2x2():
    H = h_matrices(2, 2)
    expected = 0.25 * np.array(
        [[1, 1, -1, -1], [1, 1, -1, -1], [-1, -1, 1, 1], [-1, -1, 1, 1]]
    )
    assert np.allclose(H.H10, expected, atol=1e-15)
    assert np.trace(H.H10) == pytest.approx(1)
    assert np.allclose(H.H00 @ np.array([1.0, 2.0, 3.0, 4.0]), 2.5, atol=1e-15)


@pytest.mark.parametrize("a", range(2, 9))
@pytest.mark.parametrize("b", range(2, 9))
def test_h_matrix_algebra(a, b):
    H = h_matrices(a, b)
    mats = [H.H00, H.H10, H.H01, H.H11]
    assert np.abs(sum(mats) - np.eye(a * b)).max() <= 1e-12
    for i, M in enumerate(mats):
        assert np.abs(M - M.T).max() <= 1e-12
        assert np.abs(M @ M - M).max() <= 1e-12
        for N in mats[i + 1 :]:
            assert np.abs(M @ N).max() <= 1e-12
    assert np.trace(H.H10) == pytest.approx(a - 1)


def test_h10_row_pattern(rng):
    a, b = 3, 4
    eta = rng.standard_normal(a * b)
    grid = (h_matrices(a, b).H10 @ eta).reshape(a, b)
    row_means = eta.reshape(a, b).mean(axis=1)
    assert np.allclose(grid, (row_means - row_means.mean())[:, None], atol=1e-12)


@pytest.mark.parametrize("a,b", [(2, 2), (3, 2), (4, 5)])
def test_effect_spans(a, b):
    H = h_matrices(a, b)
    E00 = np.ones((a * b, 1))
    E10 = np.kron(np.eye(a), np.ones((b, 1)))
    E01 = np.kron(np.ones((a, 1)), np.eye(b))
    assert np.abs(projector_of(E00, E10).matrix - (H.H00 + H.H10)).max() <= 1e-10
    assert np.abs(projector_of(E00, E10, E01).matrix - (np.eye(a * b) - H.H11)).max() <= 1e-10


def test_h_matrices_too_few_levels():
    with pytest.raises(ValueError, match="at least 2 levels"):
        h_matrices(1, 3)


def test_layout(fixture_layout, fixture_data):
    assert fixture_layout.a == 2 and fixture_layout.b == 2
    assert np.array_equal(fixture_layout.counts, [[1, 2], [2, 1]])
    assert np.allclose(fixture_layout.cell_means, [2, 2, 5, 7])
    assert np.allclose(fixture_layout.u, [4, 12])
    assert np.allclose(fixture_layout.D_a, 1.5 * np.eye(2))
    ones = np.kron(np.eye(2), np.ones((2, 1)))
    assert np.allclose(ones.T @ fixture_layout.D_ab @ ones, fixture_layout.D_a)
    K = fixture_layout.K
    assert np.allclose(fixture_layout.D_ab @ K.T @ fixture_data.y, fixture_layout.cell_means)
    assert fixture_layout.all_filled
    assert not fixture_layout.balanced


def test_layout_needs_two_factors(fixture_data):
    with pytest.raises(LayoutError, match="exactly two factors, got 1"):
        TwoFactorLayout.from_dataset(fixture_data, ["A"])


def test_transpose(fixture_layout, empty_layout):
    flipped = fixture_layout.transpose()
    assert flipped.factor_names == ("B", "A")
    assert np.allclose(flipped.cell_means, [2, 5, 2, 7])
    assert np.allclose(flipped.u, [7, 9])
    assert np.array_equal(flipped.transpose().K, fixture_layout.K)

    flipped = empty_layout.transpose()
    assert np.array_equal(flipped.counts, empty_layout.counts.T)
    assert (flipped.a, flipped.b) == (2, 3)


def test_empty_cell_layout(empty_layout):
    means = empty_layout.cell_means
    assert np.isnan(means[5])
    assert np.allclose(means[:5], [3.9, 2.2, 5.9, 6.85, 5.65])
    assert empty_layout.D_ab[5, 5] == 0
    with pytest.raises(LayoutError, match="u undefined"):
        empty_layout.u
    with pytest.raises(LayoutError, match=re.escape("MWSM undefined: the layout has 1 empty cell(s)")):
        mwsm_ss(empty_layout.y, empty_layout)
    with pytest.raises(LayoutError, match="MWSM undefined"):
        mwsm_projector(empty_layout)
    with pytest.raises(LayoutError, match="Contrast SS undefined"):
        contrast_ss(empty_layout.y, empty_layout, a_contrasts(3, 2))


def test_rmfm(fixture_layout):
    H = h_matrices(2, 2)
    result = rmfm_ss(fixture_layout.y, fixture_layout, H.H10)
    assert result.ss == pytest.approx(64 / 3, rel=1e-10)
    assert result.df == 1
    assert result.term == Term(("A",))
    interaction = rmfm_ss(fixture_layout.y, fixture_layout, H.H11, term=Term(("A", "B")))
    assert interaction.df == 1


def test_rmfm_empty_cell(empty_layout, empty_cell_data, saturated):
    result = rmfm_ss(empty_layout.y, empty_layout, h_matrices(3, 2).H10)
    assert result.df == 1
    design = build_design(empty_cell_data, saturated)
    type3 = type3_ss(empty_cell_data.y, type3_components(design, "A"))
    assert type3.df == 2
    assert abs(type3.ss - result.ss) > 1e-6


def test_rmfm_rejects_non_projector(fixture_layout):
    with pytest.raises(ValueError, match="symmetric and idempotent"):
        rmfm_ss(fixture_layout.y, fixture_layout, 2 * np.eye(4))
    with pytest.raises(ValueError, match="must be 4 x 4"):
        rmfm_ss(fixture_layout.y, fixture_layout, np.eye(3))


def test_mwsm(fixture_layout):
    result = mwsm_ss(fixture_layout.y, fixture_layout)
    assert result.ss == pytest.approx(64 / 3, rel=1e-10)
    assert result.df == 1
    assert mwsm_ss(fixture_layout.y, fixture_layout.transpose()).ss == pytest.approx(4 / 3, rel=1e-10)


def test_mwsm_equal_rows(fixture_layout):
    y = fixture_layout.K @ np.array([1.0, 2.0, 1.0, 2.0])
    assert mwsm_ss(y, fixture_layout).ss <= 1e-20


def test_mwsm_projector(fixture_layout):
    P = mwsm_projector(fixture_layout)
    assert np.abs(P.matrix - mwsm_matrix(fixture_layout)).max() <= 1e-8
    assert P.distance(rmfm_projector(fixture_layout, h_matrices(2, 2).H10)) <= 1e-8
    assert P.quadratic_form(fixture_layout.y) == pytest.approx(64 / 3, rel=1e-10)


def test_mwsm_projector_balanced(balanced_data):
    layout = TwoFactorLayout.from_dataset(balanced_data)
    P = mwsm_projector(layout)
    assert np.trace(P.matrix) == pytest.approx(1)
    assert np.abs(P.matrix - layout.K @ h_matrices(2, 2).H10 @ layout.K.T).max() <= 1e-8


def test_mwsm_projector_balanced_replicated(rng):
    a, b, n = 3, 4, 3
    data = Dataset.from_frame(random_dataset(rng, a, b, counts=np.full((a, b), n)), "y", ["A", "B"])
    layout = TwoFactorLayout.from_dataset(data)
    textbook = layout.K @ h_matrices(a, b).H10 @ layout.K.T / n
    assert np.abs(mwsm_projector(layout).matrix - textbook).max() <= 1e-8


@pytest.mark.parametrize("kind", ["centered", "helmert", "sum"])
def test_contrast_ss(fixture_layout, kind):
    W = a_contrasts(2, 2, kind)
    result = contrast_ss(fixture_layout.y, fixture_layout, W)
    assert result.ss == pytest.approx(64 / 3, rel=1e-10)
    assert result.df == 1


@pytest.mark.parametrize("kind", ["centered", "helmert", "sum"])
def test_contrast_invariance(kind):
    rng, data, layout = _random_filled(7)
    W = a_contrasts(layout.a, layout.b, kind)
    reference = contrast_ss(data.y, layout, a_contrasts(layout.a, layout.b, "centered"))
    result = contrast_ss(data.y, layout, W)
    assert result.df == layout.a - 1
    assert result.ss == pytest.approx(reference.ss, rel=1e-10)


def test_contrast_ss_row_constant(fixture_layout):
    y = fixture_layout.K @ np.array([3.0, 1.0, 3.0, 1.0])
    assert contrast_ss(y, fixture_layout, a_contrasts(2, 2)).ss <= 1e-20


def test_a_contrasts(fixture_layout):
    assert a_contrasts(3, 2).shape == (6, 3)
    assert a_contrasts(3, 2, "helmert").shape == (6, 2)
    assert a_contrasts(4, 3, "sum").shape == (12, 3)
    assert np.allclose(a_contrasts(2, 3, "sum")[:, 0], [1, 1, 1, -1, -1, -1])
    with pytest.raises(ValueError, match="kind must be one of centered, helmert, sum"):
        a_contrasts(3, 2, "poly")
    with pytest.raises(ValueError, match="W must have 4 rows"):
        contrast_ss(fixture_layout.y, fixture_layout, np.ones((3, 1)))


def test_kronecker_identities():
    for seed in range(10):
        rng, data, layout = _random_filled(seed)
        a, b = layout.a, layout.b
        S_a = h_matrices(a, b).S_a
        ones = np.ones((b, 1))
        assert np.abs(np.kron(np.eye(a), ones) @ S_a - np.kron(S_a, ones)).max() <= 1e-12
        left = np.kron(S_a, ones).T @ layout.D_ab @ np.kron(S_a, ones)
        assert np.abs(left - S_a @ layout.D_a @ S_a).max() <= 1e-12


@pytest.mark.parametrize("seed", range(100))
def test_rmfm_projector_equals_weighted_projector(seed):
    rng, data, layout = _random_filled(seed)
    P_A = rmfm_projector(layout, h_matrices(layout.a, layout.b).H10)
    assert P_A.distance(mwsm_projector(layout)) <= 1e-8


@pytest.mark.parametrize("seed", range(50))
def test_three_way_equivalence(seed):
    rng, data, layout = _random_filled(seed)
    design = build_design(data, parse_formula("y ~ A*B"))
    for current, term in [(layout, "A"), (layout.transpose(), "B")]:
        H10 = h_matrices(current.a, current.b).H10
        values = [
            type3_ss(data.y, type3_components(design, term)).ss,
            rmfm_ss(data.y, current, H10).ss,
            mwsm_ss(data.y, current).ss,
            contrast_ss(data.y, current, a_contrasts(current.a, current.b)).ss,
        ]
        assert (max(values) - min(values)) / max(values) <= 1e-8


@pytest.mark.parametrize("seed", range(100))
def test_ncp_characterization(seed):
    rng, data, layout = _random_filled(seed)
    a, b = layout.a, layout.b
    design = build_design(data, parse_formula("y ~ A*B"))
    comp = type3_components(design, "A")
    H10 = h_matrices(a, b).H10
    null_eta = (np.eye(a * b) - H10) @ rng.standard_normal(a * b)
    delta = Projector(comp.Q3)(layout.K @ null_eta)
    assert np.linalg.norm(delta) <= 1e-10 * np.linalg.norm(null_eta)

    gap = rng.standard_normal(a)
    gap = (gap - gap.mean()) * (0.5 + rng.random()) / (gap.max() - gap.min())
    alternative = null_eta + np.kron(gap, np.ones(b))
    marginal = alternative.reshape(a, b).mean(axis=1)
    assert marginal.max() - marginal.min() >= 0.5 - 1e-12
    assert np.linalg.norm(Projector(comp.Q3)(layout.K @ alternative)) > 1e-3


def test_report_fixture(fixture_data):
    report = equivalence_report(fixture_data)
    assert report.passed
    assert report.all_filled
    assert report.max_discrepancy <= 1e-8
    a_effect, b_effect = report.comparisons
    for name in ["Type III", "RMFM", "MWSM", "Contrast", "Type II"]:
        result = dict(a_effect.variants())[name]
        assert result.ss == pytest.approx(64 / 3, rel=1e-10)
        assert result.df == 1
    assert a_effect.type1 is None
    assert b_effect.mwsm.ss == pytest.approx(4 / 3, rel=1e-10)
    assert a_effect.null_ncp <= 1e-10
    text = report.render_text()
    assert text.startswith("Two-factor layout: A (2 levels) x B (2 levels), 6 observations, 0 empty cell(s)\n")
    assert "  MWSM      ss=21.3333333333  df=1\n" in text
    assert text.endswith("Verdict: PASS (tolerance 1e-08)\n")
    document = report.to_dict()
    assert json.loads(json.dumps(document)) == document
    assert document["factor_comparisons"][0]["ss"]["RMFM"] == {"ss": 21.3333333333, "df": 1}
    assert document["factor_comparisons"][0]["ss"]["Type I"] is None


def test_report_balanced(balanced_data):
    report = equivalence_report(balanced_data)
    assert report.passed
    a_effect, b_effect = report.comparisons
    assert a_effect.type1.ss == pytest.approx(4, rel=1e-10)
    assert b_effect.type1.ss == pytest.approx(b_effect.type3.ss, rel=1e-10)


def test_report_empty_cell(empty_cell_data):
    report = equivalence_report(empty_cell_data)
    assert report.passed
    assert report.n_empty == 1
    a_effect, b_effect = report.comparisons
    assert a_effect.mwsm is None and a_effect.contrast is None
    assert a_effect.type3.df == 2
    assert a_effect.rmfm.df == 1
    assert b_effect.type3.df == 1
    assert b_effect.rmfm.df == 0
    text = report.render_text()
    assert "  MWSM undefined (1 empty cell(s))\n" in text
    assert "  Type III df 2, RMFM df 1, SS difference " in text


def test_report_failure(fixture_data):
    report = equivalence_report(fixture_data)
    a_effect, b_effect = report.comparisons
    broken = replace(report, comparisons=(replace(a_effect, discrepancy=0.5), b_effect))
    assert not broken.passed
    assert broken.failures() == ["A: SS variants differ by 0.5 (tolerance 1e-08)"]
    text = broken.render_text()
    assert text.endswith("Verdict: FAIL\n  A: SS variants differ by 0.5 (tolerance 1e-08)\n")
    assert broken.to_dict()["passed"] is False


@pytest.fixture
def one_empty_report():
    data = random_layout(np.random.default_rng(4), a_range=(3, 3), b_range=(3, 3), n_empty=1)
    report = equivalence_report(data)
    assert report.passed
    return report


def test_report_failure_rmfm_df(one_empty_report):
    a_effect, b_effect = one_empty_report.comparisons
    assert (a_effect.type3.df, a_effect.rmfm.df) == (2, 1)
    rmfm = replace(a_effect.rmfm, df=2, ss=a_effect.type3.ss)
    broken = replace(one_empty_report, comparisons=(replace(a_effect, rmfm=rmfm), b_effect))
    assert not broken.passed
    assert broken.failures() == ["A: expected RMFM df 1 with one empty cell, got 2"]


def test_report_failure_type3_df(one_empty_report):
    a_effect, b_effect = one_empty_report.comparisons
    broken_effect = replace(
        a_effect, type3=replace(a_effect.type3, df=1), type2=replace(a_effect.type2, df=1)
    )
    broken = replace(one_empty_report, comparisons=(broken_effect, b_effect))
    assert not broken.passed
    assert broken.failures() == ["A: expected Type III df 2 in a connected layout, got 1"]


@pytest.mark.parametrize(
    "counts,expected",
    [
        ([[1, 2], [3, 4]], True),
        ([[1, 2], [0, 4]], True),
        ([[1, 0], [0, 4]], False),
        ([[1, 1, 0], [1, 0, 0], [0, 0, 2]], False),
        ([[1, 1, 0], [0, 1, 0], [0, 1, 2]], True),
    ],
)
def test_is_connected(counts, expected):
    assert is_connected(np.array(counts)) is expected


@pytest.mark.parametrize("seed", range(100))
def test_single_empty_cell_df(seed):
    rng = np.random.default_rng(seed)
    data = random_layout(rng, a_range=(3, 5), b_range=(3, 5), n_empty=1)
    report = equivalence_report(data)
    a_effect = report.comparisons[0]
    a = a_effect.levels
    assert a_effect.type3.df == a - 1
    assert a_effect.rmfm.df == a - 2
    assert report.passed


def test_single_empty_cell_ss_differ():
    differ = 0
    for seed in range(100):
        data = random_layout(np.random.default_rng(seed), a_range=(3, 5), b_range=(3, 5), n_empty=1)
        a_effect = equivalence_report(data).comparisons[0]
        if abs(a_effect.type3.ss - a_effect.rmfm.ss) > 1e-6 * max(a_effect.type3.ss, 1e-12):
            differ += 1
    assert differ >= 95
