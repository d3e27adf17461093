import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from efcr import SweepSpec, find_fopt_numeric, power_ratio_at_fopt, reference_scenario, spread_report, sweep
from efcr.errors import ValidationError
from efcr.model import energy_derivatives
from efcr.sensitivity import axis_values, find_crossing, with_param

from .oracles import power_by_hand


def test_axis_inclusive():
    np.testing.assert_allclose(axis_values((0.5, 4.5, 0.5)), np.arange(1, 10) * 0.5)
    assert list(axis_values((0.1, 0.1, 0.05))) == [0.1]
    with pytest.raises(ValidationError):
        axis_values((1.0, 0.5, 0.1))


def test_with_param_revalidates(ref):
    assert with_param(ref, "xi", 0.155).cpu.xi == 0.155
    assert with_param(ref, "m2", 0.9).vmap.m2 == 0.9
    with pytest.raises(ValidationError):
        with_param(ref, "p_back", -1.0)
    with pytest.raises(ValidationError):
        with_param(ref, "nope", 1.0)


def test_spec_validation():
    with pytest.raises(ValidationError):
        SweepSpec("bogus", (0, 1, 0.1))
    with pytest.raises(ValidationError):
        SweepSpec("xi", (0, 1, 0.1), "xi", (0, 1, 0.1))
    with pytest.raises(ValidationError):
        SweepSpec("xi", (0, 1, 0.1), "gamma", None)


def test_single_point_sweep_matches_solve(ref):
    grid = sweep(ref, SweepSpec("p_back", (0.5, 0.5, 0.1)))
    res = find_fopt_numeric(ref, clamp=False)
    assert grid.shape == (1, 1)
    assert grid.f_opt[0, 0] == res.f_opt
    assert grid.status[0, 0] is res.status


def test_grid_matches_row_sweeps(ref):
    grid = sweep(ref, SweepSpec("p_back", (0.5, 2.0, 0.5), "xi", (0.155, 0.181, 0.013)))
    for j, xi in enumerate(grid.axis2):
        row = sweep(with_param(ref, "xi", xi), SweepSpec("p_back", (0.5, 2.0, 0.5)))
        np.testing.assert_array_equal(grid.f_opt[:, j], row.f_opt[:, 0])


def test_rows_long_format(ref):
    grid = sweep(ref, SweepSpec("p_back", (0.5, 1.0, 0.5), "xi", (0.155, 0.181, 0.026)))
    rows = list(grid.rows())
    assert len(rows) == 4
    assert rows[1][:2] == (0.5, 0.181)
    assert rows[0][3] == "unclamped"


def test_ratio_column_uses_cpu_power(ref):
    grid = sweep(ref, SweepSpec("p_back", (1.0, 1.0, 1.0)))
    f = grid.f_opt[0, 0]
    assert grid.ratio[0, 0] == pytest.approx(power_by_hand(0.181, 3.137, 0.330, 0.808, f) / 1.0, rel=1e-12)


def test_constant_grid_has_zero_spread(ref):
    # cc_b only scales the objective, so the optimum does not move
    grid = sweep(ref, SweepSpec("p_back", (0.5, 1.5, 0.5), "cc_b", (1.0, 3.0, 1.0)))
    rep = spread_report(grid, "cc_b")
    np.testing.assert_allclose(rep.spreads, 0.0, atol=1e-6)


def test_spread_over_fk_near_100mhz():
    base = reference_scenario(f_k=0.0, p_back=0.5)
    grid = sweep(base, SweepSpec("p_back", (0.5, 4.5, 0.5), "f_k", (0.0, 0.13, 0.13)))
    rep = spread_report(grid, "f_k")
    assert rep.mean_spread == pytest.approx(0.100, abs=0.050)
    assert np.all(rep.spreads > 0)


def test_gaps_recorded_not_raised(ref):
    # f_k at or above f_max breaks the scenario invariant
    grid = sweep(ref, SweepSpec("f_k", (1.2, 2.0, 0.4)))
    assert not grid.gaps[0, 0]
    assert grid.gaps[1:, 0].all()
    assert [r[3] for r in grid.rows()][1:] == ["gap", "gap"]
    with pytest.raises(ValidationError):
        spread_report(sweep(ref, SweepSpec("f_k", (1.6, 2.0, 0.4), "xi", (0.1, 0.2, 0.1))), "xi")


def test_interior_points_are_stationary(ref):
    grid = sweep(ref, SweepSpec("p_back", (0.25, 2.5, 0.25)))
    for v, f in zip(grid.axis, grid.f_opt[:, 0]):
        d1 = energy_derivatives(with_param(ref, "p_back", v), f)[0]
        assert abs(d1) < 1e-6


def test_clamped_sweep_statuses(ref):
    grid = sweep(ref, SweepSpec("p_back", (0.001, 4.001, 2.0), clamp=True))
    assert [r[3] for r in grid.rows()] == ["at_lower_bound", "interior", "at_upper_bound"]


def test_ratio_near_one_at_fmax_crossing(ref):
    p = find_crossing(ref, "p_back", 1.6, 0.5, 5.0)
    curve = power_ratio_at_fopt(ref, [p])
    assert curve.f_opt[0] == pytest.approx(1.6, abs=1e-6)
    assert 0.5 <= curve.ratio[0] <= 2.0


def test_optimum_collapses_without_background(ref):
    curve = power_ratio_at_fopt(ref, [0.0, 1e-3])
    assert np.all(curve.f_opt < 0.2)
    assert curve.ratio[0] == np.inf


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(1, 600), min_size=2, max_size=6, unique=True))
def test_ratio_decreases_and_fopt_increases_with_background(centiwatts):
    base = reference_scenario(f_k=0.0, p_back=0.5)
    curve = power_ratio_at_fopt(base, [c / 100 for c in sorted(centiwatts)])
    assert np.all(np.diff(curve.f_opt) > 0)
    assert np.all(np.diff(curve.ratio) < 0)


def test_crossing_needs_bracket(ref):
    with pytest.raises(ValidationError):
        find_crossing(ref, "p_back", 1.6, 0.5, 1.0)
