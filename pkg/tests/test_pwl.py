import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from h2sched.fleet import ElectrolyzerParams
from h2sched.pwl import PwlToleranceError, build_surfaces, default_grid, interpolate, main_diagonal

UNIT = ElectrolyzerParams()
IG = np.array([0.0, 1.0, 2.5, 4.0])
TG = np.array([0.0, 2.0, 3.0])


def test_union_jack_diagonals_touch_an_even_corner():
    for a in range(6):
        for b in range(6):
            corners = [(a, b), (a + 1, b + 1)] if main_diagonal(a, b) else [(a + 1, b), (a, b + 1)]
            assert any(i % 2 == 0 and j % 2 == 0 for i, j in corners)


def test_interpolant_is_exact_on_nodes():
    vals = np.random.default_rng(1).normal(size=(4, 3))
    ii, tt = np.meshgrid(IG, TG, indexing="ij")
    assert np.allclose(interpolate(IG, TG, vals, ii.ravel(), tt.ravel()), vals.ravel(), atol=1e-12)


@given(st.floats(0.0, 4.0), st.floats(0.0, 3.0))
def test_affine_functions_are_reproduced(i, t):
    ii, tt = np.meshgrid(IG, TG, indexing="ij")
    vals = 2.0 - 0.5 * ii + 3.0 * tt
    assert interpolate(IG, TG, vals, i, t)[0] == pytest.approx(2.0 - 0.5 * i + 3.0 * t, abs=1e-9)


@given(st.floats(0.0, 4.0), st.floats(0.0, 3.0))
def test_interpolant_stays_within_node_range(i, t):
    vals = np.arange(12.0).reshape(4, 3) ** 1.5
    y = interpolate(IG, TG, vals, i, t)[0]
    assert vals.min() - 1e-9 <= y <= vals.max() + 1e-9


def test_default_grid_spans_the_operating_box():
    i_grid, t_grid = default_grid(UNIT, 7, 5)
    s = UNIT.stack
    assert i_grid[0] == s.i_min and i_grid[-1] == s.i_max
    assert t_grid[0] == s.t_min and t_grid[-1] == s.t_max
    assert np.all(np.diff(t_grid) > 0)
    # denser at the cold end
    assert np.diff(t_grid)[0] < np.diff(t_grid)[-1]


def test_errors_shrink_with_more_breakpoints():
    coarse = build_surfaces(UNIT, (7, 5), None).relative_errors()
    fine = build_surfaces(UNIT, (9, 9), None).relative_errors()
    for name in ("p_stack", "q", "h2"):
        assert fine[name] < coarse[name]
    assert coarse["q"] < 0.01
    assert fine["q"] < 0.005


def test_tables_match_closed_forms_on_nodes():
    surf = build_surfaces(UNIT, (7, 5), None)
    from h2sched import elz_phys as ep
    ii, tt = np.meshgrid(surf.i_grid, surf.t_grid, indexing="ij")
    assert np.allclose(surf.values["p_stack"], ep.stack_power(UNIT.stack, ii, tt), rtol=1e-12)


def test_tolerance_breach_names_the_cell():
    with pytest.raises(PwlToleranceError) as exc:
        build_surfaces(UNIT, (3, 3), 1e-6)
    assert "refine around" in str(exc.value)
    assert exc.value.err > exc.value.tol
    # non-strict mode only reports
    surf = build_surfaces(UNIT, (3, 3), 1e-6, strict=False)
    assert surf.errors["q"] > 0


def test_grid_needs_three_points():
    with pytest.raises(ValueError):
        build_surfaces(UNIT, (2, 5))
