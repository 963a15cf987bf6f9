import json

import numpy as np
import pytest

from weightscape import (ForecastPanel, Multipliers, PanelError, WeightSolution,
                         WeightSpace, contains, validate_panel)
from weightscape.io import solution_from_json, solution_to_json


def test_well_formed_panel_passes():
    panel = ForecastPanel(y=[1.0, 2.0, 3.0], F=[[1.0, 0.5], [2.0, 1.0], [3.0, 1.5]])
    assert validate_panel(panel) is panel


def test_row_count_mismatch_rejected():
    panel = ForecastPanel(y=[1.0, 2.0, 3.0], F=np.ones((4, 2)))
    with pytest.raises(PanelError, match="3 .* 4 rows"):
        validate_panel(panel)


def test_nan_entry_rejected():
    F = np.ones((3, 2))
    F[1, 1] = np.nan
    with pytest.raises(PanelError, match="non-finite"):
        validate_panel(ForecastPanel(y=[1.0, 2.0, 3.0], F=F))


def test_too_few_observations_rejected():
    with pytest.raises(PanelError, match="at least 2"):
        validate_panel(ForecastPanel(y=[1.0], F=[[1.0]]))


def test_loo_shape_checked():
    panel = ForecastPanel(y=[1.0, 2.0], F=np.ones((2, 2)), loo=np.ones((2, 3)))
    with pytest.raises(PanelError, match="loo shape"):
        validate_panel(panel)


def test_q_range_checked():
    with pytest.raises(PanelError, match="q entries"):
        validate_panel(ForecastPanel(y=[1.0, 2.0], F=np.ones((2, 1)), q=[5.0]))


def test_panel_arrays_immutable():
    panel = ForecastPanel(y=[1.0, 2.0], F=np.ones((2, 1)))
    with pytest.raises(ValueError):
        panel.F[0, 0] = 9.0


def test_feasibility_respects_set_inclusion(rng):
    # every w feasible for D is feasible for B and C; B, C, E all sit in A
    for _ in range(200):
        S = rng.integers(1, 6)
        w = rng.dirichlet(np.ones(S))
        assert contains(w, WeightSpace.D)
        assert contains(w, WeightSpace.B)
        assert contains(w, WeightSpace.C)
        assert contains(w, WeightSpace.A)
        v = rng.standard_normal(S)
        if np.linalg.norm(v) > 0:
            u = v / np.linalg.norm(v)
            assert contains(u, WeightSpace.E)
            assert contains(u, WeightSpace.A)


def test_feasibility_rejects_outside_points():
    assert not contains([0.5, 0.6], WeightSpace.B)
    assert not contains([-0.1, 1.1], WeightSpace.C)
    assert not contains([0.5, 0.6], WeightSpace.D)
    assert not contains([1.0, 1.0], WeightSpace.E)


def test_solution_json_round_trip():
    sol = WeightSolution(
        w=np.array([0.123456789012345678, -1.5e-13, 0.9999999999999]),
        space=WeightSpace.D,
        method={"kind": "regression"},
        intercept=0.25,
        multipliers=Multipliers(rho0=1.0 / 3.0, box=(0.0, 2.0 / 7.0, 0.0)),
        active_set=(1,),
        converged=True,
        unique_certified=True,
    )
    back = solution_from_json(solution_to_json(sol))
    np.testing.assert_allclose(back.w, sol.w, rtol=1e-15, atol=0.0)
    assert back.intercept == sol.intercept
    assert back.multipliers.rho0 == sol.multipliers.rho0
    assert back.multipliers.box == sol.multipliers.box
    assert back.active_set == sol.active_set
    assert back.space == sol.space
    assert back.method == sol.method
    assert back.converged == sol.converged
    assert back.unique_certified == sol.unique_certified


def test_json_envelope_fields():
    sol = WeightSolution(w=[0.5, 0.5], space=WeightSpace.B,
                         method={"kind": "regression"})
    payload = json.loads(solution_to_json(sol))
    for key in ("weights", "intercept", "multipliers", "active_set", "space",
                "method", "converged"):
        assert key in payload
